//! Structural assembly of `Cong(P)`.
//!
//! A congruence `σ` splits as `(σ↾_T, σ ∩ κ)`; the second coordinate splits
//! again as `(θ ∩ λ, θ ∩ ρ)`, and those are described by P- and C-systems.
//! Enumeration runs the other way: chain element × λ-part × ρ-part, filtered
//! by rank and fused by relational composition.

use std::collections::HashMap;
use std::fmt::Write as _;

use log::info;
use serde::Serialize;
use serde_json::{json, Value};

use crate::congruence::{EquivalenceRelation, UnionFind};
use crate::error::{Error, Result};
use crate::lattice::FiniteLattice;
use crate::malcev::{lift_sharp, malcev_chain, rank_of_theta, MalcevChain};
use crate::systems::{CSystem, PSystem, Systems};
use crate::variant::VariantContext;

/// `α ∘ β` for equivalences whose composition is again an equivalence.
///
/// The composition lies between `α ∪ β` and `α ∨ β`, so it is transitive
/// exactly when it has as many pairs as the join; only then is it returned.
pub fn compose_equivalences(alpha: &EquivalenceRelation, beta: &EquivalenceRelation) -> Result<EquivalenceRelation> {
    if alpha.len() != beta.len() {
        return Err(Error::UniverseMismatch(alpha.len(), beta.len()));
    }
    let m = alpha.len();
    let mut beta_size = vec![0usize; beta.num_blocks()];
    for x in 0..m {
        beta_size[beta.block_of(x)] += 1;
    }
    // per α-block: the β-blocks it meets
    let mut reach: Vec<Vec<usize>> = vec![Vec::new(); alpha.num_blocks()];
    let mut alpha_size = vec![0usize; alpha.num_blocks()];
    for x in 0..m {
        let a = alpha.block_of(x);
        alpha_size[a] += 1;
        let b = beta.block_of(x);
        if !reach[a].contains(&b) {
            reach[a].push(b);
        }
    }
    let composed: usize = reach
        .iter()
        .zip(&alpha_size)
        .map(|(bs, &na)| na * bs.iter().map(|&b| beta_size[b]).sum::<usize>())
        .sum();
    let joined = alpha.join(beta)?;
    if composed != joined.pair_count() {
        return Err(Error::NotEquivalence);
    }
    Ok(joined)
}

/// `(ξ, θ) = (σ↾_T, σ ∩ κ)`, with `ξ` located in the chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub xi_index: usize,
    pub xi: EquivalenceRelation,
    pub theta: EquivalenceRelation,
}

/// The unique `(N, Ψ₁, Ψ₂)` with `σ = R_N^P ∘ λ(Ψ₁) ∘ ρ(Ψ₂)`.
#[derive(Clone, Debug)]
pub struct CongDecomposition {
    /// Rank of the group holding `N`.
    pub q: usize,
    pub n_name: String,
    /// Index of `R_N^T` in the chain.
    pub chain_index: usize,
    pub psystem: PSystem,
    pub csystem: CSystem,
}

/// One vertex of the structural lattice.
#[derive(Clone, Debug, Serialize)]
pub struct LatticeNode {
    #[serde(skip)]
    pub sigma: EquivalenceRelation,
    /// Chain index of `ξ`.
    pub xi: usize,
    /// Index of `θ ∩ λ` among the P-systems and of `θ ∩ ρ` among the C-systems.
    pub lambda_part: usize,
    pub rho_part: usize,
    pub theta_rank: usize,
    pub size: usize,
}

/// `Cong(P)` as a union of layers `Λ_ξ`, one per chain element.
#[derive(Clone, Debug)]
pub struct LayeredLattice {
    pub nodes: Vec<LatticeNode>,
    pub lattice: FiniteLattice,
    /// Node indices of each layer, by chain index.
    pub layers: Vec<Vec<usize>>,
    pub chain: MalcevChain,
    /// Distinguished nodes: `κ`, `λ`, `ρ` and the `κ_q`.
    pub marks: HashMap<usize, String>,
}

/// A consecutive-layer pair `(ξ₁, θ) < (ξ₂, θ)` that is not a cover.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CoverViolation {
    pub lower: usize,
    pub upper: usize,
}

impl LayeredLattice {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn congruences(&self) -> impl Iterator<Item = &EquivalenceRelation> {
        self.nodes.iter().map(|n| &n.sigma)
    }

    /// Checks that each `(ξ₂, θ)` covers `(ξ₁, θ)` for consecutive `ξ₁ < ξ₂`.
    pub fn layer_cover_violations(&self) -> Vec<CoverViolation> {
        let mut at: HashMap<(usize, usize, usize), usize> = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            at.insert((n.xi, n.lambda_part, n.rho_part), i);
        }
        let mut out = Vec::new();
        for pair in self.layers.windows(2) {
            for &upper in &pair[1] {
                let n = &self.nodes[upper];
                let lower = at[&(n.xi - 1, n.lambda_part, n.rho_part)];
                if !self.lattice.covers(lower).contains(&upper) {
                    out.push(CoverViolation { lower, upper });
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let entry = &self.chain.entries[n.xi];
                json!({
                    "id": i,
                    "xi": n.xi,
                    "q": entry.q,
                    "N_name": entry.n_name,
                    "xi_rank": entry.rank,
                    "theta_rank": n.theta_rank,
                    "lambda_part": n.lambda_part,
                    "rho_part": n.rho_part,
                    "size": n.size,
                    "mark": self.marks.get(&i),
                })
            })
            .collect();
        let edges: Vec<[usize; 2]> = self.lattice.hasse_edges().into_iter().map(|(i, j)| [i, j]).collect();
        json!({
            "count": self.len(),
            "height": self.lattice.height().0,
            "nodes": nodes,
            "edges": edges,
            "layers": self.layers,
        })
    }

    /// Hasse diagram with one cluster per layer.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph \"{name}\" {{\n  rankdir=BT;\n  node [shape=point, width=0.08];\n");
        for (k, layer) in self.layers.iter().enumerate() {
            let entry = &self.chain.entries[k];
            let label = match entry.q {
                Some(q) => format!("{} q={q}", entry.n_name),
                None => "nabla".to_string(),
            };
            let _ = writeln!(
                out,
                "  subgraph cluster_{k} {{\n    label=\"{label}\";\n    color=gray;"
            );
            for &i in layer {
                match self.marks.get(&i) {
                    Some(mark) => {
                        let color = match mark.as_str() {
                            "kappa" => "red",
                            "lambda" => "green",
                            "rho" => "orange",
                            _ => "blue",
                        };
                        let _ = writeln!(
                            out,
                            "    n{i} [shape=circle, width=0.15, style=filled, fillcolor={color}, xlabel=\"{mark}\"];"
                        );
                    }
                    None => {
                        let _ = writeln!(out, "    n{i};");
                    }
                }
            }
            out.push_str("  }\n");
        }
        for (i, j) in self.lattice.hasse_edges() {
            let _ = writeln!(out, "  n{i} -> n{j} [arrowhead=none];");
        }
        out.push_str("}\n");
        out
    }
}

/// Structural machinery for one context.
pub struct Synthesizer<'a> {
    pub ctx: &'a VariantContext,
    pub chain: MalcevChain,
    /// `ξ^♯` per chain entry.
    lifts: Vec<EquivalenceRelation>,
    pub systems: Systems,
}

/// Interval and lattice sizes computed from system ranks.
#[derive(Clone, Debug, Serialize)]
pub struct StructuralCount {
    pub lambda_interval: usize,
    pub rho_interval: usize,
    pub kappa_interval: usize,
    pub chain: usize,
    /// `|Λ_ξ|` per chain element.
    pub layers: Vec<usize>,
    pub total: usize,
}

/// The interval `[Δ, κ]` as pairs of systems.
#[derive(Clone, Debug)]
pub struct KappaInterval {
    pub psystems: Vec<PSystem>,
    pub csystems: Vec<CSystem>,
    /// `λ(Ψ₁)` per P-system and `ρ(Ψ₂)` per C-system.
    pub lambda_parts: Vec<EquivalenceRelation>,
    pub rho_parts: Vec<EquivalenceRelation>,
}

impl KappaInterval {
    pub fn len(&self) -> usize {
        self.lambda_parts.len() * self.rho_parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<'a> Synthesizer<'a> {
    pub fn new(ctx: &'a VariantContext) -> Result<Self> {
        let chain = malcev_chain(&ctx.t, &ctx.t_greens)?;
        let lifts = chain
            .congruences()
            .map(|xi| lift_sharp(ctx, &chain, xi))
            .collect::<Result<Vec<_>>>()?;
        let systems = Systems::new(ctx)?;
        Ok(Synthesizer {
            ctx,
            chain,
            lifts,
            systems,
        })
    }

    pub fn lift(&self, chain_index: usize) -> &EquivalenceRelation {
        &self.lifts[chain_index]
    }

    pub fn split(&self, sigma: &EquivalenceRelation) -> Result<Split> {
        if sigma.len() != self.ctx.p.len() {
            return Err(Error::UniverseMismatch(sigma.len(), self.ctx.p.len()));
        }
        let xi = sigma.restrict(self.ctx.t_in_p());
        let xi_index = self
            .chain
            .position(&xi)
            .ok_or_else(|| Error::Invalid("restriction to T is not a congruence".into()))?;
        let theta = sigma.meet(&self.ctx.kappa)?;
        Ok(Split { xi_index, xi, theta })
    }

    /// `ξ^♯ ∘ θ`, refused when `rank(ξ) > rank(θ)`.
    pub fn fuse(&self, xi: &EquivalenceRelation, theta: &EquivalenceRelation) -> Result<EquivalenceRelation> {
        let k = self
            .chain
            .position(xi)
            .ok_or_else(|| Error::Invalid("not a congruence of T".into()))?;
        self.fuse_indexed(k, theta)
    }

    fn fuse_indexed(&self, k: usize, theta: &EquivalenceRelation) -> Result<EquivalenceRelation> {
        if !theta.refines(&self.ctx.kappa) {
            return Err(Error::Invalid("θ is not contained in κ".into()));
        }
        let xi_rank = self.chain.entries[k].rank;
        let theta_rank = rank_of_theta(self.ctx, theta);
        if xi_rank > theta_rank {
            return Err(Error::RankViolation {
                xi: xi_rank,
                theta: theta_rank,
            });
        }
        compose_equivalences(&self.lifts[k], theta)
    }

    pub fn kappa_split(&self, theta: &EquivalenceRelation) -> Result<(EquivalenceRelation, EquivalenceRelation)> {
        if !theta.refines(&self.ctx.kappa) {
            return Err(Error::Invalid("θ is not contained in κ".into()));
        }
        Ok((theta.meet(&self.ctx.lambda)?, theta.meet(&self.ctx.rho)?))
    }

    pub fn kappa_fuse(
        &self,
        lambda_part: &EquivalenceRelation,
        rho_part: &EquivalenceRelation,
    ) -> Result<EquivalenceRelation> {
        if !lambda_part.refines(&self.ctx.lambda) || !rho_part.refines(&self.ctx.rho) {
            return Err(Error::Invalid("parts are not contained in λ and ρ".into()));
        }
        compose_equivalences(lambda_part, rho_part)
    }

    pub fn kappa_interval(&self, cap: usize) -> Result<KappaInterval> {
        let psystems = self.systems.enumerate_psystems(cap)?;
        let csystems = self.systems.enumerate_csystems(cap)?;
        self.assemble_interval(psystems, csystems)
    }

    fn assemble_interval(&self, psystems: Vec<PSystem>, csystems: Vec<CSystem>) -> Result<KappaInterval> {
        let lambda_parts = psystems
            .iter()
            .map(|s| self.systems.assemble_lambda(self.ctx, s))
            .collect::<Result<Vec<_>>>()?;
        let rho_parts = csystems
            .iter()
            .map(|s| self.systems.assemble_rho(self.ctx, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(KappaInterval {
            psystems,
            csystems,
            lambda_parts,
            rho_parts,
        })
    }

    /// Layer sizes `|Λ_ξ|` from the system ranks alone: `θ` has rank at least
    /// `q` exactly when both of its parts do.
    fn layer_sizes(&self, psystems: &[PSystem], csystems: &[CSystem]) -> Vec<usize> {
        self.chain
            .entries
            .iter()
            .map(|e| {
                let l = psystems.iter().filter(|s| s.rank >= e.rank).count();
                let r = csystems.iter().filter(|s| s.rank >= e.rank).count();
                l * r
            })
            .collect()
    }

    /// Sizes of `Cong(P)` and its pieces, without assembling any congruence.
    pub fn count_structurally(&self, cap_systems: usize) -> Result<StructuralCount> {
        let psystems = self.systems.enumerate_psystems(cap_systems)?;
        let csystems = self.systems.enumerate_csystems(cap_systems)?;
        let layers = self.layer_sizes(&psystems, &csystems);
        Ok(StructuralCount {
            lambda_interval: psystems.len(),
            rho_interval: csystems.len(),
            kappa_interval: psystems.len() * csystems.len(),
            chain: self.chain.len(),
            total: layers.iter().sum(),
            layers,
        })
    }

    /// All of `Cong(P)`, assembled from the chain and the two system families.
    ///
    /// `cap_systems` bounds each system enumeration; `cap_nodes` bounds the
    /// size of the resulting lattice and is checked before assembly.
    pub fn enumerate_structurally(&self, cap_systems: usize, cap_nodes: usize) -> Result<LayeredLattice> {
        let psystems = self.systems.enumerate_psystems(cap_systems)?;
        let csystems = self.systems.enumerate_csystems(cap_systems)?;
        let total: usize = self.layer_sizes(&psystems, &csystems).iter().sum();
        if total > cap_nodes {
            return Err(Error::CapExceeded {
                what: "structural lattice",
                size: total,
                cap: cap_nodes,
            });
        }
        let interval = self.assemble_interval(psystems, csystems)?;
        info!(
            "[Δ,λ] has {} elements, [Δ,ρ] has {}, chain has {}",
            interval.lambda_parts.len(),
            interval.rho_parts.len(),
            self.chain.len()
        );
        let mut thetas = Vec::with_capacity(interval.len());
        for (i, l) in interval.lambda_parts.iter().enumerate() {
            for (j, r) in interval.rho_parts.iter().enumerate() {
                let theta = compose_equivalences(l, r)?;
                // rank(θ) is the lesser of the part ranks
                let rank = interval.psystems[i].rank.min(interval.csystems[j].rank);
                debug_assert_eq!(rank, rank_of_theta(self.ctx, &theta));
                thetas.push((i, j, rank, theta));
            }
        }
        let mut nodes = Vec::with_capacity(total);
        for (k, entry) in self.chain.entries.iter().enumerate() {
            for (i, j, rank, theta) in &thetas {
                if entry.rank > *rank {
                    continue;
                }
                let sigma = compose_equivalences(&self.lifts[k], theta)?;
                nodes.push(LatticeNode {
                    size: sigma.pair_count(),
                    sigma,
                    xi: k,
                    lambda_part: *i,
                    rho_part: *j,
                    theta_rank: *rank,
                });
            }
        }
        info!("structural enumeration produced {} congruences", nodes.len());
        nodes.sort_by(|a, b| (a.size, &a.sigma).cmp(&(b.size, &b.sigma)));
        let lattice = FiniteLattice::from_congruences(nodes.iter().map(|n| n.sigma.clone()).collect());
        if lattice.len() != nodes.len() {
            return Err(Error::Invalid("structural enumeration produced duplicates".into()));
        }
        let mut layers = vec![Vec::new(); self.chain.len()];
        for (i, n) in nodes.iter().enumerate() {
            layers[n.xi].push(i);
        }
        let mut marks = HashMap::new();
        let find = |rel: &EquivalenceRelation| nodes.iter().position(|n| &n.sigma == rel);
        for q in 0..self.ctx.rank() {
            if let Some(i) = find(&crate::malcev::kappa_q(self.ctx, q)) {
                marks.insert(i, format!("kappa_{q}"));
            }
        }
        for (name, rel) in [
            ("lambda", &self.ctx.lambda),
            ("rho", &self.ctx.rho),
            ("kappa", &self.ctx.kappa),
        ] {
            if let Some(i) = find(rel) {
                marks.insert(i, name.to_string());
            }
        }
        Ok(LayeredLattice {
            nodes,
            lattice,
            layers,
            chain: self.chain.clone(),
            marks,
        })
    }

    /// The unique decomposition of a non-universal congruence.
    pub fn classify(&self, sigma: &EquivalenceRelation) -> Result<CongDecomposition> {
        if sigma.is_full() && self.ctx.p.len() > 1 {
            return Err(Error::Universal);
        }
        let split = self.split(sigma)?;
        let entry = &self.chain.entries[split.xi_index];
        let q = entry.q.ok_or(Error::Universal)?;
        let (lambda_part, rho_part) = self.kappa_split(&split.theta)?;
        let psystem = self.systems.psi_extract_lambda(self.ctx, &lambda_part)?;
        let csystem = self.systems.psi_extract_rho(self.ctx, &rho_part)?;
        debug_assert!(psystem.rank + 1 >= q && csystem.rank + 1 >= q);
        Ok(CongDecomposition {
            q,
            n_name: entry.n_name.clone(),
            chain_index: split.xi_index,
            psystem,
            csystem,
        })
    }

    /// `R_N^P ∘ λ(Ψ₁) ∘ ρ(Ψ₂)`.
    pub fn synthesize(&self, d: &CongDecomposition) -> Result<EquivalenceRelation> {
        let lambda_part = self.systems.assemble_lambda(self.ctx, &d.psystem)?;
        let rho_part = self.systems.assemble_rho(self.ctx, &d.csystem)?;
        let theta = compose_equivalences(&lambda_part, &rho_part)?;
        self.fuse_indexed(d.chain_index, &theta)
    }

    pub fn decomposition_json(&self, d: &CongDecomposition) -> Value {
        json!({
            "q": d.q,
            "N": d.n_name,
            "psystem": self.systems.to_json(&d.psystem),
            "csystem": self.systems.to_json(&d.csystem),
        })
    }
}

/// `Eq(P)` for `r = 1`, where every equivalence is a congruence.
pub fn all_equivalences(ctx: &VariantContext, cap: usize) -> Result<Vec<EquivalenceRelation>> {
    let m = ctx.p.len();
    let count = crate::lattice::bell(m);
    if count > cap.into() {
        return Err(Error::CapExceeded {
            what: "Eq(P)",
            size: usize::try_from(count).unwrap_or(usize::MAX),
            cap,
        });
    }
    Ok(EquivalenceRelation::all(m))
}

/// `α ∨ β` by union-find, independent of [`compose_equivalences`].
pub fn join_by_union_find(alpha: &EquivalenceRelation, beta: &EquivalenceRelation) -> EquivalenceRelation {
    let mut uf = UnionFind::from_equivalence(alpha);
    for (x, y) in beta.nontrivial_pairs() {
        uf.union(x, y);
    }
    uf.into_equivalence()
}
