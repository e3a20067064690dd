//! Finite semigroups of transformations given by an explicit element list and a
//! fully materialized multiplication table, with Green's structure and egg-box
//! rendering.

use std::collections::HashMap;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;

use crate::congruence::EquivalenceRelation;
use crate::error::{Error, Result};
use crate::transform::Transformation;

/// Which product the multiplication table encodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operation {
    /// `fg`
    Plain,
    /// `f ⋆ g = fag`
    Sandwich(Transformation),
}

impl Operation {
    pub fn apply(&self, f: &Transformation, g: &Transformation) -> Transformation {
        match self {
            Operation::Plain => f.then(g),
            Operation::Sandwich(a) => f.then(a).then(g),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FiniteSemigroup {
    elements: Vec<Transformation>,
    index: HashMap<Transformation, u32>,
    table: Vec<u32>,
    op: Operation,
}

impl FiniteSemigroup {
    /// Tabulates `op` on `elements`; fails if some product is not listed.
    pub fn build(elements: Vec<Transformation>, op: Operation) -> Result<Self> {
        let index: HashMap<Transformation, u32> = elements
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i as u32))
            .collect();
        if index.len() != elements.len() {
            return Err(Error::Invalid("duplicate elements".into()));
        }
        let m = elements.len();
        let rows: Vec<Vec<u32>> = elements
            .par_iter()
            .map(|f| {
                let fa = match &op {
                    Operation::Plain => f.clone(),
                    Operation::Sandwich(a) => f.then(a),
                };
                elements
                    .iter()
                    .map(|g| {
                        let h = fa.then(g);
                        index.get(&h).copied().ok_or_else(|| Error::NotClosed(h.to_string()))
                    })
                    .collect::<Result<Vec<u32>>>()
            })
            .collect::<Result<_>>()?;
        let mut table = Vec::with_capacity(m * m);
        rows.into_iter().for_each(|r| table.extend(r));
        Ok(FiniteSemigroup {
            elements,
            index,
            table,
            op,
        })
    }

    /// The full transformation monoid `T_n` under composition.
    pub fn full_transformation_monoid(n: usize) -> Self {
        Self::build(Transformation::all(n).collect(), Operation::Plain).expect("T_n is closed")
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Transformation] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Transformation {
        &self.elements[i]
    }

    pub fn index_of(&self, f: &Transformation) -> Option<usize> {
        self.index.get(f).map(|&i| i as usize)
    }

    pub fn operation(&self) -> &Operation {
        &self.op
    }

    #[inline]
    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x * self.elements.len() + y] as usize
    }

    /// Row `x` of the table: `y ↦ xy`.
    #[inline]
    pub fn row(&self, x: usize) -> &[u32] {
        let m = self.elements.len();
        &self.table[x * m..(x + 1) * m]
    }

    pub fn is_idempotent(&self, x: usize) -> bool {
        self.mul(x, x) == x
    }

    pub fn rank_of(&self, x: usize) -> usize {
        self.elements[x].rank()
    }

    /// Checks associativity on every triple.
    pub fn is_associative(&self) -> bool {
        let m = self.len();
        (0..m).into_par_iter().all(|x| {
            (0..m).all(|y| {
                let xy = self.mul(x, y);
                (0..m).all(|z| self.mul(xy, z) == self.mul(x, self.mul(y, z)))
            })
        })
    }

    /// Checks associativity on `samples` pseudo-random triples.
    pub fn spot_check_associative(&self, samples: usize, seed: u64) -> bool {
        let m = self.len() as u64;
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % m) as usize
        };
        (0..samples).all(|_| {
            let (x, y, z) = (next(), next(), next());
            self.mul(self.mul(x, y), z) == self.mul(x, self.mul(y, z))
        })
    }

    /// `x` is regular iff `xyx = x` for some `y`.
    pub fn is_regular(&self, x: usize) -> bool {
        let row = self.row(x);
        row.iter().any(|&xy| self.mul(xy as usize, x) == x)
    }

    pub fn regular_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.is_regular(x)).collect()
    }

    /// Elements of transformation rank at most `q`.
    pub fn rank_ideal(&self, q: usize) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.rank_of(x) <= q).collect()
    }

    /// `S¹x`
    pub fn left_ideal(&self, x: usize) -> FixedBitSet {
        let m = self.len();
        let mut set = FixedBitSet::with_capacity(m);
        set.insert(x);
        for s in 0..m {
            set.insert(self.mul(s, x));
        }
        set
    }

    /// `xS¹`
    pub fn right_ideal(&self, x: usize) -> FixedBitSet {
        let mut set = FixedBitSet::with_capacity(self.len());
        set.insert(x);
        self.row(x).iter().for_each(|&y| set.insert(y as usize));
        set
    }

    pub fn greens(&self) -> GreenStructure {
        GreenStructure::compute(self)
    }
}

/// Green's relations of a finite semigroup. For finite semigroups `D = J`.
#[derive(Clone, Debug)]
pub struct GreenStructure {
    pub l: EquivalenceRelation,
    pub r: EquivalenceRelation,
    pub h: EquivalenceRelation,
    pub d: EquivalenceRelation,
    /// `d_below[i]` holds every D-class `j` with `D_j ≤ D_i`.
    d_below: Vec<FixedBitSet>,
    /// Per H-class: does it contain an idempotent?
    pub group_h: Vec<bool>,
}

impl GreenStructure {
    fn compute(s: &FiniteSemigroup) -> Self {
        let m = s.len();
        let left: Vec<FixedBitSet> = (0..m).into_par_iter().map(|x| s.left_ideal(x)).collect();
        let right: Vec<FixedBitSet> = (0..m).into_par_iter().map(|x| s.right_ideal(x)).collect();
        let l = EquivalenceRelation::from_labels(&intern(&left));
        let r = EquivalenceRelation::from_labels(&intern(&right));
        let h = l.meet(&r).expect("same universe");
        let d = l.join(&r).expect("same universe");

        let d_blocks = d.blocks();
        let two_sided: Vec<FixedBitSet> = d_blocks
            .par_iter()
            .map(|block| {
                let y = block[0];
                let mut ideal = FixedBitSet::with_capacity(m);
                for z in left[y].ones() {
                    ideal.union_with(&right[z]);
                }
                ideal
            })
            .collect();
        let d_below = two_sided
            .iter()
            .map(|ideal| {
                let mut below = FixedBitSet::with_capacity(d_blocks.len());
                for (j, block) in d_blocks.iter().enumerate() {
                    if ideal.contains(block[0]) {
                        below.insert(j);
                    }
                }
                below
            })
            .collect();

        let mut group_h = vec![false; h.num_blocks()];
        for x in 0..m {
            if s.is_idempotent(x) {
                group_h[h.block_of(x)] = true;
            }
        }
        GreenStructure {
            l,
            r,
            h,
            d,
            d_below,
            group_h,
        }
    }

    pub fn num_d_classes(&self) -> usize {
        self.d.num_blocks()
    }

    /// `D_i ≤ D_j` in the J-order.
    pub fn d_leq(&self, i: usize, j: usize) -> bool {
        self.d_below[j].contains(i)
    }

    /// Do the D-classes form a chain under the J-order?
    pub fn d_classes_form_chain(&self) -> bool {
        let k = self.num_d_classes();
        (0..k).all(|i| (0..k).all(|j| self.d_leq(i, j) || self.d_leq(j, i)))
    }

    pub fn is_group_h_class_of(&self, x: usize) -> bool {
        self.group_h[self.h.block_of(x)]
    }
}

fn intern(sets: &[FixedBitSet]) -> Vec<usize> {
    let mut ids: HashMap<&FixedBitSet, usize> = HashMap::new();
    sets.iter()
        .map(|set| {
            let next = ids.len();
            *ids.entry(set).or_insert(next)
        })
        .collect()
}

/// One D-class of an egg-box diagram.
#[derive(Clone, Debug, Serialize)]
pub struct EggBoxClass {
    /// Transformation rank shared by the elements of the class.
    pub rank: usize,
    pub size: usize,
    pub r_classes: usize,
    pub l_classes: usize,
    pub h_size: usize,
    /// `group[i][j]`: is the H-class in R-row `i` and L-column `j` a group?
    pub group: Vec<Vec<bool>>,
    /// Least element index of the class.
    pub min_element: usize,
    /// Element indices of each cell, row-major.
    #[serde(skip)]
    pub cells: Vec<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EggBox {
    pub classes: Vec<EggBoxClass>,
}

/// Builds the egg-box model; classes ordered by rank descending, then by least element.
pub fn eggbox(s: &FiniteSemigroup, g: &GreenStructure) -> EggBox {
    let mut classes: Vec<EggBoxClass> =
        g.d.blocks()
            .into_iter()
            .map(|block| {
                let mut rows: Vec<usize> = Vec::new();
                let mut cols: Vec<usize> = Vec::new();
                for &x in &block {
                    let (r, l) = (g.r.block_of(x), g.l.block_of(x));
                    if !rows.contains(&r) {
                        rows.push(r);
                    }
                    if !cols.contains(&l) {
                        cols.push(l);
                    }
                }
                let mut cells = vec![vec![Vec::new(); cols.len()]; rows.len()];
                let mut group = vec![vec![false; cols.len()]; rows.len()];
                for &x in &block {
                    let i = rows.iter().position(|&r| r == g.r.block_of(x)).unwrap();
                    let j = cols.iter().position(|&l| l == g.l.block_of(x)).unwrap();
                    cells[i][j].push(x);
                    group[i][j] |= s.is_idempotent(x);
                }
                EggBoxClass {
                    rank: block.iter().map(|&x| s.rank_of(x)).max().unwrap_or(0),
                    size: block.len(),
                    r_classes: rows.len(),
                    l_classes: cols.len(),
                    h_size: block.len() / (rows.len() * cols.len()),
                    group,
                    min_element: block[0],
                    cells,
                }
            })
            .collect();
    classes.sort_by_key(|c| (std::cmp::Reverse(c.rank), c.min_element));
    EggBox { classes }
}

impl EggBox {
    pub fn to_text(&self, title: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {title}");
        for c in &self.classes {
            let _ = writeln!(
                out,
                "D-class rank {} (min element {}): {} R x {} L, |H| = {}",
                c.rank, c.min_element, c.r_classes, c.l_classes, c.h_size
            );
            for row in &c.group {
                let line: String = row.iter().map(|&g| if g { '#' } else { '.' }).collect();
                let _ = writeln!(out, "  {line}");
            }
        }
        out
    }

    /// Graphviz rendering: one cluster per D-class, cells as an HTML table.
    pub fn to_dot(&self, name: &str, s: &FiniteSemigroup) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{name}\" {{");
        let _ = writeln!(out, "  node [shape=plaintext];");
        for (k, c) in self.classes.iter().enumerate() {
            let _ = writeln!(out, "  subgraph cluster_d{k} {{");
            let _ = writeln!(out, "    label=\"rank {} ({} elements)\";", c.rank, c.size);
            let _ = write!(
                out,
                "    d{k} [label=<<table border=\"0\" cellborder=\"1\" cellspacing=\"0\">"
            );
            for row in 0..c.r_classes {
                out.push_str("<tr>");
                for col in 0..c.l_classes {
                    let fill = if c.group[row][col] { " bgcolor=\"gray80\"" } else { "" };
                    let text = if c.h_size == 1 {
                        s.element(c.cells[row][col][0])
                            .images()
                            .iter()
                            .map(|x| x.to_string())
                            .collect::<String>()
                    } else {
                        String::new()
                    };
                    let _ = write!(out, "<td{fill}>{text}</td>");
                }
                out.push_str("</tr>");
            }
            let _ = writeln!(out, "</table>>];");
            let _ = writeln!(out, "  }}");
        }
        for k in 1..self.classes.len() {
            let _ = writeln!(out, "  d{} -> d{} [style=invis];", k - 1, k);
        }
        out.push_str("}\n");
        out
    }
}
