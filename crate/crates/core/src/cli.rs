//! Command-line front end. The binary is a thin wrapper around [`run`]; all
//! commands return a [`Report`] so they can be driven from tests.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;
use serde_json::{json, Value};

use crate::congruence::{
    enumerate_all_congruences, find_violation, principal_congruences, EquivalenceRelation, DEFAULT_ENUMERATION_CAP,
};
use crate::error::{Error, Result};
use crate::lattice::{height_formula, height_lambda, height_rho, FiniteLattice};
use crate::semigroup::{eggbox, FiniteSemigroup};
use crate::synthesis::Synthesizer;
use crate::systems::DEFAULT_SYSTEM_CAP;
use crate::transform::Transformation;
use crate::variant::{full_variant, VariantContext};

#[derive(Debug, Parser)]
#[command(
    name = "varcong",
    version,
    about = "Congruence lattices of regular parts of transformation variants"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Increase diagnostic verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Egg-box diagrams of the variant, its regular part and the local monoid.
    Eggbox(EggboxArgs),
    /// Congruence lattice by brute force, by structure, or both.
    Congruences(CongruencesArgs),
    /// Decompose one congruence of the regular part.
    Classify(ClassifyArgs),
    /// Lattice height: closed formula against longest-chain search.
    Height(HeightArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Sandwich element, e.g. "4: 1 2 3 3".
    #[arg(long = "a", value_name = "TRANSFORMATION")]
    pub a: Transformation,
    /// Largest semigroup the brute-force oracle will touch.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP, value_parser = positive)]
    pub cap_elements: usize,
    /// Largest number of systems, and of structural lattice nodes.
    #[arg(long, default_value_t = DEFAULT_SYSTEM_CAP, value_parser = positive)]
    pub cap_systems: usize,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file, or directory for commands writing several files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn positive(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemigroupChoice {
    RegularPart,
    FullVariant,
    #[value(name = "image-T")]
    #[serde(rename = "image-T")]
    ImageT,
}

impl SemigroupChoice {
    fn name(self) -> &'static str {
        match self {
            SemigroupChoice::RegularPart => "regular-part",
            SemigroupChoice::FullVariant => "full-variant",
            SemigroupChoice::ImageT => "image-T",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Oracle,
    Structural,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct EggboxArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Render one semigroup only (default: all three).
    #[arg(long, value_enum)]
    pub semigroup: Option<SemigroupChoice>,
}

#[derive(Debug, Clone, Args)]
pub struct CongruencesArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "both")]
    pub method: Method,
    #[arg(long, value_enum, default_value = "regular-part")]
    pub semigroup: SemigroupChoice,
    /// Only count the distinct principal congruences (oracle).
    #[arg(long)]
    pub principal: bool,
    /// Include the blocks of every congruence in the JSON dump.
    #[arg(long)]
    pub blocks: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// JSON file of blocks, or one of delta, kappa, lambda, rho, nabla.
    #[arg(long, conflicts_with = "index", required_unless_present = "index")]
    pub congruence: Option<String>,
    /// Node index in the structural enumeration.
    #[arg(long)]
    pub index: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct HeightArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Validated settings of one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub sandwich: Transformation,
    pub command: Command,
    pub caps: Caps,
    pub output: Output,
}

#[derive(Debug, Clone, Copy)]
pub struct Caps {
    pub elements: usize,
    pub systems: usize,
}

#[derive(Debug, Clone)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Self {
        let (common, default_format) = match &cli.command {
            Command::Eggbox(a) => (&a.common, Format::Dot),
            Command::Congruences(a) => (&a.common, Format::Json),
            Command::Classify(a) => (&a.common, Format::Json),
            Command::Height(a) => (&a.common, Format::Json),
        };
        RunConfig {
            sandwich: common.a.clone(),
            command: cli.command.clone(),
            caps: Caps {
                elements: common.cap_elements,
                systems: common.cap_systems,
            },
            output: Output {
                path: common.out.clone(),
                format: common.format.unwrap_or(default_format),
            },
        }
    }
}

/// What a command produced. `ok == false` maps to a nonzero exit code.
#[derive(Debug, Default)]
pub struct Report {
    pub stdout: String,
    pub files: Vec<(PathBuf, String)>,
    pub ok: bool,
}

impl Report {
    fn single(cfg: &RunConfig, body: String, ok: bool) -> Self {
        match &cfg.output.path {
            Some(p) => Report {
                stdout: String::new(),
                files: vec![(p.clone(), body)],
                ok,
            },
            None => Report {
                stdout: body,
                files: Vec::new(),
                ok,
            },
        }
    }

    pub fn write_files(&self) -> Result<()> {
        for (path, body) in &self.files {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, body)?;
        }
        Ok(())
    }
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    match &cfg.command {
        Command::Eggbox(args) => cmd_eggbox(cfg, args.semigroup),
        Command::Congruences(args) => cmd_congruences(cfg, args),
        Command::Classify(args) => cmd_classify(cfg, args),
        Command::Height(_) => cmd_height(cfg),
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t as usize).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    let cfg = RunConfig::from_cli(&cli);
    match run(&cfg).and_then(|r| r.write_files().map(|_| r)) {
        Ok(report) => {
            print!("{}", report.stdout);
            if report.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn context(cfg: &RunConfig) -> Result<VariantContext> {
    let ctx = VariantContext::from_transformation(&cfg.sandwich)?;
    if *ctx.normalizer() != Transformation::identity(ctx.degree()) {
        info!("sandwich element normalized by p = {}", ctx.normalizer());
    }
    Ok(ctx)
}

fn check_cap(what: &'static str, size: usize, cap: usize) -> Result<()> {
    if size > cap {
        return Err(Error::CapExceeded { what, size, cap });
    }
    Ok(())
}

fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    // going through Value sorts object keys
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn cmd_eggbox(cfg: &RunConfig, choice: Option<SemigroupChoice>) -> Result<Report> {
    let ctx = context(cfg)?;
    let choices = match choice {
        Some(c) => vec![c],
        None => vec![
            SemigroupChoice::FullVariant,
            SemigroupChoice::RegularPart,
            SemigroupChoice::ImageT,
        ],
    };
    let mut rendered = Vec::new();
    let mut summary = BTreeMap::new();
    for c in choices {
        let full;
        let (s, greens) = match c {
            SemigroupChoice::RegularPart => (&ctx.p, ctx.p_greens.clone()),
            SemigroupChoice::ImageT => (&ctx.t, ctx.t_greens.clone()),
            SemigroupChoice::FullVariant => {
                let n = ctx.degree();
                check_cap(
                    "full variant",
                    n.pow(n as u32),
                    cfg.caps.elements.max(DEFAULT_ENUMERATION_CAP),
                )?;
                full = full_variant(ctx.sandwich().transformation());
                let g = full.greens();
                (&full, g)
            }
        };
        let model = eggbox(s, &greens);
        summary.insert(
            c.name(),
            json!({
                "size": s.len(),
                "d_classes": greens.num_d_classes(),
                "d_classes_form_chain": greens.d_classes_form_chain(),
            }),
        );
        info!(
            "{}: {} elements, {} D-classes, chain: {}",
            c.name(),
            s.len(),
            greens.num_d_classes(),
            greens.d_classes_form_chain()
        );
        let body = match cfg.output.format {
            Format::Dot => model.to_dot(c.name(), s),
            Format::Text => model.to_text(c.name()),
            Format::Json => to_json_string(&json!({ "summary": summary[c.name()], "eggbox": model }))?,
        };
        rendered.push((c, body));
    }
    let ext = match cfg.output.format {
        Format::Dot => "dot",
        Format::Text => "txt",
        Format::Json => "json",
    };
    let single_file = choice.is_some() && cfg.output.path.as_ref().is_some_and(|p| p.extension().is_some());
    let mut report = Report {
        ok: true,
        ..Default::default()
    };
    match &cfg.output.path {
        Some(p) if single_file => report.files.push((p.clone(), rendered.remove(0).1)),
        Some(dir) => {
            for (c, body) in rendered {
                report.files.push((dir.join(format!("{}.{ext}", c.name())), body));
            }
            report.stdout = to_json_string(&summary)?;
        }
        None if cfg.output.format == Format::Json && rendered.len() > 1 => {
            let mut all = serde_json::Map::new();
            for (c, body) in rendered {
                all.insert(c.name().into(), serde_json::from_str(&body)?);
            }
            report.stdout = to_json_string(&all)?;
        }
        None => report.stdout = rendered.into_iter().map(|(_, b)| b).collect(),
    }
    Ok(report)
}

fn blocks_json(rel: &EquivalenceRelation) -> Vec<Vec<usize>> {
    rel.blocks().into_iter().filter(|b| b.len() > 1).collect()
}

pub fn cmd_congruences(cfg: &RunConfig, args: &CongruencesArgs) -> Result<Report> {
    let ctx = context(cfg)?;
    let full;
    let s: &FiniteSemigroup = match args.semigroup {
        SemigroupChoice::RegularPart => &ctx.p,
        SemigroupChoice::ImageT => &ctx.t,
        SemigroupChoice::FullVariant => {
            let n = ctx.degree();
            check_cap("full variant", n.pow(n as u32), cfg.caps.elements)?;
            full = full_variant(ctx.sandwich().transformation());
            &full
        }
    };
    let mut report = json!({
        "a": ctx.sandwich().transformation().to_string(),
        "normalizer": ctx.normalizer().to_string(),
        "semigroup": args.semigroup.name(),
        "size": s.len(),
        "summary": ctx.summary(),
    });
    if args.principal {
        let start = Instant::now();
        let principal = principal_congruences(s, cfg.caps.elements)?;
        report["principal"] = json!(principal.len());
        report["timings_ms"] = json!({ "oracle": start.elapsed().as_millis() as u64 });
        return Ok(Report::single(cfg, to_json_string(&report)?, true));
    }
    let structural_allowed = args.semigroup == SemigroupChoice::RegularPart;
    if args.method != Method::Oracle && !structural_allowed {
        return Err(Error::Invalid(format!(
            "structural enumeration is only available for regular-part, not {}",
            args.semigroup.name()
        )));
    }
    let mut timings = BTreeMap::new();
    let mut oracle = None;
    if args.method != Method::Structural {
        let start = Instant::now();
        let all = enumerate_all_congruences(s, cfg.caps.elements)?;
        timings.insert("oracle", start.elapsed().as_millis() as u64);
        report["oracle_count"] = json!(all.len());
        oracle = Some(all);
    }
    let mut structural = None;
    if args.method != Method::Oracle {
        let start = Instant::now();
        let syn = Synthesizer::new(&ctx)?;
        let lattice = syn.enumerate_structurally(cfg.caps.systems, cfg.caps.systems)?;
        timings.insert("structural", start.elapsed().as_millis() as u64);
        report["structural_count"] = json!(lattice.len());
        report["chain"] = serde_json::to_value(&lattice.chain)?;
        report["layer_cover_violations"] = serde_json::to_value(lattice.layer_cover_violations())?;
        structural = Some(lattice);
    }
    report["timings_ms"] = json!(timings);
    let mut ok = true;
    if let (Some(o), Some(st)) = (&oracle, &structural) {
        let o_set: HashSet<&EquivalenceRelation> = o.iter().collect();
        let s_set: HashSet<&EquivalenceRelation> = st.congruences().collect();
        let mut only_oracle: Vec<_> = o_set.difference(&s_set).map(|r| blocks_json(r)).collect();
        let mut only_structural: Vec<_> = s_set.difference(&o_set).map(|r| blocks_json(r)).collect();
        only_oracle.sort();
        only_structural.sort();
        ok = only_oracle.is_empty() && only_structural.is_empty();
        report["diff"] = json!({ "oracle_only": only_oracle, "structural_only": only_structural, "empty": ok });
    }
    let body = match (&structural, &oracle) {
        (Some(st), _) => {
            report["height"] = json!(st.lattice.height().0);
            match cfg.output.format {
                Format::Dot => st.to_dot("cong"),
                Format::Text => congruences_text(&report),
                Format::Json => {
                    let mut lat = st.to_json();
                    if args.blocks {
                        for (node, n) in lat["nodes"].as_array_mut().expect("array").iter_mut().zip(&st.nodes) {
                            node["blocks"] = json!(blocks_json(&n.sigma));
                        }
                    }
                    report["lattice"] = lat;
                    to_json_string(&report)?
                }
            }
        }
        (None, Some(o)) => {
            let lattice = FiniteLattice::from_congruences(o.clone());
            report["height"] = json!(lattice.height().0);
            match cfg.output.format {
                Format::Dot => lattice.to_dot("cong", |i| lattice.nodes()[i].pair_count().to_string()),
                Format::Text => congruences_text(&report),
                Format::Json => {
                    let nodes: Vec<Value> = lattice
                        .nodes()
                        .iter()
                        .enumerate()
                        .map(|(i, c)| {
                            let mut v = json!({ "id": i, "size": c.pair_count() });
                            if args.blocks {
                                v["blocks"] = json!(blocks_json(c));
                            }
                            v
                        })
                        .collect();
                    let edges: Vec<[usize; 2]> = lattice.hasse_edges().into_iter().map(|(i, j)| [i, j]).collect();
                    report["lattice"] = json!({ "count": lattice.len(), "nodes": nodes, "edges": edges });
                    to_json_string(&report)?
                }
            }
        }
        (None, None) => unreachable!("at least one method runs"),
    };
    if !ok {
        eprintln!("oracle and structural lattices differ");
    }
    Ok(Report::single(cfg, body, ok))
}

fn congruences_text(report: &Value) -> String {
    let mut out = String::new();
    for key in ["a", "semigroup", "size", "oracle_count", "structural_count", "height"] {
        if let Some(v) = report.get(key) {
            let _ = writeln!(out, "{key}: {v}");
        }
    }
    if let Some(d) = report.get("diff") {
        let _ = writeln!(out, "diff empty: {}", d["empty"]);
    }
    if let Some(t) = report.get("timings_ms") {
        let _ = writeln!(out, "timings (ms): {t}");
    }
    out
}

/// Reads a congruence on `P` from JSON: a list of blocks whose members are
/// zero-based element indices or transformation strings. Singletons may be
/// omitted.
pub fn read_congruence(ctx: &VariantContext, text: &str) -> Result<EquivalenceRelation> {
    let value: Value = serde_json::from_str(text)?;
    let blocks = value.get("blocks").unwrap_or(&value);
    let blocks = blocks
        .as_array()
        .ok_or_else(|| Error::Parse("expected a list of blocks".into()))?;
    let m = ctx.p.len();
    let mut out = Vec::with_capacity(blocks.len());
    for block in blocks {
        let members = block
            .as_array()
            .ok_or_else(|| Error::Parse(format!("block {block} is not a list")))?;
        let mut b = Vec::with_capacity(members.len());
        for x in members {
            let idx = match x {
                Value::Number(k) => k
                    .as_u64()
                    .map(|k| k as usize)
                    .filter(|&k| k < m)
                    .ok_or_else(|| Error::Parse(format!("element index {k} out of range 0..{m}")))?,
                Value::String(s) => {
                    let f: Transformation = s.parse()?;
                    ctx.p
                        .index_of(&f)
                        .ok_or_else(|| Error::Invalid(format!("{f} is not in the regular part")))?
                }
                other => return Err(Error::Parse(format!("bad block member {other}"))),
            };
            b.push(idx);
        }
        out.push(b);
    }
    let mut covered = vec![false; m];
    out.iter().flatten().for_each(|&x| covered[x] = true);
    out.extend((0..m).filter(|&x| !covered[x]).map(|x| vec![x]));
    EquivalenceRelation::from_blocks(m, &out)
}

pub fn cmd_classify(cfg: &RunConfig, args: &ClassifyArgs) -> Result<Report> {
    let ctx = context(cfg)?;
    let syn = Synthesizer::new(&ctx)?;
    let sigma = match (&args.congruence, args.index) {
        (_, Some(i)) => {
            let lattice = syn.enumerate_structurally(cfg.caps.systems, cfg.caps.systems)?;
            lattice
                .nodes
                .get(i)
                .map(|n| n.sigma.clone())
                .ok_or_else(|| Error::Invalid(format!("index {i} out of range 0..{}", lattice.len())))?
        }
        (Some(name), None) => match name.as_str() {
            "delta" => EquivalenceRelation::discrete(ctx.p.len()),
            "nabla" => EquivalenceRelation::full(ctx.p.len()),
            "kappa" => ctx.kappa.clone(),
            "lambda" => ctx.lambda.clone(),
            "rho" => ctx.rho.clone(),
            path => read_congruence(&ctx, &std::fs::read_to_string(Path::new(path))?)?,
        },
        (None, None) => return Err(Error::Invalid("give --congruence or --index".into())),
    };
    if let Some(v) = find_violation(&sigma, &ctx.p) {
        return Err(v.into());
    }
    let d = syn.classify(&sigma)?;
    let back = syn.synthesize(&d)?;
    let round_trip = back == sigma;
    let mut out = syn.decomposition_json(&d);
    out["chain_index"] = json!(d.chain_index);
    out["round_trip"] = json!(round_trip);
    let body = match cfg.output.format {
        Format::Json => to_json_string(&out)?,
        Format::Text => format!(
            "q = {}, N = {}, rank(psystem) = {}, rank(csystem) = {}, round trip: {}\n",
            d.q, d.n_name, d.psystem.rank, d.csystem.rank, round_trip
        ),
        Format::Dot => return Err(Error::Invalid("classify has no DOT output".into())),
    };
    Ok(Report::single(cfg, body, round_trip))
}

pub fn cmd_height(cfg: &RunConfig) -> Result<Report> {
    let ctx = context(cfg)?;
    let n = ctx.degree();
    let blocks = ctx.sandwich().block_sizes();
    let formula = height_formula(n, &blocks)?;
    let syn = Synthesizer::new(&ctx)?;
    let lattice = syn.enumerate_structurally(cfg.caps.systems, cfg.caps.systems)?;
    let (search, witness) = lattice.lattice.height();
    let ok = formula == search.into();
    let witness_sizes: Vec<usize> = witness.iter().map(|&i| lattice.nodes[i].size).collect();
    let out = json!({
        "a": ctx.sandwich().transformation().to_string(),
        "blocks": blocks,
        "formula": formula.to_string(),
        "height_lambda": height_lambda(n, &blocks)?.to_string(),
        "height_rho": height_rho(n, &blocks)?.to_string(),
        "search": search,
        "witness": witness,
        "witness_sizes": witness_sizes,
        "agree": ok,
    });
    let body = match cfg.output.format {
        Format::Json => to_json_string(&out)?,
        Format::Text => format!(
            "formula: {formula}\nsearch: {search}\nHt[Δ,λ]: {}\nHt[Δ,ρ]: {}\nwitness: {witness:?}\n",
            out["height_lambda"].as_str().unwrap_or_default(),
            out["height_rho"].as_str().unwrap_or_default()
        ),
        Format::Dot => lattice.lattice.to_dot("height", |i| {
            if witness.contains(&i) {
                format!("{}*", lattice.nodes[i].size)
            } else {
                lattice.nodes[i].size.to_string()
            }
        }),
    };
    if !ok {
        eprintln!("height mismatch: formula {formula}, search {search}");
    }
    Ok(Report::single(cfg, body, ok))
}
