//! The `mvb` command line: argument parsing, command dispatch and reports.
//!
//! Exit codes: 0 when every certificate passes, 1 on a semantic failure
//! (a failed certificate or an invalid object), 2 on usage, I/O, syntax or
//! schema errors.

use crate::atlas::AtlasPresentation;
use crate::bundle::{face, hom_bundle, tangent_prolongation, BundleMorphism};
use crate::certificate::Certificate;
use crate::corepull::{core, core_by_stages, core_closure, pullback, pullback_certificate, ultracore_sequence};
use crate::cubecat::IndexSet;
use crate::error::{Error, Result};
use crate::format::{self, Document};
use crate::gauge::Gauge;
use crate::infbundle::{InfinityPresentation, TowerDecomposition};
use crate::lift;
use crate::random::{self, AtlasShape};
use crate::report::{fingerprint, CommandReport};
use crate::split::{self, Decomposer, FirstSection, Options, Pasting};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "mvb", version, about = "Exact computations with n-fold vector bundles over finite bases")]
pub struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json, global = true)]
    pub output: OutputFormat,
    /// Directory searched for input files not found as given.
    #[arg(long, env = "MVB_FIXTURES", global = true)]
    pub fixtures: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Random samples per check.
    #[arg(long, default_value_t = 8, global = true)]
    pub samples: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    LeastChart,
    UniformAverage,
}

impl From<Strategy> for Pasting {
    fn from(s: Strategy) -> Pasting {
        match s {
            Strategy::LeastChart => Pasting::LeastChart,
            Strategy::UniformAverage => Pasting::UniformAverage,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum First {
    ZeroTop,
    Skewed,
}

impl From<First> for FirstSection {
    fn from(f: First) -> FirstSection {
        match f {
            First::ZeroTop => FirstSection::ZeroTop,
            First::Skewed => FirstSection::Skewed,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SplitArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Strategy::LeastChart)]
    pub strategy: Strategy,
    #[arg(long, value_enum, default_value_t = First::ZeroTop)]
    pub first: First,
    /// Writes the resulting document here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Checks the cocycle conditions of a presentation.
    Validate { instance: PathBuf },
    /// The (I, J)-face along the zero section.
    Face {
        instance: PathBuf,
        #[arg(long, value_parser = parse_set)]
        i: IndexSet,
        #[arg(long, value_parser = parse_set, default_value = "")]
        j: IndexSet,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The (S, J)-core.
    Core {
        instance: PathBuf,
        #[arg(long, value_parser = parse_set)]
        s: IndexSet,
        #[arg(long, value_parser = parse_set)]
        j: IndexSet,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The (S, J)-core computed through the (S, K)-core.
    CoreStages {
        instance: PathBuf,
        #[arg(long, value_parser = parse_set)]
        s: IndexSet,
        #[arg(long, value_parser = parse_set)]
        k: IndexSet,
        #[arg(long, value_parser = parse_set)]
        j: IndexSet,
    },
    /// The n-pullback and the projection onto it.
    Pullback {
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exactness of the ultracore sequence over the face without k.
    Ultracore {
        instance: PathBuf,
        #[arg(long)]
        k: u32,
    },
    /// A linear splitting.
    Split(SplitArgs),
    /// A decomposition.
    Decompose(SplitArgs),
    /// The presentation with transitions made block diagonal by a decomposition.
    Normalize(SplitArgs),
    /// The statomorphism relating two decompositions; the second is computed
    /// with `--strategy` when not given.
    Torsor {
        instance: PathBuf,
        first: PathBuf,
        second: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Strategy::UniformAverage)]
        strategy: Strategy,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Operations on statomorphism gauges.
    Stato {
        #[command(subcommand)]
        op: StatoOp,
    },
    /// The Hom bundle of two presentations over the same base.
    Hom {
        source: PathBuf,
        target: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The tangent prolongation.
    Tangent {
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Linear sections of a double presentation and the local splitting.
    Lift2 {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = First::Skewed)]
        first: First,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Doubly linear sections of a triple presentation and horizontal lifts.
    Lift3 {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Strategy::LeastChart)]
        strategy: Strategy,
    },
    /// Infinity-fold towers.
    Inf {
        #[command(subcommand)]
        op: InfOp,
    },
    /// A random valid presentation: a decomposed one twisted by random gauges.
    Gen {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        max_dim: usize,
        #[arg(long, default_value_t = 2)]
        charts: usize,
        #[arg(long, default_value_t = 2)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum StatoOp {
    /// `second . first`.
    Compose {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Invert {
        gauge: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Whether a gauge has identity linear parts.
    Check { gauge: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum InfOp {
    /// The truncation at [n].
    Truncate {
        generator: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompositions at levels n and n + 1, compared on every node of [n].
    Decompose {
        generator: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Strategy::LeastChart)]
        strategy: Strategy,
    },
}

/// `"1,2,3"`, `"{1,2,3}"` or `""` for the empty set.
pub fn parse_set(s: &str) -> std::result::Result<IndexSet, String> {
    let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
    let elements: std::result::Result<Vec<u32>, _> =
        inner.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse::<u32>).collect();
    let elements = elements.map_err(|e| format!("bad index set {s:?}: {e}"))?;
    IndexSet::new(elements).map_err(|e| e.to_string())
}

/// What a command produced.
struct Outcome {
    certificates: Vec<Certificate>,
    result: Option<Value>,
    /// Canonical document for `--out`.
    artifact: Option<String>,
}

impl Outcome {
    fn new(certificates: Vec<Certificate>) -> Self {
        Outcome { certificates, result: None, artifact: None }
    }

    fn with_document(mut self, text: String) -> Self {
        self.result = serde_json::from_str(&text).ok();
        self.artifact = Some(text);
        self
    }

    fn with_result(mut self, v: Value) -> Self {
        self.result = Some(v);
        self
    }
}

struct Inputs<'a> {
    fixtures: Option<&'a Path>,
    read: Vec<Vec<u8>>,
}

impl Inputs<'_> {
    fn bytes(&mut self, path: &Path) -> Result<Vec<u8>> {
        let resolved = match self.fixtures {
            Some(dir) if !path.exists() && dir.join(path).exists() => dir.join(path),
            _ => path.to_path_buf(),
        };
        let bytes = std::fs::read(&resolved).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", resolved.display())))?;
        self.read.push(bytes.clone());
        Ok(bytes)
    }

    fn instance(&mut self, path: &Path) -> Result<AtlasPresentation> {
        format::read_instance(&self.bytes(path)?)
    }

    /// A presentation that must pass validation.
    fn valid_instance(&mut self, path: &Path) -> Result<AtlasPresentation> {
        match format::parse(&self.bytes(path)?)? {
            Document::Instance(a) => Ok(a),
            _ => Err(Error::Schema { path: String::new(), message: format!("{} is not an instance", path.display()) }),
        }
    }

    fn gauge(&mut self, path: &Path) -> Result<Gauge> {
        format::read_gauge(&self.bytes(path)?)
    }

    fn morphism(&mut self, path: &Path) -> Result<BundleMorphism> {
        format::read_morphism(&self.bytes(path)?)
    }

    fn tower(&mut self, path: &Path) -> Result<InfinityPresentation> {
        Ok(InfinityPresentation::new(format::read_generator(&self.bytes(path)?)?))
    }
}

fn validation(atlas: &AtlasPresentation, claim: &str) -> Certificate {
    let mut cert = Certificate::new(claim);
    let report = atlas.validate();
    if let Some(v) = report.violations.first() {
        cert.fail(json!({ "violations": report.violations.len(), "first": v, "cocycle_cells": report.cocycle_cells() }));
    }
    cert.witness(json!({ "n": atlas.n(), "charts": atlas.charts().len(), "points": atlas.base().points().len(), "transitions": atlas.transitions().len() }));
    cert
}

fn options(cli: &Cli, strategy: Strategy, first: First) -> Options {
    Options { pasting: strategy.into(), first: first.into(), samples: 2, seed: cli.seed }
}

fn command_name(c: &Command) -> String {
    let name = match c {
        Command::Validate { .. } => "validate",
        Command::Face { .. } => "face",
        Command::Core { .. } => "core",
        Command::CoreStages { .. } => "core-stages",
        Command::Pullback { .. } => "pullback",
        Command::Ultracore { .. } => "ultracore",
        Command::Split(_) => "split",
        Command::Decompose(_) => "decompose",
        Command::Normalize(_) => "normalize",
        Command::Torsor { .. } => "torsor",
        Command::Stato { op: StatoOp::Compose { .. } } => "stato compose",
        Command::Stato { op: StatoOp::Invert { .. } } => "stato invert",
        Command::Stato { op: StatoOp::Check { .. } } => "stato check",
        Command::Hom { .. } => "hom",
        Command::Tangent { .. } => "tangent",
        Command::Lift2 { .. } => "lift2",
        Command::Lift3 { .. } => "lift3",
        Command::Inf { op: InfOp::Truncate { .. } } => "inf truncate",
        Command::Inf { op: InfOp::Decompose { .. } } => "inf decompose",
        Command::Gen { .. } => "gen",
    };
    name.to_string()
}

fn out_path(c: &Command) -> Option<&PathBuf> {
    match c {
        Command::Face { out, .. }
        | Command::Core { out, .. }
        | Command::Pullback { out, .. }
        | Command::Torsor { out, .. }
        | Command::Hom { out, .. }
        | Command::Tangent { out, .. }
        | Command::Lift2 { out, .. }
        | Command::Gen { out, .. }
        | Command::Stato { op: StatoOp::Compose { out, .. } | StatoOp::Invert { out, .. } }
        | Command::Inf { op: InfOp::Truncate { out, .. } } => out.as_ref(),
        Command::Split(a) | Command::Decompose(a) | Command::Normalize(a) => a.out.as_ref(),
        _ => None,
    }
}

fn execute(cli: &Cli, inputs: &mut Inputs) -> Result<Outcome> {
    let mut rng = random::rng(cli.seed);
    let samples = cli.samples;
    Ok(match &cli.command {
        Command::Validate { instance } => {
            let a = inputs.instance(instance)?;
            Outcome::new(vec![validation(&a, "cocycle conditions hold")])
        }
        Command::Face { instance, i, j, .. } => {
            let a = inputs.valid_instance(instance)?;
            let f = face(&a, i, j)?;
            Outcome::new(vec![validation(&f, "the face is a valid presentation")]).with_document(format::write_instance(&f))
        }
        Command::Core { instance, s, j, .. } => {
            let a = inputs.valid_instance(instance)?;
            let c = core(&a, s, j)?;
            Outcome::new(vec![core_closure(&a, s, j)?, validation(&c, "the core is a valid presentation")])
                .with_document(format::write_instance(&c))
        }
        Command::CoreStages { instance, s, k, j } => {
            let a = inputs.valid_instance(instance)?;
            Outcome::new(vec![core_by_stages(&a, s, k, j, &mut rng, samples)?])
        }
        Command::Pullback { instance, .. } => {
            let a = inputs.valid_instance(instance)?;
            let pb = pullback(&a)?;
            Outcome::new(vec![pullback_certificate(&a, &pb)?]).with_document(format::write_instance(&pb.atlas))
        }
        Command::Ultracore { instance, k } => {
            let a = inputs.valid_instance(instance)?;
            let seq = ultracore_sequence(&a, *k, &mut rng, samples)?;
            let top = a.dims().top();
            let summary = json!({
                "k": seq.k,
                "total_dim": a.dims().total(&top),
                "ultracore_dim": seq.ultracore_dim,
                "pullback_dim": seq.pullback.atlas.dims().total(&top),
                "orderings_checked": seq.orderings_checked,
            });
            Outcome::new(vec![seq.certificate]).with_result(summary)
        }
        Command::Split(args) => {
            let a = inputs.valid_instance(&args.instance)?;
            let sigma = split::find_splitting(&a, options(cli, args.strategy, args.first))?;
            Outcome::new(vec![split::is_splitting(&a, &sigma)?]).with_document(format::write_morphism(&sigma))
        }
        Command::Decompose(args) => {
            let a = inputs.valid_instance(&args.instance)?;
            let mut d = Decomposer::new(&a, options(cli, args.strategy, args.first));
            let s = d.decompose()?;
            let built = d.certificate().clone();
            let cert = split::is_decomposition(&a, &s, &mut rng, samples)?;
            Outcome::new(vec![built, cert]).with_document(format::write_morphism(&s))
        }
        Command::Normalize(args) => {
            let a = inputs.valid_instance(&args.instance)?;
            let s = split::decompose(&a, options(cli, args.strategy, args.first))?;
            let normal = split::normalize_atlas(&a, &s)?;
            Outcome::new(vec![split::normalization_certificate(&a, &s)?]).with_document(format::write_instance(&normal))
        }
        Command::Torsor { instance, first, second, strategy, .. } => {
            let a = inputs.valid_instance(instance)?;
            let s1 = inputs.morphism(first)?;
            let s2 = match second {
                Some(p) => inputs.morphism(p)?,
                None => split::decompose(&a, options(cli, *strategy, First::ZeroTop))?,
            };
            let mut cert = Certificate::new("two decompositions differ by a statomorphism, and acting recovers the second");
            let mut checks = split::is_decomposition(&a, &s1, &mut rng, samples)?;
            checks.absorb(split::is_decomposition(&a, &s2, &mut rng, samples)?);
            cert.absorb(checks);
            match split::torsor(&a, &s1, &s2) {
                Ok(tau) => {
                    cert.check(split::act(&s1, &tau)? == s2, json!({ "reason": "S1 . tau differs from S2" }));
                    let identity = tau.data().values().all(Gauge::is_identity);
                    cert.witness(json!({ "cells": tau.data().len(), "identity": identity }));
                    Outcome::new(vec![cert]).with_document(format::write_morphism(&tau))
                }
                Err(e @ (Error::Semantic(_) | Error::NotNatural { .. })) => {
                    cert.fail(json!({ "reason": e.to_string() }));
                    Outcome::new(vec![cert])
                }
                Err(e) => return Err(e),
            }
        }
        Command::Stato { op } => match op {
            StatoOp::Compose { first, second, .. } => {
                let (f, g) = (inputs.gauge(first)?, inputs.gauge(second)?);
                let h = g.compose(&f)?;
                let mut cert = Certificate::new("the composite of statomorphisms is a statomorphism");
                cert.check(f.is_statomorphism() && g.is_statomorphism(), json!({ "reason": "an input is not a statomorphism" }));
                cert.check(h.is_statomorphism(), json!({ "reason": "composite is not a statomorphism" }));
                Outcome::new(vec![cert]).with_document(format::write_gauge(&h))
            }
            StatoOp::Invert { gauge, .. } => {
                let g = inputs.gauge(gauge)?;
                let inv = g.invert()?;
                let mut cert = Certificate::new("the inverse is two-sided");
                cert.check(inv.compose(&g)?.is_identity() && g.compose(&inv)?.is_identity(), json!({ "reason": "not two-sided" }));
                Outcome::new(vec![cert]).with_document(format::write_gauge(&inv))
            }
            StatoOp::Check { gauge } => {
                let g = inputs.gauge(gauge)?;
                let mut cert = Certificate::new("the gauge is a statomorphism");
                let bad: Vec<IndexSet> = g.source().sets().into_iter().filter(|j| !g.linear(j).is_identity()).collect();
                cert.check(g.source() == g.target() && bad.is_empty(), json!({ "non_identity_linear_parts": bad }));
                Outcome::new(vec![cert])
            }
        },
        Command::Hom { source, target, .. } => {
            let (e, f) = (inputs.valid_instance(source)?, inputs.valid_instance(target)?);
            let h = hom_bundle(&e, &f)?;
            Outcome::new(vec![validation(&h, "the Hom bundle is a valid presentation")]).with_document(format::write_instance(&h))
        }
        Command::Tangent { instance, .. } => {
            let a = inputs.valid_instance(instance)?;
            let t = tangent_prolongation(&a)?;
            Outcome::new(vec![validation(&t, "the tangent prolongation is a valid presentation")])
                .with_document(format::write_instance(&t))
        }
        Command::Lift2 { instance, first, .. } => {
            let a = inputs.valid_instance(instance)?;
            let seq_cert = lift::sequence_certificate(&a, (*first).into(), &mut rng)?;
            let (sigma, cert) = lift::local_split_double(&a, (*first).into(), &mut rng)?;
            Outcome::new(vec![seq_cert, cert]).with_document(format::write_morphism(&sigma))
        }
        Command::Lift3 { instance, strategy } => {
            let a = inputs.valid_instance(instance)?;
            let seq = lift::ModuleSequence::new(a.dims(), FirstSection::ZeroTop)?;
            let seq_cert = lift::sequence_certificate(&a, FirstSection::ZeroTop, &mut rng)?;
            let s = split::decompose(&a, options(cli, *strategy, First::ZeroTop))?;
            let round = lift::lift_round_trip(&a, &s, &mut rng)?;
            let summary = json!({ "mor2_dim": seq.kernel.dim(), "sections_dim": seq.sections.dim(), "pairs_dim": seq.pairs().len() });
            Outcome::new(vec![seq_cert, round]).with_result(summary)
        }
        Command::Inf { op } => match op {
            InfOp::Truncate { generator, n, .. } => {
                let tower = inputs.tower(generator)?;
                let t = tower.truncate(*n)?;
                Outcome::new(vec![tower.tower_certificate(*n)?]).with_document(format::write_instance(&t))
            }
            InfOp::Decompose { generator, n, strategy } => {
                let tower = inputs.tower(generator)?;
                let dec = TowerDecomposition::new(&tower, options(cli, *strategy, First::ZeroTop));
                Outcome::new(vec![tower.tower_certificate(n + 1)?, dec.level_independence(&[*n, n + 1])?])
            }
        },
        Command::Gen { n, max_dim, charts, points, .. } => {
            let a = random::twisted_atlas(&mut rng, &AtlasShape { n: *n, max_dim: *max_dim, charts: *charts, points: *points });
            Outcome::new(vec![validation(&a, "the generated presentation is valid")]).with_document(format::write_instance(&a))
        }
    })
}

fn arguments(cli: &Cli) -> Vec<String> {
    let mut args = vec![format!("--seed={}", cli.seed), format!("--samples={}", cli.samples)];
    args.push(format!("{:?}", cli.command));
    args
}

/// Runs a parsed command line; returns the report and the exit code.
pub fn run(cli: &Cli) -> (CommandReport, i32) {
    let start = Instant::now();
    let mut inputs = Inputs { fixtures: cli.fixtures.as_deref(), read: Vec::new() };
    let outcome = execute(cli, &mut inputs);
    let name = command_name(&cli.command);
    let (mut report, code) = match outcome {
        Ok(o) => {
            let mut error = None;
            if let (Some(path), Some(text)) = (out_path(&cli.command), &o.artifact) {
                if let Err(e) = std::fs::write(path, text) {
                    error = Some(format!("cannot write {}: {e}", path.display()));
                }
            }
            let io_failed = error.is_some();
            let report = CommandReport::new(name, arguments(cli), fingerprint(&inputs.read), o.certificates, o.result, error);
            let code = if io_failed { 2 } else if report.passed() { 0 } else { 1 };
            (report, code)
        }
        Err(e) => {
            let code = match e {
                Error::Syntax { .. } | Error::Schema { .. } | Error::InvalidArgument(_) => 2,
                _ => 1,
            };
            (CommandReport::new(name, arguments(cli), fingerprint(&inputs.read), Vec::new(), None, Some(e.to_string())), code)
        }
    };
    report.timing_ms = start.elapsed().as_millis() as u64;
    (report, code)
}

/// Parses `args`, runs, prints the report; returns the exit code.
pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (report, code) = run(&cli);
    match cli.output {
        OutputFormat::Json => print!("{}", report.to_json()),
        OutputFormat::Text => print!("{}", report.to_text()),
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("mvb").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn sets_parse() {
        assert_eq!(parse_set("1,3").unwrap(), IndexSet::new([1, 3]).unwrap());
        assert_eq!(parse_set("{2}").unwrap(), IndexSet::singleton(2));
        assert!(parse_set("").unwrap().is_empty());
        assert!(parse_set("a").is_err());
    }

    #[test]
    fn gen_then_validate() {
        let dir = std::env::temp_dir().join(format!("mvb-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("g.json");
        let (r, code) = run(&cli(&["--seed", "5", "gen", "--n", "3", "--out", file.to_str().unwrap()]));
        assert_eq!(code, 0, "{}", r.to_text());
        let (r1, c1) = run(&cli(&["validate", file.to_str().unwrap()]));
        let (r2, _) = run(&cli(&["validate", file.to_str().unwrap()]));
        assert_eq!(c1, 0);
        assert_eq!(r1.hash, r2.hash);
        let (r, code) = run(&cli(&["--samples", "2", "ultracore", "--k", "1", file.to_str().unwrap()]));
        assert_eq!(code, 0, "{}", r.to_text());
        let (_, code) = run(&cli(&["validate", dir.join("missing.json").to_str().unwrap()]));
        assert_eq!(code, 2);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
