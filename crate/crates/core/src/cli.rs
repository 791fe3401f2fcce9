//! Command-line driver: build or load a model, run one solver, report.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::baselines::{select_lambda, MsdSolver, SubgradientSolver, LAMBDA_GRID};
use crate::decomposition::NodeOrder;
use crate::diagnostics::{check_ewta, check_j_consistency_enhanced, extract_primal};
use crate::error::{Error, Result};
use crate::io::generators::{gen_potts_2x2, gen_stereo, PottsConfig, PottsVariant, SeparatorMode, StereoConfig};
use crate::io::{parse_model, write_trace};
use crate::jstructure::JStructure;
use crate::model::Model;
use crate::problem::{Effort, Problem};
use crate::trws::tree::TreeParams;
use crate::trws::{drive, BoundTrace, ChainSolver, Direction, GeneralSolver, PassSolver, ReuseMode, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Stereo,
    #[value(name = "potts2x2")]
    Potts2x2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Trws,
    TrwsGeneral,
    Msd,
    Subgrad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Separators {
    Singleton,
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    AllEqual,
    Pairwise,
}

#[derive(Debug, Parser)]
#[command(name = "trws", about = "Tree-reweighted message passing for higher-order MRFs")]
pub struct Args {
    /// Model file in the HOMRF format.
    #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
    pub input: Option<PathBuf>,
    /// Generate a synthetic model instead of reading one.
    #[arg(long, value_enum)]
    pub gen: Option<GenKind>,
    #[arg(long, requires = "gen", default_value_t = 5)]
    pub width: usize,
    #[arg(long, requires = "gen", default_value_t = 5)]
    pub height: usize,
    #[arg(long, requires = "gen", default_value_t = 4)]
    pub labels: usize,
    /// Smoothness weight of the stereo triplet cost.
    #[arg(long, requires = "gen", default_value_t = 15.0)]
    pub smoothness: f64,
    /// Block weight of the Potts cost.
    #[arg(long, requires = "gen", default_value_t = 1.0)]
    pub block_weight: f64,
    /// Potts unaries are uniform noise in [0, unary-scale].
    #[arg(long, requires = "gen", default_value_t = 1.0)]
    pub unary_scale: f64,
    #[arg(long, value_enum, requires = "gen", default_value_t = Variant::AllEqual)]
    pub potts_variant: Variant,
    #[arg(long, value_enum, requires = "gen", default_value_t = Separators::Singleton)]
    pub separators: Separators,
    #[arg(long, value_enum, default_value_t = Method::Trws)]
    pub method: Method,
    /// Pass limit (default 500). Given without --eps, exactly this many passes run.
    #[arg(long)]
    pub passes: Option<usize>,
    /// Relative bound change below which the run stops (default 1e-7).
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// A file with a node permutation, or `input` for the model's own order.
    #[arg(long, default_value = "input")]
    pub node_order: String,
    /// Nested-separator reuse (trws only).
    #[arg(long)]
    pub reuse: Option<ReuseMode>,
    /// Subgradient step scale; picked from a grid when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// CSV bound trace output.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl Args {
    pub fn pass_limit(&self) -> usize {
        self.passes.unwrap_or(500)
    }

    /// A negative threshold never fires.
    pub fn stop_eps(&self) -> f64 {
        match (self.passes, self.eps) {
            (_, Some(eps)) => eps,
            (Some(_), None) => -1.0,
            (None, None) => 1e-7,
        }
    }
}

/// The outcome of one run.
#[derive(Debug, Clone)]
pub struct Report {
    pub trace: BoundTrace,
    pub bound: f64,
    pub primal_energy: f64,
    pub verdict: String,
}

/// Flag combinations clap cannot express.
pub fn check_usage(args: &Args) -> std::result::Result<(), String> {
    if args.reuse.is_some() && args.method != Method::Trws {
        return Err("--reuse requires --method trws".into());
    }
    if args.lambda.is_some() && args.method != Method::Subgrad {
        return Err("--lambda requires --method subgrad".into());
    }
    if args.passes == Some(0) {
        return Err("--passes must be at least 1".into());
    }
    Ok(())
}

fn load(args: &Args) -> Result<(Model, JStructure, NodeOrder)> {
    let (model, j, own) = if let Some(path) = &args.input {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        let parsed = parse_model(&text)?;
        (parsed.model, parsed.j, parsed.order)
    } else {
        let separators = match args.separators {
            Separators::Singleton => SeparatorMode::Singleton,
            Separators::Pair => SeparatorMode::Pair,
        };
        let inst = match args.gen {
            Some(GenKind::Stereo) => gen_stereo(&StereoConfig {
                width: args.width,
                height: args.height,
                labels: args.labels,
                lambda: args.smoothness,
                unaries: None,
                separators,
                seed: args.seed,
            })?,
            _ => gen_potts_2x2(&PottsConfig {
                width: args.width,
                height: args.height,
                labels: args.labels,
                weight: args.block_weight,
                variant: match args.potts_variant {
                    Variant::AllEqual => PottsVariant::AllEqual,
                    Variant::Pairwise => PottsVariant::Pairwise,
                },
                unary_scale: args.unary_scale,
                separators,
                seed: args.seed,
            })?,
        };
        (inst.model, inst.j, None)
    };
    let order = if args.node_order == "input" {
        own.unwrap_or_else(|| NodeOrder::identity(model.node_count()))
    } else {
        let text = fs::read_to_string(&args.node_order)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", args.node_order)))?;
        let perm = text
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::InvalidOrder(format!("bad node id '{t}'"))))
            .collect::<Result<Vec<usize>>>()?;
        if perm.len() != model.node_count() {
            return Err(Error::InvalidOrder(format!("{} nodes listed, model has {}", perm.len(), model.node_count())));
        }
        NodeOrder::new(perm)?
    };
    Ok((model, j, order))
}

/// Message solver that fails the run if a pass exceeds |J'| operations.
struct EffortChecked<'p> {
    inner: ChainSolver<'p>,
    limit: u64,
}

impl PassSolver for EffortChecked<'_> {
    fn method(&self) -> &'static str {
        "trws"
    }

    fn pass(&mut self, direction: Direction) -> Result<f64> {
        let bound = self.inner.pass(direction)?;
        let ops = self.inner.last_pass_ops();
        if ops > self.limit {
            return Err(Error::EffortBound { ops, limit: self.limit });
        }
        Ok(bound)
    }

    fn effort(&self) -> Effort {
        self.inner.effort()
    }
}

fn tree_verdict(p: &Problem, params: &TreeParams) -> String {
    match check_ewta(p, params) {
        Ok(r) if r.holds() => "tree agreement holds".into(),
        Ok(r) => format!("tree agreement fails on {} factors", r.violations.len()),
        Err(Error::TooLarge { .. }) => "tree agreement not checked (state space too large)".into(),
        Err(e) => format!("tree agreement not checked ({e})"),
    }
}

/// Runs the configured solver on `p`.
pub fn solve(p: &Problem, args: &Args) -> Result<Report> {
    let (trace, theta, verdict) = match args.method {
        Method::Trws => {
            let opts = SolverOptions {
                max_passes: args.pass_limit(),
                eps: args.stop_eps(),
                reuse: args.reuse.unwrap_or_default(),
                ..SolverOptions::default()
            };
            let mut s = EffortChecked { inner: ChainSolver::start(p, opts)?, limit: p.message_edge_count() as u64 };
            let trace = drive(&mut s, args.pass_limit(), args.stop_eps())?;
            let params = s.inner.tree_params();
            (trace, s.inner.cumulative(), tree_verdict(p, &params))
        }
        Method::TrwsGeneral => {
            let mut s = GeneralSolver::primed(p)?;
            let trace = drive(&mut s, args.pass_limit(), args.stop_eps())?;
            (trace, s.params().cumulative(p), tree_verdict(p, s.params()))
        }
        Method::Msd => {
            let mut s = MsdSolver::new(p);
            let trace = drive(&mut s, args.pass_limit(), args.stop_eps())?;
            let r = check_j_consistency_enhanced(&p.model, &p.j, s.theta());
            let verdict = if r.holds() {
                "J-consistency holds".to_string()
            } else {
                format!("J-consistency fails on {} edges", r.violations.len())
            };
            (trace, s.theta().to_vec(), verdict)
        }
        Method::Subgrad => {
            let (s, trace) = match args.lambda {
                Some(lambda) => {
                    let mut s = SubgradientSolver::new(p, lambda)?;
                    let trace = drive(&mut s, args.pass_limit(), -1.0)?;
                    (s, trace)
                }
                None => {
                    let (_, s, trace) = select_lambda(p, &LAMBDA_GRID, args.pass_limit())?;
                    (s, trace)
                }
            };
            (trace, s.params().cumulative(p), tree_verdict(p, s.params()))
        }
    };
    let bound = trace.last_bound().unwrap_or(f64::NEG_INFINITY);
    let labeling = extract_primal(p, &theta);
    let primal_energy = p.model.energy(&labeling)?;
    Ok(Report { trace, bound, primal_energy, verdict })
}

/// Loads, solves, writes the trace, and prints the summary to `out`.
pub fn run(args: &Args, out: &mut dyn Write) -> Result<Report> {
    let (model, j, order) = load(args)?;
    let p = Problem::new(&model, &j, &order)?;
    let report = solve(&p, args)?;
    if let Some(path) = &args.trace {
        let file = fs::File::create(path).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
        write_trace(file, &report.trace)?;
    }
    writeln!(out, "method: {}", report.trace.rows.first().map_or("", |r| r.method.as_str()))?;
    writeln!(out, "passes: {}", report.trace.len())?;
    writeln!(out, "bound: {:.12}", report.bound)?;
    writeln!(out, "primal energy: {:.12}", report.primal_energy)?;
    writeln!(out, "verdict: {}", report.verdict)?;
    Ok(report)
}

/// Process entry: 0 on success, 1 on input or solver errors, 2 on usage errors.
pub fn main_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 { write!(out, "{}", e.render()) } else { write!(err, "{}", e.render()) };
            return code;
        }
    };
    if let Err(msg) = check_usage(&args) {
        let _ = writeln!(err, "error: {msg}");
        return 2;
    }
    match run(&args, out) {
        Ok(_) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(argv: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = main_with(std::iter::once("trws").chain(argv.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn input_and_gen_conflict() {
        assert_eq!(run_args(&["--input", "x.txt", "--gen", "stereo"]).0, 2);
    }

    #[test]
    fn no_source_is_usage_error() {
        assert_eq!(run_args(&["--method", "msd"]).0, 2);
    }

    #[test]
    fn reuse_needs_trws() {
        let (code, _, err) = run_args(&["--gen", "potts2x2", "--method", "msd", "--reuse", "after"]);
        assert_eq!(code, 2);
        assert!(err.contains("--reuse"), "{err}");
    }

    #[test]
    fn missing_file_exits_one() {
        let (code, _, err) = run_args(&["--input", "definitely-missing.txt"]);
        assert_eq!(code, 1);
        assert!(err.contains("definitely-missing.txt"), "{err}");
    }

    #[test]
    fn small_potts_run_reports() {
        let (code, out, _) =
            run_args(&["--gen", "potts2x2", "--width", "3", "--height", "3", "--labels", "2", "--passes", "10"]);
        assert_eq!(code, 0);
        assert!(out.contains("bound:") && out.contains("primal energy:") && out.contains("verdict:"), "{out}");
    }
}
