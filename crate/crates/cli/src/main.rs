//! `mmlab`: command-line front end. Exit status 0 on pass, 1 on a failed check,
//! 2 on usage or input errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "mmlab", version, about = "Metric measure space laboratory")]
struct Cli {
    /// JSON file mirroring the run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report directory (overrides the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized procedures (overrides the configuration).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact W2 between two measures on a finite space.
    W2(PairArgs),
    /// Exact Prokhorov distance and the box-distance bound 2 d_P.
    Prokhorov(PairArgs),
    /// Ky Fan distance between two functions on a weighted finite set.
    Kyfan(KyFanArgs),
    /// Rényi entropy of a measure relative to the space's weights.
    Entropy(EntropyArgs),
    /// Separation distance Sep(X; k0, k1).
    Sep(SepArgs),
    /// Observable diameter sandwich, optionally against the CD/CD* bounds.
    Obsdiam(ObsdiamArgs),
    /// CD / CD* inequality check on a weighted segment or circle.
    CdCheck(CdCheckArgs),
    /// Brunn-Minkowski margin for two intervals.
    BmCheck(BmCheckArgs),
    /// (K, N)-convexity certificate for grid samples of f.
    Convexity(ConvexityArgs),
    /// Collapsing circles with negative curvature and dimension.
    Counterexample(CounterexampleArgs),
    /// Certified cosh-family segment, optionally with CD/BM positive controls.
    CoshFamily(CoshFamilyArgs),
    /// Convexity and volume growth of the sinh example.
    SinhExample(SinhArgs),
    /// Brunn-Minkowski right-hand side as K grows.
    BmCollapse(BmCollapseArgs),
    /// Separation and observable diameter of cosh-family segments against the bounds.
    Thm4Verify(Thm4Args),
    /// Randomized checks of the finite entropy lemmas.
    LemmaSuite(LemmaArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct PairArgs {
    /// FiniteMmSpace JSON.
    #[arg(long)]
    space: PathBuf,
    /// Weights JSON array.
    #[arg(long)]
    mu: PathBuf,
    /// Weights JSON array.
    #[arg(long)]
    nu: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct KyFanArgs {
    /// Weights JSON array.
    #[arg(long)]
    weights: PathBuf,
    /// Function values JSON array.
    #[arg(long)]
    f: PathBuf,
    /// Function values JSON array.
    #[arg(long)]
    g: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EntropyArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    nu: PathBuf,
    #[arg(long = "n-prime", allow_hyphen_values = true)]
    n_prime: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct SepArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    k0: f64,
    #[arg(long)]
    k1: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct ObsdiamArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    kappa: Vec<f64>,
    /// Curvature for the bound columns.
    #[arg(long = "K", allow_hyphen_values = true, requires = "n")]
    k: Option<f64>,
    /// Dimension for the bound columns.
    #[arg(long = "N", allow_hyphen_values = true, requires = "k")]
    n: Option<f64>,
    #[arg(long, value_enum, default_value = "cd")]
    variant: Variant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Cd,
    Cdstar,
}

impl From<Variant> for mmlab::concentration::Condition {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Cd => Self::Cd,
            Variant::Cdstar => Self::CdStar,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct CdCheckArgs {
    /// WeightedOneDimSpace JSON.
    #[arg(long)]
    space: PathBuf,
    /// Cell masses of the first measure (JSON array); or use --interval0.
    #[arg(long, conflicts_with = "interval0", required_unless_present = "interval0")]
    rho0: Option<PathBuf>,
    #[arg(long, conflicts_with = "interval1", required_unless_present = "interval1")]
    rho1: Option<PathBuf>,
    /// Reference measure conditioned on `a,b`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    interval0: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    interval1: Option<Vec<f64>>,
    #[arg(long = "K", allow_hyphen_values = true)]
    k: f64,
    #[arg(long = "N", allow_hyphen_values = true)]
    n: f64,
    /// Interpolation times; defaults to 9 equispaced points.
    #[arg(long = "t-grid", value_delimiter = ',')]
    t_grid: Option<Vec<f64>>,
    /// Dimension grid; defaults to {N, N/2, N/4, -0.1} within [N, 0).
    #[arg(long = "n-prime", value_delimiter = ',', allow_hyphen_values = true)]
    n_prime: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "cd")]
    variant: Variant,
    /// Chart cut cell for circle inputs spanning half the circumference or more.
    #[arg(long)]
    cut: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct BmCheckArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    a0: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    a1: Vec<f64>,
    #[arg(long)]
    t: f64,
    #[arg(long = "K", allow_hyphen_values = true)]
    k: f64,
    #[arg(long = "N", allow_hyphen_values = true)]
    n: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct ConvexityArgs {
    /// Samples of f on a uniform grid (JSON array).
    #[arg(long)]
    f: PathBuf,
    #[arg(long = "K", allow_hyphen_values = true)]
    k: f64,
    #[arg(long = "N", allow_hyphen_values = true)]
    n: f64,
    #[arg(long)]
    h: f64,
    #[arg(long)]
    periodic: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct CounterexampleArgs {
    #[arg(long = "K", allow_hyphen_values = true, default_value_t = -1.0)]
    k: f64,
    #[arg(long = "N", allow_hyphen_values = true, default_value_t = -1.0)]
    n: f64,
    /// Circle diameter, or `auto` for the smallest admissible pi sqrt((N-1)/K).
    #[arg(long = "D", default_value = "auto")]
    d: String,
    #[arg(long = "n-list", value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
    n_list: Vec<u32>,
    /// Grid size; defaults to the configuration's.
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    /// Grid size of the two-point witness search over q.
    #[arg(long = "witness-grid", default_value_t = 10_001)]
    witness_grid: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct CoshFamilyArgs {
    #[arg(long = "K", default_value_t = 1.0)]
    k: f64,
    #[arg(long = "N", allow_hyphen_values = true, default_value_t = -1.0)]
    n: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long = "L", default_value_t = 3.0)]
    l: f64,
    #[arg(long = "M")]
    m: Option<usize>,
    /// Random smooth density pairs for the CD positive control (0 skips it).
    #[arg(long, default_value_t = 0)]
    pairs: usize,
    /// Random interval pairs for the Brunn-Minkowski positive control.
    #[arg(long = "bm-pairs", default_value_t = 0)]
    bm_pairs: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct SinhArgs {
    #[arg(long = "K", default_value_t = 1.0)]
    k: f64,
    #[arg(long = "N", allow_hyphen_values = true, default_value_t = -1.0)]
    n: f64,
    #[arg(long = "C", value_delimiter = ',', default_value = "0.1,1,10")]
    c: Vec<f64>,
    #[arg(long = "R", value_delimiter = ',', default_value = "1,2,4,8,16")]
    r: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.001")]
    steps: Vec<f64>,
    #[arg(long = "half-width", default_value_t = 5.0)]
    half_width: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct BmCollapseArgs {
    /// WeightedOneDimSpace JSON; defaults to the uniform segment [0, 3] with 300 cells.
    #[arg(long)]
    space: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0,1", allow_hyphen_values = true)]
    a0: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2,3", allow_hyphen_values = true)]
    a1: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    /// Explicit curvature list; defaults to a log sweep from 1 to 10^decades.
    #[arg(long = "K-list", value_delimiter = ',')]
    k_list: Option<Vec<f64>>,
    #[arg(long, default_value_t = 4)]
    decades: u32,
    #[arg(long = "per-decade", default_value_t = 4)]
    per_decade: u32,
    #[arg(long = "N", allow_hyphen_values = true, default_value_t = -1.0)]
    n: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct Thm4Args {
    #[arg(long = "K-list", value_delimiter = ',', default_value = "1,4,16")]
    k_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2,0.4")]
    kappas: Vec<f64>,
    #[arg(long = "N", allow_hyphen_values = true, default_value_t = -1.0)]
    n: f64,
    #[arg(long = "L", default_value_t = 3.0)]
    l: f64,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long, default_value_t = 0.02)]
    slack: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct LemmaArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long = "max-points", default_value_t = 10)]
    max_points: usize,
    #[arg(long = "n-primes", value_delimiter = ',', default_value = "-0.5,-1,-3", allow_hyphen_values = true)]
    n_primes: Vec<f64>,
    /// Fixed FiniteMmSpace JSON; random planar spaces otherwise.
    #[arg(long)]
    space: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

/// A failed check or an input problem, with the exit status it maps to.
pub enum Outcome {
    Pass,
    Fail(String),
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = cli.out {
        cfg.out_dir = o;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    use commands as c;
    match &cli.command {
        Command::W2(a) => c::w2(&cfg, a),
        Command::Prokhorov(a) => c::prokhorov(&cfg, a),
        Command::Kyfan(a) => c::kyfan(&cfg, a),
        Command::Entropy(a) => c::entropy(&cfg, a),
        Command::Sep(a) => c::sep(&cfg, a),
        Command::Obsdiam(a) => c::obsdiam(&cfg, a),
        Command::CdCheck(a) => c::cd_check(&cfg, a),
        Command::BmCheck(a) => c::bm_check(&cfg, a),
        Command::Convexity(a) => c::convexity(&cfg, a),
        Command::Counterexample(a) => c::counterexample(&cfg, a),
        Command::CoshFamily(a) => c::cosh_family(&cfg, a),
        Command::SinhExample(a) => c::sinh_example(&cfg, a),
        Command::BmCollapse(a) => c::bm_collapse(&cfg, a),
        Command::Thm4Verify(a) => c::thm4_verify(&cfg, a),
        Command::LemmaSuite(a) => c::lemma_suite(&cfg, a),
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("MMLAB_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| anyhow::anyhow!("MMLAB_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail(witness)) => {
            eprintln!("check failed: {witness}");
            ExitCode::from(1)
        }
        Err(e) => {
            // a construction that fails its own certificate is a failed check, not bad input
            if let Some(mmlab::Error::ConvexityViolation { .. }) = e.downcast_ref::<mmlab::Error>() {
                eprintln!("check failed: {e:#}");
                return ExitCode::from(1);
            }
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
