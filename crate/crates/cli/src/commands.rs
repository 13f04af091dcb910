use std::path::Path;

use anyhow::{bail, Context};
use mmlab::cd::{self, CdOptions, Interval};
use mmlab::concentration::{self, Condition};
use mmlab::experiments::{self, CoshControlParams, CounterexampleParams, ExperimentReport, SinhParams, Thm4Params};
use mmlab::report::write_report;
use mmlab::transport::{self, Kind, WeightedOneDimSpace};
use mmlab::{FiniteMmSpace, ProbWeights};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::RunConfig;
use crate::*;

type Run = anyhow::Result<Outcome>;

#[derive(Serialize)]
struct Envelope<'a, A: Serialize, R: Serialize> {
    command: &'a str,
    args: &'a A,
    config: &'a RunConfig,
    result: R,
    pass: bool,
}

/// Writes the report envelope (and CSV rows if any), prints the JSON path and
/// converts the verdict into an outcome.
fn finish<A: Serialize, R: Serialize, T: Serialize>(
    cfg: &RunConfig,
    command: &str,
    args: &A,
    result: R,
    rows: Option<&[T]>,
    pass: bool,
    witness: impl FnOnce() -> String,
) -> Run {
    let params = (command, args, cfg);
    let env = Envelope {
        command,
        args,
        config: cfg,
        result,
        pass,
    };
    let paths = write_report(&cfg.out_dir, command, &params, &env, rows)?;
    println!("{}", paths.json.display());
    if let Some(csv) = &paths.csv {
        println!("{}", csv.display());
    }
    Ok(if pass { Outcome::Pass } else { Outcome::Fail(witness()) })
}

fn no_rows() -> Option<&'static [()]> {
    None
}

fn read_json<T: DeserializeOwned>(flag: &str, path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("--{flag}: cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("--{flag}: invalid JSON in {}", path.display()))
}

fn finite_space(flag: &str, path: &Path) -> anyhow::Result<FiniteMmSpace> {
    let raw: serde_json::Value = read_json(flag, path)?;
    FiniteMmSpace::from_json(&raw.to_string()).with_context(|| format!("--{flag}: {}", path.display()))
}

fn one_dim_space(flag: &str, path: &Path) -> anyhow::Result<WeightedOneDimSpace> {
    let raw: serde_json::Value = read_json(flag, path)?;
    WeightedOneDimSpace::from_json(&raw.to_string()).with_context(|| format!("--{flag}: {}", path.display()))
}

fn weights(flag: &str, path: &Path, len: usize, cfg: &RunConfig) -> anyhow::Result<ProbWeights> {
    let w: Vec<f64> = read_json(flag, path)?;
    if w.len() != len {
        bail!("--{flag}: expected {len} weights, got {}", w.len());
    }
    ProbWeights::with_tolerance(w, cfg.tolerances.structural).with_context(|| format!("--{flag}: {}", path.display()))
}

fn interval(flag: &str, v: &[f64]) -> anyhow::Result<Interval> {
    match v {
        [a, b] => Interval::new(*a, *b).with_context(|| format!("--{flag}")),
        _ => bail!("--{flag}: expected `a,b`"),
    }
}

fn require(flag: &str, ok: bool, what: &str) -> anyhow::Result<()> {
    if !ok {
        bail!("--{flag}: {what}");
    }
    Ok(())
}

pub fn w2(cfg: &RunConfig, a: &PairArgs) -> Run {
    let space = finite_space("space", &a.space)?;
    let mu = weights("mu", &a.mu, space.len(), cfg)?;
    let nu = weights("nu", &a.nu, space.len(), cfg)?;
    let r = transport::w2_exact_with_tolerance(&space, &mu, &nu, cfg.tolerances.solver)?;
    eprintln!("W2 = {}", r.value.to_f64());
    finish(cfg, "w2", a, &r, no_rows(), true, String::new)
}

pub fn prokhorov(cfg: &RunConfig, a: &PairArgs) -> Run {
    let space = finite_space("space", &a.space)?;
    let mu = weights("mu", &a.mu, space.len(), cfg)?;
    let nu = weights("nu", &a.nu, space.len(), cfg)?;
    let d = transport::prokhorov(&space, &mu, &nu)?;
    eprintln!("d_P = {d}");
    let result = serde_json::json!({ "prokhorov": d, "box_upper": 2.0 * d });
    finish(cfg, "prokhorov", a, result, no_rows(), true, String::new)
}

pub fn kyfan(cfg: &RunConfig, a: &KyFanArgs) -> Run {
    let w: Vec<f64> = read_json("weights", &a.weights)?;
    let w = ProbWeights::with_tolerance(w, cfg.tolerances.structural).context("--weights")?;
    let f: Vec<f64> = read_json("f", &a.f)?;
    let g: Vec<f64> = read_json("g", &a.g)?;
    require("f", f.len() == w.len(), "length differs from --weights")?;
    require("g", g.len() == w.len(), "length differs from --weights")?;
    let d = transport::ky_fan(&w, &f, &g)?;
    eprintln!("d_KF = {d}");
    finish(cfg, "kyfan", a, serde_json::json!({ "ky_fan": d }), no_rows(), true, String::new)
}

pub fn entropy(cfg: &RunConfig, a: &EntropyArgs) -> Run {
    require("n-prime", a.n_prime < 0.0, "must be negative")?;
    let space = finite_space("space", &a.space)?;
    let nu = weights("nu", &a.nu, space.len(), cfg)?;
    let e = cd::renyi_entropy(space.weights(), &nu, a.n_prime)?;
    eprintln!("S_N' = {}", e.to_f64());
    finish(cfg, "entropy", a, serde_json::json!({ "entropy": e }), no_rows(), true, String::new)
}

pub fn sep(cfg: &RunConfig, a: &SepArgs) -> Run {
    require("k0", a.k0 > 0.0, "must be positive")?;
    require("k1", a.k1 > 0.0, "must be positive")?;
    let space = finite_space("space", &a.space)?;
    let est = concentration::separation_with(&space, space.weights(), a.k0, a.k1, &cfg.budgets)?;
    eprintln!("Sep = {} ({:?})", est.value, est.kind);
    finish(cfg, "sep", a, est, no_rows(), true, String::new)
}

#[derive(Serialize)]
struct ObsdiamRow {
    kappa: f64,
    lower: f64,
    upper: f64,
    upper_kind: concentration::EstimateKind,
    bound: Option<f64>,
    pass: Option<bool>,
}

pub fn obsdiam(cfg: &RunConfig, a: &ObsdiamArgs) -> Run {
    for &k in &a.kappa {
        require("kappa", k > 0.0 && k < 1.0, "values must lie in (0, 1)")?;
    }
    let space = finite_space("space", &a.space)?;
    let mut rows = Vec::new();
    for &kappa in &a.kappa {
        let s = concentration::obsdiam_sandwich_with(&space, space.weights(), kappa, &cfg.budgets, cfg.seed)?;
        let bound = match (a.k, a.n) {
            (Some(k), Some(n)) => Some(match a.variant.into() {
                Condition::Cd => concentration::cd_obsdiam_bound(k, n, kappa),
                Condition::CdStar => concentration::cdstar_obsdiam_bound(k, n, kappa),
            }?),
            _ => None,
        };
        rows.push(ObsdiamRow {
            kappa,
            lower: s.lower,
            upper: s.upper,
            upper_kind: s.upper_kind,
            bound,
            pass: bound.map(|b| s.lower <= b),
        });
    }
    let pass = rows.iter().all(|r| r.pass != Some(false));
    let witness = || {
        let r = rows.iter().find(|r| r.pass == Some(false)).expect("a failing row");
        format!("kappa = {}: lower bound {} exceeds {}", r.kappa, r.lower, r.bound.unwrap_or(f64::NAN))
    };
    finish(cfg, "obsdiam", a, &rows, Some(&rows), pass, witness)
}

#[derive(Serialize)]
struct CdRow {
    t: f64,
    n_prime: f64,
    lhs: f64,
    rhs: f64,
    relative_margin: f64,
}

pub fn cd_check(cfg: &RunConfig, a: &CdCheckArgs) -> Run {
    let space = one_dim_space("space", &a.space)?;
    let measure = |file: &Option<std::path::PathBuf>, iv: &Option<Vec<f64>>, ff: &str, fi: &str| -> anyhow::Result<ProbWeights> {
        match (file, iv) {
            (Some(p), _) => weights(ff, p, space.grid_size(), cfg),
            (None, Some(v)) => {
                let i = interval(fi, v)?;
                space.conditioned_on_interval(i.a, i.b).with_context(|| format!("--{fi}"))
            }
            (None, None) => bail!("--{ff} or --{fi} is required"),
        }
    };
    let p0 = measure(&a.rho0, &a.interval0, "rho0", "interval0")?;
    let p1 = measure(&a.rho1, &a.interval1, "rho1", "interval1")?;
    require("N", a.n < 0.0, "must be negative")?;
    let t_grid = a.t_grid.clone().unwrap_or_else(|| (0..=8).map(|i| i as f64 / 8.0).collect());
    for &t in &t_grid {
        require("t-grid", (0.0..=1.0).contains(&t), "values must lie in [0, 1]")?;
    }
    let np = a.n_prime.clone().unwrap_or_else(|| cd::default_n_prime_grid(a.n));
    for &v in &np {
        require("n-prime", v >= a.n && v < 0.0, "values must lie in [N, 0)")?;
    }
    if let Some(c) = a.cut {
        require("cut", space.kind() == Kind::Circle && c < space.grid_size(), "needs a circle and a cell index below M")?;
    }
    let opts = CdOptions {
        budget: cfg.cd_budget,
        cut: a.cut,
    };
    let r = cd::cd_check_1d(&space, &p0, &p1, a.k, a.n, &t_grid, &np, a.variant.into(), &opts)?;
    let rows: Vec<CdRow> = r
        .cells
        .iter()
        .map(|c| CdRow {
            t: c.t,
            n_prime: c.n_prime,
            lhs: c.lhs.to_f64(),
            rhs: c.rhs.to_f64(),
            relative_margin: c.relative_margin,
        })
        .collect();
    let witness = || {
        let c = r
            .cells
            .iter()
            .find(|c| c.t == r.worst_t && c.n_prime == r.worst_n_prime)
            .expect("worst cell");
        format!(
            "t = {}, N' = {}: entropy {} > bound {} (relative margin {:e}, tolerance {:e})",
            c.t,
            c.n_prime,
            c.lhs.to_f64(),
            c.rhs.to_f64(),
            c.relative_margin,
            r.tolerance
        )
    };
    let pass = r.pass;
    finish(cfg, "cd-check", a, &r, Some(&rows), pass, witness)
}

pub fn bm_check(cfg: &RunConfig, a: &BmCheckArgs) -> Run {
    let space = one_dim_space("space", &a.space)?;
    let a0 = interval("a0", &a.a0)?;
    let a1 = interval("a1", &a.a1)?;
    require("t", (0.0..=1.0).contains(&a.t), "must lie in [0, 1]")?;
    require("N", a.n < 0.0, "must be negative")?;
    require("tol", a.tol >= 0.0, "must be nonnegative")?;
    let r = cd::bm_check(&space, a0, a1, a.t, a.k, a.n, a.tol)?;
    let witness = || format!("mu(A_t)^(1/N) = {} exceeds {} by {:e}", r.lhs.to_f64(), r.rhs.to_f64(), -r.margin);
    let pass = r.pass;
    finish(cfg, "bm-check", a, &r, no_rows(), pass, witness)
}

pub fn convexity(cfg: &RunConfig, a: &ConvexityArgs) -> Run {
    let f: Vec<f64> = read_json("f", &a.f)?;
    require("f", f.len() >= 3 && f.iter().all(|v| v.is_finite()), "needs at least 3 finite samples")?;
    require("h", a.h > 0.0, "must be positive")?;
    require("N", a.n < 0.0, "must be negative")?;
    let r = cd::kn_convexity_check(&f, a.k, a.n, a.h, a.periodic, &cfg.convexity)?;
    let witness = || format!("relative residual {:e} at sample {} below {:e}", r.min_relative_residual, r.argmin, r.threshold);
    let pass = r.pass;
    finish(cfg, "convexity", a, &r, no_rows(), pass, witness)
}

fn experiment_witness(r: &ExperimentReport) -> String {
    match r.rows.iter().find(|x| x.pass == Some(false)) {
        Some(x) => format!(
            "{} at {} = {}: value {} against {}",
            x.quantity,
            x.n,
            x.source,
            x.value,
            x.bound.map_or("its predecessor".to_string(), |b| b.to_string())
        ),
        None => "no failing row".into(),
    }
}

fn finish_experiment<A: Serialize>(cfg: &RunConfig, command: &str, args: &A, r: &ExperimentReport, extra: serde_json::Value) -> Run {
    let result = serde_json::json!({ "report": r, "extra": extra });
    finish(cfg, command, args, result, Some(&r.rows), r.pass, || experiment_witness(r))
}

pub fn counterexample(cfg: &RunConfig, a: &CounterexampleArgs) -> Run {
    let d = if a.d == "auto" {
        experiments::minimal_diameter(a.k, a.n)
    } else {
        a.d.parse::<f64>().map_err(|_| anyhow::anyhow!("--D: expected a number or `auto`, got {:?}", a.d))?
    };
    require("n-list", !a.n_list.is_empty(), "must not be empty")?;
    let m = a.m.unwrap_or(cfg.grids.counterexample);
    let p = CounterexampleParams::new(a.k, a.n, d, a.n_list.clone(), m, a.eps).context("--K/--N/--D/--M/--eps")?;
    let r = experiments::counterexample_report(&p)?;
    let w = experiments::two_point_cd_witness(d, a.witness_grid).context("--witness-grid")?;
    let extra = serde_json::json!({ "d": d, "m": m, "two_point_witness": w });
    finish_experiment(cfg, "counterexample", a, &r, extra)
}

pub fn cosh_family(cfg: &RunConfig, a: &CoshFamilyArgs) -> Run {
    let p = CoshControlParams {
        k: a.k,
        n: a.n,
        lambda: a.lambda,
        l: a.l,
        m: a.m.unwrap_or(cfg.grids.cosh_family),
        pairs: a.pairs,
        bm_pairs: a.bm_pairs,
        budget: cfg.cd_budget,
        seed: cfg.seed,
        ..CoshControlParams::default()
    };
    let r = experiments::cosh_positive_control(&p)?;
    finish_experiment(cfg, "cosh-family", a, &r, serde_json::Value::Null)
}

pub fn sinh_example(cfg: &RunConfig, a: &SinhArgs) -> Run {
    require("steps", a.steps.iter().all(|h| *h > 0.0), "values must be positive")?;
    require("R", a.r.len() >= 2, "needs at least two radii")?;
    let p = SinhParams {
        k: a.k,
        n: a.n,
        c_list: a.c.clone(),
        r_list: a.r.clone(),
        steps: a.steps.clone(),
        half_width: a.half_width,
    };
    let r = experiments::sinh_example_report(&p)?;
    finish_experiment(cfg, "sinh-example", a, &r, serde_json::Value::Null)
}

pub fn bm_collapse(cfg: &RunConfig, a: &BmCollapseArgs) -> Run {
    let space = match &a.space {
        Some(p) => one_dim_space("space", p)?,
        None => WeightedOneDimSpace::uniform(Kind::Segment, 3.0, 300)?,
    };
    let a0 = interval("a0", &a.a0)?;
    let a1 = interval("a1", &a.a1)?;
    let ks = a.k_list.clone().unwrap_or_else(|| experiments::log_sweep(a.decades, a.per_decade));
    require("K-list", ks.len() >= 2, "needs at least two values")?;
    let r = experiments::bm_collapse_sweep(&space, a0, a1, a.t, &ks, a.n)?;
    finish_experiment(cfg, "bm-collapse", a, &r, serde_json::Value::Null)
}

pub fn thm4_verify(cfg: &RunConfig, a: &Thm4Args) -> Run {
    require("K-list", a.k_list.len() >= 2 && a.k_list.iter().all(|k| *k > 0.0), "needs at least two positive values")?;
    require("kappas", a.kappas.iter().all(|k| *k > 0.0 && *k < 1.0), "values must lie in (0, 1)")?;
    let p = Thm4Params {
        k_list: a.k_list.clone(),
        kappas: a.kappas.clone(),
        n: a.n,
        l: a.l,
        m: a.m.unwrap_or(cfg.grids.thm4),
        slack: a.slack,
        seed: cfg.seed,
        budgets: cfg.budgets,
        ..Thm4Params::default()
    };
    let r = experiments::thm4_verification(&p)?;
    finish_experiment(cfg, "thm4-verify", a, &r, serde_json::Value::Null)
}

pub fn lemma_suite(cfg: &RunConfig, a: &LemmaArgs) -> Run {
    require("max-points", a.max_points >= 2, "must be at least 2")?;
    require("n-primes", !a.n_primes.is_empty() && a.n_primes.iter().all(|n| *n < 0.0), "values must be negative")?;
    let space = match &a.space {
        Some(p) => Some(finite_space("space", p)?),
        None => None,
    };
    let c = cd::LemmaSuiteConfig {
        trials: a.trials,
        max_points: a.max_points,
        n_primes: a.n_primes.clone(),
        seed: cfg.seed,
        tolerance: a.tol,
    };
    let r = cd::entropy_lemma_suite(space.as_ref(), &c)?;
    let pass = r.all_pass();
    let witness = || format!("{:?}", r.failures.first());
    finish(cfg, "lemma-suite", a, &r, Some(&r.tallies), pass, witness)
}
