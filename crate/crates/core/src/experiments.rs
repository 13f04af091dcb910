//! End-to-end constructions: the collapsing circle counterexample, the two-point
//! witness, certified cosh-family segments, the sinh example on the line, the
//! Brunn-Minkowski collapse sweep and the observable-diameter bound checks.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cd::{bm_check, cd_check_1d, kn_convexity_check, signed_float, volume_growth_probe, ConvexityReport, Interval};
use crate::coefficients::f_softabs;
use crate::concentration::{
    cd_obsdiam_bound, cd_separation_bound, cdstar_obsdiam_bound, cdstar_separation_bound, levy_bound_sequence,
    obsdiam_sandwich_with, separation_with, Condition,
};
use crate::config::{Budgets, CdBudget, ConvexityTolerance};
use crate::error::{Error, Result};
use crate::quadrature::integrate_doubling;
use crate::space::{FiniteMmSpace, ProbWeights};
use crate::transport::{prokhorov, Kind, WeightedOneDimSpace};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    /// Row parameter: softness index, curvature, radius or step, depending on the experiment.
    pub n: f64,
    pub quantity: String,
    #[serde(serialize_with = "signed_float")]
    pub value: f64,
    pub bound: Option<f64>,
    pub pass: Option<bool>,
    /// Operation that produced the value.
    pub source: String,
}

impl ExperimentRow {
    fn new(n: f64, quantity: impl Into<String>, value: f64, source: &str) -> Self {
        Self {
            n,
            quantity: quantity.into(),
            value,
            bound: None,
            pass: None,
            source: source.to_string(),
        }
    }

    fn bounded(mut self, bound: f64, pass: bool) -> Self {
        self.bound = Some(bound);
        self.pass = Some(pass);
        self
    }

    fn verdict(mut self, pass: bool) -> Self {
        self.pass = Some(pass);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub metadata: serde_json::Value,
    pub rows: Vec<ExperimentRow>,
    pub pass: bool,
}

impl ExperimentReport {
    fn assemble(experiment: &str, metadata: serde_json::Value, rows: Vec<ExperimentRow>) -> Self {
        let pass = rows.iter().all(|r| r.pass != Some(false));
        Self {
            experiment: experiment.to_string(),
            metadata,
            rows,
            pass,
        }
    }

    pub fn rows_named<'a>(&'a self, quantity: &'a str) -> impl Iterator<Item = &'a ExperimentRow> + 'a {
        self.rows.iter().filter(move |r| r.quantity == quantity)
    }
}

/// Smallest admissible circle diameter `pi sqrt((N-1)/K)` for the counterexample.
pub fn minimal_diameter(k: f64, n: f64) -> f64 {
    PI * ((n - 1.0) / k).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleParams {
    pub k: f64,
    pub n: f64,
    pub d: f64,
    pub n_list: Vec<u32>,
    pub m: usize,
    pub eps: f64,
}

impl CounterexampleParams {
    pub fn new(k: f64, n: f64, d: f64, n_list: Vec<u32>, m: usize, eps: f64) -> Result<Self> {
        if !(k < 0.0) {
            return Err(Error::DomainError(format!("K = {k} must be negative")));
        }
        if !(n < 0.0) {
            return Err(Error::InvalidDimension(n));
        }
        let dmin = minimal_diameter(k, n);
        if !(d >= dmin * (1.0 - 1e-12)) {
            return Err(Error::DomainError(format!("D = {d} below pi sqrt((N-1)/K) = {dmin}")));
        }
        if m < 256 || !m.is_multiple_of(2) {
            return Err(Error::DomainError(format!("grid size {m} must be even and at least 256")));
        }
        if !(eps > 0.0 && eps < d / 2.0) {
            return Err(Error::DomainError(format!("eps = {eps} outside (0, D/2)")));
        }
        if n_list.is_empty() || n_list.contains(&0) {
            return Err(Error::DomainError("softness indices must be positive".into()));
        }
        Ok(Self { k, n, d, n_list, m, eps })
    }

    /// `K = -1, N = -1`, minimal `D`, `n = 1, 2, 4, ..., 64`, `M = 2048`, `eps = 0.2`.
    pub fn standard() -> Self {
        let d = minimal_diameter(-1.0, -1.0);
        Self::new(-1.0, -1.0, d, vec![1, 2, 4, 8, 16, 32, 64], 2048, 0.2).expect("valid defaults")
    }

    pub fn n_prime(&self) -> f64 {
        self.n - 1.0
    }

    pub fn r(&self) -> f64 {
        self.d / PI
    }

    pub fn kappa(&self) -> f64 {
        self.k / self.n_prime()
    }

    /// `F_n(sin(t/r))`.
    pub fn profile(&self, softness: u32, t: f64) -> f64 {
        f_softabs(softness as f64, (t / self.r()).sin())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub softness: u32,
    pub a_n: f64,
    pub space: WeightedOneDimSpace,
    /// `sum_cells a_n^{N'} ∫_cell F_n^{N'}` before renormalization.
    pub discrete_mass: f64,
}

const COUNTEREXAMPLE_REL_TOL: f64 = 1e-12;

/// `∫_lo^hi F_n(sin(t/r))^{N'} dt` on a stretch of one half circle.
fn profile_integral(params: &CounterexampleParams, softness: u32, lo: f64, hi: f64) -> Result<f64> {
    let np = params.n_prime();
    integrate_doubling(|t| params.profile(softness, t).powf(np), lo, hi, 64, COUNTEREXAMPLE_REL_TOL, 14)
}

/// `a_n = (∫_{S^1} F_n^{N'} dvol)^{-1/N'}`; both half circles carry equal mass.
pub fn counterexample_normalizer(params: &CounterexampleParams, softness: u32) -> Result<f64> {
    let half = profile_integral(params, softness, 0.0, params.d)?;
    Ok((2.0 * half).powf(-1.0 / params.n_prime()))
}

/// Circle of circumference `2D` with density `(a_n F_n(sin(t/r)))^{N'}` at arclength `t`.
pub fn build_counterexample(params: &CounterexampleParams, softness: u32) -> Result<Counterexample> {
    let a_n = counterexample_normalizer(params, softness)?;
    let np = params.n_prime();
    let density = |t: f64| (a_n * params.profile(softness, t)).powf(np);
    let length = 2.0 * params.d;
    let space = WeightedOneDimSpace::from_density(Kind::Circle, 0.0, length, params.m, density)?;
    let h = space.h();
    let discrete_mass = crate::quadrature::cell_averages(density, 0.0, length, params.m).iter().sum::<f64>() * h;
    Ok(Counterexample {
        softness,
        a_n,
        space,
        discrete_mass,
    })
}

/// `(K, N')`-convexity certificate of the density exponent `f_n = -N' log(a_n F_n(sin(t/r)))`
/// at cell centers, with the periodic stencil over the whole circle.
pub fn counterexample_convexity(params: &CounterexampleParams, ce: &Counterexample) -> Result<ConvexityReport> {
    let np = params.n_prime();
    let f: Vec<f64> = ce
        .space
        .grid()
        .iter()
        .map(|&t| -np * (ce.a_n * params.profile(ce.softness, t)).ln())
        .collect();
    kn_convexity_check(&f, params.k, np, ce.space.h(), true, &ConvexityTolerance::default())
}

/// `mu_n(S^1 \ N_eps(Y))` by quadrature, and the bound `a_n^{N'} f(eps)^{N'} (2D - 4 eps)`.
pub fn mass_outside_poles(params: &CounterexampleParams, softness: u32, a_n: f64) -> Result<(f64, f64)> {
    let np = params.n_prime();
    let (d, eps) = (params.d, params.eps);
    let mass = 2.0 * a_n.powf(np) * profile_integral(params, softness, eps, d - eps)?;
    let bound = a_n.powf(np) * (eps / params.r()).sin().powf(np) * (2.0 * d - 4.0 * eps);
    Ok((mass, bound))
}

/// Finite circle of cell centers plus the two poles, carrying `mu_n` and `mu_Y = (delta_0 + delta_D)/2`.
pub fn counterexample_measures(params: &CounterexampleParams, ce: &Counterexample) -> Result<(FiniteMmSpace, ProbWeights, ProbWeights)> {
    let m = params.m;
    let mut coords = ce.space.grid();
    coords.extend([0.0, params.d]);
    let mut mu = ce.space.cell_masses();
    mu.extend([0.0, 0.0]);
    let mu = ProbWeights::new(mu)?;
    let mut y = vec![0.0; m + 2];
    y[m] = 0.5;
    y[m + 1] = 0.5;
    let y = ProbWeights::new(y)?;
    let space = FiniteMmSpace::on_circle(coords, 2.0 * params.d, mu.clone())?;
    Ok((space, mu, y))
}

/// Per softness index: normalizer growth, convexity certificate, mass outside the
/// pole neighbourhood against its analytic bound, and the Prokhorov distance to the
/// two-atom measure at the poles with the implied box-distance bound.
pub fn counterexample_report(params: &CounterexampleParams) -> Result<ExperimentReport> {
    let mut ns = params.n_list.clone();
    ns.sort_unstable();
    ns.dedup();
    let per_n = ns
        .par_iter()
        .map(|&n| {
            let ce = build_counterexample(params, n)?;
            let conv = counterexample_convexity(params, &ce)?;
            let (mass, bound) = mass_outside_poles(params, n, ce.a_n)?;
            let (space, mu, y) = counterexample_measures(params, &ce)?;
            let dp = prokhorov(&space, &mu, &y)?;
            let nf = n as f64;
            Ok(vec![
                ExperimentRow::new(nf, "a_n", ce.a_n, "build_counterexample"),
                ExperimentRow::new(nf, "discrete_mass", ce.discrete_mass, "build_counterexample")
                    .bounded(1.0, (ce.discrete_mass - 1.0).abs() < 1e-8),
                ExperimentRow::new(nf, "convexity_min_relative_residual", conv.min_relative_residual, "kn_convexity_check")
                    .bounded(conv.threshold, conv.pass),
                ExperimentRow::new(nf, "mass_outside", mass, "mass_outside_poles").bounded(bound, mass <= bound),
                ExperimentRow::new(nf, "prokhorov", dp, "prokhorov"),
                ExperimentRow::new(nf, "box_upper", 2.0 * dp, "box_upper_bound_common_space"),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<ExperimentRow> = per_n.into_iter().flatten().collect();
    let a: Vec<f64> = rows.iter().filter(|r| r.quantity == "a_n").map(|r| r.value).collect();
    for (i, r) in rows.iter_mut().filter(|r| r.quantity == "a_n").enumerate() {
        r.pass = Some(i == 0 || a[i] > a[i - 1]);
    }
    let metadata = serde_json::json!({
        "params": params,
        "n_prime": params.n_prime(),
        "kappa": params.kappa(),
        "r": params.r(),
        "convexity": "finite-grid certificate of the (K, N')-convexity inequality on the periodic grid; not a proof of CD(K, N)",
        "mu_y": "(delta_0 + delta_D) / 2 at the poles t = 0 and t = D",
    });
    Ok(ExperimentReport::assemble("counterexample", metadata, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoPointWitness {
    pub d: f64,
    pub grid_size: usize,
    pub gap: f64,
    pub argmin_q: f64,
}

/// Over `nu_q = (q, 1 - q)` on two points at distance `D`, the smallest violation of
/// the midpoint conditions `W_2(delta_0, nu_q) = W_2(nu_q, delta_1) = D/2`.
pub fn two_point_cd_witness(d: f64, grid_size: usize) -> Result<TwoPointWitness> {
    if !(d > 0.0) || grid_size < 2 {
        return Err(Error::DomainError(format!("need D > 0 and grid_size >= 2, got {d}, {grid_size}")));
    }
    let gap = |q: f64| ((1.0 - q).sqrt() * d - d / 2.0).abs().max((q.sqrt() * d - d / 2.0).abs());
    let (argmin_q, gap) = (0..grid_size)
        .map(|i| i as f64 / (grid_size - 1) as f64)
        .map(|q| (q, gap(q)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty grid");
    Ok(TwoPointWitness {
        d,
        grid_size,
        gap,
        argmin_q,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedSpace {
    pub space: WeightedOneDimSpace,
    pub certificate: ConvexityReport,
}

/// Segment `[-L, L]` with density proportional to `cosh(lambda x)^{N-1}`, certified
/// `(K, N-1)`-convex at cell centers before it is returned.
pub fn cosh_family(k: f64, n: f64, lambda: f64, l: f64, m: usize) -> Result<CertifiedSpace> {
    if !(k > 0.0) {
        return Err(Error::DomainError(format!("K = {k} must be positive")));
    }
    if !(n < 0.0) {
        return Err(Error::InvalidDimension(n));
    }
    if !(l > 0.0) || m < 3 {
        return Err(Error::DomainError(format!("need L > 0 and M >= 3, got {l}, {m}")));
    }
    let threshold = k / (1.0 - n);
    if !(lambda * lambda >= threshold) {
        return Err(Error::ConvexityViolation {
            min_residual: lambda * lambda - threshold,
            index: 0,
        });
    }
    let space = WeightedOneDimSpace::from_density(Kind::Segment, -l, 2.0 * l, m, |x| (lambda * x).cosh().powf(n - 1.0))?;
    let f: Vec<f64> = space.grid().iter().map(|&x| -(n - 1.0) * (lambda * x).cosh().ln()).collect();
    let certificate = kn_convexity_check(&f, k, n - 1.0, space.h(), false, &ConvexityTolerance::default())?;
    if !certificate.pass {
        return Err(Error::ConvexityViolation {
            min_residual: certificate.min_relative_residual,
            index: certificate.argmin,
        });
    }
    Ok(CertifiedSpace { space, certificate })
}

/// Cell masses of `exp(sum_k a_k cos(k pi s) + b_k sin(k pi s))` with `s` the relative
/// position on the space and random amplitudes in `[-amplitude, amplitude]`.
pub fn random_smooth_measure(space: &WeightedOneDimSpace, rng: &mut ChaCha8Rng, modes: usize, amplitude: f64) -> Result<ProbWeights> {
    let coef: Vec<(f64, f64)> = (0..modes)
        .map(|_| (rng.gen_range(-amplitude..=amplitude), rng.gen_range(-amplitude..=amplitude)))
        .collect();
    let (lo, len) = (space.origin(), space.total_length());
    let tilt = |x: f64| {
        let s = (x - lo) / len;
        let e: f64 = coef
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let w = (k + 1) as f64 * PI * s;
                let w = if space.kind() == Kind::Circle { 2.0 * w } else { w };
                a * w.cos() + b * w.sin()
            })
            .sum();
        e.exp()
    };
    let masses = space.cell_masses().into_iter().zip(space.grid()).map(|(m, x)| m * tilt(x)).collect();
    ProbWeights::normalized(masses)
}

/// Fits `tol(h) = c1 h + c2 h^2` through the worst CD deficits observed at two
/// resolutions of the cosh family (`K = 1, N = -1, lambda = 1, L = 3`), then scales by `safety`.
pub fn calibrate_cd_budget(resolutions: (usize, usize), pairs: usize, seed: u64, safety: f64) -> Result<CdBudget> {
    use rand::SeedableRng;
    let t_grid: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
    let np_grid = [-1.0, -0.5, -0.1];
    let deficit = |m: usize| -> Result<(f64, f64)> {
        let space = cosh_family(1.0, -1.0, 1.0, 3.0, m)?.space;
        let opts = crate::cd::CdOptions {
            budget: CdBudget { c1: 0.0, c2: 0.0, floor: 0.0 },
            cut: None,
        };
        let worst = (0..pairs)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
                let p0 = random_smooth_measure(&space, &mut rng, 3, 1.0)?;
                let p1 = random_smooth_measure(&space, &mut rng, 3, 1.0)?;
                let r = cd_check_1d(&space, &p0, &p1, 1.0, -1.0, &t_grid, &np_grid, Condition::Cd, &opts)?;
                Ok((-r.min_margin).max(0.0))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok((space.h(), worst))
    };
    let (h1, e1) = deficit(resolutions.0)?;
    let (h2, e2) = deficit(resolutions.1)?;
    // solve c1 h + c2 h^2 = e at both steps; fall back to a single term if a coefficient is negative
    let det = h1 * h2 * h2 - h2 * h1 * h1;
    let mut c1 = (e1 * h2 * h2 - e2 * h1 * h1) / det;
    let mut c2 = (h1 * e2 - h2 * e1) / det;
    if c1 < 0.0 {
        c1 = 0.0;
        c2 = (e1 / (h1 * h1)).max(e2 / (h2 * h2));
    } else if c2 < 0.0 {
        c2 = 0.0;
        c1 = (e1 / h1).max(e2 / h2);
    }
    Ok(CdBudget {
        c1: safety * c1,
        c2: safety * c2,
        floor: CdBudget::default().floor,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoshControlParams {
    pub k: f64,
    pub n: f64,
    pub lambda: f64,
    pub l: f64,
    pub m: usize,
    /// Random smooth density pairs checked with `cd_check_1d`.
    pub pairs: usize,
    /// Random interval pairs checked with `bm_check`.
    pub bm_pairs: usize,
    pub t_points: usize,
    pub n_primes: Vec<f64>,
    pub variant: Condition,
    pub budget: CdBudget,
    pub seed: u64,
}

impl Default for CoshControlParams {
    fn default() -> Self {
        Self {
            k: 1.0,
            n: -1.0,
            lambda: 1.0,
            l: 3.0,
            m: 512,
            pairs: 50,
            bm_pairs: 20,
            t_points: 9,
            n_primes: vec![-1.0, -0.5, -0.1],
            variant: Condition::Cd,
            budget: CdBudget::default(),
            seed: 0,
        }
    }
}

/// Positive control on a certified cosh-family segment: CD margins for random smooth
/// density pairs and Brunn-Minkowski margins for random interval pairs. Rows carry
/// relative margins against their tolerances.
pub fn cosh_positive_control(p: &CoshControlParams) -> Result<ExperimentReport> {
    use rand::SeedableRng;
    let certified = cosh_family(p.k, p.n, p.lambda, p.l, p.m)?;
    let space = &certified.space;
    if p.t_points < 2 {
        return Err(Error::DomainError(format!("need at least 2 t points, got {}", p.t_points)));
    }
    let t_grid: Vec<f64> = (0..p.t_points).map(|i| i as f64 / (p.t_points - 1) as f64).collect();
    let opts = crate::cd::CdOptions { budget: p.budget, cut: None };
    let cd_rows = (0..p.pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed.wrapping_add(i as u64));
            let p0 = random_smooth_measure(space, &mut rng, 3, 1.0)?;
            let p1 = random_smooth_measure(space, &mut rng, 3, 1.0)?;
            let r = cd_check_1d(space, &p0, &p1, p.k, p.n, &t_grid, &p.n_primes, p.variant, &opts)?;
            Ok(ExperimentRow::new(i as f64, "cd_min_relative_margin", r.min_margin, "cd_check_1d").bounded(-r.tolerance, r.pass))
        })
        .collect::<Result<Vec<_>>>()?;
    let tol = p.budget.tol(space.h());
    let bm_rows = (0..p.bm_pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed.wrapping_add(1 << 32).wrapping_add(i as u64));
            let mut interval = || -> Result<Interval> {
                let len = rng.gen_range(0.1..=1.0) * p.l;
                let a = rng.gen_range(-p.l..=p.l - len);
                Interval::new(a, a + len)
            };
            let (a0, a1) = (interval()?, interval()?);
            let t = t_grid[rng.gen_range(0..t_grid.len())];
            let r = crate::cd::bm_check(space, a0, a1, t, p.k, p.n, 0.0)?;
            let rel = crate::cd::relative_margin(r.lhs, r.rhs);
            Ok(ExperimentRow::new(i as f64, "bm_relative_margin", rel, "bm_check").bounded(-tol, rel >= -tol))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = vec![ExperimentRow::new(0.0, "convexity_min_relative_residual", certified.certificate.min_relative_residual, "kn_convexity_check")
        .bounded(certified.certificate.threshold, certified.certificate.pass)];
    rows.extend(cd_rows);
    rows.extend(bm_rows);
    let metadata = serde_json::json!({ "params": p, "h": space.h(), "tolerance": tol, "t_grid": t_grid });
    Ok(ExperimentReport::assemble("cosh-family", metadata, rows))
}

/// `sqrt(1/4 - K/(N-1))`, the growth rate of the sinh example.
pub fn sinh_rate(k: f64, n: f64) -> Result<f64> {
    if !(n < 0.0) {
        return Err(Error::InvalidDimension(n));
    }
    let a2 = 0.25 - k / (n - 1.0);
    if !(a2 > 0.0) {
        return Err(Error::DomainError(format!("1/4 - K/(N-1) = {a2} must be positive")));
    }
    Ok(a2.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinhParams {
    pub k: f64,
    pub n: f64,
    pub c_list: Vec<f64>,
    pub r_list: Vec<f64>,
    pub steps: Vec<f64>,
    pub half_width: f64,
}

impl Default for SinhParams {
    fn default() -> Self {
        Self {
            k: 1.0,
            n: -1.0,
            c_list: vec![0.1, 1.0, 10.0],
            r_list: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            steps: vec![1e-2, 1e-3],
            half_width: 5.0,
        }
    }
}

/// Convexity of `f = -(N-1) a sinh x` as `(K, N-1)`-convex on `[-w, w]` at each step
/// `h`, the order of the residual error from `h` to `h/2`, and the volume growth probe.
pub fn sinh_example_report(p: &SinhParams) -> Result<ExperimentReport> {
    let a = sinh_rate(p.k, p.n)?;
    let np = p.n - 1.0;
    let w = p.half_width;
    let f = |x: f64| -np * a * x.sinh();
    // exact (g'' + (K/(N-1)) g) / g for g = exp(a sinh x)
    let exact = |x: f64| a * a * x.cosh().powi(2) + a * x.sinh() + p.k / np;
    let run = |h: f64| -> Result<(ConvexityReport, f64)> {
        let cells = (2.0 * w / h).round() as usize;
        let h = 2.0 * w / cells as f64;
        let xs: Vec<f64> = (0..=cells).map(|i| -w + i as f64 * h).collect();
        let samples: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let rep = kn_convexity_check(&samples, p.k, np, h, false, &ConvexityTolerance::default())?;
        let i = rep.argmin;
        let err = (rep.min_relative_residual - exact(xs[i])).abs();
        Ok((rep, err))
    };
    let mut rows = Vec::new();
    for &h in &p.steps {
        let (rep, err) = run(h)?;
        let (_, err_half) = run(h / 2.0)?;
        let ratio = err / err_half;
        rows.push(
            ExperimentRow::new(h, "convexity_min_relative_residual", rep.min_relative_residual, "kn_convexity_check")
                .bounded(rep.threshold, rep.pass),
        );
        rows.push(ExperimentRow::new(h, "residual_error", err, "kn_convexity_check"));
        rows.push(ExperimentRow::new(h, "residual_error_ratio", ratio, "kn_convexity_check").verdict((3.0..=5.0).contains(&ratio)));
    }
    for &c in &p.c_list {
        let probe = volume_growth_probe(|x| -f(x), c, 0.0, &p.r_list, crate::cd::DEFAULT_GROWTH_FACTOR)?;
        rows.push(
            ExperimentRow::new(c, "growth_ratio_last", *probe.ratios.last().expect("two radii"), "volume_growth_probe")
                .bounded(probe.gamma, probe.divergent),
        );
        rows.push(ExperimentRow::new(c, "log_integral_last", *probe.log_values.last().expect("two radii"), "volume_growth_probe"));
    }
    let metadata = serde_json::json!({ "params": p, "a": a, "convexity_dimension": np });
    Ok(ExperimentReport::assemble("sinh-example", metadata, rows))
}

/// Brunn-Minkowski right-hand side for each curvature in `k_list`; rows pass when
/// the right-hand side strictly decreases. The first `K` with RHS below LHS is
/// recorded as the violation onset.
pub fn bm_collapse_sweep(
    space: &WeightedOneDimSpace,
    a0: Interval,
    a1: Interval,
    t: f64,
    k_list: &[f64],
    n: f64,
) -> Result<ExperimentReport> {
    let reports = k_list
        .iter()
        .map(|&k| bm_check(space, a0, a1, t, k, n, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut onset = None;
    for (i, r) in reports.iter().enumerate() {
        let rhs = r.rhs.to_f64();
        let lhs = r.lhs.to_f64();
        let decreasing = i == 0 || rhs < reports[i - 1].rhs.to_f64();
        rows.push(ExperimentRow::new(r.k, "rhs", rhs, "bm_check").bounded(lhs, decreasing));
        if onset.is_none() && rhs < lhs {
            onset = Some(r.k);
        }
    }
    let metadata = serde_json::json!({
        "a0": a0, "a1": a1, "t": t, "n": n, "k_list": k_list,
        "lhs": reports.first().map(|r| r.lhs),
        "violation_onset": onset,
    });
    Ok(ExperimentReport::assemble("bm-collapse", metadata, rows))
}

/// `K` values `10^{j/per_decade}` from 1 to `10^decades`.
pub fn log_sweep(decades: u32, per_decade: u32) -> Vec<f64> {
    (0..=decades * per_decade).map(|j| 10f64.powf(j as f64 / per_decade as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm4Params {
    pub k_list: Vec<f64>,
    pub kappas: Vec<f64>,
    pub n: f64,
    pub l: f64,
    pub m: usize,
    /// Relative slack allowed above each bound.
    pub slack: f64,
    /// Allowed spread of `sqrt(K) * obsdiam` across the family.
    pub scaling_tolerance: f64,
    pub seed: u64,
    pub budgets: Budgets,
}

impl Default for Thm4Params {
    fn default() -> Self {
        Self {
            k_list: vec![1.0, 4.0, 16.0],
            kappas: vec![0.05, 0.1, 0.2, 0.4],
            n: -1.0,
            l: 3.0,
            m: 512,
            slack: 0.02,
            scaling_tolerance: 0.1,
            seed: 0,
            budgets: Budgets::default(),
        }
    }
}

/// Separation and observable diameter of cosh-family segments (`lambda = sqrt K`)
/// against the CD and CD* bounds, the `1/sqrt K` scaling of the computed
/// observable diameters, and the Lévy trend of the bound sequence.
pub fn thm4_verification(p: &Thm4Params) -> Result<ExperimentReport> {
    let per_k = p
        .k_list
        .par_iter()
        .map(|&k| {
            let space = cosh_family(k, p.n, k.sqrt(), p.l, p.m)?.space.to_finite_space()?;
            let mu = space.weights().clone();
            let mut rows = Vec::new();
            let mut obs = Vec::new();
            for &kappa in &p.kappas {
                let sep = separation_with(&space, &mu, kappa, kappa, &p.budgets)?.value;
                let od = obsdiam_sandwich_with(&space, &mu, kappa, &p.budgets, p.seed)?.upper;
                obs.push(od);
                let q = |name: &str| format!("{name}[kappa={kappa}]");
                let b = cd_separation_bound(k, p.n, kappa, kappa)?;
                rows.push(ExperimentRow::new(k, q("separation_vs_cd"), sep, "separation").bounded(b, sep <= b * (1.0 + p.slack)));
                let b = cdstar_separation_bound(k, p.n, kappa, kappa)?;
                rows.push(ExperimentRow::new(k, q("separation_vs_cdstar"), sep, "separation").bounded(b, sep <= b * (1.0 + p.slack)));
                let b = cd_obsdiam_bound(k, p.n, kappa)?;
                rows.push(ExperimentRow::new(k, q("obsdiam_vs_cd"), od, "obsdiam_sandwich").bounded(b, od <= b * (1.0 + p.slack)));
                let b = cdstar_obsdiam_bound(k, p.n, kappa)?;
                rows.push(ExperimentRow::new(k, q("obsdiam_vs_cdstar"), od, "obsdiam_sandwich").bounded(b, od <= b * (1.0 + p.slack)));
            }
            Ok((rows, obs))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<ExperimentRow> = per_k.iter().flat_map(|(r, _)| r.clone()).collect();
    for (j, &kappa) in p.kappas.iter().enumerate() {
        let scaled: Vec<f64> = p.k_list.iter().zip(&per_k).map(|(k, (_, o))| o[j] * k.sqrt()).collect();
        let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        let spread = hi / lo - 1.0;
        rows.push(
            ExperimentRow::new(kappa, "obsdiam_sqrt_k_spread", spread, "obsdiam_sandwich")
                .bounded(p.scaling_tolerance, spread <= p.scaling_tolerance),
        );
        let seq = levy_bound_sequence(&p.k_list, &vec![p.n; p.k_list.len()], kappa, Condition::Cd)?;
        rows.push(ExperimentRow::new(kappa, "bound_sequence_levy", seq.values[seq.values.len() - 1], "levy_bound_sequence").verdict(seq.levy));
    }
    let metadata = serde_json::json!({ "params": p, "lambda": "sqrt(K)" });
    Ok(ExperimentReport::assemble("thm4-verify", metadata, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_diameter_default() {
        assert!((minimal_diameter(-1.0, -1.0) - PI * 2f64.sqrt()).abs() < 1e-15);
        assert!(CounterexampleParams::new(-1.0, -1.0, 4.0, vec![1], 256, 0.2).is_err());
    }

    #[test]
    fn two_point_gap_closed_form() {
        let w = two_point_cd_witness(3.0, 1001).unwrap();
        assert!((w.gap - (0.5f64.sqrt() - 0.5) * 3.0).abs() < 1e-12);
        assert!((w.argmin_q - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cosh_threshold() {
        assert!(matches!(cosh_family(1.0, -1.0, 0.7, 3.0, 64), Err(Error::ConvexityViolation { .. })));
        assert!(cosh_family(1.0, -1.0, 0.5f64.sqrt(), 3.0, 64).is_ok());
    }

    #[test]
    fn log_sweep_endpoints() {
        let k = log_sweep(4, 4);
        assert_eq!(k.len(), 17);
        assert_eq!(k[0], 1.0);
        assert!((k[16] - 1e4).abs() < 1e-9);
    }
}
