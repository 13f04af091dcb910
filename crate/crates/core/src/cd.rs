//! Rényi entropy and curvature-dimension machinery: CD/CD* inequality checks on
//! weighted segments and circles, Brunn-Minkowski margins, `(K, N)`-convexity
//! certificates, the finite entropy lemmas as randomized checks, and the
//! volume growth probe.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{omega, sigma_pair, sigma_sup, tau_pair};
use crate::concentration::Condition;
use crate::config::{CdBudget, ConvexityTolerance};
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::quadrature::{log_integrate_adaptive, Rule};
use crate::space::{condition_measure, partition_average, pushforward, subset_diameter, FiniteMmSpace, ProbWeights};
use crate::transport::oned::check_contiguous;
use crate::transport::{w2_exact, Kind, MonotonePlan, WeightedOneDimSpace};

fn check_dimension(n: f64) -> Result<()> {
    if !(n < 0.0) {
        return Err(Error::InvalidDimension(n));
    }
    Ok(())
}

/// `S_{N,mu}(nu) = sum_i mu_i (nu_i / mu_i)^{1 - 1/N}`, infinite when `nu` charges a `mu`-null point.
pub fn renyi_entropy(mu: &ProbWeights, nu: &ProbWeights, n: f64) -> Result<ExtReal> {
    check_dimension(n)?;
    if mu.len() != nu.len() {
        return Err(Error::LengthMismatch { expected: mu.len(), got: nu.len() });
    }
    if mu == nu {
        return Ok(ExtReal::ONE);
    }
    let e = 1.0 - 1.0 / n;
    let mut s = 0.0;
    for (&m, &v) in mu.as_slice().iter().zip(nu.as_slice()) {
        if m > 0.0 {
            s += m * (v / m).powf(e);
        } else if v > 0.0 {
            return Ok(ExtReal::Infinite);
        }
    }
    // Jensen gives s >= 1; anything below is rounding
    Ok(ExtReal::Finite(s.max(1.0)))
}

/// Rényi entropy of a cell-mass measure on a weighted segment or circle.
pub fn renyi_entropy_1d(space: &WeightedOneDimSpace, nu: &ProbWeights, n: f64) -> Result<ExtReal> {
    renyi_entropy(&space.reference(), nu, n)
}

/// Default grid `{N, N/2, N/4, -0.1}` intersected with `[N, 0)`.
pub fn default_n_prime_grid(n: f64) -> Vec<f64> {
    let mut g: Vec<f64> = [n, n / 2.0, n / 4.0, -0.1].into_iter().filter(|v| *v >= n && *v < 0.0).collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn coefficient_kappa(variant: Condition, k: f64, n_prime: f64) -> f64 {
    match variant {
        Condition::Cd => k / (n_prime - 1.0),
        Condition::CdStar => k / n_prime,
    }
}

fn coefficient_pair(variant: Condition, k: f64, n_prime: f64, t: f64, theta: f64) -> Result<[ExtReal; 2]> {
    match variant {
        Condition::Cd => tau_pair(k, n_prime, t, theta),
        Condition::CdStar => Ok(sigma_pair(k / n_prime, t, theta)),
    }
}

/// Everything the inequality needs that does not depend on `(t, N')`.
struct Instance {
    plan: MonotonePlan,
    mu_mass: Vec<f64>,
    mu_density: Vec<f64>,
    p: [Vec<f64>; 2],
}

impl Instance {
    fn new(space: &WeightedOneDimSpace, p0: &ProbWeights, p1: &ProbWeights, cut: Option<usize>) -> Result<Self> {
        let plan = match (space.kind(), cut) {
            (Kind::Circle, Some(c)) => MonotonePlan::with_cut(space, p0, p1, c)?,
            (Kind::Circle, None) => {
                let arc = support_arc(space, &[p0, p1]);
                if arc >= 0.5 * space.total_length() {
                    return Err(Error::DomainError(format!(
                        "supports span an arc of length {arc} >= half the circumference; pass an explicit cut"
                    )));
                }
                MonotonePlan::new(space, p0, p1)?
            }
            (Kind::Segment, _) => MonotonePlan::new(space, p0, p1)?,
        };
        check_contiguous(&plan, p0, p1)?;
        let mu_mass = space.reference().into_vec();
        let h = space.h();
        let mu_density = mu_mass.iter().map(|m| m / h).collect();
        Ok(Self {
            plan,
            mu_mass,
            mu_density,
            p: [p0.as_slice().to_vec(), p1.as_slice().to_vec()],
        })
    }

    fn lhs(&self, t: f64, n_prime: f64) -> ExtReal {
        match self.plan.renyi_of_interpolant(t, n_prime, &self.mu_density) {
            Some(v) => ExtReal::Finite(v),
            None => ExtReal::Infinite,
        }
    }

    /// `sum_i ∫_0^1 coef_i(d(Q_0(u), Q_1(u))) rho_i(Q_i(u))^{-1/N'} du`, exact per merged
    /// piece up to a 5-point Gauss rule on each smooth stretch of the distance.
    fn rhs(&self, k: f64, n_prime: f64, t: f64, variant: Condition, rule: &Rule) -> Result<ExtReal> {
        let plan = &self.plan;
        let om = omega(coefficient_kappa(variant, k, n_prime));
        let mut levels = vec![0.0];
        if plan.kind == Kind::Circle {
            let half = 0.5 * plan.total_length;
            levels.extend([half, -half]);
        }
        let mut total = 0.0;
        for piece in &plan.pieces {
            if piece.is_empty() {
                continue;
            }
            let mut w = [0.0; 2];
            for i in 0..2 {
                let c = plan.original_cell(piece.cell[i]);
                w[i] = (self.p[i][c] / self.mu_mass[c]).powf(-1.0 / n_prime);
            }
            let d0 = piece.x0[0] - piece.x0[1];
            let ds = piece.slope[0] - piece.slope[1];
            let mut cuts = vec![piece.u0, piece.u1];
            if ds != 0.0 {
                for lv in &levels {
                    let u = piece.u0 + (lv - d0) / ds;
                    if u > piece.u0 && u < piece.u1 {
                        cuts.push(u);
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            // the distance is piecewise linear, so its max is at a cut
            let theta_max = cuts.iter().map(|&u| plan.distance(piece, u)).fold(0.0, f64::max);
            if let ExtReal::Finite(o) = om {
                if theta_max >= o {
                    return Ok(ExtReal::Infinite);
                }
            }
            for pair in cuts.windows(2) {
                for (u, wt) in rule.nodes_on(pair[0], pair[1]) {
                    let theta = plan.distance(piece, u);
                    let c = coefficient_pair(variant, k, n_prime, t, theta)?;
                    total += wt * (c[0].to_f64() * w[0] + c[1].to_f64() * w[1]);
                }
            }
        }
        Ok(ExtReal::Finite(total))
    }
}

/// Length of the shortest arc containing the supports of all `measures`.
fn support_arc(space: &WeightedOneDimSpace, measures: &[&ProbWeights]) -> f64 {
    let m = space.grid_size();
    let charged: Vec<bool> = (0..m).map(|c| measures.iter().any(|p| p[c] > 0.0)).collect();
    if !charged.iter().any(|&b| b) {
        return 0.0;
    }
    // longest circular run of empty cells
    let mut longest = 0;
    let mut run = 0;
    for k in 0..2 * m {
        if charged[k % m] {
            run = 0;
        } else {
            run += 1;
            longest = longest.max(run.min(m));
        }
    }
    (m - longest) as f64 * space.h()
}

/// Right-hand side of the CD (`tau`) or CD* (`sigma_{K/N'}`) inequality along the monotone coupling.
pub fn cd_rhs(
    space: &WeightedOneDimSpace,
    p0: &ProbWeights,
    p1: &ProbWeights,
    k: f64,
    n_prime: f64,
    t: f64,
    variant: Condition,
) -> Result<ExtReal> {
    check_dimension(n_prime)?;
    check_t(t)?;
    let inst = Instance::new(space, p0, p1, None)?;
    inst.rhs(k, n_prime, t, variant, &Rule::new(5))
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::DomainError(format!("t = {t} outside [0, 1]")));
    }
    Ok(())
}

/// Serializes non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
pub(crate) fn signed_float<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdCell {
    pub t: f64,
    pub n_prime: f64,
    pub lhs: ExtReal,
    pub rhs: ExtReal,
    #[serde(serialize_with = "signed_float")]
    pub margin: f64,
    /// `margin / max(1, rhs)`; the verdict is taken on this scale.
    #[serde(serialize_with = "signed_float")]
    pub relative_margin: f64,
}

/// Margin rescaled by the size of the right-hand side, so that entropies of order
/// `10^12` (small `|N'|`) are not judged on absolute rounding.
pub fn relative_margin(lhs: ExtReal, rhs: ExtReal) -> f64 {
    let m = rhs.signed_diff(lhs);
    match rhs {
        ExtReal::Finite(r) => m / r.abs().max(1.0),
        ExtReal::Infinite => m,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CdOptions {
    pub budget: CdBudget,
    /// Explicit chart cut for circle inputs whose supports are not within a short arc.
    pub cut: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdReport {
    pub variant: Condition,
    pub k: f64,
    pub n: f64,
    pub t_grid: Vec<f64>,
    pub n_prime_grid: Vec<f64>,
    pub cells: Vec<CdCell>,
    pub h: f64,
    pub budget: CdBudget,
    pub tolerance: f64,
    /// Smallest relative margin over the grid.
    #[serde(serialize_with = "signed_float")]
    pub min_margin: f64,
    pub worst_t: f64,
    pub worst_n_prime: f64,
    pub coupling: String,
    pub pass: bool,
}

/// Checks the CD or CD* inequality between `p0` and `p1` at every `(t, N')` of the grids.
#[allow(clippy::too_many_arguments)]
pub fn cd_check_1d(
    space: &WeightedOneDimSpace,
    p0: &ProbWeights,
    p1: &ProbWeights,
    k: f64,
    n: f64,
    t_grid: &[f64],
    n_prime_grid: &[f64],
    variant: Condition,
    options: &CdOptions,
) -> Result<CdReport> {
    check_dimension(n)?;
    for &t in t_grid {
        check_t(t)?;
    }
    for &np in n_prime_grid {
        if !(np >= n && np < 0.0) {
            return Err(Error::DomainError(format!("N' = {np} outside [{n}, 0)")));
        }
    }
    if t_grid.is_empty() || n_prime_grid.is_empty() {
        return Err(Error::DomainError("empty t or N' grid".into()));
    }
    let inst = Instance::new(space, p0, p1, options.cut)?;
    let rule = Rule::new(5);
    let jobs: Vec<(f64, f64)> = n_prime_grid.iter().flat_map(|&np| t_grid.iter().map(move |&t| (t, np))).collect();
    let cells = jobs
        .par_iter()
        .map(|&(t, np)| {
            let lhs = inst.lhs(t, np);
            let rhs = inst.rhs(k, np, t, variant, &rule)?;
            Ok(CdCell {
                t,
                n_prime: np,
                lhs,
                rhs,
                margin: rhs.signed_diff(lhs),
                relative_margin: relative_margin(lhs, rhs),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = cells
        .iter()
        .min_by(|a, b| a.relative_margin.total_cmp(&b.relative_margin))
        .expect("nonempty grid");
    let h = space.h();
    let tolerance = options.budget.tol(h);
    let min_margin = worst.relative_margin;
    Ok(CdReport {
        variant,
        k,
        n,
        t_grid: t_grid.to_vec(),
        n_prime_grid: n_prime_grid.to_vec(),
        h,
        budget: options.budget,
        tolerance,
        min_margin,
        worst_t: worst.t,
        worst_n_prime: worst.n_prime,
        coupling: format!("monotone, chart cut at cell {}", inst.plan.cut),
        pass: min_margin >= -tolerance,
        cells,
    })
}

/// An interval `[a, b]` in arclength coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a <= b) {
            return Err(Error::DomainError(format!("interval [{a}, {b}] is empty")));
        }
        Ok(Self { a, b })
    }

    fn shifted(self, by: f64) -> Self {
        Self {
            a: self.a + by,
            b: self.b + by,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BmReport {
    pub t: f64,
    pub k: f64,
    pub n: f64,
    pub a0: Interval,
    pub a1: Interval,
    pub at: Interval,
    pub masses: [f64; 3],
    pub theta_range: (f64, f64),
    pub sup_coefficients: [ExtReal; 2],
    pub lhs: ExtReal,
    pub rhs: ExtReal,
    #[serde(serialize_with = "signed_float")]
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Brunn-Minkowski margin `sum_i sup sigma_{K/N}^{(t),i} mu(A_i)^{1/N} - mu(A_t)^{1/N}`.
///
/// `A_t` is the set of `t`-intermediate points, `[(1-t)a_0 + t a_1, (1-t)b_0 + t b_1]`
/// after unrolling circles so that `A_0 ∪ A_1` sits in an arc shorter than half the
/// circumference.
#[allow(clippy::too_many_arguments)]
pub fn bm_check(
    space: &WeightedOneDimSpace,
    a0: Interval,
    a1: Interval,
    t: f64,
    k: f64,
    n: f64,
    tolerance: f64,
) -> Result<BmReport> {
    check_dimension(n)?;
    check_t(t)?;
    let a1u = match space.kind() {
        Kind::Segment => a1,
        Kind::Circle => {
            let l = space.total_length();
            let hull = |i: Interval| i.b.max(a0.b) - i.a.min(a0.a);
            let best = [-l, 0.0, l]
                .into_iter()
                .map(|s| a1.shifted(s))
                .min_by(|x, y| hull(*x).total_cmp(&hull(*y)))
                .expect("three shifts");
            if hull(best) >= 0.5 * l {
                return Err(Error::DomainError(format!(
                    "A_0 ∪ A_1 spans {} >= half the circumference",
                    hull(best)
                )));
            }
            best
        }
    };
    let diam = a1u.b.max(a0.b) - a1u.a.min(a0.a);
    if k < 0.0 && diam >= std::f64::consts::PI * (n / k).sqrt() {
        return Err(Error::DomainError(format!(
            "diam(A_0 ∪ A_1) = {diam} >= pi sqrt(N/K) = {}",
            std::f64::consts::PI * (n / k).sqrt()
        )));
    }
    let at = Interval {
        a: (1.0 - t) * a0.a + t * a1u.a,
        b: (1.0 - t) * a0.b + t * a1u.b,
    };
    let theta_min = (a1u.a - a0.b).max(a0.a - a1u.b).max(0.0);
    let theta_max = (a1u.b - a0.a).max(a0.b - a1u.a);
    let kappa = k / n;
    let sup = [
        sigma_sup(kappa, 1.0 - t, theta_min, theta_max),
        sigma_sup(kappa, t, theta_min, theta_max),
    ];
    let mass = |i: Interval| space.interval_mass(i.a, i.b);
    let masses = [mass(a0), mass(a1u), mass(at)];
    let pw = |m: f64| ExtReal::new(m).powf(1.0 / n);
    let lhs = pw(masses[2]);
    let rhs = sup[0] * pw(masses[0]) + sup[1] * pw(masses[1]);
    let margin = rhs.signed_diff(lhs);
    Ok(BmReport {
        t,
        k,
        n,
        a0,
        a1,
        at,
        masses,
        theta_range: (theta_min, theta_max),
        sup_coefficients: sup,
        lhs,
        rhs,
        margin,
        tolerance,
        pass: margin >= -tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub k: f64,
    pub n: f64,
    pub h: f64,
    pub periodic: bool,
    /// `D_h^2 g_i + (K/N) g_i` at the checked grid indices.
    pub residuals: Vec<f64>,
    /// First grid index the residuals refer to.
    pub offset: usize,
    /// Smallest `residual_i / g_i`.
    pub min_relative_residual: f64,
    pub argmin: usize,
    pub tolerance: ConvexityTolerance,
    pub threshold: f64,
    pub pass: bool,
}

/// `(K, N)`-convexity certificate for samples of `f` on a uniform grid of step `h`:
/// `g = exp(-f/N)` must satisfy `D_h^2 g + (K/N) g >= -(c h^2 + slack) g` pointwise,
/// with central second differences (wrapping around when `periodic`).
pub fn kn_convexity_check(
    f: &[f64],
    k: f64,
    n: f64,
    h: f64,
    periodic: bool,
    tol: &ConvexityTolerance,
) -> Result<ConvexityReport> {
    check_dimension(n)?;
    let m = f.len();
    if m < 3 {
        return Err(Error::DomainError(format!("need at least 3 samples, got {m}")));
    }
    if !(h > 0.0) {
        return Err(Error::DomainError(format!("grid step {h} must be positive")));
    }
    let g: Vec<f64> = f.iter().map(|v| (-v / n).exp()).collect();
    let idx: Vec<usize> = if periodic { (0..m).collect() } else { (1..m - 1).collect() };
    let offset = idx[0];
    let h2 = h * h;
    let residuals: Vec<f64> = idx
        .iter()
        .map(|&i| {
            let (l, r) = if periodic { ((i + m - 1) % m, (i + 1) % m) } else { (i - 1, i + 1) };
            (g[l] - 2.0 * g[i] + g[r]) / h2 + k / n * g[i]
        })
        .collect();
    let (argmin, min_rel) = residuals
        .iter()
        .zip(&idx)
        .map(|(r, &i)| (i, r / g[i]))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    let threshold = -(tol.c * h2 + tol.slack);
    Ok(ConvexityReport {
        k,
        n,
        h,
        periodic,
        residuals,
        offset,
        min_relative_residual: min_rel,
        argmin,
        tolerance: *tol,
        threshold,
        pass: min_rel >= threshold,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaSuiteConfig {
    pub trials: usize,
    pub max_points: usize,
    pub n_primes: Vec<f64>,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for LemmaSuiteConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            max_points: 10,
            n_primes: vec![-0.5, -1.0, -3.0],
            seed: 0,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaTally {
    pub lemma: String,
    pub trials: usize,
    pub passed: usize,
    /// Smallest `rhs - lhs` seen, relative to `max(1, rhs)`.
    pub worst_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaFailure {
    pub lemma: String,
    pub trial: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub instance: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaSuiteReport {
    pub config: serde_json::Value,
    pub tallies: Vec<LemmaTally>,
    pub failures: Vec<LemmaFailure>,
}

impl LemmaSuiteReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

pub const LEMMA_NAMES: [&str; 4] = [
    "pushforward_contraction",
    "conditioning",
    "partition_average_w2",
    "partition_average_entropy",
];

fn random_plane_space(rng: &mut ChaCha8Rng, n: usize, weights: ProbWeights) -> Result<FiniteMmSpace> {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
    let dist = pts
        .iter()
        .map(|a| pts.iter().map(|b| (a.0 - b.0).hypot(a.1 - b.1)).collect())
        .collect();
    let ids = (0..n).map(|i| serde_json::json!(i)).collect();
    FiniteMmSpace::new(ids, dist, weights)
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize, zero_prob: f64) -> ProbWeights {
    loop {
        let w: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(zero_prob) { 0.0 } else { rng.gen_range(0.01..1.0) })
            .collect();
        if w.iter().any(|x| *x > 0.0) {
            return ProbWeights::normalized(w).expect("positive mass");
        }
    }
}

/// One randomized trial of every lemma: `(lemma index, lhs, rhs, instance)`.
fn lemma_trial(
    trial: usize,
    cfg: &LemmaSuiteConfig,
    fixed: Option<&FiniteMmSpace>,
) -> Result<Vec<(usize, f64, f64, serde_json::Value)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(trial as u64));
    let np = cfg.n_primes[trial % cfg.n_primes.len()];
    let space = match fixed {
        Some(s) => s.clone(),
        None => {
            let n = rng.gen_range(2..=cfg.max_points.max(2));
            let mu = random_weights(&mut rng, n, 0.0);
            random_plane_space(&mut rng, n, mu)?
        }
    };
    let n = space.len();
    let mu = space.weights().clone();
    let nu = random_weights(&mut rng, n, 0.3);
    let s_nu = renyi_entropy(&mu, &nu, np)?.to_f64();
    let mut out = Vec::with_capacity(4);

    let target = rng.gen_range(1..=n);
    let map: Vec<usize> = (0..n).map(|_| rng.gen_range(0..target)).collect();
    let lhs = renyi_entropy(&pushforward(&mu, &map, target)?, &pushforward(&nu, &map, target)?, np)?.to_f64();
    out.push((0, lhs, s_nu, serde_json::json!({"n_prime": np, "mu": mu, "nu": nu, "map": map})));

    let set: Vec<usize> = loop {
        let s: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if nu.mass_of(&s) > 0.0 {
            break s;
        }
    };
    let beta = nu.mass_of(&set);
    let lhs = beta.powf(1.0 - 1.0 / np) * renyi_entropy(&mu, &condition_measure(&nu, &set)?, np)?.to_f64();
    out.push((1, lhs, s_nu, serde_json::json!({"n_prime": np, "mu": mu, "nu": nu, "set": set})));

    let blocks = rng.gen_range(1..=n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut partition: Vec<Vec<usize>> = vec![Vec::new(); blocks];
    for (slot, &i) in order.iter().enumerate() {
        let b = if slot < blocks { slot } else { rng.gen_range(0..blocks) };
        partition[b].push(i);
    }
    let avg = partition_average(&nu, &partition, &mu)?;
    let d = partition.iter().map(|b| subset_diameter(&space, b)).fold(0.0, f64::max);
    let w2 = w2_exact(&space, &nu, &avg)?.value.to_f64();
    let inst = serde_json::json!({"n_prime": np, "mu": mu, "nu": nu, "partition": partition, "dist": space_dist(&space)});
    out.push((2, w2, 2.0 * d, inst.clone()));
    out.push((3, renyi_entropy(&mu, &avg, np)?.to_f64(), s_nu, inst));
    Ok(out)
}

fn space_dist(s: &FiniteMmSpace) -> Vec<Vec<f64>> {
    (0..s.len()).map(|i| (0..s.len()).map(|j| s.d(i, j)).collect()).collect()
}

/// Randomized checks of the pushforward contraction `S_{p_*mu}(p_*nu) <= S_mu(nu)`, the
/// conditioning inequality `nu(B)^{1-1/N'} S_mu(nu_B) <= S_mu(nu)`, and both partition-average
/// inequalities `W_2(nu, nu_bar) <= 2D`, `S_mu(nu_bar) <= S_mu(nu)`. Spaces are random
/// planar point sets unless `space` is given.
pub fn entropy_lemma_suite(space: Option<&FiniteMmSpace>, cfg: &LemmaSuiteConfig) -> Result<LemmaSuiteReport> {
    if cfg.n_primes.is_empty() || cfg.n_primes.iter().any(|v| !(*v < 0.0)) {
        return Err(Error::DomainError("N' values must be negative and nonempty".into()));
    }
    let results = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| lemma_trial(trial, cfg, space))
        .collect::<Result<Vec<_>>>()?;
    let mut tallies: Vec<LemmaTally> = LEMMA_NAMES
        .iter()
        .map(|name| LemmaTally {
            lemma: name.to_string(),
            trials: 0,
            passed: 0,
            worst_slack: f64::INFINITY,
        })
        .collect();
    let mut failures = Vec::new();
    for (trial, rows) in results.into_iter().enumerate() {
        for (which, lhs, rhs, instance) in rows {
            let scale = rhs.abs().max(1.0);
            let slack = (rhs - lhs) / scale;
            let tally = &mut tallies[which];
            tally.trials += 1;
            tally.worst_slack = tally.worst_slack.min(slack);
            if slack >= -cfg.tolerance {
                tally.passed += 1;
            } else {
                failures.push(LemmaFailure {
                    lemma: LEMMA_NAMES[which].to_string(),
                    trial,
                    lhs,
                    rhs,
                    instance,
                });
            }
        }
    }
    Ok(LemmaSuiteReport {
        config: serde_json::to_value(cfg)?,
        tallies,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeGrowthReport {
    pub c: f64,
    pub x0: f64,
    pub radii: Vec<f64>,
    /// `log ∫_{-R}^{R} exp(-C (x - x0)^2) dmu`, kept in log form because the values overflow.
    pub log_values: Vec<f64>,
    /// Successive growth factors `I(R_{k+1}) / I(R_k)`.
    #[serde(serialize_with = "serialize_floats")]
    pub ratios: Vec<f64>,
    pub gamma: f64,
    pub divergent: bool,
}

fn serialize_floats<S: serde::Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct F(f64);
    impl Serialize for F {
        fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            signed_float(&self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&F(*x))?;
    }
    seq.end()
}

pub const DEFAULT_GROWTH_FACTOR: f64 = 1.5;

/// Partial integrals of `exp(-C (x - x0)^2)` against `exp(log_density(x)) dx` on `[-R, R]`.
/// Divergence is flagged when the last growth factor is still at least `gamma`.
pub fn volume_growth_probe(
    log_density: impl Fn(f64) -> f64,
    c: f64,
    x0: f64,
    radii: &[f64],
    gamma: f64,
) -> Result<VolumeGrowthReport> {
    if radii.len() < 2 || radii.windows(2).any(|p| !(p[1] > p[0])) || !(radii[0] > 0.0) {
        return Err(Error::DomainError("radii must be positive and strictly increasing, at least two".into()));
    }
    if !(c > 0.0) {
        return Err(Error::DomainError(format!("C = {c} must be positive")));
    }
    let g = |x: f64| -c * (x - x0).powi(2) + log_density(x);
    let log_values: Vec<f64> = radii.iter().map(|&r| log_integrate_adaptive(g, -r, r, 1e-10)).collect();
    let ratios: Vec<f64> = log_values.windows(2).map(|p| (p[1] - p[0]).exp()).collect();
    let divergent = *ratios.last().expect("two radii") >= gamma;
    Ok(VolumeGrowthReport {
        c,
        x0,
        radii: radii.to_vec(),
        log_values,
        ratios,
        gamma,
        divergent,
    })
}
