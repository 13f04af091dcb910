//! Partial diameter, separation distance, the observable-diameter sandwich,
//! closed-form concentration bounds for CD and CD* spaces with `K > 0, N < 0`,
//! and Lévy-family detection.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Budgets;
use crate::error::{Error, Result};
use crate::space::{check_len, subset_diameter, FiniteMmSpace, ProbWeights};

/// Slack on mass thresholds `mu(A) >= alpha`.
const MASS_TOL: f64 = 1e-12;

/// Largest Pareto front tolerated by the one-dimensional separation search.
const FRONT_BUDGET: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    Exact,
    UpperBound,
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub kind: EstimateKind,
}

impl Estimate {
    fn exact(value: f64) -> Self {
        Self { value, kind: EstimateKind::Exact }
    }
}

/// `diam(nu; alpha)` for the pushforward of `weights` by the real values `values`.
pub fn partial_diameter_line(values: &[f64], weights: &[f64], alpha: f64) -> f64 {
    if alpha <= MASS_TOL {
        return 0.0;
    }
    let mut pts: Vec<(f64, f64)> = values
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(x, w)| (*x, *w))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = f64::INFINITY;
    let mut mass = 0.0;
    let mut right = 0;
    for left in 0..pts.len() {
        while right < pts.len() && mass < alpha - MASS_TOL {
            mass += pts[right].1;
            right += 1;
        }
        if mass < alpha - MASS_TOL {
            break;
        }
        best = best.min(pts[right - 1].0 - pts[left].0);
        mass -= pts[left].1;
    }
    best
}

pub fn partial_diameter(space: &FiniteMmSpace, mu: &ProbWeights, alpha: f64) -> Result<Estimate> {
    partial_diameter_with(space, mu, alpha, &Budgets::default())
}

/// Exact by clique search on small supports or by sliding window on line-embedded
/// spaces; otherwise the best of several greedy balls, flagged as an upper bound.
pub fn partial_diameter_with(space: &FiniteMmSpace, mu: &ProbWeights, alpha: f64, budgets: &Budgets) -> Result<Estimate> {
    check_len(space, mu)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::DomainError(format!("alpha = {alpha} outside [0, 1]")));
    }
    if alpha <= MASS_TOL {
        return Ok(Estimate::exact(0.0));
    }
    if let Some(coords) = space.line_embedding() {
        return Ok(Estimate::exact(partial_diameter_line(&coords, mu.as_slice(), alpha)));
    }
    let support = mu.support();
    if support.len() <= budgets.partial_diameter_exact_max.min(63) {
        return Ok(Estimate::exact(partial_diameter_clique(space, mu, &support, alpha)));
    }
    Ok(Estimate {
        value: partial_diameter_greedy(space, mu, &support, alpha),
        kind: EstimateKind::UpperBound,
    })
}

fn partial_diameter_clique(space: &FiniteMmSpace, mu: &ProbWeights, support: &[usize], alpha: f64) -> f64 {
    let n = support.len();
    let w: Vec<f64> = support.iter().map(|&i| mu[i]).collect();
    let mut cands: Vec<f64> = vec![0.0];
    for a in 0..n {
        for b in a + 1..n {
            cands.push(space.d(support[a], support[b]));
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let feasible = |diam: f64| -> bool {
        let adj: Vec<u64> = (0..n)
            .map(|a| {
                (0..n)
                    .filter(|&b| b != a && space.d(support[a], support[b]) <= diam)
                    .fold(0u64, |m, b| m | (1 << b))
            })
            .collect();
        let mut best = 0.0;
        max_weight_clique(&adj, &w, (1u64 << n) - 1, 0.0, &mut best, alpha - MASS_TOL);
        best >= alpha - MASS_TOL
    };
    let (mut lo, mut hi) = (0, cands.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(cands[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    cands[lo]
}

/// Branch and bound; stops as soon as `target` is reached.
fn max_weight_clique(adj: &[u64], w: &[f64], cand: u64, cur: f64, best: &mut f64, target: f64) {
    if cur > *best {
        *best = cur;
    }
    if *best >= target || cand == 0 {
        return;
    }
    let bound: f64 = bits(cand).map(|v| w[v]).sum();
    if cur + bound <= *best {
        return;
    }
    let mut rest = cand;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let remaining: f64 = bits(rest | (1 << v)).map(|u| w[u]).sum();
        if cur + remaining <= *best {
            return;
        }
        max_weight_clique(adj, w, rest & adj[v], cur + w[v], best, target);
        if *best >= target {
            return;
        }
    }
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (m != 0).then(|| {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            v
        })
    })
}

fn partial_diameter_greedy(space: &FiniteMmSpace, mu: &ProbWeights, support: &[usize], alpha: f64) -> f64 {
    // for every center, the smallest ball of mass >= alpha; exact diameters for the best few
    let mut balls: Vec<(f64, Vec<usize>)> = support
        .par_iter()
        .map(|&p| {
            let mut order: Vec<usize> = support.to_vec();
            order.sort_by(|&a, &b| space.d(p, a).total_cmp(&space.d(p, b)));
            let mut mass = 0.0;
            let mut k = 0;
            while k < order.len() && mass < alpha - MASS_TOL {
                mass += mu[order[k]];
                k += 1;
            }
            order.truncate(k);
            let radius = space.d(p, order[k - 1]);
            (radius, order)
        })
        .collect();
    balls.sort_by(|a, b| a.0.total_cmp(&b.0));
    balls
        .iter()
        .take(8)
        .map(|(r, set)| subset_diameter(space, set).min(2.0 * r))
        .fold(f64::INFINITY, f64::min)
}

pub fn separation(space: &FiniteMmSpace, mu: &ProbWeights, k0: f64, k1: f64) -> Result<Estimate> {
    separation_with(space, mu, k0, k1, &Budgets::default())
}

/// `Sep(X; k0, k1)`, with 0 when no admissible pair exists.
pub fn separation_with(space: &FiniteMmSpace, mu: &ProbWeights, k0: f64, k1: f64, budgets: &Budgets) -> Result<Estimate> {
    check_len(space, mu)?;
    if !(k0 > 0.0 && k1 > 0.0) {
        return Err(Error::DomainError(format!("separation needs positive masses, got ({k0}, {k1})")));
    }
    if k0 > 1.0 + MASS_TOL || k1 > 1.0 + MASS_TOL {
        return Ok(Estimate::exact(0.0));
    }
    let support = mu.support();
    if let Some(coords) = space.line_embedding() {
        let x: Vec<f64> = support.iter().map(|&i| coords[i]).collect();
        let w: Vec<f64> = support.iter().map(|&i| mu[i]).collect();
        if let Some(v) = separation_line(&x, &w, k0, k1) {
            return Ok(Estimate::exact(v));
        }
    }
    if support.len() <= budgets.separation_exact_max.min(30) {
        return Ok(Estimate::exact(separation_enumerate(space, mu, &support, k0, k1)));
    }
    Ok(Estimate {
        value: separation_balls(space, mu, &support, k0, k1),
        kind: EstimateKind::LowerBound,
    })
}

/// Largest `d` such that some point mass `>= k1` lies at distance `>= d` from the set;
/// `dist_to_set` is indexed like `support`.
fn far_quantile(dist_to_set: &[f64], w: &[f64], k1: f64) -> Option<f64> {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| dist_to_set[b].total_cmp(&dist_to_set[a]));
    let mut mass = 0.0;
    for &p in &order {
        mass += w[p];
        if mass >= k1 - MASS_TOL {
            return Some(dist_to_set[p]);
        }
    }
    None
}

/// Exact over all `2^n` choices of `A_0`; the best `A_1` for a given `A_0` is a
/// superlevel set of `d(., A_0)`.
fn separation_enumerate(space: &FiniteMmSpace, mu: &ProbWeights, support: &[usize], k0: f64, k1: f64) -> f64 {
    let n = support.len();
    let w: Vec<f64> = support.iter().map(|&i| mu[i]).collect();
    (1u64..(1u64 << n))
        .into_par_iter()
        .filter_map(|mask| {
            let m0: f64 = bits(mask).map(|v| w[v]).sum();
            if m0 < k0 - MASS_TOL {
                return None;
            }
            let dist: Vec<f64> = (0..n)
                .map(|p| bits(mask).map(|q| space.d(support[p], support[q])).fold(f64::INFINITY, f64::min))
                .collect();
            far_quantile(&dist, &w, k1)
        })
        .reduce(|| 0.0, f64::max)
}

fn separation_balls(space: &FiniteMmSpace, mu: &ProbWeights, support: &[usize], k0: f64, k1: f64) -> f64 {
    let w: Vec<f64> = support.iter().map(|&i| mu[i]).collect();
    let one = |a: f64, b: f64| -> f64 {
        support
            .par_iter()
            .filter_map(|&p| {
                let mut order: Vec<usize> = (0..support.len()).collect();
                order.sort_by(|&x, &y| space.d(p, support[x]).total_cmp(&space.d(p, support[y])));
                let mut mass = 0.0;
                let mut ball = Vec::new();
                for &q in &order {
                    if mass >= a - MASS_TOL {
                        break;
                    }
                    mass += w[q];
                    ball.push(q);
                }
                let dist: Vec<f64> = (0..support.len())
                    .map(|x| ball.iter().map(|&q| space.d(support[x], support[q])).fold(f64::INFINITY, f64::min))
                    .collect();
                far_quantile(&dist, &w, b)
            })
            .reduce(|| 0.0, f64::max)
    };
    one(k0, k1).max(one(k1, k0))
}

/// Exact separation for atoms on the real line.
///
/// Optimal pairs consist of alternating runs of consecutive atoms separated by
/// gaps of length `>= D`. For fixed `D`, a dynamic program over run boundaries
/// keeps Pareto fronts of the masses `(m0, m1)` (capped at `(k0, k1)`), and
/// `D` is found by binary search over pairwise gaps. Returns `None` if a front
/// exceeds its size budget.
pub fn separation_line(coords: &[f64], weights: &[f64], k0: f64, k1: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = coords
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(x, w)| (*x, *w))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let w: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let n = x.len();
    let total: f64 = w.iter().sum();
    if total < k0 - MASS_TOL || total < k1 - MASS_TOL {
        return Some(0.0);
    }
    let mut cands = vec![0.0];
    for i in 0..n {
        for j in i + 1..n {
            cands.push(x[j] - x[i]);
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + w[i];
    }
    // cands[0] = 0 is always feasible: A_0 = A_1 = X
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        match line_feasible(&x, &prefix, cands[mid], k0, k1)? {
            true => lo = mid,
            false => hi = mid - 1,
        }
    }
    Some(cands[lo])
}

type Front = Vec<(f64, f64)>;

fn insert_front(front: &mut Front, p: (f64, f64)) {
    if front.iter().any(|q| q.0 >= p.0 && q.1 >= p.1) {
        return;
    }
    front.retain(|q| !(p.0 >= q.0 && p.1 >= q.1));
    front.push(p);
}

fn line_feasible(x: &[f64], prefix: &[f64], d: f64, k0: f64, k1: f64) -> Option<bool> {
    let n = x.len();
    let mut next = vec![n; n];
    let mut j = 0;
    for e in 0..n {
        while j < n && x[j] - x[e] < d {
            j += 1;
        }
        next[e] = j;
    }
    let caps = [k0, k1];
    let mut fronts: Vec<[Front; 2]> = vec![[Vec::new(), Vec::new()]; n + 1];
    fronts[0] = [vec![(0.0, 0.0)], vec![(0.0, 0.0)]];
    for s in 0..n {
        for c in 0..2 {
            let front = std::mem::take(&mut fronts[s][c]);
            if front.is_empty() {
                continue;
            }
            for e in s..n {
                if e + 1 < n && next[e + 1] == next[e] {
                    continue;
                }
                let r = prefix[e + 1] - prefix[s];
                let target = next[e];
                for &(m0, m1) in &front {
                    let mut m = [m0, m1];
                    m[c] = (m[c] + r).min(caps[c]);
                    if m[0] >= k0 - MASS_TOL && m[1] >= k1 - MASS_TOL {
                        return Some(true);
                    }
                    if target < n {
                        let f = &mut fronts[target][1 - c];
                        insert_front(f, (m[0], m[1]));
                        if f.len() > FRONT_BUDGET {
                            return None;
                        }
                    }
                }
            }
        }
    }
    Some(false)
}

/// Two-sided estimate of `Obsdiam(X; -kappa)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObsDiamSandwich {
    pub lower: f64,
    pub upper: f64,
    pub upper_kind: EstimateKind,
    pub witness: String,
}

pub fn obsdiam_sandwich(space: &FiniteMmSpace, mu: &ProbWeights, kappa: f64) -> Result<ObsDiamSandwich> {
    obsdiam_sandwich_with(space, mu, kappa, &Budgets::default(), 0)
}

/// Lower bound: best partial diameter `diam(f_* mu; 1 - kappa)` over distance
/// functions to points, to random subsets, and random Lipschitz regularizations
/// `min_j (v_j + d(., x_j))`. Upper bound: the smaller of `Sep(kappa/2, kappa/2)`
/// and `diam(X; 1 - kappa)` when these are certified, else the support diameter.
pub fn obsdiam_sandwich_with(
    space: &FiniteMmSpace,
    mu: &ProbWeights,
    kappa: f64,
    budgets: &Budgets,
    seed: u64,
) -> Result<ObsDiamSandwich> {
    check_len(space, mu)?;
    if !(kappa > 0.0) {
        return Err(Error::DomainError(format!("kappa = {kappa} must be positive")));
    }
    let support = mu.support();
    if kappa >= 1.0 || support.len() <= 1 {
        return Ok(ObsDiamSandwich {
            lower: 0.0,
            upper: 0.0,
            upper_kind: EstimateKind::Exact,
            witness: "trivial".into(),
        });
    }
    let alpha = 1.0 - kappa;
    let n = space.len();
    let weights = mu.as_slice();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut family: Vec<(String, Vec<usize>, Vec<f64>)> = Vec::new();
    for &p in &support {
        family.push((format!("d(., x{p})"), vec![p], vec![0.0]));
    }
    for k in 0..budgets.obsdiam_random_sets {
        let size = rng.gen_range(1..=support.len());
        let set: Vec<usize> = support.choose_multiple(&mut rng, size).copied().collect();
        family.push((format!("d(., A) random set #{k} of size {size}"), set.clone(), vec![0.0; size]));
    }
    let diam = subset_diameter(space, &support);
    for k in 0..budgets.obsdiam_random_regularizations {
        let offsets: Vec<f64> = support.iter().map(|_| rng.gen_range(0.0..=diam)).collect();
        family.push((format!("min_j(v_j + d(., x_j)) random offsets #{k}"), support.clone(), offsets));
    }
    let (lower, witness) = family
        .par_iter()
        .map(|(name, centers, offsets)| {
            let f: Vec<f64> = (0..n)
                .map(|x| {
                    centers
                        .iter()
                        .zip(offsets)
                        .map(|(&c, v)| v + space.d(x, c))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            (partial_diameter_line(&f, weights, alpha), name.clone())
        })
        .reduce(
            || (0.0, String::from("none")),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );

    let sep = separation_with(space, mu, kappa / 2.0, kappa / 2.0, budgets)?;
    let pd = partial_diameter_with(space, mu, alpha, budgets)?;
    let mut upper = diam;
    let mut upper_kind = EstimateKind::UpperBound;
    if sep.kind == EstimateKind::Exact && sep.value <= upper {
        upper = sep.value;
    }
    if pd.kind != EstimateKind::LowerBound && pd.value <= upper {
        upper = pd.value;
    }
    if lower >= upper - 1e-12 {
        upper_kind = EstimateKind::Exact;
    }
    Ok(ObsDiamSandwich {
        lower,
        upper,
        upper_kind,
        witness,
    })
}

fn check_bound_args(k: f64, n: f64) -> Result<()> {
    if !(k > 0.0) {
        return Err(Error::DomainError(format!("bound needs K > 0, got {k}")));
    }
    if !(n < 0.0) {
        return Err(Error::DomainError(format!("bound needs N < 0, got {n}")));
    }
    Ok(())
}

fn check_pair(k0: f64, k1: f64) -> Result<()> {
    if !(k0 > 0.0 && k1 > 0.0 && k0 + k1 < 1.0) {
        return Err(Error::DomainError(format!("need k0, k1 > 0 with k0 + k1 < 1, got ({k0}, {k1})")));
    }
    Ok(())
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::DomainError(format!("kappa = {kappa} outside (0, 1]")));
    }
    Ok(())
}

fn acosh_checked(x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(Error::DomainError(format!("cosh^-1 argument {x} < 1")));
    }
    Ok(x.acosh())
}

/// Separation bound for CD(K, N) spaces.
pub fn cd_separation_bound(k: f64, n: f64, k0: f64, k1: f64) -> Result<f64> {
    check_bound_args(k, n)?;
    check_pair(k0, k1)?;
    let mean = 0.5 * (k0.powf(1.0 / n) + k1.powf(1.0 / n));
    let arg = mean.powf(-n / (1.0 - n));
    Ok(2.0 * ((1.0 - n) / k).sqrt() * acosh_checked(arg)?)
}

/// Observable-diameter bound for CD(K, N) spaces.
pub fn cd_obsdiam_bound(k: f64, n: f64, kappa: f64) -> Result<f64> {
    check_bound_args(k, n)?;
    check_kappa(kappa)?;
    let arg = (2.0 / kappa).powf(1.0 / (1.0 - n));
    Ok(2.0 * ((1.0 - n) / k).sqrt() * acosh_checked(arg)?)
}

/// Separation bound for CD*(K, N) spaces.
pub fn cdstar_separation_bound(k: f64, n: f64, k0: f64, k1: f64) -> Result<f64> {
    check_bound_args(k, n)?;
    check_pair(k0, k1)?;
    let arg = 0.5 * (k0.powf(1.0 / n) + k1.powf(1.0 / n));
    Ok(2.0 * (-n / k).sqrt() * acosh_checked(arg)?)
}

/// Observable-diameter bound for CD*(K, N) spaces.
pub fn cdstar_obsdiam_bound(k: f64, n: f64, kappa: f64) -> Result<f64> {
    check_bound_args(k, n)?;
    check_kappa(kappa)?;
    let arg = (2.0 / kappa).powf(-1.0 / n);
    Ok(2.0 * (-n / k).sqrt() * acosh_checked(arg)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Cd,
    CdStar,
}

/// A sequence is flagged as vanishing when it is nonincreasing and its last
/// entry is at most `decay` times its first.
pub const DEFAULT_LEVY_DECAY: f64 = 0.25;

pub fn vanishing_trend(values: &[f64], decay: f64) -> bool {
    if values.len() < 2 {
        return false;
    }
    let nonincreasing = values.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-9) + 1e-15);
    nonincreasing && values[values.len() - 1] <= decay * values[0]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSequence {
    pub values: Vec<f64>,
    pub levy: bool,
}

/// Per-index observable-diameter bounds for a sequence of CD or CD* spaces.
pub fn levy_bound_sequence(k_list: &[f64], n_list: &[f64], kappa: f64, mode: Condition) -> Result<BoundSequence> {
    check_kappa(kappa)?;
    if mode == Condition::CdStar && n_list.len() != k_list.len() {
        return Err(Error::LengthMismatch {
            expected: k_list.len(),
            got: n_list.len(),
        });
    }
    let values: Vec<f64> = k_list
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            if !(k > 0.0) {
                return f64::INFINITY;
            }
            match mode {
                Condition::Cd => 2.0 * 2f64.sqrt() / k.sqrt() * (2.0 / kappa - 1.0).sqrt(),
                Condition::CdStar => {
                    let kn = k * n_list[i];
                    let head = if kn < 0.0 { 2.0 * (2.0 / kappa).ln() / (-kn).sqrt() } else { f64::INFINITY };
                    head + 2.0 * std::f64::consts::LN_2 / k.sqrt()
                }
            }
        })
        .collect();
    let levy = vanishing_trend(&values, DEFAULT_LEVY_DECAY);
    Ok(BoundSequence { values, levy })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevyReport {
    pub kappas: Vec<f64>,
    /// `upper[s][k]`: observable-diameter upper bound of space `s` at `kappas[k]`.
    pub upper: Vec<Vec<f64>>,
    pub lower: Vec<Vec<f64>>,
    pub decay: f64,
    pub levy: bool,
}

/// Lévy verdict: every per-kappa column of upper bounds vanishes in trend.
pub fn levy_check(spaces: &[FiniteMmSpace], kappas: &[f64], budgets: &Budgets, seed: u64) -> Result<LevyReport> {
    if spaces.len() < 2 {
        return Err(Error::DomainError("Lévy check needs at least two spaces".into()));
    }
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for s in spaces {
        let mut u = Vec::new();
        let mut l = Vec::new();
        for &k in kappas {
            let sw = obsdiam_sandwich_with(s, s.weights(), k, budgets, seed)?;
            u.push(sw.upper);
            l.push(sw.lower);
        }
        upper.push(u);
        lower.push(l);
    }
    let levy = (0..kappas.len()).all(|k| {
        let col: Vec<f64> = upper.iter().map(|row| row[k]).collect();
        col.iter().all(|v| *v == 0.0) || vanishing_trend(&col, DEFAULT_LEVY_DECAY)
    });
    Ok(LevyReport {
        kappas: kappas.to_vec(),
        upper,
        lower,
        decay: DEFAULT_LEVY_DECAY,
        levy,
    })
}
