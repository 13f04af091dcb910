//! Gauss-Legendre helpers: fixed rules, per-cell averages and doubling composite rules.

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

/// Gauss-Legendre rule with nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pairs: Vec<(f64, f64)>,
}

impl Rule {
    pub fn new(degree: usize) -> Self {
        let gl = GaussLegendre::new(degree.max(2)).expect("Gauss-Legendre degree >= 2 is always valid");
        Self {
            pairs: gl.into_node_weight_pairs(),
        }
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.pairs.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>()
    }

    /// `log ∫_a^b exp(g)` evaluated with log-sum-exp.
    pub fn log_integrate(&self, a: f64, b: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let terms: Vec<f64> = self.pairs.iter().map(|&(x, w)| w.ln() + g(mid + half * x)).collect();
        half.ln() + log_sum_exp(&terms)
    }

    /// Nodes mapped to `[a, b]` together with scaled weights.
    pub fn nodes_on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.pairs.iter().map(move |&(x, w)| (mid + half * x, half * w))
    }
}

pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Average of `f` over each of `cells` equal cells of `[lo, lo + length]`.
pub fn cell_averages(f: impl Fn(f64) -> f64, lo: f64, length: f64, cells: usize) -> Vec<f64> {
    let rule = Rule::new(8);
    let h = length / cells as f64;
    (0..cells)
        .map(|k| {
            let a = lo + k as f64 * h;
            rule.integrate(a, a + h, &f) / h
        })
        .collect()
}

/// Composite Gauss-Legendre on `[a, b]`, doubling the panel count until the
/// relative change drops below `rel_tol`.
pub fn integrate_doubling(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    start_panels: usize,
    rel_tol: f64,
    max_doublings: usize,
) -> Result<f64> {
    let rule = Rule::new(8);
    let composite = |panels: usize| {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let x = a + k as f64 * h;
                rule.integrate(x, x + h, &f)
            })
            .sum::<f64>()
    };
    let mut panels = start_panels.max(1);
    let mut prev = composite(panels);
    let mut rel = f64::INFINITY;
    for _ in 0..max_doublings {
        panels *= 2;
        let next = composite(panels);
        rel = ((next - prev) / next).abs();
        if rel < rel_tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNonConvergent {
        doublings: max_doublings,
        rel_change: rel,
    })
}

/// `log ∫_a^b exp(g)` by adaptive bisection of 8-point panels, for integrands
/// too large or too sharply peaked for a fixed composite rule. Panels whose
/// share of the running total is below `rel_tol` are not refined further.
pub fn log_integrate_adaptive(g: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    struct Ctx<'a> {
        rule: Rule,
        g: &'a dyn Fn(f64) -> f64,
        tol: f64,
        log_tol: f64,
        total: f64,
    }
    fn recurse(cx: &mut Ctx, a: f64, b: f64, whole: f64, depth: usize) -> f64 {
        let mid = 0.5 * (a + b);
        let left = cx.rule.log_integrate(a, mid, cx.g);
        let right = cx.rule.log_integrate(mid, b, cx.g);
        let halves = log_sum_exp(&[left, right]);
        cx.total = cx.total.max(halves);
        // difference of logs is the relative error of the panel
        let converged = (halves - whole).abs() <= cx.tol;
        let negligible = halves.max(whole) - cx.total < cx.log_tol;
        if depth == 0 || converged || negligible || !halves.is_finite() {
            return halves;
        }
        let l = recurse(cx, a, mid, left, depth - 1);
        let r = recurse(cx, mid, b, right, depth - 1);
        log_sum_exp(&[l, r])
    }
    let rule = Rule::new(8);
    let whole = rule.log_integrate(a, b, &g);
    let mut cx = Ctx {
        rule,
        g: &g,
        tol: rel_tol,
        log_tol: rel_tol.ln() - 2.0,
        total: whole,
    };
    recurse(&mut cx, a, b, whole, 60)
}
