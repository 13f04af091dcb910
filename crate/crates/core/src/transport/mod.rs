//! Optimal transport and measure-comparison solvers.

pub mod oned;
pub mod prokhorov;
pub mod simplex;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::space::{check_len, Coupling, FiniteMmSpace, ProbWeights};

pub use oned::{displacement_interpolate_1d, Kind, MonotonePlan, WeightedOneDimSpace};
pub use prokhorov::{box_upper_bound_common_space, ky_fan, prokhorov};

/// How the optimal plan is described.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PlanDescription {
    Coupling(Coupling),
    Monotone { cut: usize, pieces: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct TransportPlanReport {
    pub value: ExtReal,
    pub plan: PlanDescription,
    pub dual_gap: f64,
    pub iterations: usize,
}

/// Exact `W_2` on a finite space via the transportation simplex with cost `d^2`.
pub fn w2_exact(space: &FiniteMmSpace, mu: &ProbWeights, nu: &ProbWeights) -> Result<TransportPlanReport> {
    w2_exact_with_tolerance(space, mu, nu, crate::config::Tolerances::default().solver)
}

pub fn w2_exact_with_tolerance(
    space: &FiniteMmSpace,
    mu: &ProbWeights,
    nu: &ProbWeights,
    tol: f64,
) -> Result<TransportPlanReport> {
    check_len(space, mu)?;
    check_len(space, nu)?;
    let (sa, sb) = (mu.support(), nu.support());
    let a: Vec<f64> = sa.iter().map(|&i| mu[i]).collect();
    let mut b: Vec<f64> = sb.iter().map(|&j| nu[j]).collect();
    // balance the two totals exactly so the northwest corner closes
    let diff = a.iter().sum::<f64>() - b.iter().sum::<f64>();
    let jmax = (0..b.len()).max_by(|&x, &y| b[x].total_cmp(&b[y])).expect("nonempty support");
    b[jmax] += diff;
    let m = sb.len();
    let mut cost = Vec::with_capacity(sa.len() * m);
    for &i in &sa {
        for &j in &sb {
            let d = space.d(i, j);
            cost.push(d * d);
        }
    }
    let sol = simplex::solve(&a, &b, &cost, tol)?;
    let n = space.len();
    let mut mass = vec![0.0; n * n];
    for (r, &i) in sa.iter().enumerate() {
        for (c, &j) in sb.iter().enumerate() {
            mass[i * n + j] = sol.flow[r * m + c];
        }
    }
    let coupling = Coupling::new(n, n, mass, mu.as_slice(), nu.as_slice(), 1e3 * tol.max(1e-12))
        .map_err(|e| Error::SolverFailure(format!("coupling marginals: {e}")))?;
    Ok(TransportPlanReport {
        value: ExtReal::Finite(sol.cost.max(0.0).sqrt()),
        plan: PlanDescription::Coupling(coupling),
        dual_gap: sol.dual_gap,
        iterations: sol.iterations,
    })
}

fn monotone_report(plan: &MonotonePlan) -> TransportPlanReport {
    TransportPlanReport {
        value: ExtReal::Finite(plan.w2_squared().sqrt()),
        plan: PlanDescription::Monotone {
            cut: plan.cut,
            pieces: plan.pieces.len(),
        },
        dual_gap: 0.0,
        iterations: plan.pieces.len(),
    }
}

/// `W_2` between piecewise-constant densities on a segment, `(∫ (Q_0 - Q_1)^2 du)^{1/2}`.
pub fn w2_quantile_1d(space: &WeightedOneDimSpace, p0: &ProbWeights, p1: &ProbWeights) -> Result<TransportPlanReport> {
    if space.kind() != Kind::Segment {
        return Err(Error::NonSegment);
    }
    Ok(monotone_report(&MonotonePlan::new(space, p0, p1)?))
}

/// `W_2` between the atomic measures placing each cell mass at its grid point.
/// This is the same quantity [`w2_exact`] computes on [`WeightedOneDimSpace::to_finite_space`].
pub fn w2_quantile_atomic(space: &WeightedOneDimSpace, p0: &ProbWeights, p1: &ProbWeights) -> Result<TransportPlanReport> {
    if space.kind() != Kind::Segment {
        return Err(Error::NonSegment);
    }
    Ok(monotone_report(&MonotonePlan::atomic(space, p0, p1)?))
}

/// `W_2` on a segment or circle; circles use the best of the `M` grid cuts.
pub fn w2_monotone(space: &WeightedOneDimSpace, p0: &ProbWeights, p1: &ProbWeights) -> Result<TransportPlanReport> {
    Ok(monotone_report(&MonotonePlan::new(space, p0, p1)?))
}
