//! Central tolerance and budget records.
//!
//! Every numeric threshold used by a solver or checker is read from one of
//! these records so that reports can serialize exactly what was used.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Structural checks: symmetry, triangle inequality (relative to max distance), weight sums.
    pub structural: f64,
    /// Linear-program certificates and coupling marginals.
    pub solver: f64,
    /// Quadrature normalisation of one-dimensional densities.
    pub quadrature: f64,
    /// Relative change that stops doubling quadratures.
    pub doubling: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: 1e-12,
            solver: 1e-10,
            quadrature: 1e-8,
            doubling: 1e-8,
        }
    }
}

/// Discretization budget `c1 * h + c2 * h^2 + floor` for curvature-dimension verdicts,
/// applied to margins relative to `max(1, rhs)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CdBudget {
    pub c1: f64,
    pub c2: f64,
    pub floor: f64,
}

/// Rounded up from `experiments::calibrate_cd_budget((256, 512), 50, 1000, 10.0)`.
impl Default for CdBudget {
    fn default() -> Self {
        Self {
            c1: 1e-8,
            c2: 1e-6,
            floor: 1e-9,
        }
    }
}

impl CdBudget {
    pub fn tol(&self, h: f64) -> f64 {
        self.c1 * h + self.c2 * h * h + self.floor
    }
}

/// Tolerance for central-difference convexity residuals, applied pointwise as
/// `r_i >= -(c * h^2 + slack) * |g_i|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvexityTolerance {
    pub c: f64,
    pub slack: f64,
}

impl Default for ConvexityTolerance {
    fn default() -> Self {
        Self { c: 1.0, slack: 1e-9 }
    }
}

/// Combinatorial budgets. Beyond these sizes the concentration routines switch
/// to certified-bound mode instead of approximating silently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budgets {
    pub partial_diameter_exact_max: usize,
    pub separation_exact_max: usize,
    pub obsdiam_random_sets: usize,
    pub obsdiam_random_regularizations: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            partial_diameter_exact_max: 18,
            separation_exact_max: 14,
            obsdiam_random_sets: 32,
            obsdiam_random_regularizations: 32,
        }
    }
}
