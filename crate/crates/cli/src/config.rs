use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use mmlab::config::{Budgets, CdBudget, ConvexityTolerance, Tolerances};
use serde::{Deserialize, Serialize};

/// Default grid sizes of the discretized constructions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Grids {
    pub cosh_family: usize,
    pub counterexample: usize,
    pub thm4: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            cosh_family: 512,
            counterexample: 2048,
            thm4: 512,
        }
    }
}

/// Everything a run depends on besides its flags; serialized into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub tolerances: Tolerances,
    pub cd_budget: CdBudget,
    pub convexity: ConvexityTolerance,
    pub budgets: Budgets,
    pub grids: Grids,
    /// Not serialized: where a report lands does not change its content.
    #[serde(skip_serializing)]
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            cd_budget: CdBudget::default(),
            convexity: ConvexityTolerance::default(),
            budgets: Budgets::default(),
            grids: Grids::default(),
            out_dir: PathBuf::from("reports"),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("--config: cannot read {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("--config: invalid JSON in {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let t = &self.tolerances;
        let positive = [
            ("tolerances.structural", t.structural),
            ("tolerances.solver", t.solver),
            ("tolerances.quadrature", t.quadrature),
            ("tolerances.doubling", t.doubling),
            ("cd_budget.floor", self.cd_budget.floor),
            ("convexity.slack", self.convexity.slack),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                bail!("--config: {name} must be positive, got {v}");
            }
        }
        let nonneg = [
            ("cd_budget.c1", self.cd_budget.c1),
            ("cd_budget.c2", self.cd_budget.c2),
            ("convexity.c", self.convexity.c),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) {
                bail!("--config: {name} must be nonnegative, got {v}");
            }
        }
        let g = &self.grids;
        for (name, v) in [
            ("grids.cosh_family", g.cosh_family),
            ("grids.counterexample", g.counterexample),
            ("grids.thm4", g.thm4),
            ("budgets.partial_diameter_exact_max", self.budgets.partial_diameter_exact_max),
            ("budgets.separation_exact_max", self.budgets.separation_exact_max),
        ] {
            if v == 0 {
                bail!("--config: {name} must be positive");
            }
        }
        Ok(())
    }
}
