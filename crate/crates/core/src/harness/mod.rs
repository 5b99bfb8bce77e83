//! Numerical checks of limit theorems and moment inequalities.
//!
//! Prelimit values come from the backward-induction engine (or the exact
//! tree for small instances), limit values from the G-heat solver, and the
//! reports here put the two side by side.

mod arrays;
mod convergence;
mod counterexample;
mod inequality;
mod lindeberg;
pub mod random;

use serde::{Deserialize, Serialize};

pub use arrays::{moving_average_weights, weighted_sum_array, ArrayBuilder, WeightedArray};
pub use convergence::{clt_gap, fclt_gap, levy_demo, levy_family, GapStudy, GridPolicy, LevyReport, PdeSettings};
pub use counterexample::{counterexample_check, CounterexampleConfig, CounterexampleReport};
pub use inequality::{
    default_rosenthal_constant, exponential_bound_value, exponential_inequality_check,
    independent_rosenthal_check, rosenthal_check, RosenthalVariant,
};
pub use lindeberg::{lindeberg_conditions, LindebergReport};

/// Slack below this counts as a violated inequality.
pub const SLACK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub prelimit: f64,
    pub limit: f64,
    pub gap: f64,
}

/// Prelimit and limit values side by side, sorted by `n`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn push(&mut self, n: usize, prelimit: f64, limit: f64) {
        self.rows.push(ConvergenceRow {
            n,
            prelimit,
            limit,
            gap: (prelimit - limit).abs(),
        });
        self.rows.sort_by_key(|r| r.n);
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gap).collect()
    }

    pub fn first_gap(&self) -> Option<f64> {
        self.rows.first().map(|r| r.gap)
    }

    pub fn last_gap(&self) -> Option<f64> {
        self.rows.last().map(|r| r.gap)
    }

    /// Whether each gap is at most the previous one plus `tol`.
    pub fn is_nonincreasing(&self, tol: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].gap <= w[0].gap + tol)
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].gap < w[0].gap)
    }
}

/// Both sides of one inequality instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub instance: String,
}

impl InequalityReport {
    pub fn new(lhs: f64, rhs: f64, instance: impl Into<String>) -> Self {
        Self {
            lhs,
            rhs,
            slack: rhs - lhs,
            instance: instance.into(),
        }
    }

    pub fn holds(&self) -> bool {
        self.slack >= -SLACK_TOLERANCE
    }
}
