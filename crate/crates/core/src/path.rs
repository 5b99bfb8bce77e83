//! Functionals of the partial-sum path that admit a finite augmented state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::test_function::TestFunction;

/// Largest number of recorded times a skeleton functional may use.
pub const MAX_SKELETON_TIMES: usize = 4;

/// A bounded functional of the partial sums `S_0 = 0, S_1, ..., S_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathFunctional {
    /// `phi(S_n)`.
    Terminal { phi: TestFunction },
    /// `phi(max_{0<=k<=n} S_k)`.
    RunningMax { phi: TestFunction },
    /// `phi(max_{0<=k<=n} |S_k|)`.
    RunningMaxAbs { phi: TestFunction },
    /// `phi(max_{0<=k<=n} (S_n - S_k))`.
    SuffixMax { phi: TestFunction },
    /// `prod_i phi_i(S_{k_i})` with `k_i = round(t_i * n)`.
    Skeleton {
        times: Vec<f64>,
        factors: Vec<TestFunction>,
    },
}

impl PathFunctional {
    pub fn terminal(phi: TestFunction) -> Self {
        PathFunctional::Terminal { phi }
    }

    pub fn running_max(phi: TestFunction) -> Self {
        PathFunctional::RunningMax { phi }
    }

    pub fn skeleton(times: Vec<f64>, factors: Vec<TestFunction>) -> Result<Self> {
        let f = PathFunctional::Skeleton { times, factors };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if let PathFunctional::Skeleton { times, factors } = self {
            if times.len() > MAX_SKELETON_TIMES {
                return Err(Error::TooLarge(format!(
                    "skeleton with {} times exceeds the cap of {MAX_SKELETON_TIMES}",
                    times.len()
                )));
            }
            if times.is_empty() || times.len() != factors.len() {
                return Err(Error::InvalidInput(format!(
                    "skeleton needs matching nonempty times and factors, got {} and {}",
                    times.len(),
                    factors.len()
                )));
            }
            if times.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) || times.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::InvalidInput(
                    "skeleton times must be nondecreasing in (0, 1]".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PathFunctional::Terminal { .. } => "terminal",
            PathFunctional::RunningMax { .. } => "running_max",
            PathFunctional::RunningMaxAbs { .. } => "running_max_abs",
            PathFunctional::SuffixMax { .. } => "suffix_max",
            PathFunctional::Skeleton { .. } => "skeleton",
        }
    }
}

/// Step indices at which a skeleton records the partial sum.
pub fn skeleton_indices(times: &[f64], n_steps: usize) -> Vec<usize> {
    times
        .iter()
        .map(|t| ((t * n_steps as f64).round() as usize).min(n_steps))
        .collect()
}
