use serde::{Deserialize, Serialize};

use crate::distribution::DistributionFamily;
use crate::error::{Error, Result};
use crate::kernel::{KernelArray, StepKernel};

/// A weighted-sum array with its weight diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedArray {
    pub array: KernelArray,
    pub max_abs_weight: f64,
    pub sum_sq: f64,
}

/// Array whose step `i` is `base` with every atom multiplied by
/// `weights[i]`.
pub fn weighted_sum_array(weights: &[f64], base: &DistributionFamily) -> Result<WeightedArray> {
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidInput("weights must be finite".into()));
    }
    let array = KernelArray::new(
        weights
            .iter()
            .map(|&w| StepKernel::Constant(base.scaled(w)))
            .collect(),
    )?;
    Ok(WeightedArray {
        array,
        max_abs_weight: weights.iter().fold(0.0_f64, |m, w| m.max(w.abs())),
        sum_sq: weights.iter().map(|w| w * w).sum(),
    })
}

/// Weights `a_{n,i} = (sum_{k=1}^n a_{i-k}) / sqrt(n)`, `i = 1..n+len-1`,
/// that turn `n^{-1/2} sum_{k<=n} X_k` of the moving average
/// `X_k = sum_j a_j eta_{j+k}` into a weighted sum of the innovations.
pub fn moving_average_weights(coeffs: &[f64], n: usize) -> Vec<f64> {
    if coeffs.is_empty() || n == 0 {
        return Vec::new();
    }
    let scale = 1.0 / (n as f64).sqrt();
    (1..n + coeffs.len())
        .map(|i| {
            let total: f64 = (1..=n)
                .filter_map(|k| i.checked_sub(k).and_then(|j| coeffs.get(j)))
                .sum();
            total * scale
        })
        .collect()
}

/// Recipes for building the `n`-th array of a triangular sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ArrayBuilder {
    /// `n` independent steps `{ Rademacher(±sigma/sqrt(n)) : sigma in sigmas }`.
    UncertainRademacher { sigmas: Vec<f64> },
    /// `n` independent copies of `family` scaled by `1/sqrt(n)`.
    ScaledIid { family: DistributionFamily },
    /// Innovations `family` weighted by [`moving_average_weights`].
    MovingAverage {
        coeffs: Vec<f64>,
        family: DistributionFamily,
    },
}

impl ArrayBuilder {
    pub fn build(&self, n: usize) -> Result<KernelArray> {
        if n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        let scale = 1.0 / (n as f64).sqrt();
        match self {
            ArrayBuilder::UncertainRademacher { sigmas } => {
                let amps: Vec<f64> = sigmas.iter().map(|s| s * scale).collect();
                KernelArray::iid(n, DistributionFamily::rademacher(&amps)?)
            }
            ArrayBuilder::ScaledIid { family } => KernelArray::iid(n, family.scaled(scale)),
            ArrayBuilder::MovingAverage { coeffs, family } => {
                Ok(weighted_sum_array(&moving_average_weights(coeffs, n), family)?.array)
            }
        }
    }
}
