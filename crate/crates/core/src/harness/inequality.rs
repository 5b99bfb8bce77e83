use serde::{Deserialize, Serialize};

use crate::distribution::DistributionFamily;
use crate::error::{Error, Result};
use crate::kernel::{KernelArray, StepStats};
use crate::tree::{tree_evaluate, Aggregate, PathTracker};

use super::InequalityReport;

/// Which maximal moment inequality [`rosenthal_check`] tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum RosenthalVariant {
    /// `E[(max_k (S_n - S_k))^2] <= E[sum_k sup E[Z_k^2 | .]]` for arrays
    /// with nonpositive conditional upper means.
    SuffixSq,
    /// `E[max_k |S_k|^2] <= 256 { E[sum var] + E[(sum mean terms)^2] }`.
    MaxSq,
    /// `E[max_k |S_k|^p] <= c_p { E[sum sup E|Z|^p] + E[(sum var)^{p/2}]
    /// + E[(sum mean terms)^p] }`.
    MaxP { p: f64, c_p: f64 },
}

impl RosenthalVariant {
    pub fn name(&self) -> &'static str {
        match self {
            RosenthalVariant::SuffixSq => "suffix_sq",
            RosenthalVariant::MaxSq => "max_sq",
            RosenthalVariant::MaxP { .. } => "max_p",
        }
    }
}

pub const MAX_SQ_CONSTANT: f64 = 256.0;

/// `2^{2p} p^2`.
pub fn default_rosenthal_constant(p: f64) -> f64 {
    4f64.powf(p) * p * p
}

/// `(sup E[Z] | .)^+ + (inf E[Z] | .)^-`.
fn mean_excess(st: &StepStats) -> f64 {
    st.mean_upper.max(0.0) + (-st.mean_lower).max(0.0)
}

/// Upper expectation of `post(sum_k term(k, S_{k-1}))`.
fn path_sum_expect(
    arr: &KernelArray,
    term: &(dyn Fn(usize, f64) -> f64 + Sync),
    post: &(dyn Fn(f64) -> f64 + Sync),
    mode: Aggregate,
) -> Result<f64> {
    let tracker = PathTracker::new(
        vec![0.0],
        |aux, k, s_prev, _| aux[0] += term(k, s_prev),
        |aux, _| post(aux[0]),
    );
    tree_evaluate(arr, &tracker, mode)
}

fn max_abs_power(arr: &KernelArray, p: f64) -> Result<f64> {
    let tracker = PathTracker::new(
        vec![0.0],
        |aux, _, _, s| aux[0] = aux[0].max(s.abs()),
        move |aux, _| aux[0].powf(p),
    );
    tree_evaluate(arr, &tracker, Aggregate::Upper)
}

fn describe(arr: &KernelArray) -> String {
    format!("n={} c_max={:.6}", arr.n_steps(), arr.c_max())
}

/// Both sides of a Rosenthal-type inequality, evaluated exactly on the
/// outcome tree.
pub fn rosenthal_check(arr: &KernelArray, variant: RosenthalVariant) -> Result<InequalityReport> {
    let stats = |k: usize, s: f64| StepStats::of(arr.family(k, s));
    let var_sum = |post: &(dyn Fn(f64) -> f64 + Sync)| {
        path_sum_expect(arr, &|k, s| stats(k, s).var_upper, post, Aggregate::Upper)
    };
    let mean_sum_pow = |q: f64| {
        path_sum_expect(arr, &|k, s| mean_excess(&stats(k, s)), &|v| v.powf(q), Aggregate::Upper)
    };
    let (lhs, rhs) = match variant {
        RosenthalVariant::SuffixSq => {
            let worst_mean = path_sum_expect(
                arr,
                &|k, s| stats(k, s).mean_upper.max(0.0),
                &|v| v,
                Aggregate::PathMax,
            )?;
            if worst_mean > 0.0 {
                return Err(Error::InvalidInstance(
                    "suffix_sq needs nonpositive conditional upper means".into(),
                ));
            }
            let tracker = PathTracker::new(
                vec![0.0],
                |aux, _, _, s| aux[0] = aux[0].min(s),
                |aux, s| (s - aux[0]).powi(2),
            );
            (tree_evaluate(arr, &tracker, Aggregate::Upper)?, var_sum(&|v| v)?)
        }
        RosenthalVariant::MaxSq => (
            max_abs_power(arr, 2.0)?,
            MAX_SQ_CONSTANT * (var_sum(&|v| v)? + mean_sum_pow(2.0)?),
        ),
        RosenthalVariant::MaxP { p, c_p } => {
            if !(p >= 2.0) {
                return Err(Error::param("p", format!("must be at least 2, got {p}")));
            }
            if !(c_p > 0.0) {
                return Err(Error::param("c_p", "must be positive"));
            }
            let abs_p = path_sum_expect(
                arr,
                &|k, s| arr.family(k, s).sup_expect(|x| x.abs().powf(p)),
                &|v| v,
                Aggregate::Upper,
            )?;
            let rhs = c_p * (abs_p + var_sum(&|v| v.powf(p / 2.0))? + mean_sum_pow(p)?);
            (max_abs_power(arr, p)?, rhs)
        }
    };
    Ok(InequalityReport::new(lhs, rhs, format!("{} {}", variant.name(), describe(arr))))
}

/// Maximal moment inequality for independent steps with the closed-form
/// right side `c_p { sum E|X|^p + (sum E X^2)^{p/2} + (sum mean terms)^p }`.
pub fn independent_rosenthal_check(families: &[DistributionFamily], p: f64, c_p: f64) -> Result<InequalityReport> {
    if !(p >= 2.0) {
        return Err(Error::param("p", format!("must be at least 2, got {p}")));
    }
    if !(c_p > 0.0) {
        return Err(Error::param("c_p", "must be positive"));
    }
    let arr = KernelArray::independent(families.to_vec())?;
    let abs_p: f64 = families.iter().map(|f| f.sup_expect(|x| x.abs().powf(p))).sum();
    let sq: f64 = families.iter().map(|f| f.sup_expect(|x| x * x)).sum();
    let means: f64 = families.iter().map(|f| mean_excess(&StepStats::of(f))).sum();
    let rhs = c_p * (abs_p + sq.powf(p / 2.0) + means.powf(p));
    Ok(InequalityReport::new(
        max_abs_power(&arr, p)?,
        rhs,
        format!("independent p={p} c_p={c_p} {}", describe(&arr)),
    ))
}

/// `exp{-x^2 / (2(xy + A)) (1 + 2/3 ln(1 + xy/A))}`.
///
/// `A = 0` is accepted and gives the limiting value 0.
pub fn exponential_bound_value(x: f64, y: f64, a: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::param("x", format!("must be positive, got {x}")));
    }
    if !(y > 0.0) {
        return Err(Error::param("y", format!("must be positive, got {y}")));
    }
    if !(a >= 0.0) || a.is_infinite() {
        return Err(Error::param("A", format!("must be finite and nonnegative, got {a}")));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    let xy = x * y;
    Ok((-x * x / (2.0 * (xy + a)) * (1.0 + 2.0 / 3.0 * (xy / a).ln_1p())).exp())
}

/// Ramp width used for the indicator bracket of `{S_n >= x}`.
fn ramp_width(x: f64) -> f64 {
    1e-9 * x.abs().max(1.0)
}

/// Upper capacity bracket of `{S_n >= x}` against the exponential bound with
/// `A` the largest total of conditional second moments over all paths.
///
/// Only the regime in which every atom is below `y` in magnitude is
/// supported, so that the event `{max Z_k >= y}` is empty.
pub fn exponential_inequality_check(arr: &KernelArray, x: f64, y: f64) -> Result<InequalityReport> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::param("x, y", "must be positive"));
    }
    if arr.c_max() >= y {
        return Err(Error::InvalidInstance(format!(
            "atom of magnitude {} is not below y = {y}",
            arr.c_max()
        )));
    }
    let worst_mean = path_sum_expect(
        arr,
        &|k, s| arr.family(k, s).sup_expect(|z| z).max(0.0),
        &|v| v,
        Aggregate::PathMax,
    )?;
    if worst_mean > 0.0 {
        return Err(Error::InvalidInstance(
            "exponential check needs nonpositive conditional upper means".into(),
        ));
    }
    let a = path_sum_expect(
        arr,
        &|k, s| arr.family(k, s).sup_expect(|z| z * z),
        &|v| v,
        Aggregate::PathMax,
    )?;
    let w = ramp_width(x);
    let bracket = PathTracker::new(vec![], |_, _, _, _| {}, move |_, s| {
        if s >= x {
            1.0
        } else {
            ((s - (x - w)) / w).clamp(0.0, 1.0)
        }
    });
    let lhs = tree_evaluate(arr, &bracket, Aggregate::Upper)?;
    Ok(InequalityReport::new(
        lhs,
        exponential_bound_value(x, y, a)?,
        format!("exponential x={x} y={y} A={a} {}", describe(arr)),
    ))
}
