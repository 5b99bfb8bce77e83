use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelArray, StateDependence, StepStats};
use crate::tree::{tree_evaluate, Aggregate, PathTracker};

/// Finite-`n` values of the four CLT conditions.
///
/// For state-dependent arrays each sum is taken along the worst reachable
/// path (largest value; for the variance sum both the largest and smallest
/// path totals enter `rho_gap`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LindebergReport {
    /// `(eps, sum_k sup E[(Z_k^2 - eps)^+ | .])` per requested `eps`.
    pub lindeberg: Vec<(f64, f64)>,
    /// `sum_k sup E[Z_k^2 | .]`, the candidate for `rho`.
    pub var_sum_upper: f64,
    /// `|var_sum_upper - rho_target|` (worst over paths).
    pub rho_gap: f64,
    /// `sum_k |r E[Z_k^2 | .] - inf E[Z_k^2 | .]|`.
    pub r_gap: f64,
    /// `sum_k (|sup E[Z_k | .]| + |inf E[Z_k | .]|)`.
    pub mean_sum: f64,
    /// Whether the sums were taken along worst paths of a state-dependent
    /// kernel.
    pub worst_state: bool,
}

impl LindebergReport {
    /// All four conditions within `tol`.
    pub fn satisfied(&self, tol: f64) -> bool {
        self.lindeberg.iter().all(|&(_, v)| v <= tol)
            && self.rho_gap <= tol
            && self.r_gap <= tol
            && self.mean_sum <= tol
    }
}

pub fn lindeberg_conditions(
    arr: &KernelArray,
    eps_list: &[f64],
    rho_target: f64,
    r_target: f64,
) -> Result<LindebergReport> {
    if eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::param("eps_list", "every eps must be positive"));
    }
    let r_term = move |st: &StepStats| (r_target * st.var_upper - st.var_lower).abs();
    let mean_term = |st: &StepStats| st.mean_upper.abs() + st.mean_lower.abs();
    match arr.state_dependence() {
        StateDependence::Constant => {
            let fams: Vec<_> = (1..=arr.n_steps()).map(|k| arr.family(k, 0.0)).collect();
            let stats: Vec<StepStats> = fams.iter().map(|f| StepStats::of(f)).collect();
            let var_sum: f64 = stats.iter().map(|s| s.var_upper).sum();
            Ok(LindebergReport {
                lindeberg: eps_list
                    .iter()
                    .map(|&e| (e, fams.iter().map(|f| StepStats::lindeberg(f, e)).sum()))
                    .collect(),
                var_sum_upper: var_sum,
                rho_gap: (var_sum - rho_target).abs(),
                r_gap: stats.iter().map(r_term).sum(),
                mean_sum: stats.iter().map(mean_term).sum(),
                worst_state: false,
            })
        }
        StateDependence::StateDependent => {
            let path_sum = |term: &(dyn Fn(usize, f64) -> f64 + Sync), mode| {
                let tracker = PathTracker::new(
                    vec![0.0],
                    |aux, k, s_prev, _| aux[0] += term(k, s_prev),
                    |aux, _| aux[0],
                );
                tree_evaluate(arr, &tracker, mode)
            };
            let stats = |k: usize, s: f64| StepStats::of(arr.family(k, s));
            let mut lindeberg = Vec::with_capacity(eps_list.len());
            for &e in eps_list {
                let v = path_sum(&|k, s| StepStats::lindeberg(arr.family(k, s), e), Aggregate::PathMax)?;
                lindeberg.push((e, v));
            }
            let var_hi = path_sum(&|k, s| stats(k, s).var_upper, Aggregate::PathMax)?;
            let var_lo = path_sum(&|k, s| stats(k, s).var_upper, Aggregate::PathMin)?;
            Ok(LindebergReport {
                lindeberg,
                var_sum_upper: var_hi,
                rho_gap: (var_hi - rho_target).abs().max((var_lo - rho_target).abs()),
                r_gap: path_sum(&|k, s| r_term(&stats(k, s)), Aggregate::PathMax)?,
                mean_sum: path_sum(&|k, s| mean_term(&stats(k, s)), Aggregate::PathMax)?,
                worst_state: true,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{DistributionFamily, StepDistribution};
    use crate::kernel::StepKernel;

    #[test]
    fn scaled_rademacher_satisfies_all_conditions() {
        let n = 16;
        let s = 1.0 / (n as f64).sqrt();
        let arr = KernelArray::iid(n, DistributionFamily::rademacher(&[s]).unwrap()).unwrap();
        let rep = lindeberg_conditions(&arr, &[1.0], 1.0, 1.0).unwrap();
        assert_eq!(rep.lindeberg, vec![(1.0, 0.0)]);
        assert!(rep.rho_gap < 1e-12);
        assert_eq!(rep.mean_sum, 0.0);
        assert!(rep.r_gap < 1e-12);
        assert!(!rep.worst_state);
    }

    #[test]
    fn uncertain_variance_r_condition() {
        let n = 8;
        let s = 1.0 / (n as f64).sqrt();
        let arr = KernelArray::iid(n, DistributionFamily::rademacher(&[0.5 * s, s]).unwrap()).unwrap();
        let rep = lindeberg_conditions(&arr, &[0.5], 1.0, 0.25).unwrap();
        assert!(rep.r_gap < 1e-12);
    }

    #[test]
    fn mean_condition_of_a_point_mass() {
        let arr = KernelArray::iid(1, DistributionFamily::singleton(StepDistribution::point(0.3))).unwrap();
        let rep = lindeberg_conditions(&arr, &[1.0], 0.0, 1.0).unwrap();
        assert!((rep.mean_sum - 0.6).abs() < 1e-15);
    }

    #[test]
    fn state_dependent_worst_path() {
        // Variance 1 below 0 and 0.25 from 0 up: the variance sum over two
        // steps ranges from 0.5 (stay >= 0) to 1.25 (go down first).
        let k = StepKernel::piecewise(
            vec![0.0],
            vec![
                DistributionFamily::rademacher(&[1.0]).unwrap(),
                DistributionFamily::rademacher(&[0.5]).unwrap(),
            ],
        )
        .unwrap();
        let arr = KernelArray::new(vec![k; 2]).unwrap();
        let rep = lindeberg_conditions(&arr, &[0.1], 1.0, 1.0).unwrap();
        assert!(rep.worst_state);
        assert_eq!(rep.var_sum_upper, 1.25);
        assert_eq!(rep.rho_gap, 0.5);
        assert!(lindeberg_conditions(&arr, &[0.0], 1.0, 1.0).is_err());
        let big = KernelArray::new(vec![arr.steps()[0].clone(); 9]).unwrap();
        assert!(matches!(
            lindeberg_conditions(&big, &[0.1], 1.0, 1.0),
            Err(Error::TooLarge(_))
        ));
    }
}
