//! Kernel arrays: per-step, possibly state-dependent, distribution families.
//!
//! Step `k` of an array draws its increment from the family the kernel
//! returns for the current partial sum. Constant kernels give independent
//! arrays; piecewise kernels give martingale-difference-like arrays whose
//! conditional means and variances are known exactly at every state.

use serde::{Deserialize, Serialize};

use crate::distribution::DistributionFamily;
use crate::error::{Error, Result};

/// The family used at one step, as a function of the current partial sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKernel {
    Constant(DistributionFamily),
    /// `families[i]` applies on `[cuts[i-1], cuts[i])`, with the outer
    /// pieces unbounded.
    Piecewise {
        cuts: Vec<f64>,
        families: Vec<DistributionFamily>,
    },
}

impl StepKernel {
    pub fn piecewise(cuts: Vec<f64>, families: Vec<DistributionFamily>) -> Result<Self> {
        if families.len() != cuts.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} cuts need {} families, got {}",
                cuts.len(),
                cuts.len() + 1,
                families.len()
            )));
        }
        if cuts.iter().any(|c| !c.is_finite()) || cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "cuts must be finite and strictly increasing".into(),
            ));
        }
        Ok(StepKernel::Piecewise { cuts, families })
    }

    pub fn family_at(&self, state: f64) -> &DistributionFamily {
        match self {
            StepKernel::Constant(f) => f,
            StepKernel::Piecewise { cuts, families } => {
                &families[cuts.partition_point(|&c| c <= state)]
            }
        }
    }

    pub fn families(&self) -> &[DistributionFamily] {
        match self {
            StepKernel::Constant(f) => std::slice::from_ref(f),
            StepKernel::Piecewise { families, .. } => families,
        }
    }

    pub fn is_state_dependent(&self) -> bool {
        matches!(self, StepKernel::Piecewise { .. })
    }

    fn validate(&self) -> Result<()> {
        if let StepKernel::Piecewise { cuts, families } = self {
            Self::piecewise(cuts.clone(), families.clone())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateDependence {
    Constant,
    StateDependent,
}

/// An `n`-step array of kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<StepKernel>", into = "Vec<StepKernel>")]
pub struct KernelArray {
    steps: Vec<StepKernel>,
    c_max: f64,
}

impl KernelArray {
    pub fn new(steps: Vec<StepKernel>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidInput("kernel array needs at least one step".into()));
        }
        for s in &steps {
            s.validate()?;
        }
        let c_max = steps
            .iter()
            .flat_map(|s| s.families())
            .fold(0.0_f64, |m, f| m.max(f.max_abs_atom()));
        Ok(Self { steps, c_max })
    }

    /// `n` independent copies of the same family.
    pub fn iid(n: usize, family: DistributionFamily) -> Result<Self> {
        Self::new(vec![StepKernel::Constant(family); n])
    }

    /// Independent steps with the given families.
    pub fn independent(families: Vec<DistributionFamily>) -> Result<Self> {
        Self::new(families.into_iter().map(StepKernel::Constant).collect())
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    /// Uniform bound on the magnitude of every increment.
    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    pub fn steps(&self) -> &[StepKernel] {
        &self.steps
    }

    /// Family used at 1-based step `k` from partial sum `state`.
    pub fn family(&self, k: usize, state: f64) -> &DistributionFamily {
        self.steps[k - 1].family_at(state)
    }

    pub fn state_dependence(&self) -> StateDependence {
        if self.steps.iter().any(StepKernel::is_state_dependent) {
            StateDependence::StateDependent
        } else {
            StateDependence::Constant
        }
    }

    /// Every family appearing anywhere in the array.
    pub fn all_families(&self) -> impl Iterator<Item = &DistributionFamily> {
        self.steps.iter().flat_map(|s| s.families())
    }

    /// Smallest nonzero atom magnitude across the array, if any.
    pub fn min_positive_atom(&self) -> Option<f64> {
        self.all_families()
            .flat_map(|f| f.members())
            .flat_map(|m| m.atoms().iter().map(|a| a.0.abs()))
            .filter(|&a| a > 1e-12)
            .reduce(f64::min)
    }
}

impl TryFrom<Vec<StepKernel>> for KernelArray {
    type Error = Error;

    fn try_from(steps: Vec<StepKernel>) -> Result<Self> {
        Self::new(steps)
    }
}

impl From<KernelArray> for Vec<StepKernel> {
    fn from(a: KernelArray) -> Self {
        a.steps
    }
}

/// Conditional moments of one step at one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub mean_upper: f64,
    pub mean_lower: f64,
    pub var_upper: f64,
    pub var_lower: f64,
}

impl StepStats {
    pub fn of(family: &DistributionFamily) -> Self {
        Self {
            mean_upper: family.sup_expect(|x| x),
            mean_lower: family.inf_expect(|x| x),
            var_upper: family.sup_expect(|x| x * x),
            var_lower: family.inf_expect(|x| x * x),
        }
    }

    /// `sup E[(Z^2 - eps)^+]` for the family these stats came from.
    pub fn lindeberg(family: &DistributionFamily, eps: f64) -> f64 {
        family.sup_expect(|x| (x * x - eps).max(0.0))
    }
}

/// Conditional means, second moments and the truncated second moment
/// `sup E[(Z^2 - eps)^+]` of step `k` (1-based) at partial sum `s`.
#[derive(Debug, Clone)]
pub struct ConditionalStepStats<'a> {
    pub stats: StepStats,
    family: &'a DistributionFamily,
}

impl ConditionalStepStats<'_> {
    pub fn lindeberg(&self, eps: f64) -> f64 {
        StepStats::lindeberg(self.family, eps)
    }
}

impl std::ops::Deref for ConditionalStepStats<'_> {
    type Target = StepStats;

    fn deref(&self) -> &StepStats {
        &self.stats
    }
}

pub fn conditional_step_stats(arr: &KernelArray, k: usize, s: f64) -> Result<ConditionalStepStats<'_>> {
    if k == 0 || k > arr.n_steps() {
        return Err(Error::param(
            "k",
            format!("step {k} outside 1..={}", arr.n_steps()),
        ));
    }
    let family = arr.family(k, s);
    Ok(ConditionalStepStats {
        stats: StepStats::of(family),
        family,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::StepDistribution;

    #[test]
    fn step_stats_examples() {
        let rad = KernelArray::iid(1, DistributionFamily::rademacher(&[1.0]).unwrap()).unwrap();
        let st = conditional_step_stats(&rad, 1, 0.0).unwrap();
        assert_eq!((st.mean_upper, st.mean_lower), (0.0, 0.0));
        assert_eq!((st.var_upper, st.var_lower), (1.0, 1.0));
        assert_eq!(st.lindeberg(2.0), 0.0);

        let two = KernelArray::iid(1, DistributionFamily::rademacher(&[0.5, 1.0]).unwrap()).unwrap();
        let st = conditional_step_stats(&two, 1, 0.0).unwrap();
        assert_eq!((st.var_upper, st.var_lower), (1.0, 0.25));

        let pt = KernelArray::iid(
            1,
            DistributionFamily::singleton(StepDistribution::point(0.3)),
        )
        .unwrap();
        let st = conditional_step_stats(&pt, 1, 0.0).unwrap();
        assert_eq!((st.mean_upper, st.mean_lower), (0.3, 0.3));
        assert!((st.var_upper - 0.09).abs() < 1e-15);
        assert!((st.var_lower - 0.09).abs() < 1e-15);

        assert!(conditional_step_stats(&pt, 0, 0.0).is_err());
        assert!(conditional_step_stats(&pt, 2, 0.0).is_err());
    }

    #[test]
    fn piecewise_kernel_selects_by_state() {
        let lo = DistributionFamily::rademacher(&[1.0]).unwrap();
        let hi = DistributionFamily::rademacher(&[0.5]).unwrap();
        let k = StepKernel::piecewise(vec![0.0], vec![lo.clone(), hi.clone()]).unwrap();
        assert_eq!(k.family_at(-0.1), &lo);
        assert_eq!(k.family_at(0.0), &hi);
        let arr = KernelArray::new(vec![k]).unwrap();
        assert_eq!(arr.state_dependence(), StateDependence::StateDependent);
        assert_eq!(arr.c_max(), 1.0);
        assert_eq!(arr.min_positive_atom(), Some(0.5));
        assert!(StepKernel::piecewise(vec![0.0], vec![lo]).is_err());
    }
}
