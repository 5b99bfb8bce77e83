//! One-step sub-linear expectations, capacities and Choquet integrals.

use serde::{Deserialize, Serialize};

use crate::distribution::DistributionFamily;
use crate::error::{Error, Result};
use crate::test_function::TestFunction;

/// Upper expectation: the largest classical expectation of `phi` over the
/// members of `fam`.
pub fn expect_step(fam: &DistributionFamily, phi: &TestFunction) -> f64 {
    fam.sup_expect(|x| phi.eval(x))
}

/// Conjugate expectation `-E[-phi]`, i.e. the smallest member expectation.
pub fn conjugate_expect_step(fam: &DistributionFamily, phi: &TestFunction) -> f64 {
    -expect_step(fam, &phi.negate())
}

/// Lower and upper bounds on the upper capacity of an event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityBracket {
    pub lower: f64,
    pub upper: f64,
}

impl CapacityBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Brackets the upper capacity of `{X >= threshold}` between the upper
/// expectations of two ramps: one vanishing below `threshold` (below the
/// indicator) and one equal to 1 from `threshold` on (above it).
pub fn capacity_bracket(
    fam: &DistributionFamily,
    threshold: f64,
    ramp_width: f64,
) -> Result<CapacityBracket> {
    if !(ramp_width > 0.0 && ramp_width.is_finite()) {
        return Err(Error::param(
            "ramp_width",
            format!("must be positive, got {ramp_width}"),
        ));
    }
    let below = TestFunction::ramp(threshold, threshold + ramp_width)?;
    let above = TestFunction::ramp(threshold - ramp_width, threshold)?;
    Ok(CapacityBracket {
        lower: expect_step(fam, &below),
        upper: expect_step(fam, &above),
    })
}

/// Composite-trapezoid Choquet integral
/// `int_0^inf V(X>=t) dt + int_{-inf}^0 (V(X>=t) - 1) dt`
/// with `V` taken as 1 below `lo` and 0 above `hi`.
///
/// With that truncation the integral equals `lo + int_lo^hi V(t) dt`, which
/// is what is evaluated.
pub fn choquet(
    capacity: impl Fn(f64) -> f64,
    support_bounds: (f64, f64),
    quadrature_step: f64,
) -> Result<f64> {
    let (lo, hi) = support_bounds;
    if !(lo < hi) {
        return Err(Error::param(
            "support_bounds",
            format!("need lo < hi, got ({lo}, {hi})"),
        ));
    }
    if !(quadrature_step > 0.0) {
        return Err(Error::param("quadrature_step", "must be positive"));
    }
    let cells = ((hi - lo) / quadrature_step).ceil().max(1.0) as usize;
    let h = (hi - lo) / cells as f64;
    let samples: Vec<f64> = (0..=cells).map(|i| capacity(lo + i as f64 * h)).collect();
    if let Some(bad) = samples.iter().position(|v| !v.is_finite() || *v < -1e-12 || *v > 1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "capacity value {} at t = {} outside [0, 1]",
            samples[bad],
            lo + bad as f64 * h
        )));
    }
    if let Some(i) = samples.windows(2).position(|w| w[1] > w[0] + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "capacity increases between t = {} and t = {}",
            lo + i as f64 * h,
            lo + (i + 1) as f64 * h
        )));
    }
    let interior: f64 = samples[1..cells].iter().sum();
    Ok(lo + h * (0.5 * (samples[0] + samples[cells]) + interior))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::StepDistribution;

    fn sq() -> TestFunction {
        TestFunction::square(10.0).unwrap()
    }

    fn two_rad() -> DistributionFamily {
        DistributionFamily::rademacher(&[0.5, 1.0]).unwrap()
    }

    #[test]
    fn expect_step_examples() {
        let delta0 = DistributionFamily::singleton(StepDistribution::point(0.0));
        assert_eq!(expect_step(&delta0, &sq()), 0.0);
        assert_eq!(expect_step(&two_rad(), &sq()), 1.0);
        let rad = DistributionFamily::rademacher(&[1.0]).unwrap();
        assert_eq!(expect_step(&rad, &TestFunction::identity(10.0).unwrap()), 0.0);
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(conjugate_expect_step(&two_rad(), &sq()), 0.25);
        let c = 1.3;
        let dc = DistributionFamily::singleton(StepDistribution::point(c));
        let phi = TestFunction::cube(8.0).unwrap();
        assert!((conjugate_expect_step(&dc, &phi) - phi.eval(c)).abs() < 1e-15);
        assert!((expect_step(&dc, &phi) - phi.eval(c)).abs() < 1e-15);
        let rad = DistributionFamily::rademacher(&[1.0]).unwrap();
        assert_eq!(
            conjugate_expect_step(&rad, &TestFunction::identity(10.0).unwrap()),
            0.0
        );
    }

    #[test]
    fn capacity_bracket_examples() {
        let rad = DistributionFamily::rademacher(&[1.0]).unwrap();
        let b = capacity_bracket(&rad, 0.5, 0.25).unwrap();
        assert_eq!((b.lower, b.upper), (0.5, 0.5));

        let delta0 = DistributionFamily::singleton(StepDistribution::point(0.0));
        let b = capacity_bracket(&delta0, 1.0, 0.5).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));

        // Member ±1 puts mass 1/2 beyond both ramps; member ±0.5 puts none.
        let b = capacity_bracket(&two_rad(), 0.75, 0.1).unwrap();
        assert_eq!((b.lower, b.upper), (0.5, 0.5));

        assert!(matches!(
            capacity_bracket(&rad, 0.0, 0.0),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn capacity_bracket_tightens_as_ramp_shrinks() {
        let fam = DistributionFamily::new(vec![
            StepDistribution::new(vec![(0.0, 0.5), (0.6, 0.25), (1.2, 0.25)]).unwrap(),
            StepDistribution::rademacher(0.9),
        ])
        .unwrap();
        let mut prev = capacity_bracket(&fam, 0.7, 1.0).unwrap();
        for w in [0.5, 0.25, 0.125, 0.05, 0.01] {
            let b = capacity_bracket(&fam, 0.7, w).unwrap();
            assert!(b.lower >= prev.lower - 1e-15);
            assert!(b.upper <= prev.upper + 1e-15);
            prev = b;
        }
        // No atom within 0.05 of the threshold: the bracket is exact.
        assert!(prev.width() < 1e-15);
    }

    #[test]
    fn choquet_examples() {
        let c = 1.7;
        let h = 0.01;
        let v = choquet(|t| if t <= c { 1.0 } else { 0.0 }, (-1.0, 3.0), h).unwrap();
        assert!((v - c).abs() <= h);

        let v = choquet(
            |t| {
                if t <= 0.0 {
                    1.0
                } else if t <= 1.0 {
                    0.6
                } else {
                    0.0
                }
            },
            (0.0, 2.0),
            1e-3,
        )
        .unwrap();
        assert!((v - 0.6).abs() < 1e-3, "{v}");

        let v = choquet(
            |t| {
                if t <= 0.0 {
                    1.0
                } else if t <= 1.0 {
                    0.3
                } else {
                    0.0
                }
            },
            (-2.0, 2.0),
            1e-3,
        )
        .unwrap();
        assert!((v - 0.3).abs() < 1e-3, "{v}");
    }

    #[test]
    fn choquet_rejects_increasing_capacity() {
        let err = choquet(|t| if t < 0.5 { 0.2 } else { 0.8 }, (0.0, 1.0), 0.1).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        assert!(choquet(|_| 0.5, (1.0, 0.0), 0.1).is_err());
        assert!(choquet(|_| 0.5, (0.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn choquet_of_bracket_capacity_matches_mean_of_nonnegative_variable() {
        // A single classical member: Choquet integral equals the mean.
        let d = StepDistribution::new(vec![(0.5, 0.25), (1.0, 0.5), (2.0, 0.25)]).unwrap();
        let fam = DistributionFamily::singleton(d.clone());
        let cap = |t: f64| {
            fam.sup_expect(|x| if x >= t { 1.0 } else { 0.0 })
        };
        let v = choquet(cap, (0.0, 3.0), 1e-4).unwrap();
        assert!((v - d.mean()).abs() < 1e-3);
    }
}
