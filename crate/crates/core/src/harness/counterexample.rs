use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::{g_normal_expect, g_third_moment_bounds, solve_g_heat, GCoefficients, HeatSolveConfig};
use crate::test_function::TestFunction;

/// Amplitude from which `(1 + a^2)^{1/2}` times the lower third-moment bound
/// exceeds the upper one.
pub const CONTRADICTION_AMPLITUDE: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CounterexampleConfig {
    /// Clip level of the cubic test function.
    pub clip: f64,
    /// Spacing of the G-heat solves.
    pub dx: f64,
    /// Spacing of the classical solve for `x -> E[(x + a eta)^3]`.
    pub inner_dx: f64,
    pub cfl: f64,
    /// Widening of the closed-form third-moment bounds.
    pub tolerance: f64,
    /// Allowed difference between the two third moments.
    pub sum_tolerance: f64,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self {
            clip: 8.0,
            dx: 0.02,
            inner_dx: 0.05,
            cfl: 0.9,
            tolerance: 0.02,
            sum_tolerance: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub tau: f64,
    pub a: f64,
    /// `E[xi^3]` for `xi ~ N(0, [tau, 1])`.
    pub third_moment_xi: f64,
    /// `E[(xi + a eta)^3]` with `eta ~ N(0, 1)` independent of `xi`.
    pub third_moment_sum: f64,
    pub bounds: (f64, f64),
    /// `(1 + a^2)^{1/2}` times the lower bound: what `E[(xi + a eta)^3]`
    /// would have to exceed if `xi + a eta` were G-normal.
    pub scaled_lower_bound: f64,
    pub within_bounds: bool,
    pub sums_agree: bool,
    /// `scaled_lower_bound > upper bound`; only claimed for `|a| >= 6`.
    pub contradiction: bool,
    /// Probability bound of the classical tail beyond the clip level.
    pub tail_bound: f64,
    pub consistent: bool,
}

/// Numerical version of the argument that `xi + a eta` is not G-normal.
pub fn counterexample_check(tau: f64, a: f64, cfg: &CounterexampleConfig) -> Result<CounterexampleReport> {
    let bounds = g_third_moment_bounds(tau)?;
    if !a.is_finite() {
        return Err(Error::param("a", "must be finite"));
    }
    if !(cfg.clip > 0.0 && cfg.dx > 0.0 && cfg.inner_dx > 0.0) {
        return Err(Error::param("cfg", "clip and spacings must be positive"));
    }
    let g = GCoefficients::new(tau, 1.0)?;
    let cube = TestFunction::cube(cfg.clip)?;
    let outer = HeatSolveConfig::covering(cube.support_hull(), 1.0, g, cfg.dx, cfg.cfl)?;
    let third_moment_xi = g_normal_expect(&cube, 1.0, g, &outer)?;

    let third_moment_sum = if a == 0.0 {
        third_moment_xi
    } else {
        let horizon = a * a;
        let wide = TestFunction::cube(cfg.clip + 8.0 * a.abs())?;
        let classical = GCoefficients::classical(1.0)?;
        let inner = HeatSolveConfig::covering(wide.support_hull(), horizon, classical, cfg.inner_dx, cfg.cfl)?;
        let h = solve_g_heat(&wide, horizon, classical, &inner)?.restrict(-cfg.clip, cfg.clip)?;
        g_normal_expect(&h, 1.0, g, &outer)?
    };

    let scaled_lower_bound = (1.0 + a * a).sqrt() * bounds.0;
    let within_bounds = third_moment_xi >= bounds.0 - cfg.tolerance && third_moment_xi <= bounds.1 + cfg.tolerance;
    let sums_agree = (third_moment_sum - third_moment_xi).abs() <= cfg.sum_tolerance;
    let contradiction = scaled_lower_bound > bounds.1;
    let consistent = within_bounds && sums_agree && (a.abs() < CONTRADICTION_AMPLITUDE || contradiction);
    Ok(CounterexampleReport {
        tau,
        a,
        third_moment_xi,
        third_moment_sum,
        bounds,
        scaled_lower_bound,
        within_bounds,
        sums_agree,
        contradiction,
        tail_bound: crate::pde::g_normal_tail_bound(cfg.clip, 1.0),
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplitude_six_contradicts() {
        let cfg = CounterexampleConfig::default();
        let rep = counterexample_check(0.25, 6.0, &cfg).unwrap();
        assert!(rep.within_bounds, "{rep:?}");
        assert!(rep.sums_agree, "{rep:?}");
        assert!(rep.contradiction);
        assert!(rep.consistent);
        assert!((rep.scaled_lower_bound / rep.bounds.0 - 37f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn small_amplitude_does_not_contradict() {
        let cfg = CounterexampleConfig { dx: 0.05, ..Default::default() };
        let rep = counterexample_check(0.5, 1.0, &cfg).unwrap();
        assert!(!rep.contradiction);
        assert!(rep.consistent, "{rep:?}");
        assert!(counterexample_check(1.0, 6.0, &cfg).is_err());
    }
}
