//! Explicit monotone finite differences for the G-heat equation
//! `d_t u - G(d_xx u) = 0`, `G(a) = (sigma_hi^2 a^+ - sigma_lo^2 a^-) / 2`.
//!
//! The solver marches backward from terminal data,
//! `V^{m+1}_j = V^m_j + dt * G(D2_j V^m)`, which after `T / dt` steps gives
//! `u(., T)` of the forward problem. The step is `dt <= cfl * dx^2 /
//! sigma_hi^2`, which keeps every update a convex combination of neighbours
//! (monotone, so it converges to the viscosity solution). Values beyond the
//! grid are held constant.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, ValueFunction};
use crate::test_function::TestFunction;

/// Number of `sigma_hi * sqrt(horizon)` the grid must extend beyond the
/// breakpoints of the data.
pub const SPAN_SIGMAS: f64 = 6.0;

const PAR_MIN_POINTS: usize = 8192;

/// Lower and upper variance of a G-normal distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GCoefficients {
    sigma_lower_sq: f64,
    sigma_upper_sq: f64,
}

impl GCoefficients {
    pub fn new(sigma_lower_sq: f64, sigma_upper_sq: f64) -> Result<Self> {
        if !(sigma_upper_sq > 0.0 && sigma_upper_sq.is_finite()) {
            return Err(Error::param(
                "sigma_upper_sq",
                format!("must be positive and finite, got {sigma_upper_sq}"),
            ));
        }
        if !(sigma_lower_sq >= 0.0 && sigma_lower_sq <= sigma_upper_sq) {
            return Err(Error::param(
                "sigma_lower_sq",
                format!("need 0 <= {sigma_lower_sq} <= {sigma_upper_sq}"),
            ));
        }
        Ok(Self {
            sigma_lower_sq,
            sigma_upper_sq,
        })
    }

    /// `N(0, [r, 1])`.
    pub fn ratio(r: f64) -> Result<Self> {
        Self::new(r, 1.0)
    }

    /// Classical `N(0, sigma_sq)`.
    pub fn classical(sigma_sq: f64) -> Result<Self> {
        Self::new(sigma_sq, sigma_sq)
    }

    pub fn sigma_lower_sq(&self) -> f64 {
        self.sigma_lower_sq
    }

    pub fn sigma_upper_sq(&self) -> f64 {
        self.sigma_upper_sq
    }
}

pub fn g_operator(alpha: f64, g: GCoefficients) -> f64 {
    0.5 * (g.sigma_upper_sq * alpha.max(0.0) - g.sigma_lower_sq * (-alpha).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatSolveConfig {
    pub grid: Grid,
    pub cfl_safety: f64,
}

impl HeatSolveConfig {
    pub fn new(grid: Grid, cfl_safety: f64) -> Result<Self> {
        let cfg = Self { grid, cfl_safety };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Symmetric grid with spacing `dx` wide enough for data with the given
    /// breakpoint hull, solved over `horizon`.
    pub fn covering(hull: (f64, f64), horizon: f64, g: GCoefficients, dx: f64, cfl_safety: f64) -> Result<Self> {
        let margin = SPAN_SIGMAS * (g.sigma_upper_sq * horizon.max(0.0)).sqrt();
        let half = (hull.0.abs().max(hull.1.abs()) + margin + dx).max(dx);
        Self::new(Grid::symmetric(half, dx)?, cfl_safety)
    }

    fn validate(&self) -> Result<()> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::param(
                "cfl_safety",
                format!("must lie in (0, 1], got {}", self.cfl_safety),
            ));
        }
        Ok(())
    }

    /// Number of time steps and their size for a given horizon.
    pub fn time_steps(&self, horizon: f64, g: GCoefficients) -> (usize, f64) {
        if horizon <= 0.0 {
            return (0, 0.0);
        }
        let dx = self.grid.dx();
        let dt_max = self.cfl_safety * dx * dx / g.sigma_upper_sq;
        let m = (horizon / dt_max - 1e-9).ceil().max(1.0) as usize;
        (m, horizon / m as f64)
    }
}

/// Slice at time 0 of the backward problem with terminal data `phi` at
/// `horizon`, i.e. `x -> E[phi(x + sqrt(horizon) xi)]`.
pub fn solve_g_heat(phi: &TestFunction, horizon: f64, g: GCoefficients, cfg: &HeatSolveConfig) -> Result<ValueFunction> {
    cfg.validate()?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::param("horizon", format!("must be >= 0, got {horizon}")));
    }
    check_span(phi.support_hull(), horizon, g, &cfg.grid)?;
    let values = ValueFunction::sample(cfg.grid, phi).into_values();
    ValueFunction::new(cfg.grid, march(values, &cfg.grid, horizon, g, cfg))
}

/// `E[phi(sqrt(rho) xi)]` for `xi ~ N(0, [sigma_lo^2, sigma_hi^2])`.
pub fn g_normal_expect(phi: &TestFunction, rho: f64, g: GCoefficients, cfg: &HeatSolveConfig) -> Result<f64> {
    Ok(solve_g_heat(phi, rho, g, cfg)?.eval(0.0))
}

pub(crate) fn check_span(hull: (f64, f64), horizon: f64, g: GCoefficients, grid: &Grid) -> Result<()> {
    let margin = SPAN_SIGMAS * (g.sigma_upper_sq * horizon).sqrt();
    let (need_lo, need_hi) = (hull.0.min(0.0) - margin, hull.1.max(0.0) + margin);
    let tol = 1e-9 * (1.0 + need_hi.abs().max(need_lo.abs()));
    if grid.lo() > need_lo + tol || grid.hi() < need_hi - tol {
        return Err(Error::DomainOverflow(format!(
            "grid [{}, {}] narrower than the required span [{need_lo}, {need_hi}]",
            grid.lo(),
            grid.hi()
        )));
    }
    Ok(())
}

/// Runs the explicit scheme on nodal values for the given horizon.
pub(crate) fn march(mut values: Vec<f64>, grid: &Grid, horizon: f64, g: GCoefficients, cfg: &HeatSolveConfig) -> Vec<f64> {
    let (steps, dt) = cfg.time_steps(horizon, g);
    let n = values.len();
    let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    let mut next = vec![0.0; n];
    for _ in 0..steps {
        let v = &values;
        let update = |(j, out): (usize, &mut f64)| {
            let left = v[j.saturating_sub(1)];
            let right = v[(j + 1).min(n - 1)];
            let d2 = (right - 2.0 * v[j] + left) * inv_dx2;
            *out = v[j] + dt * g_operator(d2, g);
        };
        if n >= PAR_MIN_POINTS {
            next.par_iter_mut().enumerate().for_each(update);
        } else {
            next.iter_mut().enumerate().for_each(update);
        }
        std::mem::swap(&mut values, &mut next);
    }
    values
}

/// `E[prod_i phi_i(W_{t_i})]` for a G-Brownian motion `W` with the given
/// coefficients, by nested solves between consecutive times (`t_i` absolute,
/// nondecreasing, positive). After each recording time the upper and lower
/// values of the remaining product are carried together, since the sign of
/// the recorded factor decides which one the supremum needs.
pub fn g_bm_skeleton_expect(times: &[f64], factors: &[TestFunction], g: GCoefficients, cfg: &HeatSolveConfig) -> Result<f64> {
    cfg.validate()?;
    if times.is_empty() || times.len() != factors.len() {
        return Err(Error::InvalidInput(format!(
            "need matching nonempty times and factors, got {} and {}",
            times.len(),
            factors.len()
        )));
    }
    if times.iter().any(|t| !(*t > 0.0 && t.is_finite())) || times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput("times must be positive and nondecreasing".into()));
    }
    let horizon = *times.last().unwrap();
    let hull = factors.iter().map(|f| f.support_hull()).fold((0.0_f64, 0.0_f64), |h, f| {
        (h.0.min(f.0), h.1.max(f.1))
    });
    check_span(hull, horizon, g, &cfg.grid)?;
    let grid = &cfg.grid;
    let mut upper = vec![1.0; grid.len()];
    let mut lower = vec![1.0; grid.len()];
    let mut at = horizon;
    for (phi, &t) in factors.iter().zip(times).rev() {
        upper = march(upper, grid, at - t, g, cfg);
        let neg: Vec<f64> = lower.iter().map(|v| -v).collect();
        lower = march(neg, grid, at - t, g, cfg).into_iter().map(|v| -v).collect();
        crate::dp::combine_record(grid, phi, &mut upper, &mut lower);
        at = t;
    }
    let u0 = march(upper, grid, at, g, cfg);
    Ok(grid.interpolate(&u0, 0.0))
}

/// Upper bound on the capacity `V(|sqrt(variance) xi| > level)` for a
/// G-normal `xi` with unit upper variance, from the moment bound
/// `E|xi|^{2p} = (2p - 1)!! sigma^{2p}` minimized over integer `p`.
pub fn g_normal_tail_bound(level: f64, variance: f64) -> f64 {
    if level <= 0.0 {
        return 1.0;
    }
    if variance <= 0.0 {
        return 0.0;
    }
    let ratio = variance / (level * level);
    let mut log_best = 0.0_f64;
    let mut log_term = 0.0;
    for p in 1..=200u32 {
        // log((2p-1)!! ratio^p) built incrementally.
        log_term += (2.0 * p as f64 - 1.0).ln() + ratio.ln();
        log_best = log_best.min(log_term);
    }
    log_best.exp().min(1.0)
}

/// Closed-form bounds on the third moment of `N(0, [tau, 1])`:
/// `3 (2 -+ sqrt 2) / (4 sqrt pi) * (1 - tau)`.
pub fn g_third_moment_bounds(tau: f64) -> Result<(f64, f64)> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::param("tau", format!("must lie in (0, 1), got {tau}")));
    }
    let c = 3.0 / (4.0 * PI.sqrt()) * (1.0 - tau);
    Ok(((2.0 - 2f64.sqrt()) * c, (2.0 + 2f64.sqrt()) * c))
}
