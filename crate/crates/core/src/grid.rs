//! Uniform grids and linearly interpolated value functions on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::test_function::TestFunction;

/// Interpolation weights closer than this to a node snap onto the node.
const SNAP: f64 = 1e-9;

/// Uniform grid `lo, lo + dx, ..., hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    lo: f64,
    dx: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::param("n_points", "need at least 2 points"));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::param("grid", format!("need lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self {
            lo,
            dx: (hi - lo) / (n_points - 1) as f64,
            n_points,
        })
    }

    /// Grid symmetric about 0 with spacing `dx`, containing 0 as a node and
    /// reaching at least `half_width` on both sides.
    pub fn symmetric(half_width: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::param("dx", format!("must be positive, got {dx}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::param(
                "half_width",
                format!("must be positive, got {half_width}"),
            ));
        }
        let k = (half_width / dx - 1e-9).ceil().max(1.0) as usize;
        Ok(Self {
            lo: -(k as f64) * dx,
            dx,
            n_points: 2 * k + 1,
        })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.node(self.n_points - 1)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, j: usize) -> f64 {
        self.lo + j as f64 * self.dx
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|j| self.node(j))
    }

    /// Index of the node nearest to `x`, if `x` is a node up to snapping.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let t = (x - self.lo) / self.dx;
        let r = t.round();
        if (t - r).abs() < SNAP && r >= 0.0 && (r as usize) < self.n_points {
            Some(r as usize)
        } else {
            None
        }
    }

    /// Linear interpolation of nodal `values` at `x`, constant outside.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        debug_assert_eq!(values.len(), self.n_points);
        let t = (x - self.lo) / self.dx;
        let last = self.n_points - 1;
        if t <= 0.0 {
            return values[0];
        }
        if t >= last as f64 {
            return values[last];
        }
        let i = t.floor() as usize;
        let frac = t - i as f64;
        if frac < SNAP {
            values[i]
        } else if frac > 1.0 - SNAP {
            values[i + 1]
        } else {
            values[i] + frac * (values[i + 1] - values[i])
        }
    }

    /// Node index and weight for interpolating at `x`: the value is
    /// `(1 - w) * v[i] + w * v[i + 1]` (with `w = 0` meaning exactly `v[i]`).
    pub(crate) fn locate(&self, x: f64) -> (usize, f64) {
        let t = (x - self.lo) / self.dx;
        let last = self.n_points - 1;
        if t <= 0.0 {
            return (0, 0.0);
        }
        if t >= last as f64 {
            return (last, 0.0);
        }
        let i = t.floor() as usize;
        let frac = t - i as f64;
        if frac < SNAP {
            (i, 0.0)
        } else if frac > 1.0 - SNAP {
            (i + 1, 0.0)
        } else {
            (i, frac)
        }
    }
}

/// Nodal values on a grid, linearly interpolated inside and extended by
/// constants outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl ValueFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn sample(grid: Grid, phi: &TestFunction) -> Self {
        Self {
            grid,
            values: grid.nodes().map(|x| phi.eval(x)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.grid.interpolate(&self.values, x)
    }

    /// The same function as a [`TestFunction`] with the grid nodes as
    /// breakpoints.
    pub fn to_test_function(&self) -> TestFunction {
        TestFunction::new(self.grid.nodes().collect(), self.values.clone())
            .expect("grid nodes are strictly increasing")
    }

    /// Restriction to the nodes in `[lo, hi]`, as a [`TestFunction`] that is
    /// constant beyond the retained range.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<TestFunction> {
        let (bps, vals): (Vec<f64>, Vec<f64>) = self
            .grid
            .nodes()
            .zip(&self.values)
            .filter(|(x, _)| *x >= lo - 1e-12 && *x <= hi + 1e-12)
            .unzip();
        if bps.is_empty() {
            return Err(Error::InvalidInput(format!(
                "no grid node inside [{lo}, {hi}]"
            )));
        }
        TestFunction::new(bps, vals)
    }
}
