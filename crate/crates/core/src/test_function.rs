//! Bounded piecewise-linear test functions with constant tails.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Breakpoint spacing used when sampling smooth functions such as `x^2`.
/// Dyadic so that dyadic lattice points are reproduced exactly.
pub const DEFAULT_MESH: f64 = 1.0 / 256.0;

/// A continuous piecewise-linear function, linear between consecutive
/// breakpoints and constant beyond the first and last one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTestFunction", into = "RawTestFunction")]
pub struct TestFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTestFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawTestFunction> for TestFunction {
    type Error = Error;

    fn try_from(raw: RawTestFunction) -> Result<Self> {
        Self::new(raw.breakpoints, raw.values)
    }
}

impl From<TestFunction> for RawTestFunction {
    fn from(f: TestFunction) -> Self {
        RawTestFunction {
            breakpoints: f.breakpoints,
            values: f.values,
        }
    }
}

impl TestFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidFunction("no breakpoints".into()));
        }
        if breakpoints.len() != values.len() {
            return Err(Error::InvalidFunction(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction("non-finite entry".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidFunction(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    pub fn constant(c: f64) -> Self {
        Self {
            breakpoints: vec![0.0],
            values: vec![c],
        }
    }

    /// Samples `f` on `[lo, hi]` with the given mesh (the last cell may be
    /// shorter so that `hi` is a breakpoint), constant outside.
    pub fn sampled(f: impl Fn(f64) -> f64, lo: f64, hi: f64, mesh: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::param("lo", format!("need lo < hi, got [{lo}, {hi}]")));
        }
        if !(mesh > 0.0) {
            return Err(Error::param("mesh", "must be positive"));
        }
        let cells = ((hi - lo) / mesh - 1e-9).ceil().max(1.0) as usize;
        let mut bps: Vec<f64> = (0..cells).map(|i| lo + i as f64 * mesh).collect();
        bps.push(hi);
        let values = bps.iter().map(|&x| f(x)).collect();
        Self::new(bps, values)
    }

    /// Ramp rising linearly from 0 at `start` to 1 at `end`.
    pub fn ramp(start: f64, end: f64) -> Result<Self> {
        Self::new(vec![start, end], vec![0.0, 1.0])
    }

    /// `min(max(x, 0), clip)`.
    pub fn positive_part(clip: f64) -> Result<Self> {
        check_clip(clip)?;
        Self::new(vec![0.0, clip], vec![0.0, clip])
    }

    /// `x` clamped to `[-clip, clip]`.
    pub fn identity(clip: f64) -> Result<Self> {
        check_clip(clip)?;
        Self::new(vec![-clip, clip], vec![-clip, clip])
    }

    /// `min(|x|, clip)`.
    pub fn abs(clip: f64) -> Result<Self> {
        check_clip(clip)?;
        Self::new(vec![-clip, 0.0, clip], vec![clip, 0.0, clip])
    }

    /// Piecewise-linear interpolant of `sign(x)^odd * |x|^p` on `[-clip, clip]`
    /// with the given mesh; `odd = true` gives e.g. `x^3`, `false` gives `|x|^p`.
    pub fn power(p: f64, odd: bool, clip: f64, mesh: f64) -> Result<Self> {
        check_clip(clip)?;
        if !(p > 0.0) {
            return Err(Error::param("p", "power must be positive"));
        }
        Self::sampled(
            |x| {
                let m = x.abs().powf(p);
                if odd && x < 0.0 {
                    -m
                } else {
                    m
                }
            },
            -clip,
            clip,
            mesh,
        )
    }

    pub fn square(clip: f64) -> Result<Self> {
        Self::power(2.0, false, clip, DEFAULT_MESH)
    }

    pub fn cube(clip: f64) -> Result<Self> {
        Self::power(3.0, true, clip, DEFAULT_MESH)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let b = &self.breakpoints;
        let n = b.len();
        if x <= b[0] {
            return self.values[0];
        }
        if x >= b[n - 1] {
            return self.values[n - 1];
        }
        let i = b.partition_point(|&p| p <= x);
        let (x0, x1) = (b[i - 1], b[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn lipschitz(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(b, v)| ((v[1] - v[0]) / (b[1] - b[0])).abs())
            .fold(0.0, f64::max)
    }

    /// Smallest and largest breakpoint.
    pub fn support_hull(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    pub fn add(&self, other: &TestFunction) -> TestFunction {
        let mut bps: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(&other.breakpoints)
            .copied()
            .collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let values = bps.iter().map(|&x| self.eval(x) + other.eval(x)).collect();
        TestFunction {
            breakpoints: bps,
            values,
        }
    }

    pub fn scale(&self, factor: f64) -> TestFunction {
        self.map_values(|v| factor * v)
    }

    pub fn negate(&self) -> TestFunction {
        self.map_values(|v| -v)
    }

    /// `x -> self(x) + c`.
    pub fn shift(&self, c: f64) -> TestFunction {
        self.map_values(|v| v + c)
    }

    /// `x -> self(factor * x)` for `factor > 0`.
    pub fn dilate(&self, factor: f64) -> Result<TestFunction> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::param("factor", "must be positive and finite"));
        }
        Self::new(
            self.breakpoints.iter().map(|b| b / factor).collect(),
            self.values.clone(),
        )
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> TestFunction {
        TestFunction {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

fn check_clip(clip: f64) -> Result<()> {
    if clip > 0.0 && clip.is_finite() {
        Ok(())
    } else {
        Err(Error::param("clip", format!("must be positive, got {clip}")))
    }
}
