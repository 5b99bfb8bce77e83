//! Backward induction on a grid.
//!
//! `u_n = phi` on the grid and
//! `u_{k-1}(x) = sup_{mu in kernel(k, x)} E_mu[u_k(x + Z)]`, with `u_k`
//! linearly interpolated between nodes and held constant beyond the grid.
//! When every reachable partial sum is a grid node the result coincides with
//! the exact tree value; otherwise the interpolation error is first order in
//! the spacing.
//!
//! Path functionals with a running statistic (max, max of absolute value,
//! min) use a two-dimensional state `(sum, statistic)` with bilinear
//! interpolation. Skeleton functionals stay one-dimensional: at a recording
//! time the factor `phi_i(s)` is known, so the upper value of the remaining
//! product is `phi_i(s)^+ U(s) - phi_i(s)^- L(s)` with `U`, `L` the upper and
//! lower values of the rest.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, ValueFunction};
use crate::kernel::KernelArray;
use crate::path::{skeleton_indices, PathFunctional};
use crate::test_function::TestFunction;

/// Grids at least this large are swept in parallel.
const PAR_MIN_POINTS: usize = 4096;

/// Checks that the grid covers every partial sum reachable from 0.
pub fn check_reach(arr: &KernelArray, grid: &Grid) -> Result<()> {
    let reach = arr.n_steps() as f64 * arr.c_max();
    let tol = 1e-9 * (1.0 + reach);
    if grid.lo() > -reach + tol || grid.hi() < reach - tol {
        return Err(Error::DomainOverflow(format!(
            "grid [{}, {}] does not contain the reachable range [-{reach}, {reach}]",
            grid.lo(),
            grid.hi()
        )));
    }
    Ok(())
}

/// Sub-linear expectation of `phi(Z_1 + ... + Z_n)`.
pub fn dp_sum_expect(arr: &KernelArray, phi: &TestFunction, grid: &Grid) -> Result<f64> {
    check_reach(arr, grid)?;
    let terminal = ValueFunction::sample(*grid, phi).into_values();
    let u0 = sweep(arr, grid, terminal, arr.n_steps(), 0, true);
    Ok(grid.interpolate(&u0, 0.0))
}

/// The full time-0 value function of `phi(x + Z_1 + ... + Z_n)`.
pub fn dp_value_function(arr: &KernelArray, phi: &TestFunction, grid: &Grid) -> Result<ValueFunction> {
    check_reach(arr, grid)?;
    let terminal = ValueFunction::sample(*grid, phi).into_values();
    ValueFunction::new(*grid, sweep(arr, grid, terminal, arr.n_steps(), 0, true))
}

/// Sub-linear expectation of a path functional, by backward induction over
/// the augmented state.
pub fn dp_path_expect(arr: &KernelArray, functional: &PathFunctional, grid: &Grid) -> Result<f64> {
    functional.validate()?;
    match functional {
        PathFunctional::Terminal { phi } => dp_sum_expect(arr, phi, grid),
        PathFunctional::RunningMax { phi } => {
            check_reach(arr, grid)?;
            augmented(arr, grid, Statistic::Max, |_, a| phi.eval(a))
        }
        PathFunctional::RunningMaxAbs { phi } => {
            check_reach(arr, grid)?;
            augmented(arr, grid, Statistic::MaxAbs, |_, a| phi.eval(a))
        }
        PathFunctional::SuffixMax { phi } => {
            check_reach(arr, grid)?;
            augmented(arr, grid, Statistic::Min, |s, a| phi.eval(s - a))
        }
        PathFunctional::Skeleton { times, factors } => {
            check_reach(arr, grid)?;
            skeleton(arr, grid, times, factors)
        }
    }
}

/// Applies steps `to+1 ..= from` backward to nodal values at step `from`,
/// returning nodal values at step `to`. `upper` selects sup or inf over
/// members.
pub(crate) fn sweep(arr: &KernelArray, grid: &Grid, mut values: Vec<f64>, from: usize, to: usize, upper: bool) -> Vec<f64> {
    let mut next = vec![0.0; values.len()];
    for k in (to + 1..=from).rev() {
        let update = |(j, out): (usize, &mut f64)| {
            let x = grid.node(j);
            let fam = arr.family(k, x);
            let mut best = if upper { f64::NEG_INFINITY } else { f64::INFINITY };
            for m in fam.members() {
                let e: f64 = m
                    .atoms()
                    .iter()
                    .map(|&(z, w)| w * grid.interpolate(&values, x + z))
                    .sum();
                best = if upper { best.max(e) } else { best.min(e) };
            }
            *out = best;
        };
        if next.len() >= PAR_MIN_POINTS {
            next.par_iter_mut().enumerate().for_each(update);
        } else {
            next.iter_mut().enumerate().for_each(update);
        }
        std::mem::swap(&mut values, &mut next);
    }
    values
}

#[derive(Debug, Clone, Copy)]
enum Statistic {
    Max,
    MaxAbs,
    Min,
}

impl Statistic {
    fn update(self, a: f64, s: f64) -> f64 {
        match self {
            Statistic::Max => a.max(s),
            Statistic::MaxAbs => a.max(s.abs()),
            Statistic::Min => a.min(s),
        }
    }
}

fn augmented(arr: &KernelArray, grid: &Grid, stat: Statistic, terminal: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let zero = grid.index_of(0.0).ok_or_else(|| {
        Error::InvalidInput("running statistics need 0 to be a grid node".into())
    })?;
    // The statistic lives on the half of the grid it can reach from 0.
    let (a_lo, a_len) = match stat {
        Statistic::Max | Statistic::MaxAbs => (zero, grid.len() - zero),
        Statistic::Min => (0, zero + 1),
    };
    let a_grid = Grid::new(grid.node(a_lo), grid.node(a_lo + a_len - 1), a_len.max(2))?;
    let ns = grid.len();
    let mut values: Vec<f64> = (0..a_len)
        .flat_map(|ia| {
            let a = grid.node(a_lo + ia);
            let terminal = &terminal;
            (0..ns).map(move |js| terminal(grid.node(js), a))
        })
        .collect();
    let mut next = vec![0.0; values.len()];
    let bilinear = |v: &[f64], s: f64, a: f64| -> f64 {
        let (js, ws) = grid.locate(s);
        let (ia, wa) = if a_len == 1 { (0, 0.0) } else { a_grid.locate(a) };
        let at = |i: usize, j: usize| v[i * ns + j];
        let row = |i: usize| {
            if ws == 0.0 {
                at(i, js)
            } else {
                (1.0 - ws) * at(i, js) + ws * at(i, js + 1)
            }
        };
        if wa == 0.0 {
            row(ia)
        } else {
            (1.0 - wa) * row(ia) + wa * row(ia + 1)
        }
    };
    for k in (1..=arr.n_steps()).rev() {
        let update = |(idx, out): (usize, &mut f64)| {
            let (ia, js) = (idx / ns, idx % ns);
            let s = grid.node(js);
            let a = grid.node(a_lo + ia);
            let fam = arr.family(k, s);
            let mut best = f64::NEG_INFINITY;
            for m in fam.members() {
                let e: f64 = m
                    .atoms()
                    .iter()
                    .map(|&(z, w)| {
                        let s_new = s + z;
                        w * bilinear(&values, s_new, stat.update(a, s_new))
                    })
                    .sum();
                best = best.max(e);
            }
            *out = best;
        };
        if next.len() >= PAR_MIN_POINTS {
            next.par_iter_mut().enumerate().for_each(update);
        } else {
            next.iter_mut().enumerate().for_each(update);
        }
        std::mem::swap(&mut values, &mut next);
    }
    Ok(bilinear(&values, 0.0, 0.0))
}

fn skeleton(arr: &KernelArray, grid: &Grid, times: &[f64], factors: &[TestFunction]) -> Result<f64> {
    let idx = skeleton_indices(times, arr.n_steps());
    let mut upper = vec![1.0; grid.len()];
    let mut lower = vec![1.0; grid.len()];
    let mut at = arr.n_steps();
    for (phi, &k) in factors.iter().zip(&idx).rev() {
        upper = sweep(arr, grid, upper, at, k, true);
        lower = sweep(arr, grid, lower, at, k, false);
        combine_record(grid, phi, &mut upper, &mut lower);
        at = k;
    }
    let u0 = sweep(arr, grid, upper, at, 0, true);
    Ok(grid.interpolate(&u0, 0.0))
}

/// Multiplies the upper/lower values of the remaining product by the factor
/// recorded at the current state.
pub(crate) fn combine_record(grid: &Grid, phi: &TestFunction, upper: &mut [f64], lower: &mut [f64]) {
    for (j, x) in grid.nodes().enumerate() {
        let f = phi.eval(x);
        let (pos, neg) = (f.max(0.0), (-f).max(0.0));
        let (u, l) = (upper[j], lower[j]);
        upper[j] = pos * u - neg * l;
        lower[j] = pos * l - neg * u;
    }
}
