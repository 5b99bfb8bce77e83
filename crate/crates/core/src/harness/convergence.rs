use serde::{Deserialize, Serialize};

use crate::distribution::DistributionFamily;
use crate::dp::{dp_path_expect, dp_sum_expect};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::{KernelArray, StepStats};
use crate::path::PathFunctional;
use crate::pde::{g_bm_skeleton_expect, g_normal_expect, GCoefficients, HeatSolveConfig};
use crate::test_function::TestFunction;

use super::lindeberg::{lindeberg_conditions, LindebergReport};
use super::ConvergenceTable;

/// How the backward-induction grid is chosen for an array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GridPolicy {
    /// Spacing `min |atom| / refine`, so that arrays whose atoms are integer
    /// multiples of the smallest one stay on grid nodes.
    Lattice { refine: usize },
    /// Fixed spacing.
    Spacing { dx: f64 },
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy::Lattice { refine: 1 }
    }
}

impl GridPolicy {
    pub fn grid_for(&self, arr: &KernelArray) -> Result<Grid> {
        let dx = match *self {
            GridPolicy::Lattice { refine } => {
                if refine == 0 {
                    return Err(Error::param("refine", "must be at least 1"));
                }
                arr.min_positive_atom().unwrap_or(1.0) / refine as f64
            }
            GridPolicy::Spacing { dx } => dx,
        };
        let reach = arr.n_steps() as f64 * arr.c_max();
        Grid::symmetric(reach + dx, dx)
    }
}

/// Spacing and CFL factor for G-heat solves; the grid width is derived from
/// the data and horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PdeSettings {
    pub dx: f64,
    pub cfl: f64,
}

impl Default for PdeSettings {
    fn default() -> Self {
        Self { dx: 0.02, cfl: 0.9 }
    }
}

impl PdeSettings {
    pub fn config_for(&self, hull: (f64, f64), horizon: f64, g: GCoefficients) -> Result<HeatSolveConfig> {
        HeatSolveConfig::covering(hull, horizon, g, self.dx, self.cfl)
    }

    pub fn g_normal(&self, phi: &TestFunction, rho: f64, g: GCoefficients) -> Result<f64> {
        let cfg = self.config_for(phi.support_hull(), rho, g)?;
        g_normal_expect(phi, rho, g, &cfg)
    }
}

/// A convergence table together with the condition report of each array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapStudy {
    pub table: ConvergenceTable,
    pub conditions: Vec<(usize, LindebergReport)>,
}

/// Lindeberg truncation level used when recording conditions.
const CONDITION_EPS: f64 = 0.1;

/// `E[phi(sum_k Z_{n,k})]` for each `n` against `E[phi(sqrt(rho) xi)]`.
pub fn clt_gap(
    arr_builder: &dyn Fn(usize) -> Result<KernelArray>,
    phi: &TestFunction,
    n_list: &[usize],
    rho: f64,
    g: GCoefficients,
    grid_policy: GridPolicy,
    pde: PdeSettings,
) -> Result<GapStudy> {
    let limit = pde.g_normal(phi, rho, g)?;
    let r = g.sigma_lower_sq() / g.sigma_upper_sq();
    let mut table = ConvergenceTable::default();
    let mut conditions = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let arr = arr_builder(n)?;
        conditions.push((n, lindeberg_conditions(&arr, &[CONDITION_EPS], rho, r)?));
        let prelimit = dp_sum_expect(&arr, phi, &grid_policy.grid_for(&arr)?)?;
        table.push(n, prelimit, limit);
    }
    Ok(GapStudy { table, conditions })
}

/// Functional CLT table.
///
/// Terminal functionals compare with the G-normal value, skeleton
/// functionals with nested G-heat solves at times `rho * t_i`. Functionals
/// without a computed limit (running statistics) report Cauchy gaps: each
/// row holds `prelimit(n)` and, in the `limit` column, `prelimit(2n)`.
pub fn fclt_gap(
    arr_builder: &dyn Fn(usize) -> Result<KernelArray>,
    functional: &PathFunctional,
    n_list: &[usize],
    rho: f64,
    g: GCoefficients,
    grid_policy: GridPolicy,
    pde: PdeSettings,
) -> Result<ConvergenceTable> {
    functional.validate()?;
    let prelimit = |n: usize| -> Result<f64> {
        let arr = arr_builder(n)?;
        dp_path_expect(&arr, functional, &grid_policy.grid_for(&arr)?)
    };
    let limit = match functional {
        PathFunctional::Terminal { phi } => Some(pde.g_normal(phi, rho, g)?),
        PathFunctional::Skeleton { times, factors } => {
            let abs_times: Vec<f64> = times.iter().map(|t| rho * t).collect();
            let hull = factors.iter().map(|f| f.support_hull()).fold((0.0_f64, 0.0_f64), |h, f| {
                (h.0.min(f.0), h.1.max(f.1))
            });
            let cfg = pde.config_for(hull, rho, g)?;
            Some(g_bm_skeleton_expect(&abs_times, factors, g, &cfg)?)
        }
        _ => None,
    };
    let mut table = ConvergenceTable::default();
    for &n in n_list {
        let p = prelimit(n)?;
        match limit {
            Some(l) => table.push(n, p, l),
            None => table.push(n, p, prelimit(2 * n)?),
        }
    }
    Ok(table)
}

/// Per-step family of the discrete process used by [`levy_demo`]:
/// `{ Rademacher(±sigma_lo/sqrt(n)), Rademacher(±sigma_hi/sqrt(n)) }`.
pub fn levy_family(g: GCoefficients, n: usize) -> Result<DistributionFamily> {
    let scale = 1.0 / (n as f64).sqrt();
    let (lo, hi) = (g.sigma_lower_sq().sqrt() * scale, g.sigma_upper_sq().sqrt() * scale);
    if lo == hi {
        DistributionFamily::rademacher(&[hi])
    } else {
        DistributionFamily::rademacher(&[lo, hi])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyReport {
    /// One table per test function.
    pub tables: Vec<ConvergenceTable>,
    /// Conditional moments of one step, per `n`.
    pub step_stats: Vec<(usize, StepStats)>,
}

impl LevyReport {
    /// Every table's gaps are nonincreasing (within `tol`) along `n`.
    pub fn gaps_decrease(&self, tol: f64) -> bool {
        self.tables.iter().all(|t| t.is_nonincreasing(tol))
    }
}

/// Marginals of the symmetric discrete process whose increments have
/// conditional mean 0 and conditional variance between `sigma_lo^2 / n` and
/// `sigma_hi^2 / n`, against the G-normal marginal at time 1.
pub fn levy_demo(
    g: GCoefficients,
    n_list: &[usize],
    phis: &[TestFunction],
    grid_policy: GridPolicy,
    pde: PdeSettings,
) -> Result<LevyReport> {
    let build = |n: usize| KernelArray::iid(n, levy_family(g, n)?);
    let mut tables = Vec::with_capacity(phis.len());
    for phi in phis {
        tables.push(clt_gap(&build, phi, n_list, 1.0, g, grid_policy, pde)?.table);
    }
    let step_stats = n_list
        .iter()
        .map(|&n| Ok((n, StepStats::of(&levy_family(g, n)?))))
        .collect::<Result<_>>()?;
    Ok(LevyReport { tables, step_stats })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_policy_puts_atoms_on_nodes() {
        let arr = KernelArray::iid(8, DistributionFamily::rademacher(&[0.5 / 8f64.sqrt(), 1.0 / 8f64.sqrt()]).unwrap()).unwrap();
        let grid = GridPolicy::Lattice { refine: 1 }.grid_for(&arr).unwrap();
        assert!(grid.index_of(0.0).is_some());
        assert!(grid.index_of(3.0 / 8f64.sqrt()).is_some());
        assert!(grid.hi() >= 8.0 * arr.c_max());
    }

    #[test]
    fn levy_steps_have_exact_moments() {
        let g = GCoefficients::new(0.25, 1.0).unwrap();
        let st = StepStats::of(&levy_family(g, 16).unwrap());
        assert_eq!(st.mean_upper, 0.0);
        assert_eq!(st.mean_lower, 0.0);
        assert!((st.var_upper - 1.0 / 16.0).abs() < 1e-15);
        assert!((st.var_lower - 0.25 / 16.0).abs() < 1e-15);
        assert_eq!(levy_family(GCoefficients::classical(1.0).unwrap(), 4).unwrap().len(), 1);
    }

    #[test]
    fn classical_variance_has_zero_gap() {
        let g = GCoefficients::classical(1.0).unwrap();
        let phi = TestFunction::square(8.0).unwrap();
        let build = |n: usize| KernelArray::iid(n, levy_family(g, n)?);
        let study = clt_gap(&build, &phi, &[4, 16], 1.0, g, GridPolicy::default(), PdeSettings { dx: 0.05, cfl: 0.9 }).unwrap();
        for row in &study.table.rows {
            assert!((row.prelimit - 1.0).abs() < 1e-12);
            assert!(row.gap < 1e-3, "{row:?}");
        }
        assert!(study.conditions.iter().all(|(_, c)| c.rho_gap < 1e-12 && c.mean_sum == 0.0));
    }
}
