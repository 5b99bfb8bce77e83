//! Sub-linear expectations on finite distribution families.
//!
//! The crate evaluates upper expectations of sums and path functionals of
//! independent and martingale-difference-like arrays by backward induction,
//! solves the G-heat equation for G-normal and G-Brownian-motion
//! expectations, and checks limit theorems and moment inequalities against
//! both.

pub mod distribution;
pub mod dp;
pub mod error;
pub mod expectation;
pub mod grid;
pub mod harness;
pub mod kernel;
pub mod path;
pub mod pde;
pub mod test_function;
pub mod tree;

pub use distribution::{DistributionFamily, StepDistribution};
pub use dp::{dp_path_expect, dp_sum_expect};
pub use error::{Error, Result};
pub use expectation::{capacity_bracket, choquet, conjugate_expect_step, expect_step, CapacityBracket};
pub use grid::{Grid, ValueFunction};
pub use kernel::{conditional_step_stats, KernelArray, StepKernel, StepStats};
pub use path::PathFunctional;
pub use pde::{g_normal_expect, g_operator, g_third_moment_bounds, solve_g_heat, GCoefficients, HeatSolveConfig};
pub use test_function::TestFunction;
pub use tree::tree_expect_exact;
