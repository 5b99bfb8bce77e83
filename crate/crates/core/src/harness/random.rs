//! Seeded random instances and the batch runs built on them.
//!
//! Every generator takes a `ChaCha8Rng`, so a batch is a pure function of its
//! seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::{DistributionFamily, StepDistribution};
use crate::dp::dp_sum_expect;
use crate::error::Result;
use crate::expectation::{conjugate_expect_step, expect_step};
use crate::grid::Grid;
use crate::kernel::{KernelArray, StepKernel};
use crate::path::PathFunctional;
use crate::test_function::TestFunction;
use crate::tree::tree_expect_exact;

use super::inequality::{exponential_inequality_check, independent_rosenthal_check, rosenthal_check, RosenthalVariant};
use super::{InequalityReport, SLACK_TOLERANCE};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sizes of randomly generated families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyShape {
    pub max_members: usize,
    pub max_atoms: usize,
    /// Atoms are drawn from `[-scale, scale]`.
    pub scale: f64,
}

impl Default for FamilyShape {
    fn default() -> Self {
        Self {
            max_members: 3,
            max_atoms: 3,
            scale: 1.0,
        }
    }
}

fn random_weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn distinct_values(rng: &mut ChaCha8Rng, k: usize, draw: &mut dyn FnMut(&mut ChaCha8Rng) -> f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(k);
    for _ in 0..16 * k {
        if out.len() == k {
            break;
        }
        let v = draw(rng);
        if out.iter().all(|o| (o - v).abs() > 1e-6) {
            out.push(v);
        }
    }
    out
}

fn member_from(atoms: Vec<f64>, rng: &mut ChaCha8Rng) -> StepDistribution {
    let w = random_weights(rng, atoms.len());
    StepDistribution::normalized(atoms.into_iter().zip(w).collect()).expect("generated member is valid")
}

/// Family whose atoms are integer multiples of `dx` in `[-span dx, span dx]`.
pub fn random_lattice_family(rng: &mut ChaCha8Rng, shape: FamilyShape, dx: f64, span: i64) -> DistributionFamily {
    let members = rng.gen_range(1..=shape.max_members);
    let fam = (0..members)
        .map(|_| {
            let k = rng.gen_range(1..=shape.max_atoms.min(2 * span as usize + 1));
            let mut lattice: Vec<i64> = (-span..=span).collect();
            lattice.shuffle(rng);
            member_from(lattice[..k].iter().map(|&j| j as f64 * dx).collect(), rng)
        })
        .collect();
    DistributionFamily::new(fam).expect("nonempty")
}

/// Family with atoms in `[-scale, scale]` and every member mean shifted to
/// be nonpositive; atoms stay within `[-2 scale, scale]`.
pub fn random_nonpositive_family(rng: &mut ChaCha8Rng, shape: FamilyShape) -> DistributionFamily {
    let members = rng.gen_range(1..=shape.max_members);
    let fam = (0..members)
        .map(|_| {
            let k = rng.gen_range(1..=shape.max_atoms);
            let atoms = distinct_values(rng, k, &mut |r| r.gen_range(-shape.scale..shape.scale));
            let member = member_from(atoms, rng);
            let mean = member.mean();
            if mean > 0.0 {
                member.shifted(-mean * rng.gen_range(1.01..1.5))
            } else {
                member
            }
        })
        .collect();
    DistributionFamily::new(fam).expect("nonempty")
}

/// Family with arbitrary means, atoms in `[-scale, scale]`.
pub fn random_family(rng: &mut ChaCha8Rng, shape: FamilyShape) -> DistributionFamily {
    let members = rng.gen_range(1..=shape.max_members);
    let fam = (0..members)
        .map(|_| {
            let k = rng.gen_range(1..=shape.max_atoms);
            let atoms = distinct_values(rng, k, &mut |r| r.gen_range(-shape.scale..shape.scale));
            member_from(atoms, rng)
        })
        .collect();
    DistributionFamily::new(fam).expect("nonempty")
}

/// Array of `n` steps; each step is, with probability one half, a
/// two-piece kernel switching family at a random cut.
pub fn random_array(
    rng: &mut ChaCha8Rng,
    n: usize,
    gen: &mut dyn FnMut(&mut ChaCha8Rng) -> DistributionFamily,
    cut_range: f64,
) -> KernelArray {
    let steps = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                let cut = rng.gen_range(-cut_range..=cut_range);
                let a = gen(rng);
                let b = gen(rng);
                StepKernel::piecewise(vec![cut], vec![a, b]).expect("one cut, two families")
            } else {
                StepKernel::Constant(gen(rng))
            }
        })
        .collect();
    KernelArray::new(steps).expect("nonempty array")
}

/// Piecewise linear function with breakpoints on multiples of `dx` inside
/// `[-span dx, span dx]` and values in `[-1, 1]`.
pub fn random_lattice_function(rng: &mut ChaCha8Rng, dx: f64, span: i64) -> TestFunction {
    let mut idx: Vec<i64> = (-span..=span).collect();
    idx.shuffle(rng);
    let k = rng.gen_range(1..=6.min(idx.len()));
    let mut chosen = idx[..k].to_vec();
    chosen.sort_unstable();
    let bp: Vec<f64> = chosen.iter().map(|&j| j as f64 * dx).collect();
    let vals = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
    TestFunction::new(bp, vals).expect("sorted distinct breakpoints")
}

/// Piecewise linear function with `k` random breakpoints in `[-r, r]`.
pub fn random_function(rng: &mut ChaCha8Rng, r: f64) -> TestFunction {
    let k = rng.gen_range(1..=6);
    let mut bp = distinct_values(rng, k, &mut |g| g.gen_range(-r..r));
    bp.sort_by(f64::total_cmp);
    let vals = (0..bp.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
    TestFunction::new(bp, vals).expect("sorted distinct breakpoints")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub instances: usize,
    pub max_abs_diff: f64,
    pub worst_instance: usize,
}

pub const ORACLE_LATTICE_DX: f64 = 0.25;

/// `dp_sum_expect` against `tree_expect_exact` on random lattice instances
/// (`n <= 6`, at most 3 atoms and 3 members, atoms and test-function
/// breakpoints on the grid).
pub fn oracle_batch(seed: u64, count: usize) -> Result<OracleSummary> {
    let mut rng = rng(seed);
    let shape = FamilyShape::default();
    let dx = ORACLE_LATTICE_DX;
    let mut summary = OracleSummary {
        instances: count,
        max_abs_diff: 0.0,
        worst_instance: 0,
    };
    for i in 0..count {
        let n = rng.gen_range(1..=6);
        let arr = random_array(&mut rng, n, &mut |r| random_lattice_family(r, shape, dx, 4), 1.0);
        let phi = random_lattice_function(&mut rng, dx, 12);
        let reach = n as f64 * arr.c_max();
        let grid = Grid::symmetric(reach.max(dx), dx)?;
        let dp = dp_sum_expect(&arr, &phi, &grid)?;
        let tree = tree_expect_exact(&arr, &PathFunctional::terminal(phi))?;
        let diff = (dp - tree).abs();
        if diff > summary.max_abs_diff {
            summary.max_abs_diff = diff;
            summary.worst_instance = i;
        }
    }
    Ok(summary)
}

/// Outcome of a batch of inequality checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub instances: usize,
    pub violations: usize,
    pub min_slack: f64,
    /// Largest `lhs / rhs` over instances with `rhs > 0`.
    pub max_ratio: f64,
    pub worst: Option<InequalityReport>,
}

impl BatchSummary {
    fn new() -> Self {
        Self {
            instances: 0,
            violations: 0,
            min_slack: f64::INFINITY,
            max_ratio: 0.0,
            worst: None,
        }
    }

    fn record(&mut self, rep: InequalityReport) {
        self.instances += 1;
        if !rep.holds() {
            self.violations += 1;
        }
        if rep.rhs > 0.0 {
            self.max_ratio = self.max_ratio.max(rep.lhs / rep.rhs);
        }
        if rep.slack < self.min_slack {
            self.min_slack = rep.slack;
            self.worst = Some(rep);
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.min_slack >= -SLACK_TOLERANCE
    }

    /// Smallest constant that would have sufficed, given the constant `c`
    /// used for the right-hand sides.
    pub fn empirical_constant(&self, c: f64) -> f64 {
        self.max_ratio * c
    }
}

/// Rosenthal-type checks on random arrays with `n <= 5`, at most 3 atoms
/// and 3 members per family, half the steps state-dependent. `SuffixSq`
/// instances have nonpositive conditional upper means.
pub fn rosenthal_batch(seed: u64, count: usize, variant: RosenthalVariant) -> Result<BatchSummary> {
    let mut rng = rng(seed);
    let shape = FamilyShape::default();
    let mut summary = BatchSummary::new();
    for _ in 0..count {
        let n = rng.gen_range(1..=5);
        let arr = match variant {
            RosenthalVariant::SuffixSq => random_array(&mut rng, n, &mut |r| random_nonpositive_family(r, shape), 1.0),
            _ => random_array(&mut rng, n, &mut |r| random_family(r, shape), 1.0),
        };
        summary.record(rosenthal_check(&arr, variant)?);
    }
    Ok(summary)
}

/// Independent-step Rosenthal checks, `n <= 5`.
pub fn independent_rosenthal_batch(seed: u64, count: usize, p: f64, c_p: f64) -> Result<BatchSummary> {
    let mut rng = rng(seed);
    let shape = FamilyShape::default();
    let mut summary = BatchSummary::new();
    for _ in 0..count {
        let n = rng.gen_range(1..=5);
        let fams: Vec<_> = (0..n).map(|_| random_family(&mut rng, shape)).collect();
        summary.record(independent_rosenthal_check(&fams, p, c_p)?);
    }
    Ok(summary)
}

/// Exponential-inequality checks on nonpositive-mean arrays with `n <= 6`;
/// `y` is drawn above the largest atom and `x` from `(0, n c_max]`.
pub fn exponential_batch(seed: u64, count: usize) -> Result<BatchSummary> {
    let mut rng = rng(seed);
    let shape = FamilyShape::default();
    let mut summary = BatchSummary::new();
    for _ in 0..count {
        let n = rng.gen_range(1..=6);
        let arr = random_array(&mut rng, n, &mut |r| random_nonpositive_family(r, shape), 1.0);
        let c = arr.c_max();
        let y = c * rng.gen_range(1.01..2.0) + 1e-6;
        let x = rng.gen_range(0.05..=1.0) * (n as f64 * c).max(0.05);
        summary.record(exponential_inequality_check(&arr, x, y)?);
    }
    Ok(summary)
}

/// Counts of randomized checks of the sub-linear expectation axioms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomSummary {
    pub instances: usize,
    pub checks: usize,
    /// `(property, instance)` for every failed check.
    pub failures: Vec<(String, usize)>,
}

impl AxiomSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub const AXIOM_PROPERTIES: [&str; 7] = [
    "monotonicity",
    "constant_preserving",
    "sub_additivity",
    "positive_homogeneity",
    "conjugate_dominance",
    "holder",
    "translation",
];

/// Monotonicity, constant preservation, sub-additivity, positive
/// homogeneity, `inf <= sup`, Hölder with `p = q = 2` and translation
/// invariance, on random families and random piecewise linear functions.
pub fn axiom_batch(seed: u64, count: usize) -> AxiomSummary {
    let mut rng = rng(seed);
    let shape = FamilyShape {
        max_members: 4,
        max_atoms: 4,
        scale: 3.0,
    };
    let mut summary = AxiomSummary {
        instances: count,
        checks: 0,
        failures: Vec::new(),
    };
    for i in 0..count {
        let fam = random_family(&mut rng, shape);
        let x = random_function(&mut rng, 3.0);
        let y = random_function(&mut rng, 3.0);
        let c: f64 = rng.gen_range(-5.0..5.0);
        let lambda: f64 = rng.gen_range(0.0..5.0);
        let bump = random_function(&mut rng, 3.0);
        let nonneg = TestFunction::new(
            bump.breakpoints().to_vec(),
            bump.values().iter().map(|v| v.abs()).collect(),
        )
        .expect("same breakpoints");
        let ex = expect_step(&fam, &x);
        let ey = expect_step(&fam, &y);
        let tol = 1e-12 * (1.0 + ex.abs() + ey.abs() + c.abs() + lambda * ex.abs());
        let holder_lhs = fam.sup_expect(|z| (x.eval(z) * y.eval(z)).abs());
        let holder_rhs = fam.sup_expect(|z| x.eval(z).powi(2)).sqrt() * fam.sup_expect(|z| y.eval(z).powi(2)).sqrt();
        let results = [
            expect_step(&fam, &x.add(&nonneg)) >= ex - tol,
            (expect_step(&fam, &TestFunction::constant(c)) - c).abs() <= tol,
            expect_step(&fam, &x.add(&y)) <= ex + ey + tol,
            (expect_step(&fam, &x.scale(lambda)) - lambda * ex).abs() <= tol,
            conjugate_expect_step(&fam, &x) <= ex + tol,
            holder_lhs <= holder_rhs + tol * (1.0 + holder_rhs),
            (expect_step(&fam, &x.shift(c)) - (ex + c)).abs() <= tol,
        ];
        for (name, ok) in AXIOM_PROPERTIES.iter().zip(results) {
            summary.checks += 1;
            if !ok {
                summary.failures.push((name.to_string(), i));
            }
        }
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let a = random_nonpositive_family(&mut rng(7), FamilyShape::default());
        let b = random_nonpositive_family(&mut rng(7), FamilyShape::default());
        assert_eq!(a, b);
        assert!(a.sup_expect(|z| z) <= 1e-15);
    }

    #[test]
    fn lattice_family_atoms_on_lattice() {
        let mut r = rng(3);
        for _ in 0..50 {
            let f = random_lattice_family(&mut r, FamilyShape::default(), 0.25, 4);
            for z in f.support() {
                assert!(((z / 0.25).round() - z / 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_batches_pass() {
        assert!(oracle_batch(1, 20).unwrap().max_abs_diff < 1e-9);
        assert!(rosenthal_batch(2, 20, RosenthalVariant::SuffixSq).unwrap().passed());
        assert!(exponential_batch(3, 20).unwrap().passed());
        let ax = axiom_batch(4, 50);
        assert_eq!(ax.checks, 350);
        assert!(ax.passed(), "{:?}", ax.failures);
    }
}
