//! Finitely supported distributions and finite families of them.
//!
//! A [`DistributionFamily`] is the concrete carrier of a sub-linear
//! expectation: the upper expectation of a function is the largest classical
//! expectation over the members, the lower (conjugate) one the smallest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Atoms closer than this are merged, and weights must sum to one within it.
pub const ATOM_TOLERANCE: f64 = 1e-12;

/// A probability distribution with finitely many atoms, kept in canonical
/// form: points strictly increasing, weights strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct StepDistribution {
    atoms: Vec<(f64, f64)>,
}

impl StepDistribution {
    /// Builds a distribution from `(point, weight)` pairs in any order.
    /// Points within [`ATOM_TOLERANCE`] of each other are merged.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        for &(x, w) in &atoms {
            if !x.is_finite() || !w.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "non-finite atom ({x}, {w})"
                )));
            }
            if w <= 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "weight {w} at point {x} is not strictly positive"
                )));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > ATOM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            atoms: canonicalize(atoms),
        })
    }

    /// Like [`StepDistribution::new`] but rescales the weights to sum to one.
    pub fn normalized(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "cannot normalize weights with total {total}"
            )));
        }
        Self::new(atoms.into_iter().map(|(x, w)| (x, w / total)).collect())
    }

    pub fn point(c: f64) -> Self {
        Self {
            atoms: vec![(c, 1.0)],
        }
    }

    /// Half the mass at `-a`, half at `+a`.
    pub fn rademacher(a: f64) -> Self {
        Self {
            atoms: canonicalize(vec![(-a, 0.5), (a, 0.5)]),
        }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(x, w)| w * f(x)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    pub fn max_abs_atom(&self) -> f64 {
        self.atoms.iter().fold(0.0_f64, |m, a| m.max(a.0.abs()))
    }

    /// Distribution of `factor * X`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            atoms: canonicalize(self.atoms.iter().map(|&(x, w)| (factor * x, w)).collect()),
        }
    }

    /// Distribution of `X + offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            atoms: canonicalize(self.atoms.iter().map(|&(x, w)| (x + offset, w)).collect()),
        }
    }
}

impl TryFrom<Vec<(f64, f64)>> for StepDistribution {
    type Error = Error;

    fn try_from(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(atoms)
    }
}

impl From<StepDistribution> for Vec<(f64, f64)> {
    fn from(d: StepDistribution) -> Self {
        d.atoms
    }
}

fn canonicalize(mut atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (x, w) in atoms {
        match out.last_mut() {
            Some(last) if (x - last.0).abs() <= ATOM_TOLERANCE => last.1 += w,
            _ => out.push((x, w)),
        }
    }
    out
}

/// A nonempty finite set of distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<StepDistribution>", into = "Vec<StepDistribution>")]
pub struct DistributionFamily {
    members: Vec<StepDistribution>,
}

impl DistributionFamily {
    pub fn new(members: Vec<StepDistribution>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidDistribution("family has no members".into()));
        }
        Ok(Self { members })
    }

    pub fn singleton(member: StepDistribution) -> Self {
        Self {
            members: vec![member],
        }
    }

    /// `{ Rademacher(±a) : a in amplitudes }`.
    pub fn rademacher(amplitudes: &[f64]) -> Result<Self> {
        Self::new(
            amplitudes
                .iter()
                .map(|&a| StepDistribution::rademacher(a))
                .collect(),
        )
    }

    pub fn members(&self) -> &[StepDistribution] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Largest classical expectation over the members.
    pub fn sup_expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.members
            .iter()
            .map(|m| m.expect(&f))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest classical expectation over the members.
    pub fn inf_expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.members
            .iter()
            .map(|m| m.expect(&f))
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the first member attaining the supremum.
    pub fn argmax(&self, f: impl Fn(f64) -> f64) -> usize {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, m) in self.members.iter().enumerate() {
            let v = m.expect(&f);
            if v > best_val {
                best = i;
                best_val = v;
            }
        }
        best
    }

    pub fn max_abs_atom(&self) -> f64 {
        self.members
            .iter()
            .fold(0.0_f64, |m, d| m.max(d.max_abs_atom()))
    }

    pub fn max_atoms(&self) -> usize {
        self.members.iter().map(|m| m.len()).max().unwrap_or(0)
    }

    /// Every atom point of every member, sorted and deduplicated.
    pub fn support(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .members
            .iter()
            .flat_map(|m| m.atoms().iter().map(|a| a.0))
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            members: self.members.iter().map(|m| m.scaled(factor)).collect(),
        }
    }
}

impl TryFrom<Vec<StepDistribution>> for DistributionFamily {
    type Error = Error;

    fn try_from(members: Vec<StepDistribution>) -> Result<Self> {
        Self::new(members)
    }
}

impl From<DistributionFamily> for Vec<StepDistribution> {
    fn from(f: DistributionFamily) -> Self {
        f.members
    }
}
