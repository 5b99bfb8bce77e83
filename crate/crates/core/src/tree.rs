//! Exact evaluation on the outcome tree.
//!
//! Every node of the tree is a partial path; its value is the supremum over
//! the family members at that node of the weighted child values. No grid and
//! no interpolation are involved, so the result is exact up to floating point
//! and serves as the reference for the grid-based engine. Nodes with
//! bit-identical state are evaluated once.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::kernel::KernelArray;
use crate::path::{skeleton_indices, PathFunctional};

pub const MAX_TREE_STEPS: usize = 8;
pub const MAX_TREE_ATOMS: usize = 4;
pub const MAX_TREE_MEMBERS: usize = 4;

/// How the children of a node are aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    /// Sub-linear expectation: max over members of the member expectation.
    Upper,
    /// Conjugate expectation: min over members.
    Lower,
    /// Largest value over every reachable child (pathwise supremum).
    PathMax,
    /// Smallest value over every reachable child.
    PathMin,
}

type UpdateFn<'a> = dyn Fn(&mut [f64], usize, f64, f64) + Sync + 'a;
type LeafFn<'a> = dyn Fn(&[f64], f64) -> f64 + Sync + 'a;

/// Auxiliary path statistics carried down the tree.
///
/// `update(aux, k, s_prev, s_new)` runs after step `k` (1-based) moves the
/// partial sum from `s_prev` to `s_new`; `leaf(aux, s_n)` gives the payoff.
pub struct PathTracker<'a> {
    pub init: Vec<f64>,
    pub update: Box<UpdateFn<'a>>,
    pub leaf: Box<LeafFn<'a>>,
}

impl<'a> PathTracker<'a> {
    pub fn new(
        init: Vec<f64>,
        update: impl Fn(&mut [f64], usize, f64, f64) + Sync + 'a,
        leaf: impl Fn(&[f64], f64) -> f64 + Sync + 'a,
    ) -> Self {
        Self {
            init,
            update: Box::new(update),
            leaf: Box::new(leaf),
        }
    }

    pub fn for_functional(functional: &'a PathFunctional, n_steps: usize) -> Result<Self> {
        functional.validate()?;
        Ok(match functional {
            PathFunctional::Terminal { phi } => {
                Self::new(vec![], |_, _, _, _| {}, move |_, s| phi.eval(s))
            }
            PathFunctional::RunningMax { phi } => Self::new(
                vec![0.0],
                |aux, _, _, s| aux[0] = aux[0].max(s),
                move |aux, _| phi.eval(aux[0]),
            ),
            PathFunctional::RunningMaxAbs { phi } => Self::new(
                vec![0.0],
                |aux, _, _, s| aux[0] = aux[0].max(s.abs()),
                move |aux, _| phi.eval(aux[0]),
            ),
            PathFunctional::SuffixMax { phi } => Self::new(
                vec![0.0],
                |aux, _, _, s| aux[0] = aux[0].min(s),
                move |aux, s| phi.eval(s - aux[0]),
            ),
            PathFunctional::Skeleton { times, factors } => {
                let idx = skeleton_indices(times, n_steps);
                Self::new(
                    vec![0.0; times.len()],
                    move |aux, k, _, s| {
                        for (slot, &ki) in aux.iter_mut().zip(&idx) {
                            if ki == k {
                                *slot = s;
                            }
                        }
                    },
                    move |aux, _| factors.iter().zip(aux).map(|(f, &x)| f.eval(x)).product(),
                )
            }
        })
    }
}

pub fn check_tree_caps(arr: &KernelArray) -> Result<()> {
    if arr.n_steps() > MAX_TREE_STEPS {
        return Err(Error::TooLarge(format!(
            "{} steps exceeds the tree cap of {MAX_TREE_STEPS}",
            arr.n_steps()
        )));
    }
    for fam in arr.all_families() {
        if fam.len() > MAX_TREE_MEMBERS {
            return Err(Error::TooLarge(format!(
                "family with {} members exceeds the tree cap of {MAX_TREE_MEMBERS}",
                fam.len()
            )));
        }
        if fam.max_atoms() > MAX_TREE_ATOMS {
            return Err(Error::TooLarge(format!(
                "member with {} atoms exceeds the tree cap of {MAX_TREE_ATOMS}",
                fam.max_atoms()
            )));
        }
    }
    Ok(())
}

/// Exact sub-linear expectation of a path functional.
pub fn tree_expect_exact(arr: &KernelArray, functional: &PathFunctional) -> Result<f64> {
    let tracker = PathTracker::for_functional(functional, arr.n_steps())?;
    tree_evaluate(arr, &tracker, Aggregate::Upper)
}

/// Evaluates a tracked path payoff on the full outcome tree.
pub fn tree_evaluate(arr: &KernelArray, tracker: &PathTracker<'_>, mode: Aggregate) -> Result<f64> {
    check_tree_caps(arr)?;
    let mut walker = Walker {
        arr,
        tracker,
        mode,
        memo: HashMap::new(),
    };
    let mut aux = tracker.init.clone();
    Ok(walker.value(0, 0.0, &mut aux))
}

struct Walker<'t, 'a> {
    arr: &'t KernelArray,
    tracker: &'t PathTracker<'a>,
    mode: Aggregate,
    memo: HashMap<Vec<u64>, f64>,
}

impl Walker<'_, '_> {
    fn value(&mut self, depth: usize, s: f64, aux: &mut Vec<f64>) -> f64 {
        if depth == self.arr.n_steps() {
            return (self.tracker.leaf)(aux, s);
        }
        let key: Vec<u64> = std::iter::once(depth as u64)
            .chain(std::iter::once(s.to_bits()))
            .chain(aux.iter().map(|a| a.to_bits()))
            .collect();
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let k = depth + 1;
        let family = self.arr.family(k, s);
        let mut best = match self.mode {
            Aggregate::Upper | Aggregate::PathMax => f64::NEG_INFINITY,
            Aggregate::Lower | Aggregate::PathMin => f64::INFINITY,
        };
        let mut child_aux = aux.clone();
        for member in family.members() {
            let mut total = 0.0;
            for &(z, w) in member.atoms() {
                let s_new = s + z;
                child_aux.copy_from_slice(aux);
                (self.tracker.update)(&mut child_aux, k, s, s_new);
                let v = self.value(depth + 1, s_new, &mut child_aux);
                match self.mode {
                    Aggregate::Upper | Aggregate::Lower => total += w * v,
                    Aggregate::PathMax => best = best.max(v),
                    Aggregate::PathMin => best = best.min(v),
                }
            }
            match self.mode {
                Aggregate::Upper => best = best.max(total),
                Aggregate::Lower => best = best.min(total),
                _ => {}
            }
        }
        self.memo.insert(key, best);
        best
    }
}
