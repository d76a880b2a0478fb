use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Assignment, ChaseError};
use crate::mdlang::MatchDependency;
use crate::relcore::Tid;

/// Chooses which applicable assignment the chase enforces next. `cands` is
/// non-empty and sorted by MD order, then tids.
pub trait Scheduler {
    fn pick(&mut self, step: usize, cands: &[Assignment], mds: &[MatchDependency]) -> Result<usize, ChaseError>;
}

pub struct DeclarationOrder;

impl Scheduler for DeclarationOrder {
    fn pick(&mut self, _: usize, _: &[Assignment], _: &[MatchDependency]) -> Result<usize, ChaseError> {
        Ok(0)
    }
}

pub struct ReverseOrder;

impl Scheduler for ReverseOrder {
    fn pick(&mut self, _: usize, cands: &[Assignment], _: &[MatchDependency]) -> Result<usize, ChaseError> {
        Ok(cands.len() - 1)
    }
}

pub struct SeededRandom(ChaCha8Rng);

impl SeededRandom {
    pub fn new(seed: u64) -> Self {
        SeededRandom(ChaCha8Rng::seed_from_u64(seed))
    }
}

impl Scheduler for SeededRandom {
    fn pick(&mut self, _: usize, cands: &[Assignment], _: &[MatchDependency]) -> Result<usize, ChaseError> {
        Ok(self.0.gen_range(0..cands.len()))
    }
}

/// Follows a fixed list of `(md name, t1, t2)` steps; pairs match in either
/// order.
pub struct Scripted {
    steps: Vec<(String, Tid, Tid)>,
}

impl Scripted {
    pub fn new<S: Into<String>>(steps: impl IntoIterator<Item = (S, Tid, Tid)>) -> Self {
        Scripted {
            steps: steps.into_iter().map(|(m, a, b)| (m.into(), a, b)).collect(),
        }
    }
}

impl Scheduler for Scripted {
    fn pick(&mut self, step: usize, cands: &[Assignment], mds: &[MatchDependency]) -> Result<usize, ChaseError> {
        let Some((name, t1, t2)) = self.steps.get(step) else {
            let first = &cands[0];
            return Err(ChaseError::ScriptMismatch {
                step,
                md: format!("(end of script, {} still applicable)", mds[first.md].name),
                t1: first.pair.0,
                t2: first.pair.1,
            });
        };
        cands
            .iter()
            .position(|a| {
                &mds[a.md].name == name && (a.pair == (*t1, *t2) || a.pair == (*t2, *t1))
            })
            .ok_or_else(|| ChaseError::ScriptMismatch {
                step,
                md: name.clone(),
                t1: *t1,
                t2: *t2,
            })
    }
}
