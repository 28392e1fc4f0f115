//! Trial bookkeeping shared by the model checks and the verification suites.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::random::{derive_seed, trial_rng, TrialRng};

/// Outcome of one property checked over many random trials.
///
/// Each trial yields a margin: `rhs - lhs` for an inequality `lhs <= rhs`, minus the error for an
/// equality. A trial is a violation when its margin falls below `-tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub trials: usize,
    pub tolerance: f64,
    pub violations: usize,
    pub worst_margin: f64,
}

impl CheckRecord {
    pub fn from_margins(check: &str, tolerance: f64, margins: &[f64]) -> Self {
        let violations = margins.iter().filter(|m| !(**m >= -tolerance)).count();
        let worst_margin = margins.iter().cloned().fold(f64::INFINITY, |a, b| if b.is_nan() { f64::NEG_INFINITY } else { a.min(b) });
        Self { check: check.to_string(), trials: margins.len(), tolerance, violations, worst_margin }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Runs `trials` independent trials of a check, each with its own generator derived from
/// `(seed, check, trial index)`. Trials may run concurrently; margins are collected in trial order.
pub fn run_check<F>(check: &str, seed: u64, trials: usize, tolerance: f64, trial: F) -> Result<CheckRecord>
where
    F: Fn(&mut TrialRng) -> Result<f64> + Sync,
{
    let base = derive_seed(seed, check);
    let margins = (0..trials)
        .into_par_iter()
        .map(|i| trial(&mut trial_rng(base, i as u64)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(CheckRecord::from_margins(check, tolerance, &margins))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn margins_are_tallied() {
        let r = CheckRecord::from_margins("x", 1e-3, &[0.5, -1e-4, -0.1, f64::NAN]);
        assert_eq!(r.violations, 2);
        assert_eq!(r.worst_margin, f64::NEG_INFINITY);
    }

    #[test]
    fn trials_are_reproducible() {
        let f = |rng: &mut TrialRng| Ok(rng.random::<f64>());
        let a = run_check("c", 9, 50, 0.0, f).unwrap();
        let b = run_check("c", 9, 50, 0.0, f).unwrap();
        assert_eq!(a, b);
    }
}
