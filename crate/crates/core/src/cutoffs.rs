//! Cutoff vectors: the per-round decision numbers of a threshold policy.
//!
//! A game of length `n` is played against cutoffs `k_1 .. k_n`: round `r`
//! accepts its draw iff the draw is at least `k_r`. The last cutoff is
//! forced to zero (the final draw must be taken), and the closed forms in
//! [`crate::exact`] additionally require the sequence to be nonincreasing —
//! a maximum that slips below its own round's cutoff must also be below
//! every earlier cutoff for the false-negative term to factor out.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Why a candidate cutoff vector was rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CutoffError {
    #[error("cutoff vector must contain at least one round")]
    Empty,
    #[error("cutoff k[{round}] = {value} is outside [0, 1]")]
    OutOfRange { round: usize, value: f64 },
    #[error("last cutoff must be exactly 0 (the final draw is always accepted), got {0}")]
    NonzeroLast(f64),
    #[error("cutoffs must be nonincreasing: k[{round}] = {value} exceeds k[{prev_round}] = {prev_value}")]
    NotMonotone {
        round: usize,
        value: f64,
        prev_round: usize,
        prev_value: f64,
    },
    #[error("single cutoff k = {0} must lie in [0, 1)")]
    SingleOutOfRange(f64),
}

/// Validated decision numbers `k_1 .. k_n` with `k_n = 0`.
///
/// Rounds are 1-based in the problem domain; [`CutoffVector::get`] follows
/// that convention.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffVector {
    k: Vec<f64>,
    monotone: bool,
}

impl CutoffVector {
    /// Strict constructor: rejects non-monotone sequences.
    pub fn new(k: Vec<f64>) -> Result<Self, CutoffError> {
        let v = Self::new_permissive(k)?;
        if !v.monotone {
            let (round, prev) = v
                .k
                .windows(2)
                .position(|w| w[1] > w[0])
                .map(|i| (i + 2, i + 1))
                .expect("non-monotone vector has an ascending pair");
            return Err(CutoffError::NotMonotone {
                round,
                value: v.k[round - 1],
                prev_round: prev,
                prev_value: v.k[prev - 1],
            });
        }
        Ok(v)
    }

    /// Permissive constructor for research use: still checks the range and
    /// the final zero, but downgrades non-monotonicity to a recorded flag.
    /// The closed forms are exact only when [`Self::is_monotone`] is true.
    pub fn new_permissive(k: Vec<f64>) -> Result<Self, CutoffError> {
        if k.is_empty() {
            return Err(CutoffError::Empty);
        }
        for (i, &v) in k.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(CutoffError::OutOfRange { round: i + 1, value: v });
            }
        }
        let last = *k.last().expect("nonempty");
        if last != 0.0 {
            return Err(CutoffError::NonzeroLast(last));
        }
        let monotone = k.windows(2).all(|w| w[1] <= w[0]);
        Ok(Self { k, monotone })
    }

    /// The identical-cutoff policy `(k, k, .., k, 0)`.
    pub fn single(k: f64, n: usize) -> Result<Self, CutoffError> {
        if !(0.0..1.0).contains(&k) {
            return Err(CutoffError::SingleOutOfRange(k));
        }
        if n == 0 {
            return Err(CutoffError::Empty);
        }
        let mut v = vec![k; n];
        v[n - 1] = 0.0;
        Self::new(v)
    }

    /// Game length `n`.
    pub fn n(&self) -> usize {
        self.k.len()
    }

    /// Decision number for 1-based `round`.
    pub fn get(&self, round: usize) -> f64 {
        self.k[round - 1]
    }

    /// All decision numbers, `k_1` first.
    pub fn values(&self) -> &[f64] {
        &self.k
    }

    /// False iff built permissively from a non-monotone sequence.
    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    /// A cutoff of exactly 1 is valid (the round can never accept) but worth
    /// surfacing in validation output; useful for skip-the-first-rounds
    /// experiments.
    pub fn has_unit_cutoff(&self) -> bool {
        self.k.iter().any(|&v| v == 1.0)
    }
}

impl<'de> Deserialize<'de> for CutoffVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(deserializer)?;
        CutoffVector::new_permissive(raw).map_err(serde::de::Error::custom)
    }
}
