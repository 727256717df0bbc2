//! Independent ground truth for the closed forms in [`crate::exact`].
//!
//! Outcome probabilities are, geometrically, volumes of regions of the unit
//! hypercube: "win at round 2 for n = 3" is the set of points with
//! `a_2 >= k_2`, `a_2` the maximum, `a_1 < k_1`, and `a_1` not the maximum.
//! This module implements those event definitions literally — as boolean
//! predicates on points — and estimates region volumes by seeded Monte
//! Carlo sampling with binomial error bars. The small-`n` hand-integrated
//! polynomials are also provided as exact fixtures.
//!
//! Equality of a draw with the maximum is decided by first-index argmax,
//! mirroring the tie rule of [`crate::sim::play_run`]; ties have measure
//! zero but the two classifiers must agree point by point.

use std::thread;

use crate::cutoffs::CutoffVector;
use crate::rng;
use crate::sim::Outcome;

/// Index (1-based) of the first occurrence of the maximum.
fn argmax_first(point: &[f64]) -> usize {
    let mut best = 1;
    let mut best_v = point[0];
    for (i, &v) in point.iter().enumerate().skip(1) {
        if v > best_v {
            best_v = v;
            best = i + 1;
        }
    }
    best
}

/// Walks the rounds of `point` and returns the terminal `(round, outcome)`.
pub fn classify(cutoffs: &CutoffVector, point: &[f64]) -> (usize, Outcome) {
    let n = cutoffs.n();
    debug_assert_eq!(point.len(), n);
    let mp = argmax_first(point);
    for r in 1..=n {
        if point[r - 1] >= cutoffs.get(r) {
            return (r, if r == mp { Outcome::Win } else { Outcome::FalsePositive });
        }
        if r == mp {
            return (r, Outcome::FalseNegative);
        }
    }
    unreachable!("the final cutoff is 0, so some round accepts");
}

/// A boolean test on points of the unit hypercube implementing one event
/// region directly from its definition.
#[derive(Debug, Clone, Copy)]
pub struct RegionPredicate<'a> {
    pub round: usize,
    pub outcome: Outcome,
    pub cutoffs: &'a CutoffVector,
}

impl RegionPredicate<'_> {
    /// Membership test. Prior rounds must all have continued (draw below
    /// cutoff and not the maximum); round `r` then satisfies its own
    /// event's comparisons. `Continue` tests survival through round `r`.
    pub fn matches(&self, point: &[f64]) -> bool {
        let r = self.round;
        debug_assert!((1..=self.cutoffs.n()).contains(&r));
        let mp = argmax_first(point);
        for i in 1..r {
            if point[i - 1] >= self.cutoffs.get(i) || i == mp {
                return false;
            }
        }
        let at_r = point[r - 1];
        let accepted = at_r >= self.cutoffs.get(r);
        let is_max = r == mp;
        match self.outcome {
            Outcome::Win => accepted && is_max,
            Outcome::FalsePositive => accepted && !is_max,
            Outcome::FalseNegative => !accepted && is_max,
            Outcome::Continue => !accepted && !is_max,
        }
    }
}

/// Terminal and continuation counts for every cell, from one sampling pass.
#[derive(Debug, Clone, PartialEq)]
pub struct CellCounts {
    pub n: usize,
    pub samples: u64,
    pub wins: Vec<u64>,
    pub false_positives: Vec<u64>,
    pub false_negatives: Vec<u64>,
    /// `continues[r-1]` counts points still live after round r.
    pub continues: Vec<u64>,
}

impl CellCounts {
    pub fn count(&self, round: usize, outcome: Outcome) -> u64 {
        match outcome {
            Outcome::Win => self.wins[round - 1],
            Outcome::FalsePositive => self.false_positives[round - 1],
            Outcome::FalseNegative => self.false_negatives[round - 1],
            Outcome::Continue => self.continues[round - 1],
        }
    }

    /// `(estimate, binomial standard error)` for a cell.
    pub fn estimate(&self, round: usize, outcome: Outcome) -> (f64, f64) {
        let p = self.count(round, outcome) as f64 / self.samples as f64;
        (p, (p * (1.0 - p) / self.samples as f64).sqrt())
    }
}

/// Samples `samples` points of the hypercube (streams keyed by `seed`) and
/// classifies each one, sharded across available threads. Terminal cells
/// partition the samples exactly; continuation counts are derived from the
/// same classifications.
pub fn cell_counts(cutoffs: &CutoffVector, samples: u64, seed: u64) -> CellCounts {
    let n = cutoffs.n();
    let workers = thread::available_parallelism().map_or(1, |p| p.get());
    let shard = |lo: u64, hi: u64| -> CellCounts {
        let mut counts = CellCounts {
            n,
            samples: hi - lo,
            wins: vec![0; n],
            false_positives: vec![0; n],
            false_negatives: vec![0; n],
            continues: vec![0; n],
        };
        let mut point = vec![0.0; n];
        for s in lo..hi {
            rng::fill_uniform01(seed, s, &mut point);
            let (round, outcome) = classify(cutoffs, &point);
            match outcome {
                Outcome::Win => counts.wins[round - 1] += 1,
                Outcome::FalsePositive => counts.false_positives[round - 1] += 1,
                Outcome::FalseNegative => counts.false_negatives[round - 1] += 1,
                Outcome::Continue => unreachable!(),
            }
            // Live after every round strictly before the terminal one.
            for r in 1..round {
                counts.continues[r - 1] += 1;
            }
        }
        counts
    };
    if workers <= 1 || samples < 4 * (1 << 16) {
        return shard(0, samples);
    }
    let per = samples.div_ceil(workers as u64);
    let mut total = CellCounts {
        n,
        samples: 0,
        wins: vec![0; n],
        false_positives: vec![0; n],
        false_negatives: vec![0; n],
        continues: vec![0; n],
    };
    thread::scope(|scope| {
        let handles: Vec<_> = (0..workers as u64)
            .map(|w| {
                let shard = &shard;
                let lo = (w * per).min(samples);
                let hi = ((w + 1) * per).min(samples);
                scope.spawn(move || shard(lo, hi))
            })
            .collect();
        for h in handles {
            let part = h.join().expect("oracle worker panicked");
            total.samples += part.samples;
            for (a, b) in total.wins.iter_mut().zip(&part.wins) {
                *a += b;
            }
            for (a, b) in total.false_positives.iter_mut().zip(&part.false_positives) {
                *a += b;
            }
            for (a, b) in total.false_negatives.iter_mut().zip(&part.false_negatives) {
                *a += b;
            }
            for (a, b) in total.continues.iter_mut().zip(&part.continues) {
                *a += b;
            }
        }
    });
    total
}

/// Monte Carlo volume estimate of one event region:
/// `(estimate, standard_error)`.
pub fn probability(
    cutoffs: &CutoffVector,
    round: usize,
    outcome: Outcome,
    samples: u64,
    seed: u64,
) -> (f64, f64) {
    cell_counts(cutoffs, samples, seed).estimate(round, outcome)
}

/// Hand-integrated polynomial for a cell, where published: the full
/// quadruple for n <= 4 and the FN / C columns for n = 5, 6. Exact in
/// double precision. Returns `None` where no fixture exists.
pub fn fixture_probability(
    n: usize,
    round: usize,
    outcome: Outcome,
    k: &[f64],
) -> Option<f64> {
    assert_eq!(k.len(), n, "need all n cutoffs");
    assert!((1..=n).contains(&round));
    let fixtures = fixture_row(n, round, k)?;
    let idx = match outcome {
        Outcome::Win => 0,
        Outcome::FalsePositive => 1,
        Outcome::FalseNegative => 2,
        Outcome::Continue => 3,
    };
    fixtures[idx]
}

type Quad = [Option<f64>; 4];

#[allow(clippy::too_many_lines)]
fn fixture_row(n: usize, r: usize, k: &[f64]) -> Option<Quad> {
    let p = |i: usize, e: i32| k[i - 1].powi(e); // k_i^e, 1-based
    let row: Quad = match (n, r) {
        (2, 1) => [
            Some(0.5 - p(1, 2) / 2.0),
            Some(0.5 - k[0] + p(1, 2) / 2.0),
            Some(p(1, 2) / 2.0),
            Some(k[0] - p(1, 2) / 2.0),
        ],
        (2, 2) => [Some(k[0] - p(1, 2) / 2.0), Some(0.0), Some(0.0), Some(0.0)],
        (3, 1) => [
            Some(1.0 / 3.0 - p(1, 3) / 3.0),
            Some(2.0 / 3.0 - k[0] + p(1, 3) / 3.0),
            Some(p(1, 3) / 3.0),
            Some(k[0] - p(1, 3) / 3.0),
        ],
        (3, 2) => [
            Some(k[0] / 2.0 - p(1, 3) / 6.0 - p(2, 3) / 3.0),
            Some(k[0] / 2.0 - p(1, 3) / 6.0 - k[0] * k[1] + p(1, 2) * k[1] / 2.0 + p(2, 3) / 6.0),
            Some(p(2, 3) / 3.0),
            Some(k[0] * k[1] - p(1, 2) * k[1] / 2.0 - p(2, 3) / 6.0),
        ],
        (3, 3) => [
            Some(k[0] * k[1] - p(1, 2) * k[1] / 2.0 - p(2, 3) / 6.0),
            Some(0.0),
            Some(0.0),
            Some(0.0),
        ],
        (4, 1) => [
            Some(0.25 - p(1, 4) / 4.0),
            Some(0.75 - k[0] + p(1, 4) / 4.0),
            Some(p(1, 4) / 4.0),
            Some(k[0] - p(1, 4) / 4.0),
        ],
        (4, 2) => [
            Some(k[0] / 3.0 - p(1, 4) / 12.0 - p(2, 4) / 4.0),
            Some(
                2.0 * k[0] / 3.0 - p(1, 4) / 6.0 - k[0] * k[1]
                    + p(1, 3) * k[1] / 3.0
                    + p(2, 4) / 6.0,
            ),
            Some(p(2, 4) / 4.0),
            Some(k[0] * k[1] - p(1, 3) * k[1] / 3.0 - p(2, 4) / 6.0),
        ],
        (4, 3) => [
            Some(k[0] * k[1] / 2.0 - p(1, 3) * k[1] / 6.0 - p(2, 4) / 12.0 - p(3, 4) / 4.0),
            Some(
                k[0] * k[1] / 2.0 - p(1, 3) * k[1] / 6.0 - p(2, 4) / 12.0
                    - k[0] * k[1] * k[2]
                    + p(1, 2) * k[1] * k[2] / 2.0
                    + p(2, 3) * k[2] / 6.0
                    + p(3, 4) / 12.0,
            ),
            Some(p(3, 4) / 4.0),
            Some(
                k[0] * k[1] * k[2] - p(1, 2) * k[1] * k[2] / 2.0 - p(2, 3) * k[2] / 6.0
                    - p(3, 4) / 12.0,
            ),
        ],
        (4, 4) => [
            Some(
                k[0] * k[1] * k[2] - p(1, 2) * k[1] * k[2] / 2.0 - p(2, 3) * k[2] / 6.0
                    - p(3, 4) / 12.0,
            ),
            Some(0.0),
            Some(0.0),
            Some(0.0),
        ],
        // n = 5, 6: published fixtures cover the FN and C columns only.
        (5, 1) => [None, None, Some(p(1, 5) / 5.0), Some(k[0] - p(1, 5) / 5.0)],
        (5, 2) => [
            None,
            None,
            Some(p(2, 5) / 5.0),
            Some(k[0] * k[1] - p(1, 4) * k[1] / 4.0 - 3.0 * p(2, 5) / 20.0),
        ],
        (5, 3) => [
            None,
            None,
            Some(p(3, 5) / 5.0),
            Some(
                k[0] * k[1] * k[2] - p(1, 3) * k[1] * k[2] / 3.0 - p(2, 4) * k[2] / 6.0
                    - p(3, 5) / 10.0,
            ),
        ],
        (5, 4) => [
            None,
            None,
            Some(p(4, 5) / 5.0),
            Some(
                k[0] * k[1] * k[2] * k[3]
                    - p(1, 2) * k[1] * k[2] * k[3] / 2.0
                    - p(2, 3) * k[2] * k[3] / 6.0
                    - p(3, 4) * k[3] / 12.0
                    - p(4, 5) / 20.0,
            ),
        ],
        (5, 5) => [None, None, Some(0.0), Some(0.0)],
        (6, 1) => [None, None, Some(p(1, 6) / 6.0), Some(k[0] - p(1, 6) / 6.0)],
        (6, 2) => [
            None,
            None,
            Some(p(2, 6) / 6.0),
            Some(k[0] * k[1] - p(1, 5) * k[1] / 5.0 - 2.0 * p(2, 6) / 15.0),
        ],
        (6, 3) => [
            None,
            None,
            Some(p(3, 6) / 6.0),
            Some(
                k[0] * k[1] * k[2] - p(1, 4) * k[1] * k[2] / 4.0
                    - 3.0 * p(2, 5) * k[2] / 20.0
                    - p(3, 6) / 10.0,
            ),
        ],
        (6, 4) => [
            None,
            None,
            Some(p(4, 6) / 6.0),
            Some(
                k[0] * k[1] * k[2] * k[3]
                    - p(1, 3) * k[1] * k[2] * k[3] / 3.0
                    - p(2, 4) * k[2] * k[3] / 6.0
                    - p(3, 5) * k[3] / 10.0
                    - p(4, 6) / 15.0,
            ),
        ],
        (6, 5) => [
            None,
            None,
            Some(p(5, 6) / 6.0),
            Some(
                k[0] * k[1] * k[2] * k[3] * k[4]
                    - p(1, 2) * k[1] * k[2] * k[3] * k[4] / 2.0
                    - p(2, 3) * k[2] * k[3] * k[4] / 6.0
                    - p(3, 4) * k[3] * k[4] / 12.0
                    - p(4, 5) * k[4] / 20.0
                    - p(5, 6) / 30.0,
            ),
        ],
        (6, 6) => [None, None, Some(0.0), Some(0.0)],
        _ => return None,
    };
    Some(row)
}
