//! Seeded, streaming simulation of the stopping game.
//!
//! Draws come from the counter-based generator in [`crate::rng`], keyed by
//! `(master_seed, run index, draw index)`. Two consequences:
//!
//! * results are independent of scheduling — run `t` sees the same draws no
//!   matter how many worker threads are used or in what order runs execute;
//! * strategies compared under the same seed play the same universe of
//!   games (common random numbers), so their realized totals are directly
//!   comparable.
//!
//! Runs are processed in fixed-size chunks; each chunk accumulates its own
//! partial tally in run order and partials merge in chunk order, so even
//! the floating-point sums are bitwise identical for any worker count.
//! Draws are generated, consumed, and discarded per run — nothing is
//! stored.

use std::io::{self, Write};
use std::thread;

use serde::Serialize;
use thiserror::Error;

use crate::cutoffs::CutoffVector;
use crate::exact::RoundOutcomeTable;
use crate::rng;
use crate::strategy::{self, StrategySpec};

/// Terminal classification of a run, or a continuation cell of the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Win,
    FalsePositive,
    FalseNegative,
    /// Not a terminal run outcome; used for table cells and region volumes.
    Continue,
}

impl Outcome {
    /// Column label used in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            Outcome::Win => "W",
            Outcome::FalsePositive => "FP",
            Outcome::FalseNegative => "FN",
            Outcome::Continue => "C",
        }
    }
}

/// What happened in one play-through.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunRecord {
    /// The accepted draw was the sample maximum.
    pub won: bool,
    /// Lost by accepting a non-maximum before the maximum arrived.
    pub false_positive: bool,
    /// First round whose draw cleared its cutoff (the final round accepts
    /// everything, so this always exists).
    pub acceptance_round: usize,
    /// Position of the sample maximum (ties broken by first occurrence).
    pub max_position: usize,
    /// Value of the sample maximum.
    pub max_value: f64,
}

impl RunRecord {
    /// Terminal outcome. A loss with the maximum *behind* the acceptance
    /// round means the maximum was declined earlier: a false negative.
    pub fn outcome(&self) -> Outcome {
        if self.won {
            Outcome::Win
        } else if self.false_positive {
            Outcome::FalsePositive
        } else {
            Outcome::FalseNegative
        }
    }

    /// Round the outcome is attributed to: the acceptance round for wins and
    /// false positives, the round of the declined maximum for false
    /// negatives (which is what the closed form `k_r^n / n` counts).
    pub fn outcome_round(&self) -> usize {
        match self.outcome() {
            Outcome::FalseNegative => self.max_position,
            _ => self.acceptance_round,
        }
    }
}

/// Plays one game: accept the first draw at or above its round's cutoff.
pub fn play_run(cutoffs: &CutoffVector, draws: &[f64]) -> RunRecord {
    let n = cutoffs.n();
    assert_eq!(draws.len(), n, "need exactly n draws");
    let mut max_position = 1;
    let mut max_value = draws[0];
    for (i, &d) in draws.iter().enumerate().skip(1) {
        if d > max_value {
            max_value = d;
            max_position = i + 1;
        }
    }
    let mut acceptance_round = n;
    for r in 1..=n {
        if draws[r - 1] >= cutoffs.get(r) {
            acceptance_round = r;
            break;
        }
    }
    let won = acceptance_round == max_position;
    RunRecord {
        won,
        false_positive: !won && acceptance_round < max_position,
        acceptance_round,
        max_position,
        max_value,
    }
}

/// Aggregated counts from a batch of runs.
///
/// Wins and false positives are indexed by acceptance round; false negatives
/// by the round of the declined maximum. `conditional_max_sum[r-1]` (with
/// its count) accumulates the sample maximum over runs still live after
/// round `r` — conditioning on continuation is exactly what pushes this
/// mean above the unconditional `n/(n+1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationTally {
    pub n: usize,
    pub runs: u64,
    pub master_seed: u64,
    pub wins: Vec<u64>,
    pub false_positives: Vec<u64>,
    pub false_negatives: Vec<u64>,
    /// Histogram of the acceptance round.
    pub acceptance_hist: Vec<u64>,
    /// Histogram of the position of the sample maximum.
    pub max_position_hist: Vec<u64>,
    /// Sum of the sample maxima over all runs.
    pub max_value_sum: f64,
    /// Sum of sample maxima over runs that continued past round r (index
    /// r-1), for r = 1 .. n-1.
    pub conditional_max_sum: Vec<f64>,
    pub conditional_max_count: Vec<u64>,
}

impl SimulationTally {
    fn empty(n: usize, master_seed: u64) -> Self {
        Self {
            n,
            runs: 0,
            master_seed,
            wins: vec![0; n],
            false_positives: vec![0; n],
            false_negatives: vec![0; n],
            acceptance_hist: vec![0; n],
            max_position_hist: vec![0; n],
            max_value_sum: 0.0,
            conditional_max_sum: vec![0.0; n.saturating_sub(1)],
            conditional_max_count: vec![0; n.saturating_sub(1)],
        }
    }

    fn record(&mut self, cutoffs: &CutoffVector, record: &RunRecord, draws: &[f64]) {
        self.runs += 1;
        self.acceptance_hist[record.acceptance_round - 1] += 1;
        self.max_position_hist[record.max_position - 1] += 1;
        self.max_value_sum += record.max_value;
        let bucket = record.outcome_round() - 1;
        match record.outcome() {
            Outcome::Win => self.wins[bucket] += 1,
            Outcome::FalsePositive => self.false_positives[bucket] += 1,
            Outcome::FalseNegative => self.false_negatives[bucket] += 1,
            Outcome::Continue => unreachable!("runs always terminate"),
        }
        // Continuation through round r: nothing accepted yet and the
        // maximum still ahead, in which case the remaining maximum is the
        // sample maximum itself.
        let live_until = record.acceptance_round.min(record.max_position);
        for r in 1..live_until.min(self.n) {
            debug_assert!(draws[r - 1] < cutoffs.get(r));
            self.conditional_max_sum[r - 1] += record.max_value;
            self.conditional_max_count[r - 1] += 1;
        }
    }

    fn merge(&mut self, other: &SimulationTally) {
        debug_assert_eq!(self.n, other.n);
        self.runs += other.runs;
        for (a, b) in self.wins.iter_mut().zip(&other.wins) {
            *a += b;
        }
        for (a, b) in self.false_positives.iter_mut().zip(&other.false_positives) {
            *a += b;
        }
        for (a, b) in self.false_negatives.iter_mut().zip(&other.false_negatives) {
            *a += b;
        }
        for (a, b) in self.acceptance_hist.iter_mut().zip(&other.acceptance_hist) {
            *a += b;
        }
        for (a, b) in self.max_position_hist.iter_mut().zip(&other.max_position_hist) {
            *a += b;
        }
        self.max_value_sum += other.max_value_sum;
        for (a, b) in self.conditional_max_sum.iter_mut().zip(&other.conditional_max_sum) {
            *a += b;
        }
        for (a, b) in self.conditional_max_count.iter_mut().zip(&other.conditional_max_count) {
            *a += b;
        }
    }

    pub fn win_total(&self) -> u64 {
        self.wins.iter().sum()
    }

    pub fn win_frequency(&self) -> f64 {
        self.win_total() as f64 / self.runs as f64
    }

    /// Mean of the sample maximum; should track n/(n+1).
    pub fn mean_max(&self) -> f64 {
        self.max_value_sum / self.runs as f64
    }

    /// Mean maximum over runs still live after round `r`, if any.
    pub fn conditional_max_mean(&self, r: usize) -> Option<f64> {
        let c = *self.conditional_max_count.get(r - 1)?;
        (c > 0).then(|| self.conditional_max_sum[r - 1] / c as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("a simulation needs at least one run")]
    NoRuns,
    #[error(transparent)]
    Strategy(#[from] strategy::StrategyError),
}

/// Runs per chunk; partial tallies merge in chunk order so results do not
/// depend on the worker count.
const CHUNK: u64 = 1 << 16;

/// Simulates `runs` games with draws keyed by `master_seed`, using all
/// available parallelism.
pub fn simulate(
    cutoffs: &CutoffVector,
    runs: u64,
    master_seed: u64,
) -> Result<SimulationTally, SimError> {
    let workers = thread::available_parallelism().map_or(1, |p| p.get());
    simulate_with_workers(cutoffs, runs, master_seed, workers)
}

/// [`simulate`] with an explicit worker count. Any worker count produces a
/// bitwise-identical tally.
pub fn simulate_with_workers(
    cutoffs: &CutoffVector,
    runs: u64,
    master_seed: u64,
    workers: usize,
) -> Result<SimulationTally, SimError> {
    if runs == 0 {
        return Err(SimError::NoRuns);
    }
    let chunks = runs.div_ceil(CHUNK);
    let workers = workers.max(1).min(chunks as usize);

    let run_chunk = |chunk: u64| -> SimulationTally {
        let lo = chunk * CHUNK;
        let hi = (lo + CHUNK).min(runs);
        let mut tally = SimulationTally::empty(cutoffs.n(), master_seed);
        let mut draws = vec![0.0; cutoffs.n()];
        for t in lo..hi {
            rng::fill_uniform01(master_seed, t, &mut draws);
            let record = play_run(cutoffs, &draws);
            tally.record(cutoffs, &record, &draws);
        }
        tally
    };

    let mut partials: Vec<SimulationTally>;
    if workers == 1 {
        partials = (0..chunks).map(run_chunk).collect();
    } else {
        let next = std::sync::atomic::AtomicU64::new(0);
        let mut indexed: Vec<(u64, SimulationTally)> = Vec::with_capacity(chunks as usize);
        thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    let next = &next;
                    let run_chunk = &run_chunk;
                    scope.spawn(move || {
                        let mut local = Vec::new();
                        loop {
                            let c = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                            if c >= chunks {
                                return local;
                            }
                            local.push((c, run_chunk(c)));
                        }
                    })
                })
                .collect();
            for h in handles {
                indexed.extend(h.join().expect("simulation worker panicked"));
            }
        });
        indexed.sort_unstable_by_key(|(c, _)| *c);
        partials = indexed.into_iter().map(|(_, t)| t).collect();
    }

    let mut total = SimulationTally::empty(cutoffs.n(), master_seed);
    for p in &partials {
        total.merge(p);
    }
    partials.clear();
    Ok(total)
}

/// Resolves a strategy spec and simulates it.
pub fn simulate_spec(
    spec: &StrategySpec,
    runs: u64,
    master_seed: u64,
) -> Result<SimulationTally, SimError> {
    let cutoffs = strategy::cutoffs_for(spec)?;
    simulate(&cutoffs, runs, master_seed)
}

/// One (round, outcome) cell of a realized-vs-predicted comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscrepancyCell {
    pub round: usize,
    pub outcome: Outcome,
    pub realized_count: u64,
    pub realized_freq: f64,
    pub predicted: f64,
    /// Binomial standard error sqrt(p (1-p) / runs) at the predicted p.
    pub std_error: f64,
    pub z: f64,
}

/// Cell-by-cell comparison of a tally against the exact table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub n: usize,
    pub runs: u64,
    pub master_seed: u64,
    pub cells: Vec<DiscrepancyCell>,
    pub max_abs_z: f64,
    /// Set when the tally is too small to score (zero runs).
    pub insufficient_runs: bool,
}

/// Compares realized frequencies against predicted probabilities cell by
/// cell. Cells that are structurally zero (false positives and false
/// negatives at the final round) are omitted, matching the table layout.
pub fn compare_to_prediction(
    tally: &SimulationTally,
    table: &RoundOutcomeTable,
) -> DiscrepancyReport {
    assert_eq!(tally.n, table.n, "tally and prediction disagree on n");
    let n = tally.n;
    let runs = tally.runs;
    let insufficient = runs == 0;
    let mut cells = Vec::with_capacity(3 * n);
    let mut max_abs_z = 0.0f64;
    let mut push = |round: usize, outcome: Outcome, count: u64, predicted: f64| {
        let freq = if insufficient { 0.0 } else { count as f64 / runs as f64 };
        let se = if insufficient {
            0.0
        } else {
            (predicted * (1.0 - predicted) / runs as f64).sqrt()
        };
        let z = if se > 0.0 {
            (freq - predicted) / se
        } else if freq == predicted {
            0.0
        } else {
            f64::INFINITY
        };
        max_abs_z = max_abs_z.max(z.abs());
        cells.push(DiscrepancyCell {
            round,
            outcome,
            realized_count: count,
            realized_freq: freq,
            predicted,
            std_error: se,
            z,
        });
    };
    for r in 1..=n {
        push(r, Outcome::Win, tally.wins[r - 1], table.row(r).win);
    }
    for r in 1..n {
        push(r, Outcome::FalsePositive, tally.false_positives[r - 1], table.row(r).false_positive);
    }
    for r in 1..n {
        push(r, Outcome::FalseNegative, tally.false_negatives[r - 1], table.row(r).false_negative);
    }
    DiscrepancyReport {
        n,
        runs,
        master_seed: tally.master_seed,
        cells,
        max_abs_z,
        insufficient_runs: insufficient,
    }
}

/// Full-precision decimal formatting: 17 significant digits round-trip f64.
pub(crate) fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the discrepancy report as CSV. The seed travels in a leading
/// comment line; numeric cells carry 17 significant digits plus a rounded
/// display column.
pub fn write_report_csv<W: Write>(report: &DiscrepancyReport, mut w: W) -> io::Result<()> {
    writeln!(
        w,
        "# n={} runs={} master_seed={}",
        report.n, report.runs, report.master_seed
    )?;
    writeln!(
        w,
        "round,outcome,realized_count,realized_freq,predicted_prob,z,realized_freq_display,predicted_prob_display"
    )?;
    for c in &report.cells {
        writeln!(
            w,
            "{},{},{},{},{},{},{:.4},{:.4}",
            c.round,
            c.outcome.label(),
            c.realized_count,
            fmt_g17(c.realized_freq),
            fmt_g17(c.predicted),
            fmt_g17(c.z),
            c.realized_freq,
            c.predicted,
        )?;
    }
    Ok(())
}
