//! Exact outcome probabilities, optimal cutoff policies, and seeded
//! simulation for the full-information best-choice game.
//!
//! A player watches `n` independent uniform(0,1) draws arrive one at a time
//! and must accept exactly one, immediately and irrevocably, trying to
//! accept the overall maximum. A threshold policy fixes decision numbers
//! `k_1 >= k_2 >= .. >= k_n = 0` and accepts the first draw at or above its
//! round's cutoff. Every round then ends as a win, a false positive (a
//! non-maximum accepted too early), a false negative (the maximum declined),
//! or a continuation.
//!
//! What this crate provides:
//!
//! * [`exact`] — closed-form per-round probabilities of all four outcomes
//!   for any valid cutoff vector, including the identical-cutoff special
//!   case. Correctly conditions on continuation: surviving games face a
//!   *higher* remaining maximum than fresh ones, because false negatives
//!   leave the pool.
//! * [`gm`] — the classical Gilbert–Mosteller (1966) baseline, which skips
//!   that conditioning; kept callable so the gap is measurable.
//! * [`strategy`] — named policy generators and maximization of the exact
//!   win probability (spectral projected gradient on the analytic
//!   polynomial gradient, isotonic projection for monotonicity).
//! * [`sim`] — a counter-based-RNG Monte Carlo simulator whose tallies are
//!   bitwise reproducible for any worker count, with realized-vs-predicted
//!   discrepancy reports.
//! * [`oracle`] — region-predicate sampling and hand-integrated small-`n`
//!   fixtures, the independent ground truth the closed forms are tested
//!   against.
//!
//! ```
//! use stopmax::{exact, strategy};
//!
//! let best = strategy::optimize_cutoffs(3, None, &Default::default()).unwrap();
//! assert!((best.pw_total - 0.679846).abs() < 1e-5);
//! let table = exact::outcome_table(&best.cutoffs);
//! assert!((table.pw_total + table.pfp_total + table.pfn_total - 1.0).abs() < 1e-10);
//! ```

pub mod cutoffs;
pub mod exact;
pub mod gm;
pub mod oracle;
pub mod rng;
pub mod sim;
pub mod solve;
pub mod strategy;

pub use cutoffs::{CutoffError, CutoffVector};
pub use exact::{outcome_table, RoundOutcomeTable};
pub use sim::{compare_to_prediction, play_run, simulate, Outcome, SimulationTally};
pub use strategy::{cutoffs_for, optimize_cutoffs, OptimizationResult, StrategySpec};
