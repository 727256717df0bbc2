//! The classical Gilbert–Mosteller baseline.
//!
//! Gilbert & Mosteller (1966, "Recognizing the Maximum of a Sequence")
//! analyze the same full-information game under the simplifying assumption
//! that after any draw `x` the next `i` draws all fall below `x` with
//! probability `x^i` — i.e. continuation does not reshape the distribution
//! of what is still to come. Their decision numbers are *indifference
//! numbers*: with `i` rounds remaining one should be indifferent between
//! accepting a draw equal to `k_i` and playing on, which pins `k_i` as the
//! root of
//!
//! ```text
//! sum_{j=1..i-1} C(i-1,j) k^{i-1-j} (1-k)^j / j  =  k^{i-1}
//! ```
//!
//! (the exponent counts draws still to come; the final round has `k_1 = 0`).
//! This module reproduces their published quantities — indifference numbers,
//! per-round and total win probabilities, the naive comparison strategy,
//! and the single-cutoff Poisson asymptote — so the gap against the exact
//! engine in [`crate::exact`] is measurable rather than anecdotal. The two
//! coincide for n = 2 and diverge from n = 3 on, where cross terms from
//! conditioning on continuation first appear.

use serde::Serialize;

use crate::cutoffs::CutoffVector;
use crate::solve;

/// Residual of the indifference equation at `k` for `i` remaining rounds,
/// in the original form `LHS - k^{i-1}`.
///
/// The binomial sum is evaluated through successive term ratios
/// `t_{j+1}/t_j = ((m-j)/(j+1)) * ((1-k)/k)` — never raw factorials, which
/// would overflow long before `i = 1000`. All terms are positive, so there
/// is no cancellation.
pub fn indifference_residual(i: usize, k: f64) -> f64 {
    assert!(i >= 2, "the indifference equation needs at least one draw to come");
    let m = i - 1;
    let mut term = m as f64 * k_pow(k, m - 1) * (1.0 - k); // C(m,1) k^{m-1} (1-k)
    let mut sum = 0.0;
    for j in 1..=m {
        sum += term / j as f64;
        term *= (m - j) as f64 / (j + 1) as f64 * ((1.0 - k) / k);
    }
    sum - k_pow(k, m)
}

#[inline]
fn k_pow(k: f64, e: usize) -> f64 {
    k.powi(e as i32)
}

/// Indifference number for `i` remaining rounds (current round included).
///
/// `i = 1` is 0 (the last draw is always taken) and `i = 2` is exactly 1/2.
/// Larger `i` are found by bisection on the scaled residual
/// `sum_j C(m,j) rho^j / j - 1` with `rho = (1-k)/k`, which has one sign
/// change on (0, 1) and saturates to +inf instead of underflowing when the
/// bracket probes small `k`. The bracket is refined to `|dk| <= 1e-12`.
pub fn indifference_number(i: usize) -> f64 {
    assert!(i >= 1, "need at least one remaining round");
    let m = i - 1;
    match m {
        0 => 0.0,
        1 => 0.5,
        _ => {
            let residual = |k: f64| -> f64 {
                let rho = (1.0 - k) / k;
                let mut term = m as f64 * rho; // C(m,1) rho
                let mut sum = 0.0;
                for j in 1..=m {
                    sum += term / j as f64;
                    if !sum.is_finite() || sum > 1e300 {
                        return f64::INFINITY;
                    }
                    term *= (m - j) as f64 / (j + 1) as f64 * rho;
                }
                sum - 1.0
            };
            // 1e-14 keeps the original-form residual below 1e-10 even at
            // i = 1000, where the equation's slope amplifies bracket error.
            solve::bisect(residual, 1e-9, 1.0 - 1e-12, 1e-14)
        }
    }
}

/// Indifference numbers for `i = 1 ..= max_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndifferenceTable {
    values: Vec<f64>,
}

impl IndifferenceTable {
    pub fn compute(max_i: usize) -> Self {
        Self {
            values: (1..=max_i).map(indifference_number).collect(),
        }
    }

    pub fn max_i(&self) -> usize {
        self.values.len()
    }

    /// Value for 1-based `i`.
    pub fn get(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// The Gilbert–Mosteller policy for a game of length `n`: round `j` uses the
/// indifference number for `n - j + 1` remaining rounds.
pub fn gm_cutoffs(n: usize) -> CutoffVector {
    let table = IndifferenceTable::compute(n);
    let ks: Vec<f64> = (1..=n).map(|j| table.get(n - j + 1)).collect();
    CutoffVector::new(ks).expect("indifference numbers are strictly decreasing to 0")
}

/// The naive comparison policy `k_j = 1 - 1/(n-j+1)`.
pub fn naive_cutoffs(n: usize) -> CutoffVector {
    assert!(n >= 1);
    let ks: Vec<f64> = (1..=n).map(|j| 1.0 - 1.0 / (n - j + 1) as f64).collect();
    CutoffVector::new(ks).expect("naive cutoffs are strictly decreasing to 0")
}

/// Gilbert–Mosteller's probability of winning at round `r` under their
/// independence assumption (requires nonincreasing cutoffs):
///
/// ```text
/// P(1)   = 1/n - k_1^n / n
/// P(r+1) = sum_{j<=r} k_j^r / (r (n-r))
///        - sum_{j<=r} k_j^n / (n (n-r))
///        - k_{r+1}^n / n                      for 1 <= r <= n-1
/// ```
pub fn round_win_probability(cutoffs: &CutoffVector, r: usize) -> f64 {
    let n = cutoffs.n();
    assert!((1..=n).contains(&r), "round {r} out of range for n = {n}");
    let nf = n as f64;
    if r == 1 {
        return 1.0 / nf - cutoffs.get(1).powi(n as i32) / nf;
    }
    let p = r - 1; // the formula's index: this is P(p+1)
    let mut s_pow_p = 0.0;
    let mut s_pow_n = 0.0;
    for j in 1..=p {
        let k = cutoffs.get(j);
        s_pow_p += k.powi(p as i32);
        s_pow_n += k.powi(n as i32);
    }
    s_pow_p / (p as f64 * (n - p) as f64) - s_pow_n / (nf * (n - p) as f64)
        - cutoffs.get(r).powi(n as i32) / nf
}

/// Sum of [`round_win_probability`] over all rounds.
pub fn total_win_probability(cutoffs: &CutoffVector) -> f64 {
    (1..=cutoffs.n()).map(|r| round_win_probability(cutoffs, r)).sum()
}

/// Maximizer of the single-cutoff limit series `sum_i e^-mu mu^i / (i! i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Asymptote {
    pub mu: f64,
    pub value: f64,
    /// Terms summed before truncation at the relative 1e-16 threshold.
    pub terms_used: usize,
    /// Magnitude of the last included term, relative to the sum.
    pub last_term_ratio: f64,
}

/// The series `sum_{i>=1} e^-mu mu^i / (i! i)`, truncated once a term drops
/// below 1e-16 of the running sum. Returns `(value, terms, last_ratio)`.
pub fn poisson_win_series(mu: f64) -> (f64, usize, f64) {
    assert!(mu >= 0.0);
    if mu == 0.0 {
        return (0.0, 0, 0.0);
    }
    let mut term = (-mu).exp() * mu; // e^-mu mu^1 / 1!
    let mut sum = 0.0;
    let mut i = 1usize;
    loop {
        sum += term / i as f64;
        let ratio = term / i as f64 / sum;
        if ratio < 1e-16 || i > 10_000 {
            return (sum, i, ratio);
        }
        i += 1;
        term *= mu / i as f64;
    }
}

/// Maximizes the Poisson limit series over `mu > 0`. This is the large-`n`
/// win probability of the best identical-cutoff policy.
pub fn single_k_asymptote() -> Asymptote {
    let (mu, value) = solve::golden_max(|m| poisson_win_series(m).0, 1e-6, 20.0, 1e-10);
    let (_, terms_used, last_term_ratio) = poisson_win_series(mu);
    Asymptote { mu, value, terms_used, last_term_ratio }
}

/// Best front-loaded single-cutoff policy under the Gilbert–Mosteller
/// formula: the same `k` for the first `t` rounds, zero afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingleKPrefix {
    pub rounds_at_k: usize,
    pub k: f64,
    pub win_probability: f64,
}

/// Grid search over integer `t`, maximizing over `k` for each `t` with the
/// Gilbert–Mosteller win formula. Exploratory utility; the exact engine is
/// the authority for actual play.
pub fn best_single_k_prefix(n: usize) -> SingleKPrefix {
    assert!(n >= 2);
    let mut best = SingleKPrefix { rounds_at_k: 0, k: 0.0, win_probability: 0.0 };
    for t in 1..n {
        let eval = |k: f64| {
            let mut ks = vec![k; t];
            ks.resize(n, 0.0);
            let v = CutoffVector::new(ks).expect("prefix policies are nonincreasing");
            total_win_probability(&v)
        };
        let (k, pw) = solve::golden_max(eval, 0.0, 1.0 - 1e-9, 1e-9);
        if pw > best.win_probability {
            best = SingleKPrefix { rounds_at_k: t, k, win_probability: pw };
        }
    }
    best
}
