//! Exact per-round outcome probabilities for a cutoff policy.
//!
//! Each round of the game ends in exactly one of four ways:
//!
//! * **win** — the accepted draw is the sample maximum;
//! * **false positive** — a non-maximum draw was accepted while the maximum
//!   was still ahead;
//! * **false negative** — the maximum itself arrived and fell below its
//!   round's cutoff (the game can no longer be won);
//! * **continue** — nothing was accepted and the maximum is still ahead.
//!
//! The continuation probability after round `r` is
//!
//! ```text
//! PC(n,r) = prod_{j<=r} k_j  -  sum_{i<=r} g(i,n,r) * prod_{j<=r} k_j^f(i,j,n,r)
//!
//! f(i,j,n,r) = n-r+i (i=j), 1 (i<j), 0 (i>j)
//! g(i,n,r)   = (n-r) / ((n-r+i-1) * (n-r+i))
//! ```
//!
//! and everything else follows by recurrence: the chance that round `r` is
//! still live *and* produces the maximum is `PC(n,r-1)/(n-r+1)`, of which
//! the below-cutoff slice `k_r^n / n` is lost as a false negative. The
//! false-positive column is the budget left over,
//! `PC(n,r-1) - PW - PFN - PC(n,r)`, so each row sums to the previous
//! continuation probability by construction.
//!
//! Conditioning on continuation is the whole point: the surviving region of
//! the hypercube is top-heavy (false negatives removed mass at the bottom),
//! so these probabilities differ from the classical independence
//! approximation of [`crate::gm`] from the third-to-last round on. Exactness
//! requires nonincreasing cutoffs; see [`CutoffVector`].
//!
//! Everything here is a pure function of its inputs: safe to call from any
//! number of threads.

use serde::Serialize;

use crate::cutoffs::{CutoffError, CutoffVector};

/// Exponent of `k_j` in term `i` of the continuation formula.
///
/// Row sums are constant: `sum_j exponent(i,j,n,r) = n` for `1 <= i <= r`.
#[inline]
pub fn exponent(i: usize, j: usize, n: usize, r: usize) -> u32 {
    debug_assert!(1 <= i && i <= r && 1 <= j && j <= r && r <= n);
    if i == j {
        (n - r + i) as u32
    } else if i < j {
        1
    } else {
        0
    }
}

/// Coefficient of term `i` of the continuation formula:
/// `(n-r) / ((n-r+i-1) * (n-r+i))`.
#[inline]
pub fn coefficient(i: usize, n: usize, r: usize) -> f64 {
    debug_assert!(1 <= i && i <= r && r < n);
    (n - r) as f64 / (((n - r + i - 1) * (n - r + i)) as f64)
}

/// `PC(n,r)` on a raw slice of cutoffs (`ks.len() == n`, `ks[n-1] == 0`).
///
/// O(r): one backward pass accumulates each term's trailing product, so no
/// division is needed even when cutoffs are zero.
pub(crate) fn continue_probability_slice(ks: &[f64], r: usize) -> f64 {
    let n = ks.len();
    debug_assert!(r <= n);
    if r == 0 {
        return 1.0;
    }
    if r == n {
        // k_n = 0 kills every term; short-circuit to avoid 0/0 in g(1,n,n).
        return 0.0;
    }
    let mut prefix = 1.0;
    let mut terms = 0.0;
    // terms_s = sum_{i<=s} g(i) k_i^{n-r+i} prod_{i<j<=s} k_j, built left
    // to right: terms_s = terms_{s-1} * k_s + g(s) * k_s^{n-r+s}.
    for i in 1..=r {
        let k = ks[i - 1];
        terms = terms * k + coefficient(i, n, r) * k.powi((n - r + i) as i32);
        prefix *= k;
    }
    prefix - terms
}

#[inline]
pub(crate) fn false_negative_slice(ks: &[f64], r: usize) -> f64 {
    let n = ks.len();
    ks[r - 1].powi(n as i32) / n as f64
}

/// Probability the game is still winnable after round `r` (`0 <= r <= n`).
/// `r = 0` returns 1 by convention.
pub fn continue_probability(cutoffs: &CutoffVector, r: usize) -> f64 {
    assert!(r <= cutoffs.n(), "round {r} out of range for n = {}", cutoffs.n());
    continue_probability_slice(cutoffs.values(), r)
}

/// Probability the maximum arrives at round `r` below its cutoff:
/// `k_r^n / n`.
pub fn false_negative_probability(cutoffs: &CutoffVector, r: usize) -> f64 {
    assert!(
        (1..=cutoffs.n()).contains(&r),
        "round {r} out of range for n = {}",
        cutoffs.n()
    );
    false_negative_slice(cutoffs.values(), r)
}

/// Probability of winning exactly at round `r`:
/// `PC(n,r-1)/(n-r+1) - PFN(n,r)`.
pub fn win_probability_at_round(cutoffs: &CutoffVector, r: usize) -> f64 {
    let n = cutoffs.n();
    assert!((1..=n).contains(&r), "round {r} out of range for n = {n}");
    let ks = cutoffs.values();
    continue_probability_slice(ks, r - 1) / (n - r + 1) as f64 - false_negative_slice(ks, r)
}

/// Probability of accepting a non-maximum at round `r` while the maximum is
/// still ahead. Identically zero at `r = n`.
pub fn false_positive_probability_at_round(cutoffs: &CutoffVector, r: usize) -> f64 {
    let n = cutoffs.n();
    assert!((1..=n).contains(&r), "round {r} out of range for n = {n}");
    let ks = cutoffs.values();
    let pc_prev = continue_probability_slice(ks, r - 1);
    let pfn = false_negative_slice(ks, r);
    let pw = pc_prev / (n - r + 1) as f64 - pfn;
    (pc_prev - (pw + pfn)) - continue_probability_slice(ks, r)
}

/// One row of the outcome table: the four probabilities for a round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeRow {
    pub round: usize,
    pub win: f64,
    pub false_positive: f64,
    pub false_negative: f64,
    pub continuation: f64,
}

/// Per-round win / false-positive / false-negative / continue probabilities
/// plus their totals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundOutcomeTable {
    pub n: usize,
    pub rows: Vec<OutcomeRow>,
    pub pw_total: f64,
    pub pfp_total: f64,
    pub pfn_total: f64,
}

impl RoundOutcomeTable {
    /// Row for 1-based `round`.
    pub fn row(&self, round: usize) -> &OutcomeRow {
        &self.rows[round - 1]
    }

    /// Largest violation of `win + fp + fn + cont = previous cont` across
    /// rounds, plus the defect of `pw + pfp + pfn = 1` in total.
    pub fn conservation_defect(&self) -> f64 {
        let mut worst: f64 = (self.pw_total + self.pfp_total + self.pfn_total - 1.0).abs();
        let mut prev = 1.0;
        for row in &self.rows {
            let sum = row.win + row.false_positive + row.false_negative + row.continuation;
            worst = worst.max((sum - prev).abs());
            prev = row.continuation;
        }
        worst
    }
}

/// Assembles all four probabilities for every round, sharing the prefix
/// product so the whole table costs O(n^2) arithmetic.
///
/// Entries are clamped into [0, 1] only *after* the internal conservation
/// check; clamping first would mask formula bugs.
pub fn outcome_table(cutoffs: &CutoffVector) -> RoundOutcomeTable {
    let n = cutoffs.n();
    let ks = cutoffs.values();
    let mut rows = Vec::with_capacity(n);
    let (mut pw_total, mut pfp_total, mut pfn_total) = (0.0, 0.0, 0.0);
    let mut pc_prev = 1.0;
    for r in 1..=n {
        let pc = continue_probability_slice(ks, r);
        let pfn = false_negative_slice(ks, r);
        let pw = pc_prev / (n - r + 1) as f64 - pfn;
        let pfp = (pc_prev - (pw + pfn)) - pc;
        let sum = pw + pfp + pfn + pc;
        debug_assert!(
            (sum - pc_prev).abs() <= 1e-10,
            "conservation violated at round {r}: {sum} vs {pc_prev}"
        );
        rows.push(OutcomeRow {
            round: r,
            win: pw.clamp(0.0, 1.0),
            false_positive: pfp.clamp(0.0, 1.0),
            false_negative: pfn.clamp(0.0, 1.0),
            continuation: pc.clamp(0.0, 1.0),
        });
        pw_total += pw;
        pfp_total += pfp;
        pfn_total += pfn;
        pc_prev = pc;
    }
    RoundOutcomeTable {
        n,
        rows,
        pw_total: pw_total.clamp(0.0, 1.0),
        pfp_total: pfp_total.clamp(0.0, 1.0),
        pfn_total: pfn_total.clamp(0.0, 1.0),
    }
}

/// Total win probability; `outcome_table` without building the rows.
pub fn total_win_probability(cutoffs: &CutoffVector) -> f64 {
    total_win_probability_slice(cutoffs.values())
}

pub(crate) fn total_win_probability_slice(ks: &[f64]) -> f64 {
    let n = ks.len();
    let mut total = 0.0;
    for r in 1..=n {
        total += continue_probability_slice(ks, r - 1) / (n - r + 1) as f64
            - false_negative_slice(ks, r);
    }
    total
}

/// The `(n-1)`-th harmonic number `1 + 1/2 + .. + 1/(n-1)` by direct
/// summation (equals digamma(n) + Euler's gamma).
pub fn harmonic_number(m: usize) -> f64 {
    (1..=m).map(|j| 1.0 / j as f64).sum()
}

/// Win probability at round `r` for the identical-cutoff policy
/// `(k, .., k, 0)`:
/// `k^{r-1}/(n-r+1) - k^n/(n-r+1)`, plus `k^n/n` at the final round.
pub fn single_k_round_win_probability(n: usize, r: usize, k: f64) -> f64 {
    assert!(n >= 1 && (1..=n).contains(&r));
    let m = (n - r + 1) as f64;
    let base = (k.powi((r - 1) as i32) - k.powi(n as i32)) / m;
    if r == n {
        base + k.powi(n as i32) / n as f64
    } else {
        base
    }
}

/// Total win probability for the identical-cutoff policy `(k, .., k, 0)`.
///
/// The textbook display `k^n (sum_m 1/(m k^m) - H_{n-1})` divides by `k^m`;
/// distributing `k^n` first gives the equivalent
/// `sum_{m=1..n} k^{n-m}/m - H_{n-1} k^n`, which is stable for every
/// `k in [0, 1)` and yields the `k -> 0` limit `1/n` exactly (only the
/// final round can win).
pub fn single_k_win_probability(n: usize, k: f64) -> Result<f64, CutoffError> {
    if !(0.0..1.0).contains(&k) {
        return Err(CutoffError::SingleOutOfRange(k));
    }
    assert!(n >= 1);
    let mut sum = 0.0;
    let mut pow = 1.0; // k^{n-m}, built from m = n downward
    for m in (1..=n).rev() {
        sum += pow / m as f64;
        pow *= k;
    }
    Ok(sum - harmonic_number(n - 1) * pow) // pow = k^n after the loop
}

/// Gradient of the total win probability with respect to `k_1 .. k_{n-1}`
/// (`k_n` is pinned to zero). O(n^2), multiplication only.
///
/// Writing `PC(n,r) = A_r - W_r` with `A` the prefix product and `W` the
/// running term sum, the partial of `PC(n,r)` in `k_m` collapses to
/// `C_{m+1} * (A_{m-1} - W_{m-1} - g(m) f(m,m) k_m^{f(m,m)-1})` where `C` is
/// the suffix product, because every term with `i > m` is independent of
/// `k_m` and every term with `i < m` contains `k_m` linearly.
pub fn win_probability_gradient(cutoffs: &CutoffVector) -> Vec<f64> {
    win_probability_gradient_slice(cutoffs.values())
}

pub(crate) fn win_probability_gradient_slice(ks: &[f64]) -> Vec<f64> {
    let n = ks.len();
    if n <= 1 {
        return Vec::new();
    }
    let vars = n - 1;
    let mut grad = vec![0.0; vars];
    let mut prefix = vec![0.0; vars + 1]; // A_0 .. A_{r}
    let mut terms = vec![0.0; vars + 1]; // W_0 .. W_{r}
    let mut suffix = vec![0.0; vars + 2]; // C_m = prod_{j=m..r} k_j
    for r in 1..=vars {
        let weight = 1.0 / (n - r) as f64; // PC(n,r) / (n-r) enters the total
        prefix[0] = 1.0;
        terms[0] = 0.0;
        for i in 1..=r {
            let k = ks[i - 1];
            prefix[i] = prefix[i - 1] * k;
            terms[i] =
                terms[i - 1] * k + coefficient(i, n, r) * k.powi((n - r + i) as i32);
        }
        suffix[r + 1] = 1.0;
        for m in (1..=r).rev() {
            suffix[m] = suffix[m + 1] * ks[m - 1];
        }
        for m in 1..=r {
            let e = (n - r + m) as f64;
            let own = coefficient(m, n, r) * e * ks[m - 1].powi((n - r + m - 1) as i32);
            let d = suffix[m + 1] * (prefix[m - 1] - terms[m - 1] - own);
            grad[m - 1] += weight * d;
        }
    }
    for (m, g) in grad.iter_mut().enumerate() {
        *g -= ks[m].powi((n - 1) as i32);
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cv(k: &[f64]) -> CutoffVector {
        CutoffVector::new(k.to_vec()).unwrap()
    }

    #[test]
    fn exponent_row_sums_are_n() {
        for n in 1..=64usize {
            for r in 1..=n {
                for i in 1..=r {
                    let s: u32 = (1..=r).map(|j| exponent(i, j, n, r)).sum();
                    assert_eq!(s, n as u32, "n={n} r={r} i={i}");
                }
            }
        }
    }

    #[test]
    fn continuation_small_cases() {
        // n=2, r=1: k1 - k1^2/2
        let v = cv(&[0.5, 0.0]);
        assert_abs_diff_eq!(continue_probability(&v, 1), 0.375, epsilon = 1e-15);
        // r = 0 convention
        assert_eq!(continue_probability(&cv(&[0.9, 0.8, 0.7, 0.2, 0.0]), 0), 1.0);
        // r = n is exactly zero
        assert_eq!(continue_probability(&cv(&[0.9, 0.8, 0.0]), 3), 0.0);
    }

    #[test]
    fn continuation_matches_hand_integrated_quartic() {
        // n=4, r=3: k1 k2 k3 - k1^2 k2 k3 / 2 - k2^3 k3 / 6 - k3^4 / 12
        let (a, b, c) = (0.9f64, 0.8f64, 0.7f64);
        let expect = a * b * c - a * a * b * c / 2.0 - b.powi(3) * c / 6.0 - c.powi(4) / 12.0;
        let got = continue_probability(&cv(&[a, b, c, 0.0]), 3);
        assert_abs_diff_eq!(got, expect, epsilon = 1e-15);
        assert_abs_diff_eq!(got, 0.19745833333333333, epsilon = 1e-12);
    }

    #[test]
    fn false_negative_examples() {
        let v = cv(&[0.672608, 0.545532, 0.0]);
        assert_abs_diff_eq!(false_negative_probability(&v, 1), 0.672608f64.powi(3) / 3.0, epsilon = 1e-16);
        assert_abs_diff_eq!(false_negative_probability(&v, 1), 0.1014, epsilon = 5e-5);
        assert_eq!(false_negative_probability(&v, 3), 0.0);
        let v5 = cv(&[0.8076, 0.7677, 0.7124, 0.6229, 0.0]);
        assert_abs_diff_eq!(false_negative_probability(&v5, 2), 0.0533, epsilon = 5e-5);
    }

    #[test]
    fn win_and_false_positive_examples() {
        let v = cv(&[0.5, 0.0]);
        assert_abs_diff_eq!(win_probability_at_round(&v, 1), 0.375, epsilon = 1e-15);
        assert_abs_diff_eq!(
            false_positive_probability_at_round(&v, 1),
            0.125,
            epsilon = 1e-15
        );
        assert_eq!(false_positive_probability_at_round(&v, 2), 0.0);
        // n=3 final round equals the previous continuation probability:
        // k1 k2 - k1^2 k2 / 2 - k2^3 / 6
        let (a, b) = (0.7, 0.6);
        let v3 = cv(&[a, b, 0.0]);
        let expect = a * b - a * a * b / 2.0 - b.powi(3) / 6.0;
        assert_abs_diff_eq!(win_probability_at_round(&v3, 3), expect, epsilon = 1e-15);
    }

    #[test]
    fn table_totals_regression() {
        let t = outcome_table(&cv(&[0.672608, 0.545532, 0.0]));
        assert_abs_diff_eq!(t.pw_total, 0.679846, epsilon = 1e-5);
        let t = outcome_table(&cv(&[0.68989795, 0.5, 0.0]));
        assert_abs_diff_eq!(t.pw_total, 0.6775598562091145, epsilon = 1e-12);
        assert!(t.conservation_defect() < 1e-12);
    }

    #[test]
    fn table_partitions_probability() {
        let t = outcome_table(&cv(&[0.9, 0.7, 0.7, 0.3, 0.0]));
        assert!(t.conservation_defect() < 1e-12);
        assert_eq!(t.rows.last().unwrap().continuation, 0.0);
        assert_abs_diff_eq!(t.pw_total + t.pfp_total + t.pfn_total, 1.0, epsilon = 1e-12);
        let mut prev = 1.0;
        for row in &t.rows {
            assert!(row.continuation <= prev + 1e-15);
            prev = row.continuation;
        }
    }

    #[test]
    fn all_zero_cutoffs_end_at_round_one() {
        let t = outcome_table(&cv(&[0.0, 0.0, 0.0, 0.0]));
        assert_abs_diff_eq!(t.row(1).win, 0.25, epsilon = 1e-16);
        assert_abs_diff_eq!(t.row(1).false_positive, 0.75, epsilon = 1e-16);
        assert_eq!(t.row(1).false_negative, 0.0);
        assert_eq!(t.row(1).continuation, 0.0);
        for r in 2..=4 {
            assert_eq!(t.row(r).win, 0.0);
            assert_eq!(t.row(r).false_positive, 0.0);
        }
    }

    #[test]
    fn one_round_game_always_wins() {
        let t = outcome_table(&cv(&[0.0]));
        assert_eq!(t.pw_total, 1.0);
        assert_eq!(t.row(1).win, 1.0);
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic_number(0), 0.0);
        assert_eq!(harmonic_number(1), 1.0);
        assert_abs_diff_eq!(harmonic_number(2), 1.5, epsilon = 1e-16);
        assert_abs_diff_eq!(harmonic_number(3), 11.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(harmonic_number(4), 25.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(harmonic_number(5), 137.0 / 60.0, epsilon = 1e-15);
    }

    #[test]
    fn single_k_total_examples() {
        assert_abs_diff_eq!(single_k_win_probability(2, 0.5).unwrap(), 0.75, epsilon = 1e-15);
        // k -> 0 leaves only the final round.
        assert_eq!(single_k_win_probability(5, 0.0).unwrap(), 0.2);
        assert_eq!(single_k_win_probability(1, 0.0).unwrap(), 1.0);
        assert!(single_k_win_probability(3, 1.0).is_err());
        assert!(single_k_win_probability(3, -0.1).is_err());
    }

    #[test]
    fn single_k_agrees_with_general_engine() {
        for &n in &[2usize, 3, 5, 9] {
            for &k in &[0.0, 0.2, 0.55, 0.9, 0.99] {
                let total = single_k_win_probability(n, k).unwrap();
                let v = CutoffVector::single(k, n).unwrap();
                assert_abs_diff_eq!(total, outcome_table(&v).pw_total, epsilon = 1e-12);
                let by_round: f64 =
                    (1..=n).map(|r| single_k_round_win_probability(n, r, k)).sum();
                assert_abs_diff_eq!(total, by_round, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let ks = [0.86, 0.71, 0.64, 0.5, 0.31, 0.0];
        let v = cv(&ks);
        let grad = win_probability_gradient(&v);
        let h = 1e-6;
        for m in 0..ks.len() - 1 {
            let mut up = ks.to_vec();
            let mut dn = ks.to_vec();
            up[m] += h;
            dn[m] -= h;
            let fd = (total_win_probability_slice(&up) - total_win_probability_slice(&dn))
                / (2.0 * h);
            let rel = (fd - grad[m]).abs() / fd.abs().max(1e-12);
            assert!(rel < 1e-6, "m={m}: analytic {} vs fd {fd}", grad[m]);
        }
    }
}
