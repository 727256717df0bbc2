//! Cross-module invariants: probability conservation, the identical-cutoff
//! specialization, fixture agreement, gradient consistency, and the shape
//! properties of optimized policies.

use proptest::prelude::*;
use stopmax::cutoffs::CutoffVector;
use stopmax::oracle;
use stopmax::sim::Outcome;
use stopmax::{exact, gm, rng, strategy};

/// Deterministic random cutoff vector: n-1 sorted-descending uniforms plus
/// the final zero.
fn random_cutoffs(n: usize, seed: u64, stream: u64) -> CutoffVector {
    let mut ks: Vec<f64> = (0..n - 1).map(|d| rng::uniform01(seed, stream, d as u64)).collect();
    ks.sort_by(|a, b| b.partial_cmp(a).expect("draws are finite"));
    ks.push(0.0);
    CutoffVector::new(ks).expect("sorted draws are valid cutoffs")
}

proptest! {
    /// Each row of the outcome table splits the previous continuation
    /// probability exactly; the terminal outcomes exhaust probability one.
    #[test]
    fn conservation_holds_for_random_vectors(
        raw in prop::collection::vec(0.0f64..1.0, 1..32),
    ) {
        let mut ks = raw;
        ks.sort_by(|a, b| b.partial_cmp(a).unwrap());
        *ks.last_mut().unwrap() = 0.0;
        let v = CutoffVector::new(ks).unwrap();
        let t = exact::outcome_table(&v);
        prop_assert!(t.conservation_defect() <= 1e-12);
        prop_assert_eq!(t.rows.last().unwrap().continuation, 0.0);
        prop_assert!((t.pw_total + t.pfp_total + t.pfn_total - 1.0).abs() <= 1e-10);
    }

    /// For n = 2 the classical formula and the exact engine agree for every
    /// cutoff (both reduce to 1/2 + k - k^2).
    #[test]
    fn gm_equals_exact_for_two_rounds(k in 0.0f64..1.0) {
        let v = CutoffVector::new(vec![k, 0.0]).unwrap();
        let gm_total = gm::total_win_probability(&v);
        let exact_total = exact::total_win_probability(&v);
        prop_assert!((gm_total - exact_total).abs() <= 1e-14);
        prop_assert!((gm_total - (0.5 + k - k * k)).abs() <= 1e-14);
    }

    /// The n = 2 objective is strictly concave; the optimizer lands on 1/2
    /// from any interior start.
    #[test]
    fn optimizer_converges_on_n2_from_any_start(start in 0.01f64..0.99) {
        let init = CutoffVector::new(vec![start, 0.0]).unwrap();
        let r = strategy::optimize_cutoffs(2, Some(&init), &Default::default()).unwrap();
        prop_assert!((r.cutoffs.get(1) - 0.5).abs() <= 1e-7);
        prop_assert!((r.pw_total - 0.75).abs() <= 1e-12);
    }
}

/// 100 random (n, k) pairs: the general engine at identical cutoffs
/// reproduces the closed-form per-round win probabilities.
#[test]
fn identical_cutoffs_specialize_the_general_table() {
    for trial in 0..100u64 {
        let n = 2 + (rng::bits(2024, trial, 0) % 11) as usize; // 2..=12
        let k = rng::uniform01(2024, trial, 1);
        let v = CutoffVector::single(k, n).unwrap();
        let table = exact::outcome_table(&v);
        for r in 1..=n {
            let closed = exact::single_k_round_win_probability(n, r, k);
            assert!(
                (table.row(r).win - closed).abs() <= 1e-12,
                "n={n} r={r} k={k}: {} vs {closed}",
                table.row(r).win
            );
        }
        let total = exact::single_k_win_probability(n, k).unwrap();
        assert!((table.pw_total - total).abs() <= 1e-12);
    }
}

/// The published identical-cutoff win polynomials for n = 2..6, evaluated
/// per round.
#[test]
fn identical_cutoff_polynomials_for_small_n() {
    let k = 0.731f64;
    let expect: [&[f64]; 5] = [
        &[0.5 - k * k / 2.0, k - k * k / 2.0],
        &[
            1.0 / 3.0 - k.powi(3) / 3.0,
            k / 2.0 - k.powi(3) / 2.0,
            k * k - 2.0 * k.powi(3) / 3.0,
        ],
        &[
            0.25 - k.powi(4) / 4.0,
            k / 3.0 - k.powi(4) / 3.0,
            k * k / 2.0 - k.powi(4) / 2.0,
            k.powi(3) - 3.0 * k.powi(4) / 4.0,
        ],
        &[
            0.2 - k.powi(5) / 5.0,
            k / 4.0 - k.powi(5) / 4.0,
            k * k / 3.0 - k.powi(5) / 3.0,
            k.powi(3) / 2.0 - k.powi(5) / 2.0,
            k.powi(4) - 4.0 * k.powi(5) / 5.0,
        ],
        &[
            1.0 / 6.0 - k.powi(6) / 6.0,
            k / 5.0 - k.powi(6) / 5.0,
            k * k / 4.0 - k.powi(6) / 4.0,
            k.powi(3) / 3.0 - k.powi(6) / 3.0,
            k.powi(4) / 2.0 - k.powi(6) / 2.0,
            k.powi(5) - 5.0 * k.powi(6) / 6.0,
        ],
    ];
    for (i, rows) in expect.iter().enumerate() {
        let n = i + 2;
        let table = exact::outcome_table(&CutoffVector::single(k, n).unwrap());
        for (r, want) in rows.iter().enumerate() {
            assert!(
                (table.row(r + 1).win - want).abs() <= 1e-14,
                "n={n} r={}",
                r + 1
            );
        }
    }
}

/// 20 random vectors against every published polynomial fixture.
#[test]
fn fixtures_agree_with_the_general_engine() {
    let outcomes = [
        Outcome::Win,
        Outcome::FalsePositive,
        Outcome::FalseNegative,
        Outcome::Continue,
    ];
    for trial in 0..20u64 {
        let n = 2 + (trial % 5) as usize; // 2..=6
        let v = random_cutoffs(n, 555, trial);
        let table = exact::outcome_table(&v);
        for r in 1..=n {
            let row = table.row(r);
            let general = [row.win, row.false_positive, row.false_negative, row.continuation];
            for (o, g) in outcomes.iter().zip(general) {
                if let Some(fix) = oracle::fixture_probability(n, r, *o, v.values()) {
                    assert!(
                        (fix - g).abs() <= 1e-12,
                        "n={n} r={r} {o:?}: fixture {fix} vs general {g}"
                    );
                }
            }
        }
    }
}

/// Analytic gradient vs central differences at random interior points.
#[test]
fn gradient_matches_finite_differences_at_random_points() {
    for trial in 0..20u64 {
        let n = 3 + (rng::bits(808, trial, 0) % 10) as usize; // 3..=12
        let v = random_cutoffs(n, 808, trial);
        let grad = exact::win_probability_gradient(&v);
        let h = 1e-6;
        for m in 0..n - 1 {
            let mut up = v.values().to_vec();
            let mut dn = v.values().to_vec();
            up[m] += h;
            dn[m] -= h;
            let f = |ks: Vec<f64>| {
                let c = CutoffVector::new_permissive(ks).unwrap();
                exact::total_win_probability(&c)
            };
            let fd = (f(up) - f(dn)) / (2.0 * h);
            // 1e-9 absolute floor: central differences carry ~eps*|f|/h of
            // rounding noise, which dominates for near-zero components.
            assert!(
                (fd - grad[m]).abs() <= 1e-6 * fd.abs() + 1e-9,
                "n={n} trial={trial} m={m}: {} vs {fd}",
                grad[m]
            );
        }
    }
}

/// Optimized policies decay like the logarithm of the remaining rounds and
/// sit just above the closed-form approximation.
#[test]
fn optimized_n100_policy_shape() {
    let r = strategy::optimize_cutoffs(100, None, &Default::default()).unwrap();
    let ks = r.cutoffs.values();
    // Pearson correlation between k_r and log(100 - r) for r <= 95.
    let xs: Vec<f64> = (1..=95).map(|rr| ((100 - rr) as f64).ln()).collect();
    let ys: Vec<f64> = ks[..95].to_vec();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&xs), mean(&ys));
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let corr = cov / (vx * vy).sqrt();
    assert!(corr > 0.999, "corr = {corr}");

    let approx = strategy::approx_cutoffs(100);
    for r in 1..=99 {
        assert!(
            approx.get(r) <= ks[r - 1] + 1e-3,
            "round {r}: approx {} vs optimal {}",
            approx.get(r),
            ks[r - 1]
        );
    }

    // Strictly decreasing away from ties.
    for w in ks[..99].windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
}

/// Simulated maxima behave like order statistics: the max position is
/// uniform over rounds and the mean maximum is n/(n+1); conditioning on
/// continuation lifts the remaining maximum above the unconditional value.
#[test]
fn simulation_order_statistics() {
    for &n in &[3usize, 7, 10] {
        let v = gm::naive_cutoffs(n);
        let t = stopmax::sim::simulate(&v, 1_000_000, 20_240_207).unwrap();
        for r in 1..=n {
            let freq = t.max_position_hist[r - 1] as f64 / t.runs as f64;
            assert!(
                (freq - 1.0 / n as f64).abs() < 0.002,
                "n={n} r={r} freq={freq}"
            );
        }
        let expect = n as f64 / (n + 1) as f64;
        let var_max = n as f64 / (((n + 1) * (n + 1) * (n + 2)) as f64);
        let se = (var_max / t.runs as f64).sqrt();
        assert!(
            (t.mean_max() - expect).abs() <= 5.0 * se,
            "n={n}: mean {} vs {expect} (se {se})",
            t.mean_max()
        );
        let unconditional = (n - 1) as f64 / n as f64;
        let c1 = t.conditional_max_mean(1).expect("round 1 continuations exist");
        assert!(c1 > unconditional, "n={n}: {c1} vs {unconditional}");
    }
}

/// Conditional maxima after round 1 for the optimal policies, n = 3, 5, 10.
#[test]
fn conditional_maximum_after_round_one() {
    let expect = [(3usize, 0.724), (5, 0.824), (10, 0.907)];
    for (n, want) in expect {
        let opt = strategy::optimize_cutoffs(n, None, &Default::default()).unwrap();
        let t = stopmax::sim::simulate(&opt.cutoffs, 1_000_000, 20_240_207).unwrap();
        let got = t.conditional_max_mean(1).expect("continuations exist");
        assert!((got - want).abs() < 3e-3, "n={n}: {got} vs {want}");
    }
}

/// The sampling oracle's terminal cells partition the hypercube exactly and
/// its volumes straddle the closed forms within Monte Carlo error.
#[test]
fn oracle_cells_partition_and_match() {
    let v = random_cutoffs(5, 99, 0);
    let samples = 2_000_000u64;
    let counts = oracle::cell_counts(&v, samples, 4242);
    let terminal: u64 = (1..=5)
        .map(|r| {
            counts.count(r, Outcome::Win)
                + counts.count(r, Outcome::FalsePositive)
                + counts.count(r, Outcome::FalseNegative)
        })
        .sum();
    assert_eq!(terminal, samples);
    let table = exact::outcome_table(&v);
    for r in 1..=5 {
        let (est, se) = counts.estimate(r, Outcome::Win);
        assert!(
            (est - table.row(r).win).abs() <= 4.0 * se.max(1e-9),
            "round {r}: {est} vs {}",
            table.row(r).win
        );
        let (est, se) = counts.estimate(r, Outcome::Continue);
        assert!((est - table.row(r).continuation).abs() <= 4.0 * se.max(1e-9));
    }
}
