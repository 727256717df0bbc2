//! Strategy generators and exact-objective optimization of cutoff vectors.
//!
//! Six ways to produce a policy for a game of length `n`: the naive
//! reciprocal rule, the Gilbert–Mosteller indifference numbers, the best
//! identical cutoff (optimal or user-fixed), the logarithmic approximation,
//! full optimization of the exact win probability, and explicit vectors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cutoffs::{CutoffError, CutoffVector};
use crate::exact;
use crate::gm;
use crate::solve;

/// A named generator of cutoff vectors. Deterministic: the same spec always
/// yields the same cutoffs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategySpec {
    /// `k_j = 1 - 1/(n-j+1)`.
    Naive { n: usize },
    /// Gilbert–Mosteller indifference numbers.
    Gm { n: usize },
    /// `(k*, .., k*, 0)` with `k*` maximizing the identical-cutoff formula.
    SingleKOptimal { n: usize },
    /// `(k, .., k, 0)` for a caller-fixed `k`.
    SingleK { n: usize, k: f64 },
    /// `k_r = (1 - 1/n) + log((n-r)/n)/n`, clamped at 0.
    Approx { n: usize },
    /// Full optimization of the exact total win probability.
    Optimal { n: usize },
    /// A caller-supplied vector.
    Explicit { cutoffs: CutoffVector },
}

impl StrategySpec {
    /// Parses the CLI spelling of a strategy name (everything but explicit).
    pub fn from_name(name: &str, n: usize) -> Result<Self, StrategyError> {
        match name {
            "naive" => Ok(Self::Naive { n }),
            "gm" => Ok(Self::Gm { n }),
            "single-k" | "single_k" => Ok(Self::SingleKOptimal { n }),
            "approx" => Ok(Self::Approx { n }),
            "optimal" => Ok(Self::Optimal { n }),
            other => match other.strip_prefix("single-k=").or_else(|| other.strip_prefix("single_k=")) {
                Some(v) => {
                    let k: f64 = v
                        .parse()
                        .map_err(|_| StrategyError::UnknownStrategy(other.to_string()))?;
                    Ok(Self::SingleK { n, k })
                }
                None => Err(StrategyError::UnknownStrategy(other.to_string())),
            },
        }
    }

    /// Game length.
    pub fn n(&self) -> usize {
        match self {
            Self::Naive { n }
            | Self::Gm { n }
            | Self::SingleKOptimal { n }
            | Self::SingleK { n, .. }
            | Self::Approx { n }
            | Self::Optimal { n } => *n,
            Self::Explicit { cutoffs } => cutoffs.n(),
        }
    }

    /// Short display name.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Naive { .. } => "naive",
            Self::Gm { .. } => "gm",
            Self::SingleKOptimal { .. } => "single-k",
            Self::SingleK { .. } => "single-k-fixed",
            Self::Approx { .. } => "approx",
            Self::Optimal { .. } => "optimal",
            Self::Explicit { .. } => "explicit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("unknown strategy '{0}' (expected naive | gm | single-k | single-k=<k> | approx | optimal)")]
    UnknownStrategy(String),
    #[error(transparent)]
    Cutoff(#[from] CutoffError),
    #[error("game length must be at least {min}, got {n}")]
    GameTooShort { n: usize, min: usize },
}

/// Cutoffs for a spec. The `Optimal` variant runs the optimizer with
/// default settings; cache the result if you need it repeatedly.
pub fn cutoffs_for(spec: &StrategySpec) -> Result<CutoffVector, StrategyError> {
    match spec {
        StrategySpec::Naive { n } => Ok(gm::naive_cutoffs(*n)),
        StrategySpec::Gm { n } => Ok(gm::gm_cutoffs(*n)),
        StrategySpec::SingleKOptimal { n } => {
            let (k, _) = optimal_single_k(*n)?;
            Ok(CutoffVector::single(k, *n)?)
        }
        StrategySpec::SingleK { n, k } => Ok(CutoffVector::single(*k, *n)?),
        StrategySpec::Approx { n } => Ok(approx_cutoffs(*n)),
        StrategySpec::Optimal { n } => {
            Ok(optimize_cutoffs(*n, None, &OptimizeOptions::default())?.cutoffs)
        }
        StrategySpec::Explicit { cutoffs } => Ok(cutoffs.clone()),
    }
}

/// The logarithmic approximation to the optimal policy:
/// `k_r = (1 - 1/n) + log((n-r)/n)/n` for `r < n`, clamped below at 0.
/// The formula diverges at `r = n`, which merges with the mandatory final
/// zero.
pub fn approx_cutoffs(n: usize) -> CutoffVector {
    assert!(n >= 1);
    let nf = n as f64;
    let mut ks: Vec<f64> = (1..n)
        .map(|r| ((1.0 - 1.0 / nf) + ((n - r) as f64 / nf).ln() / nf).max(0.0))
        .collect();
    ks.push(0.0);
    CutoffVector::new(ks).expect("the approximation is nonincreasing")
}

/// Maximizes the identical-cutoff win probability over `k in [0, 1)`.
/// Returns `(k, win_probability)`.
pub fn optimal_single_k(n: usize) -> Result<(f64, f64), StrategyError> {
    if n < 2 {
        return Err(StrategyError::GameTooShort { n, min: 2 });
    }
    let eval = |k: f64| exact::single_k_win_probability(n, k).expect("k stays inside [0,1)");
    Ok(solve::golden_max(eval, 0.0, 1.0 - 1e-12, 1e-9))
}

/// Settings for [`optimize_cutoffs`].
#[derive(Debug, Clone, Copy)]
pub struct OptimizeOptions {
    /// Convergence threshold on the projected-gradient norm.
    pub tol: f64,
    /// Iteration budget (one gradient evaluation per iteration).
    pub max_iter: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 10_000 }
    }
}

/// Outcome of an optimization run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub cutoffs: CutoffVector,
    pub pw_total: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Projected-gradient norm at termination.
    pub gradient_norm: f64,
}

/// Maximizes the exact total win probability over
/// `1 >= k_1 >= .. >= k_{n-1} >= 0` (with `k_n = 0`) by spectral projected
/// gradient ascent: Barzilai–Borwein steps on the analytic polynomial
/// gradient, projected onto the monotone cone by pool-adjacent-violators,
/// with a nonmonotone backtracking line search. `init` defaults to
/// [`approx_cutoffs`], which starts slightly below the optimum.
///
/// If the budget runs out the best point found is still returned with
/// `converged = false`. Optima on the monotonicity boundary are reported
/// as the boundary point (ties unperturbed).
pub fn optimize_cutoffs(
    n: usize,
    init: Option<&CutoffVector>,
    opts: &OptimizeOptions,
) -> Result<OptimizationResult, StrategyError> {
    if n < 2 {
        return Err(StrategyError::GameTooShort { n, min: 2 });
    }
    let vars = n - 1;
    let mut x: Vec<f64> = match init {
        Some(v) => {
            if v.n() != n {
                return Err(StrategyError::Cutoff(CutoffError::OutOfRange {
                    round: v.n(),
                    value: f64::NAN,
                }));
            }
            v.values()[..vars].to_vec()
        }
        None => approx_cutoffs(n).values()[..vars].to_vec(),
    };
    project_monotone(&mut x);

    // Work buffer of full length n so the exact-engine slice helpers see the
    // trailing zero.
    let eval = |x: &[f64], buf: &mut Vec<f64>| -> f64 {
        buf.clear();
        buf.extend_from_slice(x);
        buf.push(0.0);
        exact::total_win_probability_slice(buf)
    };
    let grad_of = |x: &[f64], buf: &mut Vec<f64>| -> Vec<f64> {
        buf.clear();
        buf.extend_from_slice(x);
        buf.push(0.0);
        exact::win_probability_gradient_slice(buf)
    };

    let mut buf = Vec::with_capacity(n);
    let mut f = eval(&x, &mut buf);
    let mut g = grad_of(&x, &mut buf);
    let mut alpha = 1.0f64;
    let mut recent: Vec<f64> = vec![f];
    let mut pg_norm = projected_gradient_norm(&x, &g);
    let mut iterations = 0;

    for it in 1..=opts.max_iter {
        iterations = it;
        if pg_norm <= opts.tol {
            break;
        }
        let f_ref = recent.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut lam = 1.0f64;
        let (xn, fn_);
        loop {
            let mut cand: Vec<f64> = x
                .iter()
                .zip(&g)
                .map(|(&xi, &gi)| xi + alpha * lam * gi)
                .collect();
            project_monotone(&mut cand);
            let fc = eval(&cand, &mut buf);
            let dir: f64 = g.iter().zip(cand.iter().zip(&x)).map(|(gi, (c, xi))| gi * (c - xi)).sum();
            // The 1e-16 floor keeps rounding noise from rejecting a step
            // that is as good as f64 allows near the optimum.
            if fc + 1e-16 >= f_ref + 1e-4 * dir || lam < 1e-12 {
                xn = cand;
                fn_ = fc;
                break;
            }
            lam *= 0.5;
        }
        let gn = grad_of(&xn, &mut buf);
        let mut ss = 0.0;
        let mut sy = 0.0;
        let mut step_inf: f64 = 0.0;
        for m in 0..vars {
            let s = xn[m] - x[m];
            let y = gn[m] - g[m];
            ss += s * s;
            sy += s * y;
            step_inf = step_inf.max(s.abs());
        }
        // Barzilai–Borwein step; for ascent the local curvature makes
        // <s, y> negative, so flip the sign.
        alpha = if sy < 0.0 { (ss / -sy).clamp(1e-8, 1e8) } else { 1.0 };
        let f_prev = f;
        if fn_ >= f {
            x = xn;
            f = fn_;
            g = gn;
        }
        pg_norm = projected_gradient_norm(&x, &g);
        recent.push(f);
        if recent.len() > 10 {
            recent.remove(0);
        }
        // Stalled at f64 resolution: no representable step improves f.
        if step_inf < 1e-15 && (fn_ - f_prev).abs() < 1e-16 {
            break;
        }
    }

    let mut ks = x;
    ks.push(0.0);
    let cutoffs = CutoffVector::new(ks).expect("projection keeps the vector feasible");
    Ok(OptimizationResult {
        pw_total: exact::total_win_probability(&cutoffs),
        cutoffs,
        iterations,
        converged: pg_norm <= opts.tol,
        gradient_norm: pg_norm,
    })
}

fn projected_gradient_norm(x: &[f64], g: &[f64]) -> f64 {
    let mut stepped: Vec<f64> = x.iter().zip(g).map(|(&xi, &gi)| xi + gi).collect();
    project_monotone(&mut stepped);
    stepped
        .iter()
        .zip(x)
        .map(|(s, xi)| (s - xi) * (s - xi))
        .sum::<f64>()
        .sqrt()
}

/// Euclidean projection onto `{1 >= x_1 >= x_2 >= .. >= x_m >= 0}`:
/// pool-adjacent-violators for the nonincreasing order, then a clamp into
/// the box (projecting onto the order cone and clipping commutes here).
pub fn project_monotone(x: &mut [f64]) {
    let m = x.len();
    if m == 0 {
        return;
    }
    // Blocks of (mean, weight), merged while out of order.
    let mut means: Vec<f64> = Vec::with_capacity(m);
    let mut weights: Vec<f64> = Vec::with_capacity(m);
    for &v in x.iter() {
        means.push(v);
        weights.push(1.0);
        while means.len() > 1 {
            let last = means.len() - 1;
            if means[last - 1] >= means[last] {
                break;
            }
            let w = weights[last - 1] + weights[last];
            let merged = (means[last - 1] * weights[last - 1] + means[last] * weights[last]) / w;
            means.truncate(last);
            weights.truncate(last);
            *means.last_mut().expect("nonempty") = merged;
            *weights.last_mut().expect("nonempty") = w;
        }
    }
    let mut idx = 0;
    for (mean, w) in means.iter().zip(&weights) {
        for _ in 0..*w as usize {
            x[idx] = mean.clamp(0.0, 1.0);
            idx += 1;
        }
    }
}
