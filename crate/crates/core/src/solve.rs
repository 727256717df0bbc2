//! Bracketed scalar root finding and one-dimensional maximization.

/// Bisection root finder on `[lo, hi]`; `f(lo)` and `f(hi)` must have
/// opposite signs. Infinite values are fine, only the sign is used.
/// Stops once the bracket is narrower than `xtol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    assert!(
        flo.signum() != fhi.signum(),
        "bisect: no sign change on [{lo}, {hi}] (f: {flo}, {fhi})"
    );
    let positive_at_lo = flo > 0.0;
    // f64 brackets halve to the tolerance in at most ~64+log2(1/xtol) steps.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid <= lo || mid >= hi {
            break;
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if (fmid > 0.0) == positive_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for a maximizer of `f` on `[lo, hi]`, followed by a
/// few steps of parabolic refinement on the final bracket. Returns
/// `(argmax, max)`. Assumes `f` is unimodal on the interval.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, xtol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > xtol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    // Parabolic polish on the best interior triplet.
    let (mut x, mut fx) = if fc >= fd { (c, fc) } else { (d, fd) };
    let mut step = (b - a).max(xtol);
    for _ in 0..8 {
        let (xl, xr) = ((x - step).max(lo), (x + step).min(hi));
        let (fl, fr) = (f(xl), f(xr));
        if fl > fx && fl >= fr {
            x = xl;
            fx = fl;
            continue;
        }
        if fr > fx {
            x = xr;
            fx = fr;
            continue;
        }
        // Vertex of the parabola through (xl,fl), (x,fx), (xr,fr).
        let denom = (xl - x) * (fx - fr) - (x - xr) * (fl - fx);
        if denom.abs() > 0.0 {
            let num = (xl - x) * (xl + x) * (fx - fr) - (x - xr) * (x + xr) * (fl - fx);
            let v = 0.5 * num / denom;
            if v.is_finite() && v > lo && v < hi {
                let fv = f(v);
                if fv > fx {
                    x = v;
                    fx = fv;
                }
            }
        }
        step *= 0.25;
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_simple_roots() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - 2.0f64.sqrt()).abs() < 1e-12);
        // Decreasing function.
        let r = bisect(|x| 1.0 - x, 0.0, 3.0, 1e-14);
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bisect_tolerates_infinite_values() {
        let r = bisect(|x| if x < 0.25 { f64::INFINITY } else { 0.4 - x }, 0.0, 1.0, 1e-12);
        assert!((r - 0.4).abs() < 1e-10);
    }

    #[test]
    fn golden_max_quartic() {
        let (x, fx) = golden_max(|x| -(x - 0.3).powi(4) + 1.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-3, "x = {x}");
        assert!((fx - 1.0).abs() < 1e-12);
        let (x, _) = golden_max(|x| -(x - 0.7) * (x - 0.7), 0.0, 1.0, 1e-11);
        assert!((x - 0.7).abs() < 1e-9);
    }
}
