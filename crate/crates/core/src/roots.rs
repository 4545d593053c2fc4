//! Bracketed bisection with optional Newton polish, specialized to strictly
//! monotone residuals.

use crate::error::{Error, Result};

/// Solves `f(x) = 0` for a strictly decreasing `f` with `f(lo) >= 0 >= f(hi)`.
///
/// Bisection runs until the residual meets `target` or the bracket collapses
/// to machine width; a short Newton polish (at most 5 steps, each accepted
/// only if the residual shrinks) then squeezes out extra digits when a
/// derivative is supplied. The bracket straddles the root at every
/// iteration.
pub(crate) fn solve_decreasing(
    f: impl Fn(f64) -> f64,
    df: Option<&dyn Fn(f64) -> f64>,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    max_iter: usize,
    context: &'static str,
) -> Result<f64> {
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo < 0.0 || f_hi > 0.0 {
        return Err(Error::NoConvergence { context });
    }
    let mut best = if f_lo.abs() <= f_hi.abs() { lo } else { hi };
    let mut best_res = f(best).abs();

    // run to bracket collapse rather than stopping at the target residual:
    // the extra handful of halvings buys full double precision
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket collapsed to adjacent floats
        }
        let fm = f(mid);
        if fm.abs() < best_res {
            best = mid;
            best_res = fm.abs();
        }
        if fm >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        debug_assert!(f(lo) >= 0.0 && f(hi) <= 0.0);
    }

    if let Some(df) = df {
        for _ in 0..5 {
            if best_res <= target {
                break;
            }
            let d = df(best);
            if d == 0.0 || !d.is_finite() {
                break;
            }
            let candidate = best - f(best) / d;
            if !candidate.is_finite() || candidate < lo || candidate > hi {
                break;
            }
            let res = f(candidate).abs();
            if res < best_res {
                best = candidate;
                best_res = res;
            } else {
                break;
            }
        }
    }

    if best_res <= target {
        Ok(best)
    } else {
        Err(Error::NoConvergence { context })
    }
}

/// Grows `hi` geometrically (doubling the bracket width) until
/// `f(hi) <= 0` for a decreasing `f`. `f(lo) >= 0` must already hold.
pub(crate) fn expand_upper(
    f: impl Fn(f64) -> f64,
    lo: f64,
    mut hi: f64,
    context: &'static str,
) -> Result<f64> {
    let mut width = (hi - lo).max(1.0);
    for _ in 0..128 {
        if f(hi) <= 0.0 {
            return Ok(hi);
        }
        hi += width;
        width *= 2.0;
    }
    Err(Error::NoConvergence { context })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_root_of_decreasing_function() {
        // f(x) = 2 - x^3, root at 2^(1/3)
        let f = |x: f64| 2.0 - x.powi(3);
        let df = |x: f64| -3.0 * x * x;
        let root = solve_decreasing(f, Some(&df), 0.0, 2.0, 1e-14, 200, "test").unwrap();
        assert!((root - 2.0f64.powf(1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn rejects_bracket_without_sign_change() {
        let f = |x: f64| 1.0 - x; // f(3) < 0, f(4) < 0
        let err = solve_decreasing(f, None, 3.0, 4.0, 1e-12, 200, "test").unwrap_err();
        assert_eq!(err, Error::NoConvergence { context: "test" });
    }

    #[test]
    fn expands_until_sign_change() {
        let f = |x: f64| 100.0 - x;
        let hi = expand_upper(f, 0.0, 1.0, "test").unwrap();
        assert!(f(hi) <= 0.0);
    }
}
