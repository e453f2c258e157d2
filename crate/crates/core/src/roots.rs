//! Bracketing and bisection for monotone scalar functions.
//!
//! Every threshold and quantile in this crate is the root of a continuous,
//! nondecreasing function, so plain bisection on a verified bracket is
//! enough and always converges.

use crate::error::{Error, Result};

/// Iteration cap for bisection. Halving a bracket spanning the full `f64`
/// range down to adjacent floats takes a little over 2100 steps.
const MAX_BISECT: usize = 2200;

/// Cap on geometric bracket expansions.
const MAX_EXPAND: usize = 2100;

/// Stopping rule for [`bisect_increasing`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Stop once `hi - lo` is below this.
    pub abs: f64,
    /// Or once `hi - lo` is below `rel * max(|lo|, |hi|)`.
    pub rel: f64,
}

impl Tolerance {
    pub const fn absolute(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0 }
    }

    pub const fn relative(rel: f64) -> Self {
        Tolerance { abs: 0.0, rel }
    }
}

/// Finds `x` in `[lo, hi]` with `f(x) = target` for nondecreasing `f`.
///
/// Requires `f(lo) <= target <= f(hi)`; the caller is responsible for the
/// bracket. Returns the final bracket.
pub fn bisect_increasing<F>(mut f: F, target: f64, mut lo: f64, mut hi: f64, tol: Tolerance) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    for _ in 0..MAX_BISECT {
        let width = hi - lo;
        if width <= tol.abs || width <= tol.rel * lo.abs().max(hi.abs()) {
            break;
        }
        let mid = lo + 0.5 * width;
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == target {
            return (mid, mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Grows `x = start, start*factor, ...` until `f(x) >= target`.
///
/// `start` must be positive. Returns the first point reaching the target
/// together with the last point that did not (or `prev_default` if the
/// first probe already succeeds).
pub fn expand_up<F>(mut f: F, target: f64, start: f64, factor: f64, prev_default: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let mut prev = prev_default;
    let mut x = start;
    for _ in 0..MAX_EXPAND {
        if !x.is_finite() {
            break;
        }
        if f(x) >= target {
            return Ok((prev, x));
        }
        prev = x;
        x *= factor;
    }
    Err(Error::Bracket(format!("no upper bracket for target {target} starting at {start}")))
}

/// Shrinks `x = start, start/factor, ...` towards zero until `f(x) <= target`.
///
/// Returns `(lo, hi)` where `lo` satisfies the target and `hi` is the
/// previous probe (or `start` itself).
pub fn expand_down_positive<F>(mut f: F, target: f64, start: f64, factor: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let mut prev = start;
    let mut x = start;
    for _ in 0..MAX_EXPAND {
        if x <= 0.0 {
            break;
        }
        if f(x) <= target {
            return Ok((x, prev));
        }
        prev = x;
        x /= factor;
    }
    Err(Error::Bracket(format!("no lower bracket for target {target} starting at {start}")))
}
