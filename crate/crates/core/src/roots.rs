//! Bracket expansion and bisection for functions that are positive left of
//! their root and negative right of it.

use crate::error::{Error, Result};
use crate::Scalar;

const MAX_DOUBLINGS: usize = 2000;
const MAX_BISECTIONS: usize = 4000;

/// Doubles `hi` from `start` until `f(hi) < 0`. Returns `(lo, hi)` where `lo`
/// is the last point seen with `f ≥ 0` (or `floor` if none).
pub fn expand_upper<T: Scalar>(mut f: impl FnMut(T) -> T, floor: T, start: T) -> Result<(T, T)> {
    let mut lo = floor;
    let mut hi = start;
    for _ in 0..MAX_DOUBLINGS {
        let v = f(hi);
        if v.is_nan() {
            return Err(Error::RootFinding(format!("NaN while expanding bracket at {hi}")));
        }
        if v < T::zero() {
            return Ok((lo, hi));
        }
        lo = hi;
        hi = hi + hi;
        if !hi.is_finite() {
            break;
        }
    }
    Err(Error::RootFinding(format!("no sign change found above {start}")))
}

/// Bisection on `[lo, hi]` assuming `f(lo) ≥ 0 > f(hi)`; stops when the
/// interval is narrower than `rel_tol · hi`.
pub fn bisect<T: Scalar>(mut f: impl FnMut(T) -> T, mut lo: T, mut hi: T, rel_tol: T) -> Result<T> {
    if !(lo <= hi) {
        return Err(Error::RootFinding(format!("empty bracket [{lo}, {hi}]")));
    }
    let tol = T::clamp_rel_tol(rel_tol);
    let half = T::lit(0.5);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol * hi.abs() {
            break;
        }
        let mid = lo + (hi - lo) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v.is_nan() {
            return Err(Error::RootFinding(format!("NaN during bisection at {mid}")));
        }
        if v > T::zero() {
            lo = mid;
        } else if v < T::zero() {
            hi = mid;
        } else {
            return Ok(mid);
        }
    }
    Ok(lo + (hi - lo) * half)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let f = |x: f64| 2.0 - x * x;
        let (lo, hi) = expand_upper(f, 0.0, 0.1).unwrap();
        assert!(f(hi) < 0.0 && f(lo) >= 0.0);
        let r = bisect(f, lo, hi, 1e-14).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn exact_zero_short_circuits() {
        let r = bisect(|x: f64| 1.0 - x, 0.0, 2.0, 1e-12).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn no_sign_change_is_an_error() {
        assert!(expand_upper(|_x: f64| 1.0, 0.0, 1.0).is_err());
        assert!(expand_upper(|_x: f64| f64::NAN, 0.0, 1.0).is_err());
        assert!(bisect(|x: f64| -x, 2.0, 1.0, 1e-9).is_err());
    }

    #[test]
    fn f32_tolerance_is_clamped() {
        let r = bisect(|x: f32| 3.0 - x, 0.0, 8.0, 1e-12).unwrap();
        assert!((r - 3.0).abs() < 1e-5);
    }
}
