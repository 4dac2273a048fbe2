//! Certified bisection on a bracketing interval.

use std::cmp::Ordering;

use crate::error::Result;
use crate::scalar::RealScalar;

/// Default relative width at which bisection stops.
pub const DEFAULT_TOLERANCE: f64 = 1e-30;

/// Root of a monotone `f` on `[lo, hi]`, assuming `f(lo)` and `f(hi)` bracket zero.
///
/// `increasing` gives the direction of `f`. The result is the final bracket as a
/// ball. Iteration stops early when the sign at a midpoint cannot be certified;
/// the bracket is still valid then, just wider.
pub fn bisect<F>(lo: &RealScalar, hi: &RealScalar, increasing: bool, tol: f64, mut f: F) -> Result<RealScalar>
where
    F: FnMut(&RealScalar) -> Result<RealScalar>,
{
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let max_iter = lo.precision().max(hi.precision()) + 64;
    for _ in 0..max_iter {
        let width = (&hi - &lo).mag();
        let mid = RealScalar::midpoint(&lo, &hi);
        if width <= tol * mid.to_f64().abs().max(1e-300) {
            break;
        }
        match f(&mid)?.sign() {
            Some(Ordering::Equal) => return Ok(mid.with_radius(0.0)),
            Some(Ordering::Greater) => {
                if increasing {
                    hi = mid
                } else {
                    lo = mid
                }
            }
            Some(Ordering::Less) => {
                if increasing {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            None => {
                // |f(mid)| is below its own error; try a tight bracket around mid
                let delta = RealScalar::from_f64(tol * mid.to_f64().abs().max(1e-300) / 4.0, mid.precision());
                let a = &mid - &delta;
                let b = &mid + &delta;
                let want_a = if increasing { Ordering::Less } else { Ordering::Greater };
                if f(&a)?.sign() == Some(want_a) && f(&b)?.sign() == Some(want_a.reverse()) {
                    lo = a;
                    hi = b;
                }
                break;
            }
        }
    }
    let mid = RealScalar::midpoint(&lo, &hi);
    let half = (&hi - &lo).mag() / 2.0;
    let r = mid.radius();
    Ok(mid.with_radius(r + half * (1.0 + 1e-12)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let p = 128;
        let two = RealScalar::from_int(2, p);
        let r = bisect(&RealScalar::one(p), &two, true, 1e-30, |x| Ok(&(x * x) - &two)).unwrap();
        assert!((r.to_f64() - 2f64.sqrt()).abs() < 1e-15);
        assert!(r.radius() < 1e-29);
    }

    #[test]
    fn decreasing_direction() {
        let p = 128;
        let half = RealScalar::from_ratio(1, 2, p);
        let r = bisect(&RealScalar::zero(p), &RealScalar::one(p), false, 1e-20, |x| Ok(&half - x)).unwrap();
        assert!(r.within(&half, 1e-19));
    }
}
