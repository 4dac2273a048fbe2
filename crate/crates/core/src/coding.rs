//! Digits of `t` in base `λ` with signed ternary digits, the level-`n` cover
//! `E_λ(n)` of the difference set, and a membership test built on that cover.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::projection::{check_lambda, pi_eval, third};
use crate::scalar::{Interval, RealScalar};
use crate::sequence::{Digit, PeriodicCoding, Word};

/// How a digit is chosen when two digits are admissible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CodingMode {
    /// Larger digit; the coding avoids a `1^∞` tail.
    Greedy,
    /// Smaller digit; the coding avoids a `(-1)^∞` tail.
    Lazy,
    /// Greedy for `t` in `(0,1/9] ∪ [4/27,1/3)`, lazy for `t` in `(1/9,4/27) ∪ (1/3,1)`.
    Auto,
}

impl CodingMode {
    fn mirrored(self) -> Self {
        match self {
            CodingMode::Greedy => CodingMode::Lazy,
            CodingMode::Lazy => CodingMode::Greedy,
            CodingMode::Auto => CodingMode::Auto,
        }
    }
}

impl FromStr for CodingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "greedy" => Ok(CodingMode::Greedy),
            "lazy" => Ok(CodingMode::Lazy),
            "auto" => Ok(CodingMode::Auto),
            other => Err(Error::Parse(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CodingStatus {
    Unique,
    BoundaryGreedy,
    BoundaryLazy,
    NotMember,
}

impl CodingStatus {
    fn mirrored(self) -> Self {
        match self {
            CodingStatus::BoundaryGreedy => CodingStatus::BoundaryLazy,
            CodingStatus::BoundaryLazy => CodingStatus::BoundaryGreedy,
            s => s,
        }
    }
}

impl fmt::Display for CodingStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CodingStatus::Unique => "unique",
            CodingStatus::BoundaryGreedy => "boundary_greedy",
            CodingStatus::BoundaryLazy => "boundary_lazy",
            CodingStatus::NotMember => "not_member",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CodingResult {
    pub digits: Word,
    pub status: CodingStatus,
    /// Bound on `|t - Π(digits · ξ, λ)|` for every tail `ξ`.
    pub residual_bound: f64,
    /// True when the working precision ran out before the requested digit count.
    pub precision_exhausted: bool,
}

/// Which tie-break the automatic rule selects for `t >= 0`.
fn auto_prefers_greedy(t: &RealScalar) -> bool {
    let p = t.precision();
    let ninth = RealScalar::from_ratio(1, 9, p);
    let upper = RealScalar::from_ratio(4, 27, p);
    let third = third(p);
    let le = |a: &RealScalar, b: &RealScalar| a.cmp_value(b) != Ordering::Greater;
    // t = 1/3 is outside both ranges; its two codings differ in the first digit and the greedy one is kept
    le(t, &ninth) || (le(&upper, t) && le(t, &third))
}

/// The first `n` digits of the coding of `t` in base `λ`.
pub fn phi_t_digits(t: &RealScalar, lambda: &RealScalar, n: usize, mode: CodingMode) -> Result<CodingResult> {
    check_lambda(lambda)?;
    if n == 0 {
        return domain("digit count must be at least 1");
    }
    let one = RealScalar::one(t.precision().max(lambda.precision()));
    if t.abs().certainly_gt(&one) {
        return domain(format!("|t| = {t:.12} exceeds 1"));
    }
    if t.sign() == Some(Ordering::Less) {
        let mut r = phi_t_digits(&-t, lambda, n, mode.mirrored())?;
        r.digits = r.digits.negate();
        r.status = r.status.mirrored();
        return Ok(r);
    }
    let greedy = match mode {
        CodingMode::Greedy => true,
        CodingMode::Lazy => false,
        CodingMode::Auto => auto_prefers_greedy(t),
    };
    let boundary = if greedy { CodingStatus::BoundaryGreedy } else { CodingStatus::BoundaryLazy };
    let maybe_third = !lambda.certainly_lt(&third(lambda.precision()));

    let p = one.precision();
    let co = &one - lambda;
    let reach = lambda / &co;
    let mut s = t / &co;
    let mut digits = Word::empty();
    let mut status = CodingStatus::Unique;
    let mut exhausted = false;
    let lam_hi = lambda.upper_f64();

    while digits.len() < n {
        let admissible: Vec<Digit> = Digit::ALL
            .into_iter()
            .filter(|d| {
                let diff = &s - &RealScalar::from_int(d.value() as i64, p);
                !(diff.certainly_gt(&reach) || diff.certainly_lt(&-&reach))
            })
            .collect();
        let pick = match admissible.as_slice() {
            [] => {
                status = CodingStatus::NotMember;
                break;
            }
            [d] => *d,
            [lo, hi] if maybe_third => {
                status = boundary;
                if greedy {
                    *hi
                } else {
                    *lo
                }
            }
            _ => {
                if status == CodingStatus::Unique {
                    status = boundary;
                }
                exhausted = true;
                break;
            }
        };
        digits.push(pick);
        s = &(&s - &RealScalar::from_int(pick.value() as i64, p)) / lambda;
    }
    let residual_bound = lam_hi.powi(digits.len() as i32) + t.radius();
    Ok(CodingResult { digits, status, residual_bound, precision_exhausted: exhausted })
}

/// Whether the digits of `Π(c, λ)` reproduce the first `n` digits of `c`.
pub fn pi_lambda_inverse_roundtrip(c: &PeriodicCoding, lambda: &RealScalar, n: usize) -> Result<bool> {
    if !lambda.certainly_lt(&third(lambda.precision())) {
        return domain("roundtrip needs lambda < 1/3");
    }
    // every digit costs log2(1/λ) bits of the state
    let need = (n as f64 * -lambda.upper_f64().log2()).ceil() as usize + 64;
    let prec = lambda.precision().max(need);
    let lam = lambda.to_precision(prec);
    let t = pi_eval(c, &lam)?;
    let r = phi_t_digits(&t, &lam, n, CodingMode::Auto)?;
    Ok(r.digits == c.prefix(n))
}

fn check_budget(n: usize, budget: u64) -> Result<()> {
    let count = 3f64.powi(n as i32);
    if count > budget as f64 {
        return Err(Error::Budget(format!("3^{n} intervals exceed the budget of {budget}")));
    }
    Ok(())
}

/// The intervals of `E_λ(n)` in increasing order, touching or overlapping ones merged.
pub fn e_lambda_cover(lambda: &RealScalar, n: usize, budget: u64) -> Result<Vec<Interval>> {
    check_lambda(lambda)?;
    check_budget(n, budget)?;
    let p = lambda.precision();
    let one = RealScalar::one(p);
    let co = &one - lambda;
    let half_width = lambda.powi(n as u32);
    // digit weights (1-λ)λ^k for k < n
    let mut weights = Vec::with_capacity(n);
    let mut w = co.clone();
    for _ in 0..n {
        weights.push(w.clone());
        w = &w * lambda;
    }
    let mut out: Vec<Interval> = Vec::new();
    let mut stack: Vec<(usize, RealScalar)> = vec![(0, RealScalar::zero(p))];
    // depth-first, children pushed in reverse so -1 is visited first
    while let Some((k, x)) = stack.pop() {
        if k == n {
            let lo = &x - &half_width;
            let hi = &x + &half_width;
            match out.last_mut() {
                Some(last) if !lo.certainly_gt(&last.hi) => {
                    if hi.cmp_value(&last.hi) == Ordering::Greater {
                        last.hi = hi;
                    }
                }
                _ => out.push(Interval::new(lo, hi)),
            }
            continue;
        }
        for d in Digit::ALL.into_iter().rev() {
            let child = match d {
                Digit::Minus => &x - &weights[k],
                Digit::Zero => x.clone(),
                Digit::Plus => &x + &weights[k],
            };
            stack.push((k + 1, child));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    InCover,
    Out,
    Undecided,
}

/// Whether `t` lies in `E_λ(n)`, by a pruned search over the cover intervals.
pub fn membership(t: &RealScalar, lambda: &RealScalar, n: usize) -> Result<Membership> {
    check_lambda(lambda)?;
    let p = t.precision().max(lambda.precision());
    let one = RealScalar::one(p);
    let co = &one - lambda;
    let mut radii = Vec::with_capacity(n + 1);
    let mut weights = Vec::with_capacity(n);
    let mut r = one.clone();
    for _ in 0..n {
        radii.push(r.clone());
        weights.push(&co * &r);
        r = &r * lambda;
    }
    radii.push(r);
    let mut undecided = false;
    let mut stack: Vec<(usize, RealScalar)> = vec![(0, RealScalar::zero(p))];
    while let Some((k, x)) = stack.pop() {
        // t is in [x - λ^k, x + λ^k] iff |t - x| <= λ^k
        let gap = &radii[k] - &(t - &x).abs();
        match gap.sign() {
            Some(Ordering::Less) => continue,
            None => {
                if k == n {
                    undecided = true;
                    continue;
                }
            }
            Some(_) => {
                if k == n {
                    return Ok(Membership::InCover);
                }
            }
        }
        for d in Digit::ALL {
            let child = match d {
                Digit::Minus => &x - &weights[k],
                Digit::Zero => x.clone(),
                Digit::Plus => &x + &weights[k],
            };
            stack.push((k + 1, child));
        }
    }
    Ok(if undecided { Membership::Undecided } else { Membership::Out })
}

/// Exact membership of a rational `t` in `E_λ(n)` for rational `λ`.
pub fn membership_exact(t: &BigRational, lambda: &BigRational, n: usize) -> Result<Membership> {
    if !lambda.is_positive() || *lambda > BigRational::new(1.into(), 3.into()) {
        return domain(format!("lambda {lambda} is outside (0, 1/3]"));
    }
    let one = BigRational::one();
    let co = &one - lambda;
    let radii: Vec<BigRational> = (0..=n).map(|k| num_traits::pow(lambda.clone(), k)).collect();
    let mut stack = vec![(0usize, BigRational::zero())];
    while let Some((k, x)) = stack.pop() {
        if (t - &x).abs() > radii[k] {
            continue;
        }
        if k == n {
            return Ok(Membership::InCover);
        }
        let w = &co * &radii[k];
        stack.push((k + 1, &x + &w));
        stack.push((k + 1, x.clone()));
        stack.push((k + 1, &x - &w));
    }
    Ok(Membership::Out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: usize = 128;

    fn q(s: &str) -> RealScalar {
        RealScalar::parse(s, P).unwrap()
    }

    #[test]
    fn digit_examples() {
        let r = phi_t_digits(&q("1/2"), &q("1/4"), 8, CodingMode::Auto).unwrap();
        assert_eq!(r.digits.to_string(), "1,-1,-1,-1,-1,-1,-1,-1");
        assert_eq!(r.status, CodingStatus::Unique);
        let r = phi_t_digits(&q("1/2"), &q("1/3"), 6, CodingMode::Auto).unwrap();
        assert_eq!(r.digits.to_string(), "1,-1,1,-1,1,-1");
        let r = phi_t_digits(&q("1/3"), &q("0.3"), 20, CodingMode::Auto).unwrap();
        assert_eq!(r.status, CodingStatus::NotMember);
        let r = phi_t_digits(&q("0"), &q("1/5"), 4, CodingMode::Auto).unwrap();
        assert_eq!(r.digits.to_string(), "0,0,0,0");
    }

    #[test]
    fn ties_at_one_third() {
        // 1/3 = Π(1(-1)^∞, 1/3) = Π(01^∞, 1/3)
        let g = phi_t_digits(&q("1/3"), &q("1/3"), 5, CodingMode::Greedy).unwrap();
        assert_eq!(g.digits.to_string(), "1,-1,-1,-1,-1");
        assert_eq!(g.status, CodingStatus::BoundaryGreedy);
        let l = phi_t_digits(&q("1/3"), &q("1/3"), 5, CodingMode::Lazy).unwrap();
        assert_eq!(l.digits.to_string(), "0,1,1,1,1");
        assert_eq!(l.status, CodingStatus::BoundaryLazy);
        let neg = phi_t_digits(&q("-1/3"), &q("1/3"), 5, CodingMode::Greedy).unwrap();
        assert_eq!(neg.digits.to_string(), "0,-1,-1,-1,-1");
        assert_eq!(neg.status, CodingStatus::BoundaryGreedy);
        let a = phi_t_digits(&q("1/9"), &q("1/3"), 5, CodingMode::Auto).unwrap();
        assert_eq!(a.digits.to_string(), "0,1,-1,-1,-1");
        assert_eq!(a.status, CodingStatus::BoundaryGreedy);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(phi_t_digits(&q("1/2"), &q("0.4"), 4, CodingMode::Auto).is_err());
        assert!(phi_t_digits(&q("3/2"), &q("0.3"), 4, CodingMode::Auto).is_err());
        assert!(phi_t_digits(&q("1/2"), &q("0.3"), 0, CodingMode::Auto).is_err());
        assert!("sideways".parse::<CodingMode>().is_err());
    }

    #[test]
    fn roundtrip_examples() {
        let c = |s: &str| s.parse::<PeriodicCoding>().unwrap();
        assert!(pi_lambda_inverse_roundtrip(&c("0:1"), &q("0.2"), 10).unwrap());
        assert!(pi_lambda_inverse_roundtrip(&c("0,-1,1"), &q("0.31"), 15).unwrap());
        assert!(pi_lambda_inverse_roundtrip(&c("1:-1"), &q("0.25"), 12).unwrap());
    }

    fn bounds(v: &[Interval]) -> Vec<(f64, f64)> {
        v.iter().map(|i| (i.lo.to_f64(), i.hi.to_f64())).collect()
    }

    #[test]
    fn cover_examples() {
        assert_eq!(bounds(&e_lambda_cover(&q("1/3"), 1, 1000).unwrap()), vec![(-1.0, 1.0)]);
        assert_eq!(
            bounds(&e_lambda_cover(&q("0.25"), 1, 1000).unwrap()),
            vec![(-1.0, -0.5), (-0.25, 0.25), (0.5, 1.0)]
        );
        assert_eq!(bounds(&e_lambda_cover(&q("0.25"), 0, 1000).unwrap()), vec![(-1.0, 1.0)]);
        assert!(matches!(e_lambda_cover(&q("0.25"), 12, 1000), Err(Error::Budget(_))));
    }

    #[test]
    fn membership_examples() {
        assert_eq!(membership(&q("0"), &q("0.2"), 10).unwrap(), Membership::InCover);
        assert_eq!(membership(&q("1/3"), &q("0.3"), 12).unwrap(), Membership::Out);
        // 0.09 = Π(001^∞, 0.3) is an endpoint of its depth-12 interval
        assert_ne!(membership(&q("0.09"), &q("0.3"), 12).unwrap(), Membership::Out);
        let r = |s: &str| crate::scalar::parse_rational(s).unwrap();
        assert_eq!(membership_exact(&r("0.09"), &r("0.3"), 12).unwrap(), Membership::InCover);
        assert_eq!(membership_exact(&r("1/3"), &r("0.3"), 12).unwrap(), Membership::Out);
        assert_eq!(membership_exact(&r("0"), &r("1/3"), 12).unwrap(), Membership::InCover);
    }

    #[test]
    fn cover_nesting() {
        for lam in ["0.2", "0.27", "0.3"] {
            let l = q(lam);
            for n in 0..6 {
                let coarse = bounds(&e_lambda_cover(&l, n, 1 << 20).unwrap());
                let fine = bounds(&e_lambda_cover(&l, n + 1, 1 << 20).unwrap());
                for (a, b) in fine {
                    assert!(coarse.iter().any(|&(c, d)| c <= a + 1e-15 && b <= d + 1e-15));
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn digits_agree_with_cover(t in -1.0f64..1.0, l in 0.05f64..0.333) {
            let t = RealScalar::from_f64(t, P);
            let lam = RealScalar::from_f64(l, P);
            let n = 14;
            let m = membership(&t, &lam, n).unwrap();
            let r = phi_t_digits(&t, &lam, n, CodingMode::Auto).unwrap();
            if !r.precision_exhausted {
                match m {
                    Membership::Out => prop_assert_eq!(r.status, CodingStatus::NotMember),
                    Membership::InCover => prop_assert_ne!(r.status, CodingStatus::NotMember),
                    Membership::Undecided => {}
                }
            }
        }

        #[test]
        fn roundtrip_random(pre in prop::collection::vec(-1i64..=1, 0..5),
                            per in prop::collection::vec(-1i64..=1, 1..4),
                            l in 0.02f64..(1.0 / 3.0 - 1e-3)) {
            let c = PeriodicCoding::from_values(&pre, &per).unwrap();
            prop_assert!(pi_lambda_inverse_roundtrip(&c, &RealScalar::from_f64(l, P), 16).unwrap());
        }

        #[test]
        fn greedy_not_below_lazy(t in 0.0f64..1.0) {
            let t = RealScalar::from_f64(t, P);
            let lam = q("1/3");
            let g = phi_t_digits(&t, &lam, 20, CodingMode::Greedy).unwrap();
            let l = phi_t_digits(&t, &lam, 20, CodingMode::Lazy).unwrap();
            prop_assert!(g.digits >= l.digits);
        }
    }
}
