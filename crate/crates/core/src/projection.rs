//! The projection `Π(c, λ) = (1-λ) Σ c_n λ^(n-1)`, its λ-derivative, and the
//! shape of `λ ↦ Π(c, λ)` on `(0, 1/3]`.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::bisect::{bisect, DEFAULT_TOLERANCE};
use crate::error::{domain, Result};
use crate::scalar::RealScalar;
use crate::sequence::{Digit, PeriodicCoding};

pub(crate) fn third(prec: usize) -> RealScalar {
    RealScalar::from_ratio(1, 3, prec)
}

/// Reject λ that is certainly outside `(0, 1/3]`.
pub fn check_lambda(lambda: &RealScalar) -> Result<()> {
    if lambda.upper_f64() <= 0.0 {
        return domain(format!("lambda {lambda:.12} is not positive"));
    }
    if lambda.certainly_gt(&third(lambda.precision())) {
        return domain(format!("lambda {lambda:.12} exceeds 1/3"));
    }
    Ok(())
}

/// Value and derivative of `Σ d_k x^k`.
fn horner(digits: &[Digit], x: &RealScalar) -> (RealScalar, RealScalar) {
    let p = x.precision();
    let mut v = RealScalar::zero(p);
    let mut dv = RealScalar::zero(p);
    for d in digits.iter().rev() {
        dv = &(&dv * x) + &v;
        v = &(&v * x) + &RealScalar::from_int(d.value() as i64, p);
    }
    (v, dv)
}

/// The pieces of the closed form: `S(λ) = A + λ^m B / D` and `S'(λ)`.
fn series_and_derivative(c: &PeriodicCoding, lambda: &RealScalar) -> (RealScalar, RealScalar) {
    let p = lambda.precision();
    let one = RealScalar::one(p);
    let m = c.preperiod().len() as u32;
    let q = c.period().len() as u32;
    let (a, da) = horner(c.preperiod().digits(), lambda);
    let (b, db) = horner(c.period().digits(), lambda);
    let lm = lambda.powi(m);
    let lm1 = if m == 0 { RealScalar::zero(p) } else { lambda.powi(m - 1) };
    let lq1 = lambda.powi(q - 1);
    let lq = &lq1 * lambda;
    let d = &one - &lq;
    let tail = &(&lm * &b) / &d;
    let s = &a + &tail;
    let m_s = RealScalar::from_int(m as i64, p);
    let q_s = RealScalar::from_int(q as i64, p);
    let dtail_num = &(&(&m_s * &lm1) * &b) + &(&lm * &db);
    let dtail = &(&dtail_num / &d) + &(&(&tail * &(&q_s * &lq1)) / &d);
    (s, &da + &dtail)
}

/// `Π(c, λ)` in closed form, for `0 < λ <= 1/3`.
pub fn pi_eval(c: &PeriodicCoding, lambda: &RealScalar) -> Result<RealScalar> {
    check_lambda(lambda)?;
    let (s, _) = series_and_derivative(c, lambda);
    let one = RealScalar::one(lambda.precision());
    Ok(&(&one - lambda) * &s)
}

/// `∂Π/∂λ (c, λ)` in closed form, for `0 < λ <= 1/3`.
pub fn pi_derivative(c: &PeriodicCoding, lambda: &RealScalar) -> Result<RealScalar> {
    check_lambda(lambda)?;
    let (s, ds) = series_and_derivative(c, lambda);
    let one = RealScalar::one(lambda.precision());
    Ok(&(&(&one - lambda) * &ds) - &s)
}

/// Π of a digit stream, truncated after `N` digits where `2 λ^N <= eps`.
pub fn pi_eval_truncated<I>(stream: I, lambda: &RealScalar, eps: f64) -> Result<RealScalar>
where
    I: IntoIterator<Item = Digit>,
{
    check_lambda(lambda)?;
    if !(eps > 0.0) {
        return domain("eps must be positive");
    }
    let lam_hi = lambda.upper_f64().min(1.0 / 3.0 + 1e-15);
    let n = ((eps / 2.0).ln() / lam_hi.ln()).ceil().max(0.0) as usize;
    let p = lambda.precision();
    let digits: Vec<Digit> = stream.into_iter().take(n).collect();
    let (v, _) = horner(&digits, lambda);
    let one = RealScalar::one(p);
    let tail = lam_hi.powi(digits.len() as i32);
    Ok((&(&one - lambda) * &v).widen(tail))
}

/// Exact rational value of `Π(c, λ)` for rational `λ` in `(0, 1)`.
pub fn pi_eval_exact(c: &PeriodicCoding, lambda: &BigRational) -> BigRational {
    let horner = |ds: &[Digit]| {
        ds.iter()
            .rev()
            .fold(BigRational::zero(), |acc, d| acc * lambda + BigRational::from_integer(d.value().into()))
    };
    let one = BigRational::one();
    let a = horner(c.preperiod().digits());
    let b = horner(c.period().digits());
    let lm = num_traits::pow(lambda.clone(), c.preperiod().len());
    let d = &one - num_traits::pow(lambda.clone(), c.period().len());
    (&one - lambda) * (a + lm * b / d)
}

/// Plain f64 evaluation, for sampling and plotting.
pub fn pi_eval_f64(c: &PeriodicCoding, lambda: f64) -> f64 {
    let horner = |ds: &[Digit]| ds.iter().rev().fold(0.0, |acc, d| acc * lambda + d.value() as f64);
    let a = horner(c.preperiod().digits());
    let b = horner(c.period().digits());
    let lm = lambda.powi(c.preperiod().len() as i32);
    let d = 1.0 - lambda.powi(c.period().len() as i32);
    (1.0 - lambda) * (a + lm * b / d)
}

/// How `λ ↦ Π(c, λ)` behaves on `(0, 1/3]`.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MonotonicityClass {
    IncreasingAll,
    /// Increasing up to `critical`, decreasing after it.
    Unimodal { critical: RealScalar },
    DecreasingAll,
    ConstantZero,
    ConstantOne,
    /// The coding is below `0^∞`; its negation has the inner class.
    NegatedOf(Box<MonotonicityClass>),
}

impl MonotonicityClass {
    pub fn critical(&self) -> Option<&RealScalar> {
        match self {
            MonotonicityClass::Unimodal { critical } => Some(critical),
            _ => None,
        }
    }
}

fn landmark(pre: &[i64], per: &[i64]) -> PeriodicCoding {
    PeriodicCoding::from_values(pre, per).expect("valid landmark coding")
}

/// `001^∞`, the last coding with Π increasing before the unimodal range.
pub fn increasing_bound() -> PeriodicCoding {
    landmark(&[0, 0], &[1])
}

/// `01(-1)^∞`, the first unimodal coding.
pub fn unimodal_start() -> PeriodicCoding {
    landmark(&[0, 1], &[-1])
}

/// `01(-1)0^∞`, the first coding past the unimodal range.
pub fn unimodal_end() -> PeriodicCoding {
    landmark(&[0, 1, -1], &[0])
}

/// `01^∞`, the last coding with Π increasing.
pub fn decreasing_start() -> PeriodicCoding {
    landmark(&[0], &[1])
}

/// Classification at the default precision.
pub fn classify_monotonicity(c: &PeriodicCoding) -> MonotonicityClass {
    classify_with_precision(c, crate::precision_from_env())
}

pub fn classify_with_precision(c: &PeriodicCoding, prec: usize) -> MonotonicityClass {
    if *c == PeriodicCoding::zeros() {
        return MonotonicityClass::ConstantZero;
    }
    if *c == PeriodicCoding::ones() {
        return MonotonicityClass::ConstantOne;
    }
    if c.lex_compare(&PeriodicCoding::zeros()) == Ordering::Less {
        return MonotonicityClass::NegatedOf(Box::new(classify_with_precision(&c.negate(), prec)));
    }
    if *c <= increasing_bound() {
        MonotonicityClass::IncreasingAll
    } else if *c < unimodal_end() {
        let critical = critical_lambda_with(c, prec, DEFAULT_TOLERANCE).expect("coding lies in the unimodal range");
        MonotonicityClass::Unimodal { critical }
    } else if *c <= decreasing_start() {
        MonotonicityClass::IncreasingAll
    } else {
        MonotonicityClass::DecreasingAll
    }
}

/// The zero of `∂Π/∂λ (c, ·)` in `[1/4, 1/3]` for `c` in `[01(-1)^∞, 01(-1)0^∞]`.
pub fn critical_lambda(c: &PeriodicCoding) -> Result<RealScalar> {
    critical_lambda_with(c, crate::precision_from_env(), DEFAULT_TOLERANCE)
}

pub fn critical_lambda_with(c: &PeriodicCoding, prec: usize, tol: f64) -> Result<RealScalar> {
    if *c < unimodal_start() || *c > unimodal_end() {
        return domain(format!("coding {c} is outside the unimodal range"));
    }
    let lo = RealScalar::from_ratio(1, 4, prec);
    let hi = third(prec);
    // the derivative is strictly decreasing in λ on this range
    bisect(&lo, &hi, false, tol, |x| pi_derivative(c, x))
}

/// `Π(c, λ_c)` at the critical point of `c`, for `c` in `[01(-1)^∞, 01(-1)0^∞]`.
pub fn phi_value(c: &PeriodicCoding) -> Result<RealScalar> {
    let crit = critical_lambda(c)?;
    pi_eval(c, &crit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: usize = 128;

    fn c(s: &str) -> PeriodicCoding {
        s.parse().unwrap()
    }

    fn q(s: &str) -> RealScalar {
        RealScalar::parse(s, P).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert!(pi_eval(&c("0:1"), &q("0.25")).unwrap().within(&q("0.25"), 1e-36));
        assert!(pi_eval(&c("1:-1"), &q("0.25")).unwrap().within(&q("0.5"), 1e-36));
        assert!(pi_eval(&c("0,0:1"), &q("0.3")).unwrap().within(&q("0.09"), 1e-36));
        assert!(pi_eval(&c("1,-1"), &q("1/3")).unwrap().within(&q("0.5"), 1e-36));
        assert!(pi_eval(&c("1"), &q("0.4")).is_err());
        assert!(pi_eval(&c("1"), &q("0")).is_err());
    }

    #[test]
    fn truncated_examples() {
        let lam = q("0.3");
        let z = pi_eval_truncated(std::iter::repeat(Digit::Zero), &lam, 1e-9).unwrap();
        assert_eq!(z.to_f64(), 0.0);
        assert!(z.radius() <= 1e-9);
        let o = pi_eval_truncated(std::iter::repeat(Digit::Plus), &lam, 1e-9).unwrap();
        assert!(o.within(&RealScalar::one(P), 2e-9));
        let alt = c("0,1");
        let t = pi_eval_truncated(alt.iter(), &q("1/4"), 1e-12).unwrap();
        assert!(t.within(&pi_eval(&alt, &q("1/4")).unwrap(), 2e-12));
    }

    #[test]
    fn derivative_examples() {
        assert!(pi_derivative(&c("1"), &q("0.2")).unwrap().within(&RealScalar::zero(P), 1e-35));
        assert!(pi_derivative(&c("0,1:-1"), &q("1/4")).unwrap().within(&RealScalar::zero(P), 1e-35));
        assert!(pi_derivative(&c("0,1:-1"), &q("0.2")).unwrap().within(&q("0.2"), 1e-35));
    }

    #[test]
    fn classification_examples() {
        assert!(matches!(classify_monotonicity(&c("0,0:1")), MonotonicityClass::IncreasingAll));
        assert!(matches!(classify_monotonicity(&c("1:0")), MonotonicityClass::DecreasingAll));
        assert!(matches!(classify_monotonicity(&c("0")), MonotonicityClass::ConstantZero));
        assert!(matches!(classify_monotonicity(&c("1")), MonotonicityClass::ConstantOne));
        match classify_monotonicity(&c("0,1,-1,-1:1")) {
            MonotonicityClass::Unimodal { critical } => {
                let x = critical.to_f64();
                assert!(x > 0.25 && x < 1.0 / 3.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        match classify_monotonicity(&c("-1:0")) {
            MonotonicityClass::NegatedOf(inner) => assert!(matches!(*inner, MonotonicityClass::DecreasingAll)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn critical_points() {
        let a = critical_lambda(&unimodal_start()).unwrap();
        assert!(a.within(&q("1/4"), 1e-10));
        let b = critical_lambda(&unimodal_end()).unwrap();
        assert!(b.within(&q("1/3"), 1e-10));
        let mid = c("0,1,-1,-1:1");
        let x = critical_lambda(&mid).unwrap();
        assert!((x.to_f64() - 0.309_016_994_374_947_4).abs() < 1e-15);
        assert!(pi_derivative(&mid, &x).unwrap().mag() < 1e-12);
        assert!(critical_lambda(&c("0:1")).is_err());
    }

    #[test]
    fn phi_endpoints() {
        assert!(phi_value(&unimodal_start()).unwrap().within(&q("1/8"), 1e-12));
        assert!(phi_value(&unimodal_end()).unwrap().within(&q("4/27"), 1e-12));
        let v = phi_value(&c("0,1,-1,-1:1")).unwrap().to_f64();
        assert!(v > 0.125 && v < 4.0 / 27.0);
    }

    fn coding() -> impl Strategy<Value = PeriodicCoding> {
        (prop::collection::vec(-1i64..=1, 0..6), prop::collection::vec(-1i64..=1, 1..5))
            .prop_map(|(a, b)| PeriodicCoding::from_values(&a, &b).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn lex_monotone(a in coding(), b in coding(), l in 1e-6f64..(1.0 / 3.0 - 1e-6)) {
            prop_assume!(a != b);
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            let lam = BigRational::from_float(l).unwrap();
            prop_assert!(pi_eval_exact(&a, &lam) < pi_eval_exact(&b, &lam));
        }

        #[test]
        fn derivative_bounded(a in coding(), l in 1e-6f64..(1.0 / 3.0)) {
            let d = pi_derivative(&a, &RealScalar::from_f64(l, P)).unwrap();
            prop_assert!(d.to_f64().abs() <= 2.0 + d.radius());
        }

        #[test]
        fn derivative_matches_differences(a in coding(), l in 1e-3f64..0.33) {
            let h = RealScalar::parse("1e-6", P).unwrap();
            let lam = RealScalar::from_f64(l, P);
            let up = pi_eval(&a, &(&lam + &h)).unwrap();
            let dn = pi_eval(&a, &(&lam - &h)).unwrap();
            let two_h = &h + &h;
            let fd = &(&up - &dn) / &two_h;
            let d = pi_derivative(&a, &lam).unwrap();
            prop_assert!(fd.within(&d, 1e-8));
        }

        #[test]
        fn negation_symmetry(a in coding(), l in 1e-6f64..(1.0 / 3.0)) {
            let lam = RealScalar::from_f64(l, P);
            let x = pi_eval(&a, &lam).unwrap();
            let y = pi_eval(&a.negate(), &lam).unwrap();
            prop_assert_eq!(x.cmp_value(&-&y), Ordering::Equal);
        }

        #[test]
        fn unimodal_shape(tail in prop::collection::vec(-1i64..=1, 0..4), per in prop::collection::vec(-1i64..=1, 1..3)) {
            let mut pre = vec![0, 1, -1];
            pre.extend(tail);
            let a = PeriodicCoding::from_values(&pre, &per).unwrap();
            prop_assume!(a >= unimodal_start() && a < unimodal_end());
            let crit = critical_lambda(&a).unwrap().to_f64();
            let grid: Vec<f64> = (1..=40).map(|i| i as f64 / 120.0).collect();
            for w in grid.windows(2) {
                let (x, y) = (w[0], w[1]);
                let fx = pi_eval_f64(&a, x);
                let fy = pi_eval_f64(&a, y);
                if y <= crit - 1e-9 {
                    prop_assert!(fx < fy);
                } else if x >= crit + 1e-9 {
                    prop_assert!(fx > fy);
                }
            }
        }
    }
}
