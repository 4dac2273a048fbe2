//! Roots of `Π(c, λ) = t` in `λ`, and the distinguished parameters of a
//! translation `t`: `λ_⋄(t)`, the turning point `τ(t)`, and the extremes of
//! the fiber `Λ(t)`.

use std::cmp::Ordering;
use std::str::FromStr;

use serde::Serialize;

use crate::bisect::{bisect, DEFAULT_TOLERANCE};
use crate::error::{domain, Error, Result};
use crate::projection::{classify_with_precision, pi_derivative, pi_eval, third, MonotonicityClass};
use crate::scalar::{Interval, RealScalar};
use crate::sequence::{Digit, PeriodicCoding, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Increasing,
    Decreasing,
    /// Tangency at the critical point of a unimodal coding.
    Double,
}

#[derive(Clone, Debug, Serialize)]
pub struct Root {
    pub lambda: RealScalar,
    pub branch: Branch,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    /// Every λ in `(0, 1/3]` solves the equation (constant codings).
    pub whole_interval: bool,
}

impl RootSet {
    fn none() -> Self {
        RootSet { roots: Vec::new(), whole_interval: false }
    }
}

/// `Π(c, λ) - t`, extended to `λ = 0` by the first digit.
fn offset(c: &PeriodicCoding, lambda: &RealScalar, t: &RealScalar) -> Result<RealScalar> {
    if lambda.sign() == Some(Ordering::Equal) {
        let first = RealScalar::from_int(c.digit(0).value() as i64, t.precision());
        return Ok(&first - t);
    }
    Ok(&pi_eval(c, lambda)? - t)
}

/// Root of a monotone piece on `[lo, hi]`; `lo` itself is excluded when `open_lo`.
fn monotone_root(
    c: &PeriodicCoding,
    t: &RealScalar,
    lo: &RealScalar,
    hi: &RealScalar,
    increasing: bool,
    open_lo: bool,
    tol: f64,
) -> Result<Option<RealScalar>> {
    let below = if increasing { Ordering::Less } else { Ordering::Greater };
    let f_lo = offset(c, lo, t)?.sign();
    let f_hi = offset(c, hi, t)?.sign();
    match f_lo {
        Some(Ordering::Equal) | None if open_lo => {
            // the only candidate is the excluded endpoint, or a root hugging it
            if f_hi == Some(below.reverse()) && f_lo.is_none() {
                return bisect(lo, hi, increasing, tol, |x| offset(c, x, t)).map(Some);
            }
            return Ok(None);
        }
        Some(Ordering::Equal) => return Ok(Some(lo.clone())),
        Some(s) if s != below => return Ok(None),
        _ => {}
    }
    match f_hi {
        Some(Ordering::Equal) | None => Ok(Some(hi.clone())),
        Some(s) if s == below => Ok(None),
        _ => bisect(lo, hi, increasing, tol, |x| offset(c, x, t)).map(Some),
    }
}

/// All `λ` in `(0, 1/3]` with `Π(c, λ) = t`.
pub fn solve_lambda(c: &PeriodicCoding, t: &RealScalar) -> Result<RootSet> {
    solve_lambda_with(c, t, DEFAULT_TOLERANCE)
}

pub fn solve_lambda_with(c: &PeriodicCoding, t: &RealScalar, tol: f64) -> Result<RootSet> {
    let p = t.precision();
    if t.abs().certainly_gt(&RealScalar::one(p)) {
        return domain(format!("|t| = {t:.12} exceeds 1"));
    }
    let zero = RealScalar::zero(p);
    let top = third(p);
    let constant = |v: i64| {
        let whole = (t - &RealScalar::from_int(v, p)).sign() != Some(Ordering::Greater)
            && (t - &RealScalar::from_int(v, p)).sign() != Some(Ordering::Less);
        RootSet { roots: Vec::new(), whole_interval: whole }
    };
    match classify_with_precision(c, p) {
        MonotonicityClass::NegatedOf(_) => solve_lambda_with(&c.negate(), &-t, tol),
        MonotonicityClass::ConstantZero => Ok(constant(0)),
        MonotonicityClass::ConstantOne => Ok(constant(1)),
        MonotonicityClass::IncreasingAll => Ok(single(monotone_root(c, t, &zero, &top, true, true, tol)?, Branch::Increasing)),
        MonotonicityClass::DecreasingAll => Ok(single(monotone_root(c, t, &zero, &top, false, true, tol)?, Branch::Decreasing)),
        MonotonicityClass::Unimodal { critical } => {
            let peak = offset(c, &critical, t)?;
            match peak.sign() {
                Some(Ordering::Less) => return Ok(RootSet::none()),
                Some(Ordering::Equal) | None => {
                    return Ok(RootSet {
                        roots: vec![Root { lambda: critical, branch: Branch::Double }],
                        whole_interval: false,
                    })
                }
                _ => {}
            }
            let mut roots = Vec::new();
            if let Some(x) = monotone_root(c, t, &zero, &critical, true, true, tol)? {
                roots.push(Root { lambda: x, branch: Branch::Increasing });
            }
            if let Some(x) = monotone_root(c, t, &critical, &top, false, true, tol)? {
                roots.push(Root { lambda: x, branch: Branch::Decreasing });
            }
            Ok(RootSet { roots, whole_interval: false })
        }
    }
}

fn single(root: Option<RealScalar>, branch: Branch) -> RootSet {
    RootSet { roots: root.map(|lambda| Root { lambda, branch }).into_iter().collect(), whole_interval: false }
}

/// The root of `λ(1-λ)² = t` in `(0, 1/3)`, for `0 < t < 4/27`.
pub fn lambda_diamond(t: &RealScalar) -> Result<RealScalar> {
    let p = t.precision();
    if t.sign() != Some(Ordering::Greater) || !t.certainly_lt(&RealScalar::from_ratio(4, 27, p)) {
        return domain(format!("t = {t:.12} is outside (0, 4/27)"));
    }
    let one = RealScalar::one(p);
    let g = |x: &RealScalar| {
        let co = &one - x;
        Ok(&(&(x * &co) * &co) - t)
    };
    bisect(&RealScalar::zero(p), &third(p), true, DEFAULT_TOLERANCE, g)
}

/// Number of digits in the critical coding built for a given λ.
pub const CRITICAL_DIGITS: usize = 64;

/// A coding starting `01(-1)` whose derivative `∂Π/∂λ` at `λ` is driven to zero
/// digit by digit. Returns the digits and the remaining derivative mismatch.
pub fn critical_coding(lambda: &RealScalar, depth: usize) -> (Word, RealScalar) {
    let p = lambda.precision();
    let one = RealScalar::one(p);
    // derivative weight of digit n (1-based): ((n-1) - nλ) λ^(n-2); the weights after n sum to n λ^(n-1)
    let weight = |n: usize, pow: &RealScalar| {
        let k = RealScalar::from_int(n as i64, p);
        &(&(&k - &one) - &(&k * lambda)) * pow
    };
    let mut digits = Word::from_values(&[0, 1, -1]).expect("valid digits");
    let three = RealScalar::from_int(3, p);
    // target: minus the contribution of 01(-1), i.e. -(1 - 4λ + 3λ²)
    let head = &(&one - &(&RealScalar::from_int(4, p) * lambda)) + &(&three * &(lambda * lambda));
    let mut rest = -&head;
    let mut pow = lambda * lambda; // λ^(n-2) for n = 4
    for n in 4..=depth.max(4) {
        let a = weight(n, &pow);
        let tail = &RealScalar::from_int(n as i64, p) * &(&pow * lambda);
        let candidates = [Digit::Plus, Digit::Zero, Digit::Minus].map(|d| {
            let r = &rest - &(&RealScalar::from_int(d.value() as i64, p) * &a);
            (d, r)
        });
        let fits = candidates.iter().find(|(_, r)| r.abs().cmp_value(&tail) != Ordering::Greater);
        let (d, r) = match fits {
            Some(x) => x.clone(),
            None => candidates
                .iter()
                .min_by(|x, y| x.1.abs().cmp_value(&y.1.abs()))
                .cloned()
                .expect("three candidates"),
        };
        digits.push(d);
        rest = r;
        pow = &pow * lambda;
    }
    (digits, rest)
}

fn word_value(w: &Word, lambda: &RealScalar) -> Result<RealScalar> {
    pi_eval(&PeriodicCoding::with_tail(w, Digit::Zero), lambda)
}

fn word_derivative(w: &Word, lambda: &RealScalar) -> Result<RealScalar> {
    pi_derivative(&PeriodicCoding::with_tail(w, Digit::Zero), lambda)
}

/// The turning point together with the evidence behind it.
#[derive(Clone, Debug, Serialize)]
pub struct TauReport {
    pub tau: RealScalar,
    /// The critical coding at τ, truncated.
    pub coding: Word,
    /// `|∂Π/∂λ|` of the critical codings on both sides of τ, at τ.
    pub derivative_residual: f64,
    /// `|Π - t|` of the critical codings on both sides of τ, at τ.
    pub value_residual: f64,
    /// τ is exactly 1/4 (`t` in `(1/9, 1/8]`).
    pub exact_quarter: bool,
}

/// `τ(t)` for `1/9 < t < 4/27`.
pub fn tau(t: &RealScalar) -> Result<RealScalar> {
    tau_report(t).map(|r| r.tau)
}

pub fn tau_report(t: &RealScalar) -> Result<TauReport> {
    let p = t.precision();
    let ninth = RealScalar::from_ratio(1, 9, p);
    let upper = RealScalar::from_ratio(4, 27, p);
    if !ninth.certainly_lt(t) || !t.certainly_lt(&upper) {
        return domain(format!("t = {t:.12} is outside (1/9, 4/27)"));
    }
    let quarter = RealScalar::from_ratio(1, 4, p);
    if t.cmp_value(&RealScalar::from_ratio(1, 8, p)) != Ordering::Greater {
        let coding = PeriodicCoding::from_values(&[0, 1], &[-1])?.prefix(CRITICAL_DIGITS);
        let value_residual = (&word_value(&coding, &quarter)? - t).mag();
        return Ok(TauReport { tau: quarter, coding, derivative_residual: 0.0, value_residual, exact_quarter: true });
    }
    let g = |x: &RealScalar| -> Result<(Word, RealScalar)> {
        let (w, _) = critical_coding(x, CRITICAL_DIGITS);
        let v = &word_value(&w, x)? - t;
        Ok((w, v))
    };
    // the critical value of the constructed coding moves with λ, so G(λ) = Π(c(λ), λ) - t increases
    let mut lo = quarter;
    let mut hi = third(p);
    for _ in 0..(p + 32) {
        let mid = RealScalar::midpoint(&lo, &hi);
        if (&hi - &lo).mag() <= DEFAULT_TOLERANCE * mid.to_f64() {
            break;
        }
        let (_, v) = g(&mid)?;
        if v.cmp_value(&RealScalar::zero(p)) == Ordering::Less {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (w_lo, v_lo) = g(&lo)?;
    let (w_hi, v_hi) = g(&hi)?;
    let d_lo = word_derivative(&w_lo, &lo)?.mag();
    let d_hi = word_derivative(&w_hi, &hi)?.mag();
    let tau = RealScalar::midpoint(&lo, &hi);
    let half = (&hi - &lo).mag() / 2.0;
    let coding = if v_lo.mag() <= v_hi.mag() { w_lo } else { w_hi };
    let r = tau.radius();
    Ok(TauReport {
        tau: tau.with_radius(r + half),
        coding,
        derivative_residual: d_lo.max(d_hi),
        value_residual: v_lo.mag().max(v_hi.mag()),
        exact_quarter: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremesKind {
    Regular,
    /// `t = 1/3`: the fiber is the single point 1/3.
    Degenerate,
    /// `t` in `{0, 1}`: the fiber is all of `(0, 1/3]`; the minimum is an infimum.
    Full,
}

#[derive(Clone, Debug, Serialize)]
pub struct Extremes {
    pub min: RealScalar,
    pub max: RealScalar,
    pub kind: ExtremesKind,
}

/// `min Λ(t) = min{t, (1-t)/2}` and `max Λ(t) = 1/3`.
pub fn lambda_extremes(t: &RealScalar) -> Result<Extremes> {
    let p = t.precision();
    let one = RealScalar::one(p);
    let top = third(p);
    if t.certainly_lt(&RealScalar::zero(p)) || t.certainly_gt(&one) {
        return domain(format!("t = {t:.12} is outside [0, 1]"));
    }
    let is = |v: &RealScalar| t.cmp_value(v) == Ordering::Equal;
    if is(&RealScalar::zero(p)) || is(&one) {
        return Ok(Extremes { min: RealScalar::zero(p), max: top, kind: ExtremesKind::Full });
    }
    if is(&top) {
        return Ok(Extremes { min: top.clone(), max: top, kind: ExtremesKind::Degenerate });
    }
    let half_rest = &(&one - t) / &RealScalar::from_int(2, p);
    let min = if t.cmp_value(&half_rest) == Ordering::Greater { half_rest } else { t.clone() };
    Ok(Extremes { min, max: top, kind: ExtremesKind::Regular })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipDirection {
    /// Raise the last digit and continue with `1^∞`.
    Plus,
    /// Lower the last digit and continue with `(-1)^∞`.
    Minus,
}

impl FromStr for FlipDirection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "plus" | "+" => Ok(FlipDirection::Plus),
            "minus" | "-" => Ok(FlipDirection::Minus),
            other => Err(Error::Parse(format!("unknown direction '{other}'"))),
        }
    }
}

/// The coding built from a prefix by a flip of its last digit.
pub fn flipped_coding(prefix: &Word, direction: FlipDirection) -> Result<PeriodicCoding> {
    Ok(match direction {
        FlipDirection::Plus => PeriodicCoding::with_tail(&prefix.successor()?, Digit::Plus),
        FlipDirection::Minus => PeriodicCoding::with_tail(&prefix.predecessor()?, Digit::Minus),
    })
}

/// The root of `Π(flipped prefix, λ) = t` inside `window`.
pub fn prefix_flip_root(prefix: &Word, direction: FlipDirection, t: &RealScalar, window: &Interval) -> Result<RealScalar> {
    let c = flipped_coding(prefix, direction)?;
    let roots = solve_lambda(&c, t)?;
    roots
        .roots
        .into_iter()
        .map(|r| r.lambda)
        .find(|x| !x.certainly_lt(&window.lo) && !x.certainly_gt(&window.hi))
        .ok_or_else(|| Error::Domain(format!("no root of {} = t in the window", c.pretty())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: usize = 128;

    fn q(s: &str) -> RealScalar {
        RealScalar::parse(s, P).unwrap()
    }

    fn c(s: &str) -> PeriodicCoding {
        s.parse().unwrap()
    }

    #[test]
    fn solve_examples() {
        let r = solve_lambda(&c("0:1"), &q("0.2")).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!(r.roots[0].lambda.within(&q("0.2"), 1e-28));
        assert_eq!(r.roots[0].branch, Branch::Increasing);

        let r = solve_lambda(&c("1,-1,-1:1"), &q("1/2")).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0].lambda.to_f64() - 0.269_594_436_405_445).abs() < 1e-14);

        let r = solve_lambda(&c("0,1:-1"), &q("1/8")).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert_eq!(r.roots[0].branch, Branch::Double);
        assert!(r.roots[0].lambda.within(&q("1/4"), 1e-10));

        assert!(solve_lambda(&c("0"), &q("0")).unwrap().whole_interval);
        assert!(solve_lambda(&c("0"), &q("0.1")).unwrap().roots.is_empty());
        assert!(solve_lambda(&c("1"), &q("0.5")).unwrap().roots.is_empty());
    }

    #[test]
    fn figure_roots() {
        let cases = [
            ("1,-1,0:-1", 0.277_880_091_075_165),
            ("1,-1,0:1", 0.315_448_806_907_572),
            ("1,-1,1:-1", 0.319_448_459_735_676),
        ];
        for (s, want) in cases {
            let r = solve_lambda(&c(s), &q("1/2")).unwrap();
            assert_eq!(r.roots.len(), 1, "{s}");
            assert!((r.roots[0].lambda.to_f64() - want).abs() < 1e-14, "{s}");
        }
        // Π(1(-1)1^∞, ·) decreases to 5/9 at 1/3, so 1/2 is never reached
        assert!(solve_lambda(&c("1,-1,1:1"), &q("1/2")).unwrap().roots.is_empty());
    }

    #[test]
    fn unimodal_two_roots() {
        // 01(-1)(-1)1^∞ peaks at 0.13627 and ends at 0.13580
        let r = solve_lambda(&c("0,1,-1,-1:1"), &q("0.136")).unwrap();
        assert_eq!(r.roots.len(), 2);
        let crit = crate::projection::critical_lambda(&c("0,1,-1,-1:1")).unwrap().to_f64();
        assert!(r.roots[0].lambda.to_f64() < crit && crit < r.roots[1].lambda.to_f64());
        for root in &r.roots {
            let d = pi_derivative(&c("0,1,-1,-1:1"), &root.lambda).unwrap().to_f64();
            match root.branch {
                Branch::Increasing => assert!(d > 0.0),
                Branch::Decreasing => assert!(d < 0.0),
                Branch::Double => unreachable!(),
            }
        }
    }

    #[test]
    fn negated_codings_solve_by_symmetry() {
        let r = solve_lambda(&c("0:-1"), &q("-0.2")).unwrap();
        assert!(r.roots[0].lambda.within(&q("0.2"), 1e-28));
    }

    #[test]
    fn diamond_examples() {
        let d = lambda_diamond(&q("1/8")).unwrap();
        assert!((d.to_f64() - 0.190_983_005_625_052_57).abs() < 1e-15);
        let near = lambda_diamond(&q("0.148148")).unwrap().to_f64();
        assert!(near > 0.33);
        let x = lambda_diamond(&q("0.05")).unwrap().to_f64();
        assert!(x > 0.05 && x < 0.05f64.sqrt());
        assert!(lambda_diamond(&q("0.2")).is_err());
        assert!(lambda_diamond(&q("0")).is_err());
    }

    #[test]
    fn diamond_inverts_its_equation() {
        for i in 1..=28 {
            let l = q(&format!("{}/100", 4 + i));
            let t = &(&l * &(&RealScalar::one(P) - &l)) * &(&RealScalar::one(P) - &l);
            assert!(lambda_diamond(&t).unwrap().within(&l, 1e-10));
        }
    }

    #[test]
    fn tau_examples() {
        let r = tau_report(&q("0.12")).unwrap();
        assert!(r.exact_quarter);
        assert_eq!(r.tau.cmp_value(&q("1/4")), Ordering::Equal);
        assert_eq!(r.tau.radius(), 0.0);

        let r = tau_report(&q("0.14")).unwrap();
        assert!((r.tau.to_f64() - 0.293_855_146_311_876_58).abs() < 1e-12);
        assert!(r.derivative_residual < 1e-8);

        let just_above = tau(&q("0.12501")).unwrap().to_f64();
        assert!(just_above > 0.25 && just_above < 0.26);
        assert!(tau(&q("0.1")).is_err());
        assert!(tau(&q("0.15")).is_err());
    }

    #[test]
    fn extremes_examples() {
        let e = lambda_extremes(&q("1/2")).unwrap();
        assert!(e.min.within(&q("0.25"), 1e-36));
        assert_eq!(e.kind, ExtremesKind::Regular);
        assert!(lambda_extremes(&q("0.2")).unwrap().min.within(&q("0.2"), 1e-36));
        assert!(lambda_extremes(&q("0.9")).unwrap().min.within(&q("0.05"), 1e-36));
        assert_eq!(lambda_extremes(&q("1/3")).unwrap().kind, ExtremesKind::Degenerate);
        assert_eq!(lambda_extremes(&q("0")).unwrap().kind, ExtremesKind::Full);
        assert!(lambda_extremes(&q("1.5")).is_err());
    }

    #[test]
    fn flip_examples() {
        let w = |s: &str| s.parse::<Word>().unwrap();
        let window = Interval::new(q("0.25"), q("1/3"));
        let r = prefix_flip_root(&w("1,-1,1"), FlipDirection::Minus, &q("1/2"), &window).unwrap();
        assert!((r.to_f64() - 0.277_880_091_075_165).abs() < 1e-14);
        let r = prefix_flip_root(&w("1,-1,0"), FlipDirection::Minus, &q("1/2"), &window).unwrap();
        // (1(-1)0)^- (-1)^∞ = 1(-1)^∞, the left end of the fiber
        assert!(r.within(&q("1/4"), 1e-28));
        assert!(prefix_flip_root(&w("1,-1,0"), FlipDirection::Plus, &q("1/2"), &window).is_err());
        assert!(prefix_flip_root(&w("0,1"), FlipDirection::Plus, &q("1/2"), &window).is_err());
        let narrow = Interval::new(q("0.25"), q("0.26"));
        assert!(prefix_flip_root(&w("1,-1,1"), FlipDirection::Minus, &q("1/2"), &narrow).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn roots_have_small_residuals(pre in prop::collection::vec(-1i64..=1, 0..5),
                                      per in prop::collection::vec(-1i64..=1, 1..4),
                                      t in -1.0f64..1.0) {
            let c = PeriodicCoding::from_values(&pre, &per).unwrap();
            let t = RealScalar::from_f64(t, P);
            let set = solve_lambda(&c, &t).unwrap();
            prop_assert!(set.roots.len() <= 2);
            for r in &set.roots {
                let v = pi_eval(&c, &r.lambda).unwrap();
                prop_assert!((&v - &t).mag() < 1e-12);
            }
        }

        #[test]
        fn ordering_chain(t in 0.0005f64..0.148) {
            let ts = RealScalar::from_f64(t, P);
            let d = lambda_diamond(&ts).unwrap().to_f64();
            prop_assert!(t < d);
            if t <= 1.0 / 9.0 {
                prop_assert!(d < t.sqrt());
            } else {
                let tau = tau(&ts).unwrap().to_f64();
                prop_assert!(d < tau && tau < 1.0 / 3.0);
            }
        }
    }
}
