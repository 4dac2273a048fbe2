//! Dimension formulas: intersection dimension from the zero-digit frequency,
//! entropy and level sets, local dimension of the fiber, Moran sets, and the
//! pattern with oscillating zero frequency.

mod sigma;

pub use sigma::{sigma_generate, sigma_moran_levels, Checkpoint, FreeDigits, SigmaOutput, SigmaPattern};

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::projection::third;
use crate::scalar::RealScalar;
use crate::sequence::{Digit, PeriodicCoding};

/// Which formula produced a [`DimensionReport`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    DigitFrequency,
    Local,
    LevelSet,
    Moran,
    BoxCount,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub hausdorff: RealScalar,
    pub packing: RealScalar,
    pub formula: Formula,
    /// The point has two codings at this λ; the given one was used.
    pub ambiguous: bool,
}

impl DimensionReport {
    pub fn equal(value: RealScalar, formula: Formula) -> Self {
        DimensionReport { hausdorff: value.clone(), packing: value, formula, ambiguous: false }
    }
}

fn check_lambda(lambda: &RealScalar) -> Result<()> {
    let third = third(lambda.precision());
    if lambda.sign() != Some(Ordering::Greater) || lambda.certainly_gt(&third) {
        return domain(format!("λ = {lambda:.12} is outside (0, 1/3]"));
    }
    Ok(())
}

fn ln_int(n: u64, p: usize) -> Result<RealScalar> {
    RealScalar::from_int(n as i64, p).ln()
}

/// `log n / -log λ`.
fn log_ratio(n: u64, lambda: &RealScalar) -> Result<RealScalar> {
    ln_int(n, lambda.precision())?.checked_div(&-&lambda.ln()?)
}

/// Dimensions of `C_λ ∩ (C_λ + t)` for the point `t` coded by `c`.
pub fn intersection_dims(c: &PeriodicCoding, lambda: &RealScalar) -> Result<DimensionReport> {
    check_lambda(lambda)?;
    let freq = RealScalar::from_rational(&c.zero_frequency(), lambda.precision());
    let mut report = DimensionReport::equal(&freq * &log_ratio(2, lambda)?, Formula::DigitFrequency);
    let at_third = !lambda.certainly_lt(&third(lambda.precision()));
    let per = c.period().digits();
    report.ambiguous = at_third && !c.preperiod().is_empty() && per.len() == 1 && per[0] != Digit::Zero;
    Ok(report)
}

/// Probability vector over the digits `-1, 0, 1`.
#[derive(Clone, Debug, Serialize)]
pub struct ProbabilityVector3 {
    pub p_minus: RealScalar,
    pub p_zero: RealScalar,
    pub p_plus: RealScalar,
}

impl ProbabilityVector3 {
    pub fn new(p_minus: RealScalar, p_zero: RealScalar, p_plus: RealScalar) -> Result<Self> {
        let p = p_zero.precision();
        let sum = &(&p_minus + &p_zero) + &p_plus;
        let negative = [&p_minus, &p_zero, &p_plus].iter().any(|x| x.sign() == Some(Ordering::Less));
        if negative || (&sum - &RealScalar::one(p)).mag() > 1e-15 {
            return domain(format!("({p_minus:.6}, {p_zero:.6}, {p_plus:.6}) is not a probability vector"));
        }
        Ok(ProbabilityVector3 { p_minus, p_zero, p_plus })
    }

    /// Symmetric vector with zero-probability `beta`.
    pub fn symmetric(beta: &RealScalar) -> Result<Self> {
        let p = beta.precision();
        if beta.certainly_lt(&RealScalar::zero(p)) || beta.certainly_gt(&RealScalar::one(p)) {
            return domain(format!("β = {beta:.12} is outside [0, 1]"));
        }
        let side = &(&RealScalar::one(p) - beta) / &RealScalar::from_int(2, p);
        Ok(ProbabilityVector3 { p_minus: side.clone(), p_zero: beta.clone(), p_plus: side })
    }
}

/// Natural-log entropy, with `0 log 0 = 0`.
pub fn entropy(p: &ProbabilityVector3) -> Result<RealScalar> {
    let mut h = RealScalar::zero(p.p_zero.precision());
    for x in [&p.p_minus, &p.p_zero, &p.p_plus] {
        if x.lower_f64() > 0.0 {
            h = &h - &(x * &x.ln()?);
        } else if x.sign() != Some(Ordering::Equal) {
            // x is a ball touching 0; -x ln x is at most 1/e there and tends to 0
            h = h.widen(x.mag() * (1.0 + (1.0 / x.mag().max(1e-300)).ln()));
        }
    }
    Ok(h)
}

/// Dimension of the set of λ whose intersection has zero-frequency `beta`.
pub fn level_set_dim(beta: &RealScalar) -> Result<RealScalar> {
    let p = beta.precision();
    entropy(&ProbabilityVector3::symmetric(beta)?)?.checked_div(&ln_int(3, p)?)
}

/// `log 3 / -log λ`.
pub fn local_dim_lambda_set(lambda: &RealScalar) -> Result<RealScalar> {
    check_lambda(lambda)?;
    log_ratio(3, lambda)
}

/// One generation of a homogeneous Moran construction.
#[derive(Clone, Debug, Serialize)]
pub struct MoranLevel {
    pub count: u64,
    pub ratio: RealScalar,
}

/// Liminf of `Σ log count / -Σ log ratio`, read as the least partial quotient
/// over the second half of the levels.
pub fn moran_dim(levels: &[MoranLevel]) -> Result<RealScalar> {
    let Some(first) = levels.first() else {
        return domain("no Moran levels");
    };
    let p = first.ratio.precision();
    let one = RealScalar::one(p);
    let zero = RealScalar::zero(p);
    if let Some(l) = levels.iter().find(|l| l.count == 0 || !(l.ratio.certainly_gt(&zero) && l.ratio.certainly_lt(&one))) {
        return domain(format!("invalid Moran level (count {}, ratio {:.6})", l.count, l.ratio));
    }
    let start = levels.len().div_ceil(2);
    let mut num = RealScalar::zero(p);
    let mut den = RealScalar::zero(p);
    let mut best: Option<RealScalar> = None;
    for (i, l) in levels.iter().enumerate() {
        num = &num + &ln_int(l.count, p)?;
        den = &den - &l.ratio.ln()?;
        if i + 1 >= start {
            let v = num.checked_div(&den)?;
            if best.as_ref().map_or(true, |b| v.cmp_value(b) == Ordering::Less) {
                best = Some(v);
            }
        }
    }
    Ok(best.unwrap_or(zero))
}

/// `((q-1) log 3 + log 2) / (-(q+1) log γ)`.
pub fn sigma_lower_bound(q: u32, gamma: &RealScalar) -> Result<RealScalar> {
    if q == 0 {
        return domain("q must be positive");
    }
    check_lambda(gamma)?;
    let p = gamma.precision();
    let num = &(&RealScalar::from_int(q as i64 - 1, p) * &ln_int(3, p)?) + &ln_int(2, p)?;
    let den = &RealScalar::from_int(q as i64 + 1, p) * &-&gamma.ln()?;
    num.checked_div(&den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: usize = 128;

    fn q(s: &str) -> RealScalar {
        RealScalar::parse(s, P).unwrap()
    }

    fn coding(s: &str) -> PeriodicCoding {
        s.parse().unwrap()
    }

    fn f(x: Result<RealScalar>) -> f64 {
        x.unwrap().to_f64()
    }

    #[test]
    fn intersection_examples() {
        let d = intersection_dims(&coding("0"), &q("1/3")).unwrap();
        assert!(d.hausdorff.within(&log_ratio(2, &q("1/3")).unwrap(), 1e-30));
        let d = intersection_dims(&coding("-1,0,1"), &q("0.25")).unwrap();
        assert!(d.hausdorff.within(&q("1/6"), 1e-30));
        let d = intersection_dims(&coding("1:-1"), &q("0.25")).unwrap();
        assert_eq!(d.hausdorff.sign(), Some(Ordering::Equal));
        assert!(!d.ambiguous);
        assert!(intersection_dims(&coding("1:-1"), &q("1/3")).unwrap().ambiguous);
        assert!(intersection_dims(&coding("0"), &q("0.4")).is_err());
    }

    #[test]
    fn entropy_examples() {
        let t = q("1/3");
        let h = entropy(&ProbabilityVector3::new(t.clone(), t.clone(), t).unwrap()).unwrap();
        assert!(h.within(&ln_int(3, P).unwrap(), 1e-30));
        let h = entropy(&ProbabilityVector3::new(q("1/2"), q("0"), q("1/2")).unwrap()).unwrap();
        assert!(h.within(&ln_int(2, P).unwrap(), 1e-30));
        let h = entropy(&ProbabilityVector3::new(q("0"), q("1"), q("0")).unwrap()).unwrap();
        assert_eq!(h.sign(), Some(Ordering::Equal));
        assert!(ProbabilityVector3::new(q("0.5"), q("0.6"), q("0")).is_err());
    }

    #[test]
    fn level_set_examples() {
        assert!((f(level_set_dim(&q("0"))) - 2f64.ln() / 3f64.ln()).abs() < 1e-14);
        assert_eq!(level_set_dim(&q("1")).unwrap().sign(), Some(Ordering::Equal));
        assert!(level_set_dim(&q("1/3")).unwrap().within(&q("1"), 1e-30));
        let grid: Vec<f64> = (0..=300).map(|i| f(level_set_dim(&RealScalar::from_ratio(i, 300, P)))).collect();
        for w in grid.windows(3) {
            assert!(w[0] + w[2] <= 2.0 * w[1] + 1e-14, "not concave");
        }
        assert!(grid.iter().all(|&v| v <= 1.0 + 1e-15));
        assert!(level_set_dim(&q("1.5")).is_err());
    }

    #[test]
    fn local_dim_examples() {
        assert!(local_dim_lambda_set(&q("1/3")).unwrap().within(&q("1"), 1e-30));
        assert!(local_dim_lambda_set(&q("1/9")).unwrap().within(&q("1/2"), 1e-30));
        assert!((f(local_dim_lambda_set(&q("0.2696"))) - 0.8381).abs() < 1e-4);
    }

    fn levels(c: u64, r: &str) -> Vec<MoranLevel> {
        vec![MoranLevel { count: c, ratio: q(r) }; 20]
    }

    #[test]
    fn moran_examples() {
        assert!(moran_dim(&levels(2, "1/3")).unwrap().within(&log_ratio(2, &q("1/3")).unwrap(), 1e-30));
        assert!(moran_dim(&levels(3, "1/3")).unwrap().within(&q("1"), 1e-30));
        assert_eq!(moran_dim(&levels(1, "0.5")).unwrap().sign(), Some(Ordering::Equal));
        assert!(moran_dim(&levels(0, "0.5")).is_err());
        assert!(moran_dim(&[]).is_err());
    }

    #[test]
    fn sigma_bound_examples() {
        assert!((f(sigma_lower_bound(2, &q("1/3"))) - 0.54364325119048581).abs() < 1e-15);
        assert!((f(sigma_lower_bound(1, &q("1/3"))) - 0.31546487678572872).abs() < 1e-15);
        assert!((f(sigma_lower_bound(2, &q("0.3"))) - 0.49606864396221448).abs() < 1e-15);
        assert!(f(sigma_lower_bound(200, &q("1/3"))) > 0.99);
        for qq in 1..5 {
            let m = moran_dim(&sigma_moran_levels(qq, &q("0.3"), 6)).unwrap();
            assert!(m.within(&sigma_lower_bound(qq, &q("0.3")).unwrap(), 1e-25));
        }
    }

    /// Components of `C_λ(n) ∩ (C_λ(n) + t)` by brute force.
    fn components(lambda: f64, t: f64, n: usize) -> usize {
        let mut left = vec![0.0f64];
        let mut pow = 1.0;
        for _ in 0..n {
            left = left.iter().flat_map(|&a| [a, a + (1.0 - lambda) * pow]).collect();
            pow *= lambda;
        }
        left.sort_by(f64::total_cmp);
        let shifted: Vec<f64> = left.iter().map(|a| a + t).collect();
        let (mut i, mut j, mut count) = (0, 0, 0);
        let mut last_hi = f64::NEG_INFINITY;
        let tol = 1e-13;
        while i < left.len() && j < shifted.len() {
            let lo = left[i].max(shifted[j]);
            let hi = (left[i] + pow).min(shifted[j] + pow);
            if lo <= hi + tol {
                if lo > last_hi + tol {
                    count += 1;
                }
                last_hi = last_hi.max(hi);
            }
            if left[i] < shifted[j] {
                i += 1
            } else {
                j += 1
            }
        }
        count
    }

    #[test]
    fn component_count_slope_matches() {
        for (c, l) in [("-1,0,1", 0.25f64), ("0,1", 0.3), ("0,0,1", 0.2)] {
            let c = coding(c);
            let lam = RealScalar::from_f64(l, P);
            let t = crate::projection::pi_eval_f64(&c, l);
            let xs: Vec<f64> = (8..=16).map(|n| -(n as f64) * l.ln()).collect();
            let ys: Vec<f64> = (8..=16).map(|n| (components(l, t, n) as f64).ln()).collect();
            let mx = xs.iter().sum::<f64>() / xs.len() as f64;
            let my = ys.iter().sum::<f64>() / ys.len() as f64;
            let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
                / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
            let want = intersection_dims(&c, &lam).unwrap().hausdorff.to_f64();
            assert!((slope - want).abs() < 0.1, "{c}: slope {slope} want {want}");
        }
    }

    proptest! {
        #[test]
        fn periodic_codings_have_equal_dims(c in (0usize..4, 1usize..5).prop_flat_map(|(a, b)|
            (proptest::collection::vec(-1i64..=1, a), proptest::collection::vec(-1i64..=1, b))),
            l in 0.01f64..0.333) {
            let c = PeriodicCoding::from_values(&c.0, &c.1).unwrap();
            let d = intersection_dims(&c, &RealScalar::from_f64(l, P)).unwrap();
            prop_assert_eq!(d.hausdorff.cmp_value(&d.packing), Ordering::Equal);
            prop_assert!(d.hausdorff.lower_f64() >= 0.0 && d.hausdorff.upper_f64() <= 1.0);
        }

        #[test]
        fn constant_moran_is_exact(c in 1u64..10, r in 0.01f64..0.99) {
            let ratio = RealScalar::from_f64(r, P);
            let d = moran_dim(&vec![MoranLevel { count: c, ratio: ratio.clone() }; 12]).unwrap();
            prop_assert!(d.within(&log_ratio(c, &ratio).unwrap(), 1e-25));
        }
    }
}
