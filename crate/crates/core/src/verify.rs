//! Self-checks: the acceptance criteria and sampled invariants, each reported
//! as a named pass/fail line.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coding::{membership, phi_t_digits, CodingMode, CodingStatus, Membership};
use crate::dimension::{
    intersection_dims, level_set_dim, moran_dim, sigma_generate, sigma_lower_bound, MoranLevel, SigmaPattern,
};
use crate::error::Result;
use crate::fiberset::{box_count_estimate, default_scales, lambda_cover, psi_samples, Window, DEFAULT_BUDGET};
use crate::projection::{critical_lambda, phi_value, pi_derivative, pi_eval, pi_eval_exact};
use crate::scalar::RealScalar;
use crate::sequence::{PeriodicCoding, Word};
use crate::solver::{lambda_diamond, solve_lambda, tau, tau_report};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark} {}: {}", self.name, self.detail)
    }
}

fn check(name: &str, outcome: Result<(bool, String)>) -> CheckResult {
    match outcome {
        Ok((passed, detail)) => CheckResult { name: name.to_string(), passed, detail },
        Err(e) => CheckResult { name: name.to_string(), passed: false, detail: format!("error: {e}") },
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub precision: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { precision: 128, seed: 20_240_601 }
    }
}

/// Which checks to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Acceptance,
    Invariants,
    All,
}

impl std::str::FromStr for Suite {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "acceptance" => Ok(Suite::Acceptance),
            "invariants" => Ok(Suite::Invariants),
            "all" => Ok(Suite::All),
            _ => Err(crate::Error::Parse(format!("unknown suite '{s}' (acceptance, invariants, all)"))),
        }
    }
}

pub fn run(suite: Suite, cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    if suite != Suite::Invariants {
        out.extend(acceptance(cfg));
    }
    if suite != Suite::Acceptance {
        out.extend(invariants(cfg));
    }
    out
}

/// Names of the acceptance checks, in order.
pub const ACCEPTANCE: [&str; 12] = [
    "closed_forms",
    "critical_points",
    "figure_gap_endpoints",
    "cover_extremes",
    "psi_plateau",
    "lex_monotonicity",
    "coding_monotonicity",
    "ordering_chain",
    "level_set_dimension",
    "sigma_oscillation",
    "oracle_equivalence",
    "local_dimension_trend",
];

/// Run one acceptance check by its position (1-based).
pub fn acceptance_check(i: usize, cfg: &VerifyConfig) -> CheckResult {
    let p = cfg.precision;
    let outcome = match i {
        1 => closed_forms(p),
        2 => critical_points(p),
        3 => figure_gap_endpoints(p),
        4 => cover_extremes(p),
        5 => psi_plateau(p),
        6 => lex_monotonicity(cfg),
        7 => coding_monotonicity(p),
        8 => ordering_chain(p),
        9 => level_set_dimension(p),
        10 => sigma_oscillation(p),
        11 => oracle_equivalence(cfg),
        12 => local_dimension_trend(p),
        _ => Ok((false, format!("no check {i}"))),
    };
    check(&format!("{i:02} {}", ACCEPTANCE.get(i.wrapping_sub(1)).unwrap_or(&"unknown")), outcome)
}

pub fn acceptance(cfg: &VerifyConfig) -> Vec<CheckResult> {
    (1..=ACCEPTANCE.len()).map(|i| acceptance_check(i, cfg)).collect()
}

fn q(s: &str, p: usize) -> Result<RealScalar> {
    RealScalar::parse(s, p)
}

fn coding(s: &str) -> Result<PeriodicCoding> {
    s.parse()
}

fn closed_forms(p: usize) -> Result<(bool, String)> {
    let one = RealScalar::one(p);
    let two = RealScalar::from_int(2, p);
    let forms: [(&str, fn(&RealScalar, &RealScalar, &RealScalar) -> RealScalar); 4] = [
        ("0:1", |l, _, _| l.clone()),
        ("1:-1", |l, one, two| one - &(two * l)),
        ("0,0:1", |l, _, _| l * l),
        ("0,1,-1:0", |l, one, _| l * &(one - l).powi(2)),
    ];
    let mut grid: Vec<RealScalar> = (1..=33).map(|k| RealScalar::from_ratio(k, 100, p)).collect();
    grid.push(RealScalar::from_ratio(1, 3, p));
    let mut worst = 0.0f64;
    for (c, f) in forms {
        let c = coding(c)?;
        for l in &grid {
            worst = worst.max((&pi_eval(&c, l)? - &f(l, &one, &two)).mag());
        }
    }
    Ok((worst <= 1e-20, format!("max deviation {worst:.3e} over {} λ", grid.len())))
}

fn critical_points(p: usize) -> Result<(bool, String)> {
    let a = critical_lambda(&coding("0,1:-1")?)?;
    let b = critical_lambda(&coding("0,1,-1:0")?)?;
    let va = phi_value(&coding("0,1:-1")?)?;
    let vb = phi_value(&coding("0,1,-1:0")?)?;
    let ea = (a.to_f64() - 0.25).abs();
    let eb = (&b - &q("1/3", p)?).mag();
    let fa = (&va - &q("1/8", p)?).mag();
    let fb = (&vb - &q("4/27", p)?).mag();
    let ok = ea <= 1e-10 && eb <= 1e-10 && fa <= 1e-12 && fb <= 1e-12;
    Ok((ok, format!("critical {:.12} {:.12}; values off by {fa:.1e} {fb:.1e}", a.to_f64(), b.to_f64())))
}

fn figure_gap_endpoints(p: usize) -> Result<(bool, String)> {
    let t = q("1/2", p)?;
    let targets = [("1,-1,-1:1", 0.2696), ("1,-1,0:-1", 0.2779), ("1,-1,0:1", 0.3154), ("1,-1,1:-1", 0.3194)];
    let mut ok = true;
    let mut found = Vec::new();
    for (c, want) in targets {
        let roots = solve_lambda(&coding(c)?, &t)?.roots;
        let hit = roots.iter().map(|r| r.lambda.to_f64()).find(|x| (x - want).abs() <= 5e-4);
        ok &= hit.is_some();
        found.push(hit.map_or("none".to_string(), |x| format!("{x:.6}")));
    }
    Ok((ok, format!("roots {}", found.join(" "))))
}

fn cover_extremes(p: usize) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for ts in ["0.2", "0.5", "0.9"] {
        let t = q(ts, p)?;
        let cover = lambda_cover(&t, 20, None, DEFAULT_BUDGET)?;
        let tf = t.to_f64();
        let want = tf.min((1.0 - tf) / 2.0);
        let (Some(min), Some(max)) = (cover.min(), cover.max()) else {
            return Ok((false, format!("empty cover for t={ts}")));
        };
        let err = (min.to_f64() - want).abs();
        let top = max.cmp_value(&RealScalar::from_ratio(1, 3, p)) == Ordering::Equal;
        ok &= err <= 1e-5 && top;
        parts.push(format!("t={ts} min err {err:.1e} max=1/3 {top}{}", if cover.truncated() { " (truncated)" } else { "" }));
    }
    Ok((ok, parts.join("; ")))
}

fn psi_plateau(p: usize) -> Result<(bool, String)> {
    let (s, truncated) = psi_samples(&q("1/2", p)?, 14, &[0.276], 10 * DEFAULT_BUDGET)?;
    let v = s[0].psi;
    Ok(((v - 0.8381).abs() <= 2e-3, format!("ψ(0.276) = {v:.6}{}", if truncated { " (truncated)" } else { "" })))
}

fn lex_monotonicity(cfg: &VerifyConfig) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let top = 1.0 / 3.0 - 1e-6;
    let mut violations = 0;
    let mut pairs = 0;
    while pairs < 10_000 {
        let a = PeriodicCoding::random(&mut rng, 5, 4);
        let b = PeriodicCoding::random(&mut rng, 5, 4);
        let (a, b) = match a.cmp(&b) {
            Ordering::Less => (a, b),
            Ordering::Greater => (b, a),
            Ordering::Equal => continue,
        };
        let l = BigRational::from_f64(rng.gen_range(0.0f64..top).max(1e-9)).expect("finite");
        if pi_eval_exact(&a, &l) >= pi_eval_exact(&b, &l) {
            violations += 1;
        }
        pairs += 1;
    }
    Ok((violations == 0, format!("{violations} violations in {pairs} exact comparisons")))
}

/// The coding of `t` at 50 fiber points spread over `[lo, hi]`.
fn sampled_codings(t: &RealScalar, lo: f64, hi: f64) -> Result<Vec<(f64, Word)>> {
    let depth = 16;
    let window = Window::new(lo, hi)?;
    let cover = lambda_cover(t, depth, Some(window), 4 * DEFAULT_BUDGET)?;
    let hits: Vec<f64> = cover.witnesses().into_iter().flatten().map(|h| h.lambda).collect();
    // certified hits nearest to evenly spaced targets, thinned to 50 distinct ones
    let mut picks: Vec<f64> = (0..400)
        .filter_map(|j| {
            let target = lo + (hi - lo) * j as f64 / 399.0;
            let i = hits.partition_point(|&h| h < target);
            [i.checked_sub(1), (i < hits.len()).then_some(i)]
                .into_iter()
                .flatten()
                .map(|k| hits[k])
                .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
        })
        .collect();
    picks.dedup();
    if picks.len() > 50 {
        picks = (0..50).map(|i| picks[i * (picks.len() - 1) / 49]).collect();
    }
    let p = t.precision();
    picks
        .into_iter()
        .map(|l| {
            let r = phi_t_digits(t, &RealScalar::from_f64(l, p), depth, CodingMode::Auto)?;
            Ok((l, r.digits))
        })
        .collect()
}

fn strictly(words: &[(f64, Word)], want: Ordering) -> bool {
    words.len() >= 50 && words.windows(2).all(|w| w[0].1.cmp(&w[1].1) == want)
}

fn coding_monotonicity(p: usize) -> Result<(bool, String)> {
    let t02 = q("0.2", p)?;
    let dec = sampled_codings(&t02, 0.199, 1.0 / 3.0)?;
    let t04 = q("0.4", p)?;
    let inc = sampled_codings(&t04, 0.299, 1.0 / 3.0)?;
    let t013 = q("0.13", p)?;
    let turn = tau(&t013)?.to_f64();
    let below = sampled_codings(&t013, 0.129, turn - 1e-4)?;
    let above = sampled_codings(&t013, turn + 1e-4, 1.0 / 3.0)?;
    let quarter = tau_report(&q("0.12", p)?)?;
    let exact = quarter.exact_quarter && quarter.tau.cmp_value(&q("1/4", p)?) == Ordering::Equal && quarter.tau.radius() == 0.0;
    let resid = tau_report(&q("0.14", p)?)?.derivative_residual;
    let checks = [
        ("t=0.2 decreasing", strictly(&dec, Ordering::Greater)),
        ("t=0.4 increasing", strictly(&inc, Ordering::Less)),
        ("t=0.13 decreasing below τ", strictly(&below, Ordering::Greater)),
        ("t=0.13 increasing above τ", strictly(&above, Ordering::Less)),
        ("τ(0.12)=1/4", exact),
        ("|Π₂| at τ(0.14) < 1e-8", resid < 1e-8),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let detail = if failed.is_empty() {
        format!("all six parts hold; τ(0.13) = {turn:.9}, |Π₂| = {resid:.2e}")
    } else {
        format!("failed: {}", failed.join(", "))
    };
    Ok((failed.is_empty(), detail))
}

fn ordering_chain(p: usize) -> Result<(bool, String)> {
    let ninth = RealScalar::from_ratio(1, 9, p);
    let mut chain_bad = 0;
    for i in 1..=100 {
        // 50 points in (0, 1/9], 50 in (1/9, 4/27)
        let t = if i <= 50 {
            RealScalar::from_ratio(i, 450, p)
        } else {
            &ninth + &RealScalar::from_ratio(i - 50, 51 * 27, p)
        };
        let d = lambda_diamond(&t)?;
        let good = if i <= 50 {
            t.certainly_lt(&d) && d.certainly_lt(&t.sqrt()?)
        } else {
            let tt = tau(&t)?;
            t.certainly_lt(&d) && d.certainly_lt(&tt) && tt.certainly_lt(&RealScalar::from_ratio(1, 3, p))
        };
        chain_bad += !good as usize;
    }
    let eighth = RealScalar::from_ratio(1, 8, p);
    let step = RealScalar::from_ratio(4 * 8 - 27, 27 * 8 * 101, p);
    let taus: Vec<RealScalar> = (1..=100)
        .map(|i| tau(&(&eighth + &(&step * &RealScalar::from_int(i, p)))))
        .collect::<Result<_>>()?;
    let flat = taus.windows(2).filter(|w| !w[0].certainly_lt(&w[1])).count();
    let ok = chain_bad == 0 && flat == 0;
    Ok((ok, format!("chain violations {chain_bad}/100; τ not strictly increasing at {flat}/99 consecutive samples")))
}

fn level_set_dimension(p: usize) -> Result<(bool, String)> {
    let a = level_set_dim(&q("0", p)?)?;
    let b = level_set_dim(&q("1", p)?)?;
    let c = level_set_dim(&q("1/3", p)?)?;
    let ea = (a.to_f64() - 2f64.ln() / 3f64.ln()).abs();
    let eb = b.mag();
    let ec = (&c - &RealScalar::one(p)).mag();
    Ok((ea <= 1e-14 && eb == 0.0 && ec <= 1e-14, format!("errors {ea:.1e} {eb:.1e} {ec:.1e}")))
}

fn sigma_oscillation(p: usize) -> Result<(bool, String)> {
    let pattern = SigmaPattern::new(1, 12);
    let out = sigma_generate(&pattern, pattern.tail_len())?;
    let last = out.checkpoints.last().copied();
    let Some(last) = last else {
        return Ok((false, "no checkpoints".into()));
    };
    let er = (last.freq_r - 2.0 / 3.0).abs();
    let el = (last.freq_l - 7.0 / 11.0).abs();
    let apart = out.checkpoints.iter().all(|c| c.freq_r > c.freq_l);
    let third = RealScalar::from_ratio(1, 3, p);
    let ln3 = 3f64.ln();
    let mut worst = 0.0f64;
    let mut large = true;
    for qq in 1..=50u32 {
        let v = sigma_lower_bound(qq, &third)?.to_f64();
        let want = ((qq as f64 - 1.0) * ln3 + 2f64.ln()) / ((qq as f64 + 1.0) * ln3);
        worst = worst.max((v - want).abs());
        if qq >= 40 {
            large &= v > 0.95;
        }
    }
    let ok = er <= 1e-2 && el <= 1e-2 && apart && worst <= 1e-3 && large;
    Ok((ok, format!("freq at r_12 {:.5}, at ℓ_12 {:.5}, separated {apart}; bound error {worst:.1e}, >0.95 for q≥40 {large}", last.freq_r, last.freq_l)))
}

fn oracle_equivalence(cfg: &VerifyConfig) -> Result<(bool, String)> {
    let p = cfg.precision;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let (mut agree, mut undecided, mut contradictions) = (0, 0, 0);
    for i in 0..1000 {
        let l = rng.gen_range(0.02..1.0 / 3.0);
        let lambda = RealScalar::from_f64(l, p);
        let t = if i % 2 == 0 {
            rng.gen_range(-1.0..1.0)
        } else {
            crate::projection::pi_eval_f64(&PeriodicCoding::random(&mut rng, 6, 4), l)
        };
        let t = RealScalar::from_f64(t, p);
        let cover = membership(&t, &lambda, 30)?;
        let digits = phi_t_digits(&t, &lambda, 30, CodingMode::Auto)?;
        let coded = match (digits.status, digits.precision_exhausted) {
            (_, true) => None,
            (CodingStatus::NotMember, _) => Some(false),
            _ => Some(true),
        };
        match (cover, coded) {
            (Membership::Undecided, _) | (_, None) => undecided += 1,
            (m, Some(c)) if (m == Membership::InCover) == c => agree += 1,
            _ => contradictions += 1,
        }
    }
    Ok((contradictions == 0, format!("{agree} agree, {undecided} undecided, {contradictions} contradictions")))
}

fn local_dimension_trend(p: usize) -> Result<(bool, String)> {
    let t = q("1/2", p)?;
    let (lo, hi) = (0.295, 0.305);
    let want = crate::dimension::local_dim_lambda_set(&q("0.30", p)?)?.to_f64();
    let mut slopes = Vec::new();
    for depth in [14usize, 18] {
        let cover = lambda_cover(&t, depth, Some(Window::new(lo, hi)?), 100_000_000)?;
        let scales = default_scales(hi - lo, hi.powi(depth as i32), 3);
        slopes.push(box_count_estimate(&cover.bounds(), lo, hi, &scales)?.slope);
    }
    let (a, b) = (slopes[0], slopes[1]);
    let ok = (a - want).abs() <= 0.08 && (b - want).abs() <= 0.08 && (b - want).abs() <= (a - want).abs();
    Ok((ok, format!("slopes {a:.5} (depth 14), {b:.5} (depth 18); target {want:.5}")))
}

/// Sampled property checks across modules.
pub fn invariants(cfg: &VerifyConfig) -> Vec<CheckResult> {
    let p = cfg.precision;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x1a);
    let mut out = Vec::new();
    let samples: Vec<(PeriodicCoding, f64)> =
        (0..200).map(|_| (PeriodicCoding::random(&mut rng, 5, 4), rng.gen_range(0.01..1.0 / 3.0))).collect();

    out.push(check("negation_symmetry", (|| {
        let mut worst = 0.0f64;
        for (c, l) in &samples {
            let l = RealScalar::from_f64(*l, p);
            worst = worst.max((&pi_eval(c, &l)? + &pi_eval(&c.negate(), &l)?).mag());
        }
        Ok((worst < 1e-30, format!("max |Π(c)+Π(-c)| = {worst:.1e}")))
    })()));

    out.push(check("derivative_bound", (|| {
        let two = RealScalar::from_int(2, p);
        let mut bad = 0;
        let mut worst = 0.0f64;
        for (c, l) in &samples {
            let d = pi_derivative(c, &RealScalar::from_f64(*l, p))?.abs();
            worst = worst.max(d.to_f64());
            bad += d.certainly_gt(&two) as usize;
        }
        Ok((bad == 0, format!("{bad} samples with |∂Π/∂λ| > 2, max {worst:.6}")))
    })()));

    out.push(check("ultrametric_distance", (|| {
        let mut bad = 0;
        for w in samples.windows(3) {
            let (a, b, c) = (&w[0].0, &w[1].0, &w[2].0);
            let ac = a.rho_distance(c);
            let m = a.rho_distance(b).max(b.rho_distance(c));
            bad += (ac > m) as usize;
        }
        Ok((bad == 0, format!("{bad} strong-triangle violations")))
    })()));

    out.push(check("coding_roundtrip", (|| {
        let mut bad = 0;
        for (c, l) in samples.iter().take(60) {
            let l = RealScalar::from_f64(l.min(1.0 / 3.0 - 1e-3).max(0.02), p);
            bad += !crate::coding::pi_lambda_inverse_roundtrip(c, &l, 12)? as usize;
        }
        Ok((bad == 0, format!("{bad} of 60 round trips failed")))
    })()));

    out.push(check("cover_refinement", (|| {
        let t = q("1/2", p)?;
        let w = Window::new(0.25, 0.3)?;
        let a = lambda_cover(&t, 9, Some(w), DEFAULT_BUDGET)?.bounds();
        let b = lambda_cover(&t, 10, Some(w), DEFAULT_BUDGET)?.bounds();
        let outside = b.iter().filter(|(lo, hi)| !a.iter().any(|(x, y)| x <= lo && hi <= y)).count();
        Ok((outside == 0, format!("{outside} of {} depth-10 intervals escape the depth-9 cover", b.len())))
    })()));

    out.push(check("gap_exclusion", (|| {
        let t = q("1/2", p)?;
        let cover = lambda_cover(&t, 8, Some(Window::new(0.25, 0.32)?), DEFAULT_BUDGET)?;
        let mut bad = 0;
        let mut tried = 0;
        for (a, b) in cover.gap_bounds().into_iter().filter(|(a, b)| b - a > 1e-9).take(100) {
            let l = RealScalar::from_f64(0.5 * (a + b), p);
            bad += (membership(&t, &l, 16)? != Membership::Out) as usize;
            tried += 1;
        }
        Ok((bad == 0 && tried > 0, format!("{bad} of {tried} gap midpoints not excluded")))
    })()));

    out.push(check("periodic_dimensions_equal", (|| {
        let mut bad = 0;
        for (c, l) in &samples {
            let d = intersection_dims(c, &RealScalar::from_f64(*l, p))?;
            bad += (d.hausdorff.cmp_value(&d.packing) != Ordering::Equal || d.packing.upper_f64() > 1.0) as usize;
        }
        Ok((bad == 0, format!("{bad} reports with hausdorff != packing")))
    })()));

    out.push(check("level_set_concave", (|| {
        let grid: Vec<f64> =
            (0..=200).map(|i| level_set_dim(&RealScalar::from_ratio(i, 200, p)).map(|v| v.to_f64())).collect::<Result<_>>()?;
        let bad = grid.windows(3).filter(|w| w[0] + w[2] > 2.0 * w[1] + 1e-14).count();
        let peak = grid.iter().cloned().fold(0.0, f64::max);
        Ok((bad == 0 && peak <= 1.0 + 1e-15, format!("{bad} concavity violations, max {peak:.15}")))
    })()));

    out.push(check("moran_constant", (|| {
        let mut worst = 0.0f64;
        for c in 1..6u64 {
            let r = RealScalar::from_ratio(1, 3 + c as i64, p);
            let d = moran_dim(&vec![MoranLevel { count: c, ratio: r.clone() }; 10])?;
            let want = RealScalar::from_int(c as i64, p).ln()?.checked_div(&-&r.ln()?)?;
            worst = worst.max((&d - &want).mag());
        }
        Ok((worst < 1e-25, format!("max deviation {worst:.1e}")))
    })()));

    out.push(check("sigma_checkpoints_separate", (|| {
        let mut bad = 0;
        for qq in 1..=4 {
            let pat = SigmaPattern::new(qq, 10);
            bad += sigma_generate(&pat, pat.tail_len())?.checkpoints.iter().filter(|c| c.freq_r <= c.freq_l).count();
        }
        Ok((bad == 0, format!("{bad} checkpoints where the two sequences meet")))
    })()));

    out.push(check("cover_deterministic", (|| {
        let t = q("0.4", p)?;
        let a = lambda_cover(&t, 10, None, 200_000)?.bounds();
        let b = lambda_cover(&t, 10, None, 200_000)?.bounds();
        Ok((a == b, format!("{} intervals", a.len())))
    })()));

    out.push(check("exact_lex_order", (|| {
        let l = BigRational::new(3.into(), 10.into());
        let mut bad = 0;
        for w in samples.windows(2) {
            let (a, b) = (&w[0].0, &w[1].0);
            let d = pi_eval_exact(a, &l) - pi_eval_exact(b, &l);
            let expect = a.cmp(b);
            let got = if d.is_zero() { Ordering::Equal } else if d.is_positive() { Ordering::Greater } else { Ordering::Less };
            bad += (got != expect) as usize;
        }
        Ok((bad == 0, format!("{bad} order mismatches at λ = 3/10")))
    })()));

    out
}
