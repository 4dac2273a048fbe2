use cantor_fiber::coding::{phi_t_digits, CodingMode, CodingStatus};
use cantor_fiber::dimension::{
    entropy, intersection_dims, level_set_dim, local_dim_lambda_set, sigma_generate, sigma_lower_bound,
    DimensionReport, Formula, ProbabilityVector3, SigmaPattern,
};
use cantor_fiber::fiberset::{
    box_count_estimate, default_lambda_grid, default_scales, gamma_raster, lambda_cover, psi_samples, Window,
};
use cantor_fiber::solver::{flipped_coding, prefix_flip_root, solve_lambda_with, FlipDirection};
use cantor_fiber::verify::{self, Suite, VerifyConfig};
use cantor_fiber::{Error, Interval, PeriodicCoding, RealScalar, Result, Word};
use serde_json::{json, Value};

use crate::args::{Command, DimArgs, Format, RunConfig};

/// Exit status on success.
pub const OK: u8 = 0;
/// Input could not be parsed or is out of domain.
pub const INPUT: u8 = 1;
/// The computation certified a negative answer.
pub const NEGATIVE: u8 = 2;
/// A node budget or the working precision ran out.
pub const EXHAUSTED: u8 = 3;

pub struct Output {
    pub body: String,
    pub code: u8,
}

impl Output {
    fn json(v: Value, code: u8) -> Self {
        let mut body = serde_json::to_string_pretty(&v).expect("json values serialize");
        body.push('\n');
        Output { body, code }
    }

    fn text(body: String, code: u8) -> Self {
        Output { body, code }
    }
}

pub fn error_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::Parse(_) => INPUT,
        Error::Budget(_) | Error::Precision(_) => EXHAUSTED,
    }
}

pub fn error_json(kind: &str, message: &str) -> String {
    let v = json!({ "error": { "kind": kind, "message": message } });
    format!("{}\n", serde_json::to_string(&v).expect("json values serialize"))
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::Parse(_) => "parse",
        Error::Budget(_) => "budget",
        Error::Precision(_) => "precision",
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    prec: usize,
}

impl Ctx<'_> {
    fn scalar(&self, s: &str) -> Result<RealScalar> {
        RealScalar::parse(s, self.prec)
    }

    fn dec(&self, x: f64) -> String {
        RealScalar::from_f64(x, self.prec).to_decimal()
    }

    fn format(&self, default: Format) -> Format {
        self.cfg.format.unwrap_or(default)
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::Parse(format!("expected 'a,b', got '{s}'"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let num = |x: &str| cantor_fiber::scalar::parse_rational(x.trim()).map(|r| cantor_fiber::scalar::rational_to_f64(&r));
    Ok((num(a)?, num(b)?))
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("expected 'WxH', got '{s}'"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let w = w.trim().parse().map_err(|_| bad())?;
    let h = h.trim().parse().map_err(|_| bad())?;
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

pub fn run(command: &Command, cfg: &RunConfig) -> Result<Output> {
    let ctx = Ctx { cfg, prec: cfg.precision as usize };
    match command {
        Command::Code { t, lambda, digits, mode } => code(&ctx, t, lambda, *digits, mode),
        Command::Cover { t, depth, window } => cover(&ctx, t, *depth, window.as_deref()),
        Command::Psi { t, depth, samples } => psi(&ctx, t, *depth, samples),
        Command::Gamma { depth, grid } => gamma(&ctx, *depth, grid),
        Command::Solve { coding, t, prefix, flip, window } => {
            solve(&ctx, coding.as_deref(), t, prefix.as_deref(), flip.as_deref(), window.as_deref())
        }
        Command::Dim(args) => dim(&ctx, args),
        Command::Sigma { q, m, digits } => sigma(&ctx, *q, *m, *digits),
        Command::Verify { suite } => verify_cmd(&ctx, suite),
    }
}

fn code(ctx: &Ctx, t: &str, lambda: &str, n: usize, mode: &str) -> Result<Output> {
    let mode: CodingMode = mode.parse()?;
    let t = ctx.scalar(t)?;
    let lambda = ctx.scalar(lambda)?;
    let r = phi_t_digits(&t, &lambda, n, mode)?;
    let code = match (r.status, r.precision_exhausted) {
        (CodingStatus::NotMember, _) => NEGATIVE,
        (_, true) => EXHAUSTED,
        _ => OK,
    };
    let v = json!({
        "t": t.to_decimal(),
        "lambda": lambda.to_decimal(),
        "digits": r.digits.to_string(),
        "status": r.status.to_string(),
        "residual_bound": ctx.dec(r.residual_bound),
        "precision_exhausted": r.precision_exhausted,
    });
    Ok(Output::json(v, code))
}

fn cover(ctx: &Ctx, t: &str, depth: usize, window: Option<&str>) -> Result<Output> {
    let t = ctx.scalar(t)?;
    let window = window.map(parse_pair).transpose()?.map(|(a, b)| Window::new(a, b)).transpose()?;
    let cover = lambda_cover(&t, depth, window, ctx.cfg.budget)?;
    let code = if cover.truncated() { EXHAUSTED } else { OK };
    match ctx.format(Format::Json) {
        Format::Json => Ok(Output::json(serde_json::to_value(&cover).expect("cover serializes"), code)),
        Format::Csv => {
            let mut body = String::from("lo,hi\n");
            for i in cover.intervals() {
                body.push_str(&format!("{},{}\n", i.lo.to_decimal(), i.hi.to_decimal()));
            }
            Ok(Output::text(body, code))
        }
    }
}

fn psi(ctx: &Ctx, t: &str, depth: usize, samples: &str) -> Result<Output> {
    let t = ctx.scalar(t)?;
    let lambdas: Vec<f64> = if samples.contains(',') {
        samples
            .split(',')
            .map(|x| cantor_fiber::scalar::parse_rational(x.trim()).map(|r| cantor_fiber::scalar::rational_to_f64(&r)))
            .collect::<Result<_>>()?
    } else {
        let n: usize = samples.trim().parse().map_err(|_| Error::Parse(format!("bad sample count '{samples}'")))?;
        if n == 0 {
            return Err(Error::Domain("need at least one sample".into()));
        }
        default_lambda_grid(n)
    };
    let (rows, truncated) = psi_samples(&t, depth, &lambdas, ctx.cfg.budget)?;
    let code = if truncated { EXHAUSTED } else { OK };
    match ctx.format(Format::Csv) {
        Format::Csv => {
            let mut body = String::from("lambda,psi\n");
            for r in &rows {
                body.push_str(&format!("{},{}\n", r.lambda, r.psi));
            }
            Ok(Output::text(body, code))
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "lambda": ctx.dec(r.lambda),
                        "psi": ctx.dec(r.psi),
                        "gamma": r.gamma.map(|g| ctx.dec(g)),
                        "below_min": r.below_min(),
                    })
                })
                .collect();
            Ok(Output::json(json!({ "t": t.to_decimal(), "depth": depth, "truncated": truncated, "samples": rows }), code))
        }
    }
}

fn gamma(ctx: &Ctx, depth: usize, grid: &str) -> Result<Output> {
    let (w, h) = parse_grid(grid)?;
    let raster = gamma_raster(depth, &default_lambda_grid(w), h, ctx.cfg.budget)?;
    match ctx.format(Format::Csv) {
        Format::Csv => Ok(Output::text(raster.to_csv(), OK)),
        Format::Json => {
            let rows: Vec<String> =
                raster.occupied.iter().rev().map(|row| row.iter().map(|&x| if x { '#' } else { '.' }).collect()).collect();
            let lambdas: Vec<String> = raster.lambdas.iter().map(|&l| ctx.dec(l)).collect();
            Ok(Output::json(json!({ "depth": depth, "lambdas": lambdas, "height": h, "occupied": rows }), OK))
        }
    }
}

fn solve(
    ctx: &Ctx,
    coding: Option<&str>,
    t: &str,
    prefix: Option<&str>,
    flip: Option<&str>,
    window: Option<&str>,
) -> Result<Output> {
    let t = ctx.scalar(t)?;
    if let Some(prefix) = prefix {
        let prefix: Word = prefix.parse()?;
        let dir: FlipDirection = flip.ok_or_else(|| Error::Parse("--prefix needs --flip".into()))?.parse()?;
        let (a, b) = window.map(parse_pair).transpose()?.unwrap_or((0.0, 1.0 / 3.0));
        let hi = if b >= 1.0 / 3.0 { RealScalar::from_ratio(1, 3, ctx.prec) } else { RealScalar::from_f64(b, ctx.prec) };
        let win = Interval::new(RealScalar::from_f64(a, ctx.prec), hi);
        let c = flipped_coding(&prefix, dir)?;
        return match prefix_flip_root(&prefix, dir, &t, &win) {
            Ok(root) => Ok(Output::json(json!({ "coding": c.to_string(), "root": root }), OK)),
            Err(Error::Domain(msg)) if msg.contains("no root") => {
                Ok(Output::json(json!({ "coding": c.to_string(), "root": null, "reason": msg }), NEGATIVE))
            }
            Err(e) => Err(e),
        };
    }
    let c: PeriodicCoding = coding.ok_or_else(|| Error::Parse("solve needs --coding or --prefix".into()))?.parse()?;
    let set = solve_lambda_with(&c, &t, ctx.cfg.tolerance)?;
    let code = if set.roots.is_empty() && !set.whole_interval { NEGATIVE } else { OK };
    Ok(Output::json(json!({ "coding": c.to_string(), "t": t.to_decimal(), "roots": set }), code))
}

fn dim(ctx: &Ctx, a: &DimArgs) -> Result<Output> {
    let report = |r: DimensionReport| Ok(Output::json(serde_json::to_value(r).expect("report serializes"), OK));
    if let Some(c) = &a.coding {
        let c: PeriodicCoding = c.parse()?;
        let lambda = ctx.scalar(a.lambda.as_deref().ok_or_else(|| Error::Parse("--coding needs --lambda".into()))?)?;
        return report(intersection_dims(&c, &lambda)?);
    }
    if let Some(beta) = &a.level_set_beta {
        return report(DimensionReport::equal(level_set_dim(&ctx.scalar(beta)?)?, Formula::LevelSet));
    }
    if let Some(q) = a.q {
        let gamma = ctx.scalar(a.gamma.as_deref().ok_or_else(|| Error::Parse("--q needs --gamma".into()))?)?;
        return report(DimensionReport::equal(sigma_lower_bound(q, &gamma)?, Formula::Moran));
    }
    if let Some(p) = &a.entropy {
        let parts: Vec<RealScalar> = p.split(',').map(|x| ctx.scalar(x.trim())).collect::<Result<_>>()?;
        let [pm, p0, pp]: [RealScalar; 3] =
            parts.try_into().map_err(|_| Error::Parse(format!("expected three probabilities, got '{p}'")))?;
        let h = entropy(&ProbabilityVector3::new(pm, p0, pp)?)?;
        return Ok(Output::json(json!({ "entropy": h }), OK));
    }
    if let Some(t) = &a.box_count_t {
        let t = ctx.scalar(t)?;
        let (lo, hi) = a.window.as_deref().map(parse_pair).transpose()?.unwrap_or((0.295, 0.305));
        let cover = lambda_cover(&t, a.depth, Some(Window::new(lo, hi)?), ctx.cfg.budget)?;
        let scales = default_scales(hi - lo, hi.powi(a.depth as i32), 3);
        let est = box_count_estimate(&cover.bounds(), lo, hi, &scales)?;
        let slope = RealScalar::from_f64(est.slope, ctx.prec);
        let mut r = serde_json::to_value(DimensionReport::equal(slope, Formula::BoxCount)).expect("report serializes");
        r["truncated"] = json!(cover.truncated());
        let code = if cover.truncated() { EXHAUSTED } else { OK };
        return Ok(Output::json(r, code));
    }
    if let Some(l) = &a.lambda {
        return report(DimensionReport::equal(local_dim_lambda_set(&ctx.scalar(l)?)?, Formula::Local));
    }
    Err(Error::Parse(
        "dim needs one of --coding/--lambda, --lambda, --level-set-beta, --q/--gamma, --entropy, --box-count-t".into(),
    ))
}

fn sigma(ctx: &Ctx, q: u32, m: u32, digits: Option<u64>) -> Result<Output> {
    let pattern = SigmaPattern::new(q, m);
    let n = digits.unwrap_or(pattern.tail_len());
    let out = sigma_generate(&pattern, pattern.tail_len().max(n))?;
    match ctx.format(Format::Csv) {
        Format::Csv => {
            let mut body = String::from("m,r,freq_r,l,freq_l\n");
            for c in &out.checkpoints {
                body.push_str(&format!("{},{},{},{},{}\n", c.m, c.r, c.freq_r, c.l, c.freq_l));
            }
            Ok(Output::text(body, OK))
        }
        Format::Json => {
            let rows: Vec<Value> = out
                .checkpoints
                .iter()
                .map(|c| json!({ "m": c.m, "r": c.r, "freq_r": ctx.dec(c.freq_r), "l": c.l, "freq_l": ctx.dec(c.freq_l) }))
                .collect();
            let mut v = json!({ "q": q, "m": m, "length": pattern.tail_len(), "checkpoints": rows });
            if let Some(n) = digits {
                v["digits"] = json!(Word::new(out.word.digits()[..n as usize].to_vec()).to_string());
            }
            Ok(Output::json(v, OK))
        }
    }
}

fn verify_cmd(ctx: &Ctx, suite: &str) -> Result<Output> {
    let suite: Suite = suite.parse()?;
    let results = verify::run(suite, &VerifyConfig { precision: ctx.prec, ..VerifyConfig::default() });
    let failed = results.iter().filter(|r| !r.passed).count();
    let code = if failed == 0 { OK } else { NEGATIVE };
    match ctx.format(Format::Csv) {
        Format::Json => Ok(Output::json(json!({ "results": results, "failed": failed }), code)),
        Format::Csv => {
            let mut body: String = results.iter().map(|r| format!("{r}\n")).collect();
            body.push_str(&format!("{} of {} checks pass\n", results.len() - failed, results.len()));
            Ok(Output::text(body, code))
        }
    }
}
