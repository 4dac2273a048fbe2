//! Certified level-`n` covers of the fiber `Λ(t) = {λ in (0,1/3] : t in E_λ}`,
//! its gaps, the dimension profile `ψ_t`, rasters of the master set, and a
//! box-counting estimator.

mod boxcount;
mod psi;
mod raster;

pub use boxcount::{box_count_estimate, box_counts, default_scales, BoxCountEstimate};
pub use psi::{psi_samples, PsiSample};
pub use raster::{default_lambda_grid, gamma_raster, Band, Raster};

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{domain, Result};
use crate::scalar::{Interval, RealScalar};
use crate::sequence::{Digit, Word};

/// Default node budget for a cover.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Deepest supported level (two bits per digit in a `u128`).
pub const MAX_DEPTH: usize = 64;

/// The window is split into this many independent pieces.
const CHUNKS: usize = 64;

const ULP1: f64 = f64::EPSILON;

/// λ-window of a cover, in f64. `hi_is_third` marks an upper end of exactly 1/3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    pub hi_is_third: bool,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let third = 1.0 / 3.0;
        if !(lo < hi) || hi <= 0.0 {
            return domain(format!("empty window [{lo}, {hi}]"));
        }
        let lo = lo.max(1e-12);
        let hi_is_third = hi >= third;
        Ok(Window { lo, hi: hi.min(third), hi_is_third })
    }

    /// `[min{t,(1-t)/2} - 1e-3, 1/3]`.
    pub fn default_for(t: f64) -> Self {
        let lo = (t.min((1.0 - t) / 2.0) - 1e-3).max(1e-12);
        Window { lo, hi: 1.0 / 3.0, hi_is_third: true }
    }
}

/// A point of the fiber certified at the full depth: `|t - Π(word·0^∞, λ)| < λ^depth`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HitWitness {
    pub lambda: f64,
    pub word: Word,
}

#[derive(Clone, Copy, Debug)]
struct Span {
    lo: f64,
    hi: f64,
    hit: Option<(f64, u128, u32)>,
}

/// Sorted disjoint closed λ-intervals containing `Λ(t) ∩ window`.
#[derive(Clone, Debug)]
pub struct IntervalCover {
    t: RealScalar,
    depth: usize,
    window: Window,
    spans: Vec<Span>,
    truncated: bool,
    nodes: u64,
}

impl IntervalCover {
    pub fn t(&self) -> &RealScalar {
        &self.t
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// The budget ran out; unexplored regions were kept whole.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    /// Interval endpoints as f64 pairs.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.spans.iter().map(|s| (s.lo, s.hi)).collect()
    }

    fn endpoint(&self, x: f64) -> RealScalar {
        let p = self.t.precision();
        if self.window.hi_is_third && x == self.window.hi {
            RealScalar::from_ratio(1, 3, p)
        } else {
            RealScalar::from_f64(x, p)
        }
    }

    pub fn intervals(&self) -> Vec<Interval> {
        self.spans.iter().map(|s| Interval::new(self.endpoint(s.lo), self.endpoint(s.hi))).collect()
    }

    /// Open intervals between consecutive cover intervals; none of them meets `Λ(t)`.
    pub fn gaps(&self) -> Vec<Interval> {
        self.spans
            .windows(2)
            .map(|w| Interval::new(self.endpoint(w[0].hi), self.endpoint(w[1].lo)))
            .collect()
    }

    pub fn gap_bounds(&self) -> Vec<(f64, f64)> {
        self.spans.windows(2).map(|w| (w[0].hi, w[1].lo)).collect()
    }

    pub fn min(&self) -> Option<RealScalar> {
        self.spans.first().map(|s| self.endpoint(s.lo))
    }

    pub fn max(&self) -> Option<RealScalar> {
        self.spans.last().map(|s| self.endpoint(s.hi))
    }

    /// One certified fiber point per interval, where the search reached full depth.
    pub fn witnesses(&self) -> Vec<Option<HitWitness>> {
        self.spans
            .iter()
            .map(|s| s.hit.map(|(lambda, word, k)| HitWitness { lambda, word: unpack(word, k) }))
            .collect()
    }

    /// Whether `λ` lies in one of the intervals.
    pub fn contains(&self, lambda: f64) -> bool {
        let i = self.spans.partition_point(|s| s.hi < lambda);
        i < self.spans.len() && self.spans[i].lo <= lambda
    }
}

impl Serialize for IntervalCover {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pair = |i: Interval| [i.lo.to_decimal(), i.hi.to_decimal()];
        let intervals: Vec<[String; 2]> = self.intervals().into_iter().map(pair).collect();
        let gaps: Vec<[String; 2]> = self.gaps().into_iter().map(pair).collect();
        let mut st = s.serialize_struct("IntervalCover", 6)?;
        st.serialize_field("t", &self.t.to_decimal())?;
        st.serialize_field("depth", &self.depth)?;
        st.serialize_field("intervals", &intervals)?;
        st.serialize_field("gaps", &gaps)?;
        st.serialize_field("truncated", &self.truncated)?;
        st.serialize_field("nodes", &self.nodes)?;
        st.end()
    }
}

fn unpack(word: u128, k: u32) -> Word {
    Word::new((0..k).map(|j| Digit::ALL[((word >> (2 * j)) & 3) as usize]).collect())
}

fn digit_value(word: u128, j: u32) -> f64 {
    ((word >> (2 * j)) & 3) as f64 - 1.0
}

/// `Π(word · 0^∞, λ)` for the first `k` digits.
fn center(word: u128, k: u32, lam: f64) -> f64 {
    let mut acc = 0.0;
    for j in (0..k).rev() {
        acc = acc * lam + digit_value(word, j);
    }
    (1.0 - lam) * acc
}

#[derive(Clone, Copy, Debug)]
struct Node {
    a: f64,
    b: f64,
    k: u32,
    word: u128,
    /// centers at both ends
    xa: f64,
    xb: f64,
    /// `a^k`, `b^k`
    pa: f64,
    pb: f64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Max-heap order: leftmost first, then deepest, then by word.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .a
            .total_cmp(&self.a)
            .then(self.k.cmp(&other.k))
            .then(other.word.cmp(&self.word))
            .then(other.b.total_cmp(&self.b))
    }
}

struct Search {
    t: f64,
    t_err: f64,
    depth: u32,
}

struct ChunkResult {
    spans: Vec<Span>,
    nodes: u64,
    truncated: bool,
}

fn merge_spans(spans: &mut Vec<Span>) {
    spans.sort_by(|x, y| x.lo.total_cmp(&y.lo).then(x.hi.total_cmp(&y.hi)));
    let mut out: Vec<Span> = Vec::with_capacity(spans.len());
    for s in spans.drain(..) {
        match out.last_mut() {
            Some(last) if s.lo <= last.hi => {
                if s.hi > last.hi {
                    last.hi = s.hi;
                }
                if last.hit.is_none() {
                    last.hit = s.hit;
                }
            }
            _ => out.push(s),
        }
    }
    *spans = out;
}

impl Search {
    /// Rounding allowance for quantities built from `k` digits.
    fn slack(&self, k: u32) -> f64 {
        (2 * k + 6) as f64 * ULP1 + self.t_err
    }

    fn root(&self, a: f64, b: f64) -> Node {
        Node { a, b, k: 0, word: 0, xa: 0.0, xb: 0.0, pa: 1.0, pb: 1.0 }
    }

    fn run(&self, a: f64, b: f64, budget: u64) -> ChunkResult {
        let mut heap = BinaryHeap::new();
        heap.push(self.root(a, b));
        let mut spans: Vec<Span> = Vec::new();
        let mut nodes = 0u64;
        let mut truncated = false;
        while let Some(node) = heap.pop() {
            if nodes >= budget {
                truncated = true;
                spans.push(Span { lo: node.a, hi: node.b, hit: None });
                spans.extend(heap.drain().map(|n| Span { lo: n.a, hi: n.b, hit: None }));
                break;
            }
            nodes += 1;
            self.step(node, &mut heap, &mut spans);
            if spans.len() > 1 << 15 {
                merge_spans(&mut spans);
            }
        }
        merge_spans(&mut spans);
        ChunkResult { spans, nodes, truncated }
    }

    fn step(&self, n: Node, heap: &mut BinaryHeap<Node>, spans: &mut Vec<Span>) {
        let s = self.slack(n.k);
        let width = n.b - n.a;
        // lower and upper envelopes Π(w(-1)^∞,·), Π(w1^∞,·) have slope at most 2
        let min_lower = 0.5 * ((n.xa - n.pa) + (n.xb - n.pb)) - width;
        let max_upper = 0.5 * ((n.xa + n.pa) + (n.xb + n.pb)) + width;
        if min_lower > self.t + s || max_upper < self.t - s {
            return;
        }
        let env = n.pa.min(n.pb);
        let floor = 2.0 * env < 4.0 * s || width <= 8.0 * ULP1 * n.b;
        if width <= env || floor {
            if n.k == self.depth || floor {
                let hit = if n.k == self.depth { self.hit(&n) } else { None };
                spans.push(Span { lo: n.a, hi: n.b, hit });
                return;
            }
            for d in [-1.0f64, 0.0, 1.0] {
                let code = (d + 1.0) as u128;
                heap.push(Node {
                    a: n.a,
                    b: n.b,
                    k: n.k + 1,
                    word: n.word | (code << (2 * n.k)),
                    xa: n.xa + d * (1.0 - n.a) * n.pa,
                    xb: n.xb + d * (1.0 - n.b) * n.pb,
                    pa: n.pa * n.a,
                    pb: n.pb * n.b,
                });
            }
            return;
        }
        let m = 0.5 * (n.a + n.b);
        let xm = center(n.word, n.k, m);
        let pm = m.powi(n.k as i32);
        heap.push(Node { b: m, xb: xm, pb: pm, ..n });
        heap.push(Node { a: m, xa: xm, pa: pm, ..n });
    }

    fn hit(&self, n: &Node) -> Option<(f64, u128, u32)> {
        let m = 0.5 * (n.a + n.b);
        let x = center(n.word, n.k, m);
        let r = m.powi(n.k as i32);
        ((self.t - x).abs() <= r - self.slack(n.k)).then_some((m, n.word, n.k))
    }
}

/// Certified cover of `Λ(t)` inside `window` at level `depth`.
pub fn lambda_cover(t: &RealScalar, depth: usize, window: Option<Window>, budget: u64) -> Result<IntervalCover> {
    let p = t.precision();
    let third = RealScalar::from_ratio(1, 3, p);
    if t.sign() != Some(Ordering::Greater) || !t.certainly_lt(&RealScalar::one(p)) {
        return domain(format!("t = {t:.12} is outside (0, 1)"));
    }
    if !t.certainly_lt(&third) && !t.certainly_gt(&third) {
        return domain("t = 1/3 has the one-point fiber {1/3}");
    }
    if depth > MAX_DEPTH {
        return domain(format!("depth {depth} exceeds {MAX_DEPTH}"));
    }
    let tf = t.to_f64();
    let t_err = (t - &RealScalar::from_f64(tf, p)).mag();
    let window = window.unwrap_or_else(|| Window::default_for(tf));
    let search = Search { t: tf, t_err, depth: depth as u32 };
    let chunk_budget = (budget / CHUNKS as u64).max(1);
    let step = (window.hi - window.lo) / CHUNKS as f64;
    let edges: Vec<f64> = (0..=CHUNKS)
        .map(|i| if i == CHUNKS { window.hi } else { window.lo + step * i as f64 })
        .collect();
    let mut allowance = vec![chunk_budget; CHUNKS];
    let mut results: Vec<ChunkResult> =
        (0..CHUNKS).into_par_iter().map(|i| search.run(edges[i], edges[i + 1], allowance[i])).collect();
    // hand budget left over by finished chunks to truncated ones and redo those
    for _ in 0..4 {
        let redo: Vec<usize> = (0..CHUNKS).filter(|&i| results[i].truncated).collect();
        let used: u64 = (0..CHUNKS).map(|i| if results[i].truncated { allowance[i] } else { results[i].nodes }).sum();
        let spare = budget.saturating_sub(used) / redo.len().max(1) as u64;
        if redo.is_empty() || spare == 0 {
            break;
        }
        for &i in &redo {
            allowance[i] += spare;
        }
        let rerun: Vec<(usize, ChunkResult)> =
            redo.par_iter().map(|&i| (i, search.run(edges[i], edges[i + 1], allowance[i]))).collect();
        for (i, r) in rerun {
            results[i] = r;
        }
    }
    let mut spans = Vec::new();
    let mut nodes = 0;
    let mut truncated = false;
    for r in results {
        spans.extend(r.spans);
        nodes += r.nodes;
        truncated |= r.truncated;
    }
    merge_spans(&mut spans);
    Ok(IntervalCover { t: t.clone(), depth, window, spans, truncated, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{membership, Membership};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: usize = 128;

    fn q(s: &str) -> RealScalar {
        RealScalar::parse(s, P).unwrap()
    }

    #[test]
    fn half_has_figure_gaps() {
        let w = Window::new(0.24, 1.0 / 3.0).unwrap();
        let cover = lambda_cover(&q("1/2"), 12, Some(w), 4_000_000).unwrap();
        assert!(!cover.truncated());
        let min = cover.min().unwrap().to_f64();
        assert!((min - 0.25).abs() < 1e-6);
        assert_eq!(cover.max().unwrap().cmp_value(&q("1/3")), Ordering::Equal);
        let gaps = cover.gap_bounds();
        for (lo, hi) in [(0.270, 0.277), (0.316, 0.319)] {
            assert!(gaps.iter().any(|&(a, b)| a <= lo && hi <= b), "no gap around ({lo}, {hi})");
        }
    }

    #[test]
    fn min_tracks_theory() {
        let cover = lambda_cover(&q("0.2"), 8, None, DEFAULT_BUDGET).unwrap();
        assert!((cover.min().unwrap().to_f64() - 0.2).abs() < 1e-3);
        assert!(lambda_cover(&q("1/3"), 8, None, DEFAULT_BUDGET).is_err());
        assert!(lambda_cover(&q("0"), 8, None, DEFAULT_BUDGET).is_err());
        assert!(lambda_cover(&q("1"), 8, None, DEFAULT_BUDGET).is_err());
    }

    #[test]
    fn min_error_shrinks_with_depth() {
        let errs: Vec<f64> = [4, 8, 12]
            .iter()
            .map(|&n| (lambda_cover(&q("1/2"), n, None, DEFAULT_BUDGET).unwrap().min().unwrap().to_f64() - 0.25).abs())
            .collect();
        assert!(errs[1] <= errs[0] && errs[2] <= errs[1]);
    }

    #[test]
    fn deeper_cover_is_contained() {
        let w = Window::new(0.26, 0.3).unwrap();
        let a = lambda_cover(&q("1/2"), 7, Some(w), DEFAULT_BUDGET).unwrap();
        let b = lambda_cover(&q("1/2"), 8, Some(w), DEFAULT_BUDGET).unwrap();
        for (lo, hi) in b.bounds() {
            assert!(a.bounds().iter().any(|&(x, y)| x <= lo && hi <= y));
        }
    }

    #[test]
    fn deterministic_output() {
        let a = lambda_cover(&q("0.4"), 10, None, 200_000).unwrap();
        let b = lambda_cover(&q("0.4"), 10, None, 200_000).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn gaps_and_hits_agree_with_membership() {
        let t = q("1/2");
        let depth = 8;
        let w = Window::new(0.25, 0.32).unwrap();
        let cover = lambda_cover(&t, depth, Some(w), DEFAULT_BUDGET).unwrap();
        let gaps: Vec<(f64, f64)> = cover.gap_bounds().into_iter().filter(|(a, b)| b - a > 1e-12).collect();
        assert!(!gaps.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let (a, b) = gaps[rng.gen_range(0..gaps.len())];
            let l = a + (b - a) * rng.gen_range(0.01..0.99);
            let m = membership(&t, &RealScalar::from_f64(l, P), depth + 8).unwrap();
            assert_eq!(m, Membership::Out, "λ = {l}");
        }
        let mut checked = 0;
        for h in cover.witnesses().into_iter().flatten().take(200) {
            let m = membership(&t, &RealScalar::from_f64(h.lambda, P), depth).unwrap();
            assert_eq!(m, Membership::InCover);
            checked += 1;
        }
        assert!(checked > 10);
    }
}
