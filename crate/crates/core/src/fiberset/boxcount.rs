use serde::Serialize;

use crate::error::{domain, Result};

/// Least-squares slope of `ln N(ε)` against `ln(1/ε)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxCountEstimate {
    pub slope: f64,
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Number of grid cells of size `eps` (anchored at `lo`) meeting the intervals inside `[lo, hi]`.
fn count(intervals: &[(f64, f64)], lo: f64, hi: f64, eps: f64) -> u64 {
    let mut total = 0u64;
    let mut last: Option<u64> = None;
    for &(a, b) in intervals {
        let (a, b) = (a.max(lo), b.min(hi));
        if a > b {
            continue;
        }
        let mut first = ((a - lo) / eps).floor() as u64;
        let end = (((b - lo) / eps).ceil() as u64).saturating_sub(1).max(first);
        if let Some(l) = last {
            first = first.max(l + 1);
        }
        if end >= first {
            total += end - first + 1;
            last = Some(end);
        }
    }
    total
}

/// `N(ε)` for each scale.
pub fn box_counts(intervals: &[(f64, f64)], lo: f64, hi: f64, scales: &[f64]) -> Vec<u64> {
    scales.iter().map(|&e| count(intervals, lo, hi, e)).collect()
}

/// Geometric scales from `width/4` down to `resolution`, `per_decade` per factor of 10.
pub fn default_scales(width: f64, resolution: f64, per_decade: usize) -> Vec<f64> {
    let top = width / 4.0;
    let n = ((top / resolution).log10() * per_decade as f64).floor().max(1.0) as usize;
    (0..=n).map(|i| top * 10f64.powf(-(i as f64) / per_decade as f64)).collect()
}

/// Box-counting dimension of a union of sorted intervals restricted to `[lo, hi]`.
pub fn box_count_estimate(intervals: &[(f64, f64)], lo: f64, hi: f64, scales: &[f64]) -> Result<BoxCountEstimate> {
    if scales.len() < 2 || scales.iter().any(|&e| !(e > 0.0)) {
        return domain("need at least two positive scales");
    }
    let counts = box_counts(intervals, lo, hi, scales);
    if counts.iter().any(|&c| c == 0) {
        return domain("set misses the window at some scale");
    }
    let xs: Vec<f64> = scales.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(BoxCountEstimate { slope: sxy / sxx, scales: scales.to_vec(), counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_has_dimension_one() {
        let scales = [0.1, 0.01, 0.001];
        let e = box_count_estimate(&[(0.0, 1.0)], 0.0, 1.0, &scales).unwrap();
        assert!((e.slope - 1.0).abs() < 0.01);
    }

    #[test]
    fn cantor_level_cover() {
        // level-10 middle-thirds cover
        let mut iv = vec![(0.0f64, 1.0f64)];
        for _ in 0..10 {
            iv = iv.iter().flat_map(|&(a, b)| { let w = (b - a) / 3.0; [(a, a + w), (b - w, b)] }).collect();
        }
        let scales: Vec<f64> = (1..9).map(|k| 3f64.powi(-k) * 0.999).collect();
        let e = box_count_estimate(&iv, 0.0, 1.0, &scales).unwrap();
        assert!((e.slope - 2f64.ln() / 3f64.ln()).abs() < 0.05, "{}", e.slope);
    }

    #[test]
    fn overlapping_cells_counted_once() {
        assert_eq!(count(&[(0.0, 0.05), (0.06, 0.12)], 0.0, 1.0, 0.1), 2);
        assert_eq!(default_scales(1.0, 1e-3, 2).len(), 5);
    }
}
