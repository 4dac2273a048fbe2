use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::sequence::{Digit, Word};

/// One word's vertical slice `[Π(w(-1)^∞,λ), Π(w1^∞,λ)] ∩ [0,1]` at a grid λ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Band {
    pub lambda: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub word: Word,
}

/// Level-`n` picture of `{(λ, t) : t in E_λ}` on a `width x height` grid.
#[derive(Clone, Debug, Serialize)]
pub struct Raster {
    pub depth: usize,
    pub lambdas: Vec<f64>,
    pub height: usize,
    pub bands: Vec<Band>,
    /// `occupied[row][col]`, row 0 at `t = 0`.
    pub occupied: Vec<Vec<bool>>,
}

impl Raster {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,t_lo,t_hi,word\n");
        for b in &self.bands {
            out.push_str(&format!("{},{},{},{}\n", b.lambda, b.t_lo, b.t_hi, b.word.pretty()));
        }
        out
    }

    /// Occupied fraction per column.
    pub fn column_fill(&self) -> Vec<f64> {
        (0..self.lambdas.len())
            .map(|c| self.occupied.iter().filter(|row| row[c]).count() as f64 / self.height as f64)
            .collect()
    }
}

fn bands_at(lambda: f64, depth: usize) -> Vec<Band> {
    let mut out = Vec::new();
    let mut digits = Vec::with_capacity(depth);
    walk(lambda, depth, 0.0, 1.0, &mut digits, &mut out);
    out
}

fn walk(lambda: f64, depth: usize, center: f64, pow: f64, digits: &mut Vec<Digit>, out: &mut Vec<Band>) {
    let (lo, hi) = (center - pow, center + pow);
    if hi < 0.0 || lo > 1.0 {
        return;
    }
    if digits.len() == depth {
        out.push(Band { lambda, t_lo: lo.max(0.0), t_hi: hi.min(1.0), word: Word::new(digits.clone()) });
        return;
    }
    for d in Digit::ALL {
        digits.push(d);
        walk(lambda, depth, center + d.value() as f64 * (1.0 - lambda) * pow, pow * lambda, digits, out);
        digits.pop();
    }
}

/// Equally spaced grid `λ_j = (j+1)/(3 width)`, ending at 1/3.
pub fn default_lambda_grid(width: usize) -> Vec<f64> {
    (0..width).map(|j| (j + 1) as f64 / (3 * width) as f64).collect()
}

/// Bands and occupancy for every length-`depth` word at each grid λ.
pub fn gamma_raster(depth: usize, lambdas: &[f64], height: usize, budget: u64) -> Result<Raster> {
    if height == 0 || lambdas.is_empty() {
        return domain("raster grid must be non-empty");
    }
    if let Some(&bad) = lambdas.iter().find(|&&l| !(l > 0.0 && l <= 1.0 / 3.0 + 1e-15)) {
        return domain(format!("λ = {bad} is outside (0, 1/3]"));
    }
    let words = 3u64.checked_pow(depth as u32).unwrap_or(u64::MAX);
    if words.saturating_mul(lambdas.len() as u64) > budget {
        return Err(Error::Budget(format!("3^{depth} words on {} columns exceed budget {budget}", lambdas.len())));
    }
    let columns: Vec<Vec<Band>> = lambdas.par_iter().map(|&l| bands_at(l, depth)).collect();
    let mut occupied = vec![vec![false; lambdas.len()]; height];
    let h = height as f64;
    for (c, bands) in columns.iter().enumerate() {
        for b in bands {
            let first = ((b.t_lo * h).floor() as usize).min(height - 1);
            let last = ((b.t_hi * h).ceil() as usize).clamp(first + 1, height);
            for row in occupied.iter_mut().take(last).skip(first) {
                row[c] = true;
            }
        }
    }
    Ok(Raster { depth, lambdas: lambdas.to_vec(), height, bands: columns.into_iter().flatten().collect(), occupied })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_zero_fills_strip() {
        let r = gamma_raster(0, &[0.1, 0.25], 10, 100).unwrap();
        assert!(r.occupied.iter().all(|row| row.iter().all(|&x| x)));
    }

    #[test]
    fn quarter_slice_depth_one() {
        let r = gamma_raster(1, &[0.25], 8, 100).unwrap();
        let spans: Vec<(f64, f64)> = r.bands.iter().map(|b| (b.t_lo, b.t_hi)).collect();
        assert_eq!(spans, vec![(0.0, 0.25), (0.5, 1.0)]);
        let col: Vec<bool> = r.occupied.iter().map(|row| row[0]).collect();
        assert_eq!(col, vec![true, true, false, false, true, true, true, true]);
        assert!(r.to_csv().starts_with("lambda,t_lo,t_hi,word\n0.25,0,0.25,0\n"));
    }

    #[test]
    fn third_column_is_full() {
        let grid = default_lambda_grid(6);
        assert_eq!(*grid.last().unwrap(), 1.0 / 3.0);
        let r = gamma_raster(5, &grid, 50, 1_000_000).unwrap();
        assert_eq!(*r.column_fill().last().unwrap(), 1.0);
        assert!(gamma_raster(20, &grid, 50, 1_000_000).is_err());
    }
}
