use serde::Serialize;

use super::{lambda_cover, Window};
use crate::error::{domain, Result};
use crate::scalar::RealScalar;

/// `ψ_t(λ) = ln 3 / -ln γ_max(λ)` where `γ_max(λ)` is the supremum of the fiber below `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PsiSample {
    pub lambda: f64,
    pub psi: f64,
    /// Largest fiber point below `lambda`, or `None` when there is none.
    pub gamma: Option<f64>,
}

impl PsiSample {
    pub fn below_min(&self) -> bool {
        self.gamma.is_none()
    }
}

/// `ψ_t` at each of `lambdas`, read off a level-`depth` cover.
pub fn psi_samples(t: &RealScalar, depth: usize, lambdas: &[f64], budget: u64) -> Result<(Vec<PsiSample>, bool)> {
    if let Some(&bad) = lambdas.iter().find(|&&l| !(l > 0.0 && l <= 1.0 / 3.0 + 1e-15)) {
        return domain(format!("λ = {bad} is outside (0, 1/3]"));
    }
    let top = lambdas.iter().cloned().fold(0.0, f64::max);
    let mut window = Window::default_for(t.to_f64());
    if top < window.hi {
        window = Window::new(window.lo.min(top / 2.0), top)?;
    }
    let cover = lambda_cover(t, depth, Some(window), budget)?;
    let bounds = cover.bounds();
    let ln3 = 3f64.ln();
    let samples = lambdas
        .iter()
        .map(|&lambda| {
            // last interval starting strictly below lambda
            let i = bounds.partition_point(|&(lo, _)| lo < lambda);
            let gamma = (i > 0).then(|| bounds[i - 1].1.min(lambda));
            let psi = gamma.map_or(0.0, |g| ln3 / -g.ln());
            PsiSample { lambda, psi, gamma }
        })
        .collect();
    Ok((samples, cover.truncated()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_in_first_gap() {
        let t = RealScalar::parse("1/2", 128).unwrap();
        let (s, _) = psi_samples(&t, 14, &[0.2, 0.2705, 0.276, 1.0 / 3.0], 8_000_000).unwrap();
        assert!(s[0].below_min() && s[0].psi == 0.0);
        assert_eq!(s[1].psi, s[2].psi);
        assert!((s[2].psi - 0.83811333743743613).abs() < 1e-4, "{}", s[2].psi);
        assert!((s[3].psi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_large_lambda() {
        let t = RealScalar::parse("1/2", 128).unwrap();
        assert!(psi_samples(&t, 6, &[0.4], 1000).is_err());
    }
}
