use serde::Serialize;

use super::MoranLevel;
use crate::error::{domain, Result};
use crate::scalar::RealScalar;
use crate::sequence::{Digit, Word};

/// How the free positions of each block are filled.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeDigits {
    Zeros,
    /// Cycle through the word; a `-1` landing on a constrained position becomes `0`.
    Cycle(Word),
}

/// Generation `m` is a free block of `3q·2^m` digits followed by `1^{2^{m+1}} 0^{2^m}`.
/// Every `q`-th free digit is constrained to be different from `-1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaPattern {
    pub q: u32,
    pub prefix: Word,
    pub free: FreeDigits,
    pub generations: u32,
}

impl SigmaPattern {
    pub fn new(q: u32, generations: u32) -> Self {
        SigmaPattern { q, prefix: Word::empty(), free: FreeDigits::Zeros, generations }
    }

    /// Start of generation `m`: `3(q+1)(2^m - 1)`.
    pub fn block_start(&self, m: u32) -> u64 {
        3 * (self.q as u64 + 1) * ((1u64 << m) - 1)
    }

    /// Length of the tail after the prefix.
    pub fn tail_len(&self) -> u64 {
        self.block_start(self.generations)
    }
}

/// Zero frequency of the tail at `r_m` and at `ℓ_m = r_m - 2^{m-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Checkpoint {
    pub m: u32,
    pub r: u64,
    pub freq_r: f64,
    pub l: u64,
    pub freq_l: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaOutput {
    pub word: Word,
    pub checkpoints: Vec<Checkpoint>,
}

fn tail(p: &SigmaPattern) -> Vec<Digit> {
    let q = p.q as usize;
    let mut out = Vec::with_capacity(p.tail_len() as usize);
    let cycle: Vec<Digit> = match &p.free {
        FreeDigits::Zeros => vec![Digit::Zero],
        FreeDigits::Cycle(w) if w.is_empty() => vec![Digit::Zero],
        FreeDigits::Cycle(w) => w.digits().to_vec(),
    };
    let mut next = 0;
    for m in 0..p.generations {
        let size = 1usize << m;
        for k in 1..=3 * q * size {
            let mut d = cycle[next % cycle.len()];
            next += 1;
            if k % q == 0 && d == Digit::Minus {
                d = Digit::Zero;
            }
            out.push(d);
        }
        out.extend(std::iter::repeat(Digit::Plus).take(2 * size));
        out.extend(std::iter::repeat(Digit::Zero).take(size));
    }
    out
}

/// The first `n` tail digits after the prefix, with checkpoint frequencies up to `n`.
pub fn sigma_generate(p: &SigmaPattern, n: u64) -> Result<SigmaOutput> {
    if p.q == 0 {
        return domain("q must be positive");
    }
    if p.generations > 40 || n > p.tail_len() {
        return domain(format!("{n} digits exceed the {} generated", p.tail_len().min(u64::MAX)));
    }
    let digits = tail(p);
    let mut zeros = vec![0u64; digits.len() + 1];
    for (i, d) in digits.iter().enumerate() {
        zeros[i + 1] = zeros[i] + (*d == Digit::Zero) as u64;
    }
    let checkpoints = (1..=p.generations)
        .map(|m| {
            let r = p.block_start(m);
            let l = r - (1u64 << (m - 1));
            Checkpoint { m, r, freq_r: zeros[r as usize] as f64 / r as f64, l, freq_l: zeros[l as usize] as f64 / l as f64 }
        })
        .take_while(|c| c.r <= n)
        .collect();
    let mut word = p.prefix.digits().to_vec();
    word.extend_from_slice(&digits[..n as usize]);
    Ok(SigmaOutput { word: Word::new(word), checkpoints })
}

/// Per-digit Moran levels of the pattern's free structure with ratio `gamma`.
pub fn sigma_moran_levels(q: u32, gamma: &RealScalar, generations: u32) -> Vec<MoranLevel> {
    let q = q as usize;
    let mut out = Vec::new();
    for m in 0..generations {
        let size = 1usize << m;
        for k in 1..=3 * q * size {
            out.push(MoranLevel { count: if k % q == 0 { 2 } else { 3 }, ratio: gamma.clone() });
        }
        out.extend(std::iter::repeat(MoranLevel { count: 1, ratio: gamma.clone() }).take(3 * size));
    }
    out
}
