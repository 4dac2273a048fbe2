//! Digit sequences over {-1, 0, 1}: finite words, eventually periodic codings,
//! lexicographic order, the ultrametric and zero-digit frequencies.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One signed ternary digit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Digit {
    Minus,
    Zero,
    Plus,
}

impl Digit {
    pub const ALL: [Digit; 3] = [Digit::Minus, Digit::Zero, Digit::Plus];

    pub fn value(self) -> i8 {
        match self {
            Digit::Minus => -1,
            Digit::Zero => 0,
            Digit::Plus => 1,
        }
    }

    pub fn from_value(v: i64) -> Result<Digit> {
        match v {
            -1 => Ok(Digit::Minus),
            0 => Ok(Digit::Zero),
            1 => Ok(Digit::Plus),
            _ => Err(Error::Parse(format!("digit {v} is not in {{-1,0,1}}"))),
        }
    }

    pub fn negate(self) -> Digit {
        match self {
            Digit::Minus => Digit::Plus,
            Digit::Zero => Digit::Zero,
            Digit::Plus => Digit::Minus,
        }
    }

    /// Index 0, 1, 2 for -1, 0, 1.
    pub fn index(self) -> usize {
        (self.value() + 1) as usize
    }

    pub fn succ(self) -> Option<Digit> {
        match self {
            Digit::Minus => Some(Digit::Zero),
            Digit::Zero => Some(Digit::Plus),
            Digit::Plus => None,
        }
    }

    pub fn pred(self) -> Option<Digit> {
        match self {
            Digit::Minus => None,
            Digit::Zero => Some(Digit::Minus),
            Digit::Plus => Some(Digit::Zero),
        }
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl Serialize for Digit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for Digit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Digit::from_value(v).map_err(serde::de::Error::custom)
    }
}

/// A finite word over the digit alphabet.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<Digit>);

impl Word {
    pub fn new(digits: Vec<Digit>) -> Self {
        Word(digits)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_values(values: &[i64]) -> Result<Self> {
        values.iter().map(|&v| Digit::from_value(v)).collect::<Result<Vec<_>>>().map(Word)
    }

    pub fn digits(&self) -> &[Digit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, d: Digit) {
        self.0.push(d);
    }

    pub fn values(&self) -> Vec<i8> {
        self.0.iter().map(|d| d.value()).collect()
    }

    pub fn last(&self) -> Option<Digit> {
        self.0.last().copied()
    }

    /// Same word with the last digit raised by one.
    pub fn successor(&self) -> Result<Word> {
        self.bump(Digit::succ, "successor")
    }

    /// Same word with the last digit lowered by one.
    pub fn predecessor(&self) -> Result<Word> {
        self.bump(Digit::pred, "predecessor")
    }

    fn bump(&self, step: fn(Digit) -> Option<Digit>, what: &str) -> Result<Word> {
        let last = self.last().ok_or_else(|| Error::Domain(format!("{what} of the empty word")))?;
        let next = step(last).ok_or_else(|| Error::Domain(format!("{what} of a word ending in {last}")))?;
        let mut out = self.0.clone();
        *out.last_mut().expect("nonempty") = next;
        Ok(Word(out))
    }

    pub fn negate(&self) -> Word {
        Word(self.0.iter().map(|d| d.negate()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Number of zeros.
    pub fn zeros(&self) -> usize {
        self.0.iter().filter(|&&d| d == Digit::Zero).count()
    }

    /// Compact rendering such as `1(-1)0`.
    pub fn pretty(&self) -> String {
        self.0
            .iter()
            .map(|d| match d {
                Digit::Minus => "(-1)".to_string(),
                d => d.to_string(),
            })
            .collect()
    }
}

impl From<Vec<Digit>> for Word {
    fn from(v: Vec<Digit>) -> Self {
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        s.split(',')
            .map(|p| {
                let p = p.trim();
                p.parse::<i64>()
                    .map_err(|_| Error::Parse(format!("bad digit '{p}'")))
                    .and_then(Digit::from_value)
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

/// The infinite sequence `preperiod · period^∞`, kept in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PeriodicCoding {
    pre: Word,
    per: Word,
}

fn primitive_root(per: &[Digit]) -> &[Digit] {
    let p = per.len();
    for d in 1..p {
        if p % d == 0 && (d..p).all(|i| per[i] == per[i - d]) {
            return &per[..d];
        }
    }
    per
}

impl PeriodicCoding {
    pub fn new(pre: Word, per: Word) -> Result<Self> {
        if per.is_empty() {
            return Err(Error::Domain("period must be nonempty".into()));
        }
        let mut pre = pre.0;
        let mut per = primitive_root(&per.0).to_vec();
        while let Some(&last) = pre.last() {
            if last != *per.last().expect("nonempty period") {
                break;
            }
            pre.pop();
            per.rotate_right(1);
        }
        Ok(PeriodicCoding { pre: Word(pre), per: Word(per) })
    }

    pub fn from_values(pre: &[i64], per: &[i64]) -> Result<Self> {
        Self::new(Word::from_values(pre)?, Word::from_values(per)?)
    }

    /// `d^∞` for a single digit.
    pub fn constant(d: Digit) -> Self {
        PeriodicCoding { pre: Word::empty(), per: Word(vec![d]) }
    }

    pub fn zeros() -> Self {
        Self::constant(Digit::Zero)
    }

    pub fn ones() -> Self {
        Self::constant(Digit::Plus)
    }

    pub fn minus_ones() -> Self {
        Self::constant(Digit::Minus)
    }

    /// `w · d^∞`.
    pub fn with_tail(w: &Word, d: Digit) -> Self {
        Self::new(w.clone(), Word(vec![d])).expect("nonempty period")
    }

    pub fn preperiod(&self) -> &Word {
        &self.pre
    }

    pub fn period(&self) -> &Word {
        &self.per
    }

    /// Digit at 0-based position `i`.
    pub fn digit(&self, i: usize) -> Digit {
        let m = self.pre.len();
        if i < m {
            self.pre.0[i]
        } else {
            self.per.0[(i - m) % self.per.len()]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Digit> + '_ {
        (0..).map(move |i| self.digit(i))
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.iter().take(n).collect())
    }

    /// Length of a prefix after which the two sequences agree forever if they agree up to it.
    fn horizon(&self, other: &Self) -> usize {
        let l = self.per.len().lcm(&other.per.len());
        self.pre.len().max(other.pre.len()) + l
    }

    /// 0-based index of the first disagreement, or `None` for equal sequences.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        (0..self.horizon(other)).find(|&i| self.digit(i) != other.digit(i))
    }

    pub fn lex_compare(&self, other: &Self) -> Ordering {
        match self.first_difference(other) {
            Some(i) => self.digit(i).cmp(&other.digit(i)),
            None => Ordering::Equal,
        }
    }

    /// `3^(1-k)` with `k` the 1-based first disagreement index.
    pub fn rho_distance(&self, other: &Self) -> BigRational {
        match self.first_difference(other) {
            None => BigRational::zero(),
            Some(i) => {
                BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(3u32), i))
            }
        }
    }

    pub fn negate(&self) -> Self {
        PeriodicCoding { pre: self.pre.negate(), per: self.per.negate() }
    }

    pub fn frequency_stats(&self, n: usize) -> FrequencyStats {
        let mut counts = [0usize; 3];
        for d in self.iter().take(n) {
            counts[d.index()] += 1;
        }
        let f = BigRational::new(BigInt::from(self.per.zeros()), BigInt::from(self.per.len()));
        FrequencyStats { prefix_length: n, counts, lower_freq0: f.clone(), upper_freq0: f }
    }

    /// Exact asymptotic frequency of the digit 0.
    pub fn zero_frequency(&self) -> BigRational {
        BigRational::new(BigInt::from(self.per.zeros()), BigInt::from(self.per.len()))
    }

    /// Readable form such as `1(-1)0[1]` where the bracket is the period.
    pub fn pretty(&self) -> String {
        format!("{}[{}]", self.pre.pretty(), self.per.pretty())
    }

    /// A random canonical coding with the given maximal block lengths.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_pre: usize, max_per: usize) -> Self {
        let m = rng.gen_range(0..=max_pre);
        let p = rng.gen_range(1..=max_per.max(1));
        let mut draw = |k: usize| Word((0..k).map(|_| Digit::ALL[rng.gen_range(0..3)]).collect());
        let pre = draw(m);
        let per = draw(p);
        Self::new(pre, per).expect("nonempty period")
    }
}

impl PartialOrd for PeriodicCoding {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PeriodicCoding {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lex_compare(other)
    }
}

impl fmt::Display for PeriodicCoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pre.is_empty() {
            write!(f, "{}", self.per)
        } else {
            write!(f, "{}:{}", self.pre, self.per)
        }
    }
}

impl FromStr for PeriodicCoding {
    type Err = Error;
    /// `"1,-1:1"` is preperiod `1,-1` then `1` repeated; without a colon the whole word repeats.
    fn from_str(s: &str) -> Result<Self> {
        let (pre, per) = match s.split_once(':') {
            Some((a, b)) => (a.parse::<Word>()?, b.parse::<Word>()?),
            None => (Word::empty(), s.parse::<Word>()?),
        };
        if per.is_empty() {
            return Err(Error::Parse(format!("coding '{s}' has an empty period")));
        }
        Self::new(pre, per)
    }
}

#[derive(Serialize, Deserialize)]
struct CodingJson {
    digits: Vec<Digit>,
    period_start: usize,
}

impl Serialize for PeriodicCoding {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CodingJson { digits: self.pre.concat(&self.per).0, period_start: self.pre.len() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PeriodicCoding {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CodingJson::deserialize(d)?;
        if j.period_start >= j.digits.len() {
            return Err(serde::de::Error::custom("period_start must leave a nonempty period"));
        }
        let (a, b) = j.digits.split_at(j.period_start);
        PeriodicCoding::new(Word(a.to_vec()), Word(b.to_vec())).map_err(serde::de::Error::custom)
    }
}

/// Digit counts over a prefix plus the asymptotic zero frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyStats {
    pub prefix_length: usize,
    /// Counts of -1, 0, 1 in that order.
    pub counts: [usize; 3],
    pub lower_freq0: BigRational,
    pub upper_freq0: BigRational,
}

impl FrequencyStats {
    pub fn count(&self, d: Digit) -> usize {
        self.counts[d.index()]
    }
}
