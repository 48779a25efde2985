//! Exact base-q digit manipulation.
//!
//! Digit words are stored least-significant digit first, so `digits[l]` is the
//! coefficient of `q^l`. The canonical word of `0` is empty. All integers are
//! `u64`; expansions longer than [`MAX_DIGITS`] digits are rejected.

use std::fmt;

use crate::error::{Error, Result};

/// Longest digit expansion accepted by this module.
pub const MAX_DIGITS: usize = 63;

/// Rejects bases below 2.
pub fn check_base(q: u32) -> Result<()> {
    if q < 2 {
        Err(Error::InvalidBase(q as u64))
    } else {
        Ok(())
    }
}

/// `q^e`, or `None` on overflow.
pub fn checked_pow(q: u32, e: u32) -> Option<u64> {
    (q as u64).checked_pow(e)
}

/// `q^e` with an overflow error naming the offending power.
pub fn pow(q: u32, e: u32) -> Result<u64> {
    checked_pow(q, e).ok_or_else(|| Error::Overflow(format!("{q}^{e} does not fit in 64 bits")))
}

/// Number of base-q digits of `n` (0 for `n = 0`).
pub fn digit_len(mut n: u64, q: u32) -> usize {
    let q = q as u64;
    let mut len = 0;
    while n != 0 {
        n /= q;
        len += 1;
    }
    len
}

/// Digit of `n` at position `pos`.
pub fn digit_at(n: u64, pos: u32, q: u32) -> u32 {
    match checked_pow(q, pos) {
        Some(p) => ((n / p) % q as u64) as u32,
        None => 0,
    }
}

/// A finite word over `{0, .., base-1}` in canonical form (no trailing zero at
/// the most significant end).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitWord {
    base: u32,
    digits: Vec<u32>,
}

impl DigitWord {
    /// Builds a word from least-significant-first digits, dropping high zeros.
    pub fn new(base: u32, mut digits: Vec<u32>) -> Result<Self> {
        check_base(base)?;
        if let Some(&d) = digits.iter().find(|&&d| d >= base) {
            return Err(Error::InvalidDigit { digit: d as u64, base });
        }
        while digits.last() == Some(&0) {
            digits.pop();
        }
        if digits.len() > MAX_DIGITS {
            return Err(Error::Overflow(format!(
                "{} digits exceed the limit of {MAX_DIGITS}",
                digits.len()
            )));
        }
        let word = DigitWord { base, digits };
        word.checked_value()?;
        Ok(word)
    }

    /// The empty word, which represents 0.
    pub fn empty(base: u32) -> Result<Self> {
        check_base(base)?;
        Ok(DigitWord {
            base,
            digits: Vec::new(),
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Digits, least significant first.
    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// `Σ u_l q^l`.
    pub fn value(&self) -> u64 {
        // Construction guarantees the value fits.
        self.checked_value().expect("validated on construction")
    }

    fn checked_value(&self) -> Result<u64> {
        let q = self.base as u64;
        self.digits.iter().rev().try_fold(0u64, |acc, &d| {
            acc.checked_mul(q)
                .and_then(|v| v.checked_add(d as u64))
                .ok_or_else(|| Error::Overflow("digit word value exceeds 64 bits".into()))
        })
    }
}

impl fmt::Display for DigitWord {
    /// Most significant digit first; `ε` for the empty word.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.digits.is_empty() {
            return write!(f, "ε");
        }
        let sep = if self.base > 36 { "," } else { "" };
        let parts: Vec<String> = self
            .digits
            .iter()
            .rev()
            .map(|&d| match char::from_digit(d, 36) {
                Some(c) if self.base <= 36 => c.to_string(),
                _ => d.to_string(),
            })
            .collect();
        write!(f, "{}", parts.join(sep))
    }
}

/// Base-q expansion of `n`.
pub fn expand(n: u64, q: u32) -> Result<DigitWord> {
    check_base(q)?;
    let mut digits = Vec::new();
    let mut x = n;
    while x != 0 {
        digits.push((x % q as u64) as u32);
        x /= q as u64;
    }
    if digits.len() > MAX_DIGITS {
        return Err(Error::Overflow(format!(
            "{n} needs {} base-{q} digits, more than {MAX_DIGITS}",
            digits.len()
        )));
    }
    Ok(DigitWord { base: q, digits })
}

/// Integer represented by a digit word.
pub fn value(u: &DigitWord) -> u64 {
    u.value()
}

/// A sorted, duplicate-free set of digit positions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(Vec<u32>);

impl IndexSet {
    pub fn new() -> Self {
        IndexSet(Vec::new())
    }

    /// The half-open interval `[lo, hi)`.
    pub fn interval(lo: u32, hi: u32) -> Self {
        IndexSet((lo..hi.max(lo)).collect())
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: u32) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn min(&self) -> Option<u32> {
        self.0.first().copied()
    }

    pub fn max(&self) -> Option<u32> {
        self.0.last().copied()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| !other.contains(i))
    }

    /// True when `|i - j| > r` for every `i` in `self` and `j` in `other`.
    pub fn separated_from(&self, other: &IndexSet, r: u32) -> bool {
        self.iter().all(|i| other.iter().all(|j| i.abs_diff(j) > r))
    }

    /// Maximal runs of consecutive positions, as half-open intervals.
    pub fn runs(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for i in self.iter() {
            match out.last_mut() {
                Some((_, hi)) if *hi == i => *hi = i + 1,
                _ => out.push((i, i + 1)),
            }
        }
        out
    }

    /// Number of integers with support inside this set: `q^|I|`.
    pub fn point_count(&self, q: u32) -> u128 {
        (q as u128).saturating_pow(self.len() as u32)
    }
}

impl FromIterator<u32> for IndexSet {
    fn from_iter<T: IntoIterator<Item = u32>>(iter: T) -> Self {
        let mut v: Vec<u32> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }
}

impl From<Vec<u32>> for IndexSet {
    fn from(v: Vec<u32>) -> Self {
        v.into_iter().collect()
    }
}

/// Positions of the nonzero digits of `n`.
pub fn support(n: u64, q: u32) -> Result<IndexSet> {
    Ok(expand(n, q)?
        .digits()
        .iter()
        .enumerate()
        .filter(|(_, &d)| d != 0)
        .map(|(l, _)| l as u32)
        .collect())
}

/// `n|_I`: `n` with every digit outside `I` replaced by zero.
pub fn restrict(n: u64, set: &IndexSet, q: u32) -> Result<u64> {
    check_base(q)?;
    let q64 = q as u64;
    let mut x = n;
    let mut place = 1u64;
    let mut out = 0u64;
    let mut pos = 0u32;
    while x != 0 {
        let d = x % q64;
        if d != 0 && set.contains(pos) {
            out += d * place;
        }
        x /= q64;
        pos += 1;
        if x != 0 {
            place *= q64;
        }
    }
    Ok(out)
}

/// `s_q(n)`, the sum of the base-q digits of `n`.
pub fn sum_digits(n: u64, q: u32) -> Result<u64> {
    check_base(q)?;
    let q = q as u64;
    let mut x = n;
    let mut s = 0;
    while x != 0 {
        s += x % q;
        x /= q;
    }
    Ok(s)
}

/// A block pattern written most significant digit first, as it appears in
/// the written expansion.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    base: u32,
    msb_first: Vec<u32>,
}

impl Pattern {
    /// Parses `"0110"`-style text (digits `0-9a-z`), or comma-separated
    /// decimal digits such as `"12,0,3"` for large bases.
    pub fn parse(text: &str, q: u32) -> Result<Self> {
        check_base(q)?;
        let text = text.trim();
        let digits: Vec<u32> = if text.contains(',') {
            text.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::InvalidPattern(format!("bad digit {s:?} in {text:?}")))
                })
                .collect::<Result<_>>()?
        } else {
            text.chars()
                .map(|c| {
                    c.to_digit(36)
                        .ok_or_else(|| Error::InvalidPattern(format!("bad digit {c:?} in {text:?}")))
                })
                .collect::<Result<_>>()?
        };
        Self::from_msb_digits(q, digits)
    }

    pub fn from_msb_digits(q: u32, msb_first: Vec<u32>) -> Result<Self> {
        check_base(q)?;
        if msb_first.is_empty() {
            return Err(Error::InvalidPattern("empty pattern".into()));
        }
        if let Some(&d) = msb_first.iter().find(|&&d| d >= q) {
            return Err(Error::InvalidDigit {
                digit: d as u64,
                base: q,
            });
        }
        if msb_first.iter().all(|&d| d == 0) {
            return Err(Error::InvalidPattern("all-zero pattern occurs infinitely often".into()));
        }
        if msb_first.len() > MAX_DIGITS {
            return Err(Error::InvalidPattern("pattern longer than 63 digits".into()));
        }
        Ok(Pattern { base: q, msb_first })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn len(&self) -> usize {
        self.msb_first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.msb_first.is_empty()
    }

    pub fn msb_first(&self) -> &[u32] {
        &self.msb_first
    }

    /// The same digits, least significant first (the window orientation used
    /// by coefficient tables).
    pub fn lsb_first(&self) -> Vec<u32> {
        self.msb_first.iter().rev().copied().collect()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.base > 36 {
            let parts: Vec<String> = self.msb_first.iter().map(|d| d.to_string()).collect();
            write!(f, "{}", parts.join(","))
        } else {
            for &d in &self.msb_first {
                write!(f, "{}", char::from_digit(d, 36).unwrap_or('?'))?;
            }
            Ok(())
        }
    }
}

/// `freq_q^u(n)`: overlapping occurrences of `pattern` in the expansion of
/// `n` written most significant digit first, with `|u| - 1` zeros prepended.
pub fn block_count(n: u64, pattern: &Pattern, q: u32) -> Result<u64> {
    if pattern.base() != q {
        return Err(Error::BaseMismatch(pattern.base(), q));
    }
    let word = expand(n, q)?;
    let pad = pattern.len() - 1;
    let text: Vec<u32> = std::iter::repeat(0)
        .take(pad)
        .chain(word.digits().iter().rev().copied())
        .collect();
    Ok(text
        .windows(pattern.len())
        .filter(|w| *w == pattern.msb_first())
        .count() as u64)
}
