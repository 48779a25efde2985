//! Möbius and prime sieves, Möbius and bilinear correlations, and the
//! Indlekofer–Kátai series.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase::{unit, unit_from_units, Phase};
use crate::seq::DigitalSequence;

/// Largest sieve limit.
pub const MAX_SIEVE: u64 = 1 << 31;

const CHUNK: u64 = 1 << 16;
const UNSET: i8 = 2;

/// `μ(n)` for `0 ≤ n < limit`, with `μ(0) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MobiusTable {
    values: Vec<i8>,
}

impl MobiusTable {
    pub fn limit(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn get(&self, n: u64) -> i8 {
        self.values[n as usize]
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }
}

/// Linear sieve for `μ` below `limit`.
pub fn mobius_table(limit: u64) -> Result<MobiusTable> {
    if limit > MAX_SIEVE {
        return Err(Error::ResourceCap(format!("sieve limit {limit} exceeds {MAX_SIEVE}")));
    }
    let n = limit as usize;
    let mut mu = vec![UNSET; n];
    if n > 0 {
        mu[0] = 0;
    }
    if n > 1 {
        mu[1] = 1;
    }
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..n {
        if mu[i] == UNSET {
            mu[i] = -1;
            primes.push(i as u32);
        }
        for &p in &primes {
            let j = i * p as usize;
            if j >= n {
                break;
            }
            if i % p as usize == 0 {
                mu[j] = 0;
                break;
            }
            mu[j] = -mu[i];
        }
    }
    Ok(MobiusTable { values: mu })
}

fn simple_sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n.max(2)];
    let mut out = Vec::new();
    for i in 2..n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j < n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primes `p` with `lo ≤ p < hi`, by a segmented sieve.
pub fn primes_in(lo: u64, hi: u64) -> Result<Vec<u64>> {
    if hi > MAX_SIEVE {
        return Err(Error::ResourceCap(format!("prime range end {hi} exceeds {MAX_SIEVE}")));
    }
    let lo = lo.max(2);
    if lo >= hi {
        return Ok(Vec::new());
    }
    let root = (hi as f64).sqrt() as u64 + 2;
    let base = simple_sieve(root);
    let mut out = Vec::new();
    let mut seg_lo = lo;
    while seg_lo < hi {
        let seg_hi = (seg_lo + CHUNK * 4).min(hi);
        let mut composite = vec![false; (seg_hi - seg_lo) as usize];
        for &p in &base {
            if p * p >= seg_hi {
                break;
            }
            let mut m = (seg_lo.div_ceil(p) * p).max(p * p);
            while m < seg_hi {
                composite[(m - seg_lo) as usize] = true;
                m += p;
            }
        }
        out.extend(
            composite
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| seg_lo + i as u64),
        );
        seg_lo = seg_hi;
    }
    Ok(out)
}

/// Partial averages `E_{n<N'} a(n)` at a grid of checkpoints `N'`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationSeries {
    pub label: String,
    pub checkpoints: Vec<u64>,
    pub partials: Vec<Complex64>,
}

impl CorrelationSeries {
    /// Value at the last checkpoint.
    pub fn last(&self) -> Option<Complex64> {
        self.partials.last().copied()
    }

    /// Partial average at a given checkpoint.
    pub fn at(&self, n: u64) -> Option<Complex64> {
        self.checkpoints.iter().position(|&c| c == n).map(|i| self.partials[i])
    }

    pub fn to_csv(&self) -> Result<String> {
        let io = |e: csv::Error| Error::InvalidArgument(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["checkpoint_N", "re", "im", "abs"]).map_err(io)?;
        for (n, z) in self.checkpoints.iter().zip(&self.partials) {
            w.write_record([n.to_string(), z.re.to_string(), z.im.to_string(), z.norm().to_string()])
                .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Powers of 10 and of `q` up to `limit`, plus `limit` itself.
pub fn default_checkpoints(limit: u64, q: u32) -> Vec<u64> {
    let mut out = Vec::new();
    for base in [10u64, q as u64] {
        let mut x = 1u64;
        while x <= limit {
            out.push(x);
            x = match x.checked_mul(base) {
                Some(v) => v,
                None => break,
            };
        }
    }
    out.push(limit);
    out.sort_unstable();
    out.dedup();
    out.retain(|&c| c > 0);
    out
}

/// Sums `term(n)` over `[0, limit)` and reports prefix averages at the
/// checkpoints. Segments are cut at fixed chunk boundaries and at every
/// checkpoint and summed in ascending order, so the result does not depend on
/// the number of threads.
fn checkpointed<F>(limit: u64, checkpoints: &[u64], label: String, term: F) -> Result<CorrelationSeries>
where
    F: Fn(u64) -> Result<Complex64> + Sync,
{
    let mut cps: Vec<u64> = checkpoints.iter().copied().filter(|&c| c > 0 && c <= limit).collect();
    cps.push(limit);
    cps.sort_unstable();
    cps.dedup();
    cps.retain(|&c| c > 0);
    let mut cuts: Vec<u64> = (0..=limit / CHUNK).map(|i| i * CHUNK).collect();
    cuts.extend(&cps);
    cuts.push(limit);
    cuts.sort_unstable();
    cuts.dedup();
    let sums = cuts
        .par_windows(2)
        .map(|w| (w[0]..w[1]).try_fold(Complex64::new(0.0, 0.0), |acc, n| Ok(acc + term(n)?)))
        .collect::<Result<Vec<Complex64>>>()?;
    let mut partials = Vec::with_capacity(cps.len());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut next = 0;
    for (w, s) in cuts.windows(2).zip(sums) {
        acc += s;
        if next < cps.len() && w[1] == cps[next] {
            partials.push(acc / cps[next] as f64);
            next += 1;
        }
    }
    Ok(CorrelationSeries {
        label,
        checkpoints: cps,
        partials,
    })
}

/// `E_{n<N'} f(n) μ(n)` at each checkpoint `N' ≤ N`; `N` is always included.
pub fn mobius_correlation(f: &DigitalSequence, limit: u64, checkpoints: &[u64]) -> Result<CorrelationSeries> {
    let mu = mobius_table(limit)?;
    mobius_correlation_with(f, &mu, limit, checkpoints)
}

/// [`mobius_correlation`] with a precomputed table.
pub fn mobius_correlation_with(
    f: &DigitalSequence,
    mu: &MobiusTable,
    limit: u64,
    checkpoints: &[u64],
) -> Result<CorrelationSeries> {
    if limit > mu.limit() {
        return Err(Error::InvalidArgument(format!(
            "table covers {} values, {limit} requested",
            mu.limit()
        )));
    }
    checkpointed(limit, checkpoints, "f(n)mu(n)".into(), |n| match mu.get(n) {
        0 => Ok(Complex64::new(0.0, 0.0)),
        s => Ok(f.eval(n)? * s as f64),
    })
}

fn check_kbsz_args(p: u64, p2: u64, limit: u64) -> Result<()> {
    if p == p2 {
        return Err(Error::InvalidArgument(format!("p and p' must differ, both are {p}")));
    }
    let top = limit.saturating_sub(1);
    if top.checked_mul(p.max(p2)).is_none() {
        return Err(Error::Overflow(format!("{} * {top} exceeds 64 bits", p.max(p2))));
    }
    Ok(())
}

/// `E_{n<N} f(pn) conj(f(p'n))`.
pub fn kbsz_correlation(f: &DigitalSequence, p: u64, p2: u64, limit: u64) -> Result<Complex64> {
    check_kbsz_args(p, p2, limit)?;
    if limit == 0 {
        return Err(Error::EmptyInput("kbsz range"));
    }
    let series = match f.denominator() {
        Some(den) => checkpointed(limit, &[], String::new(), |n| {
            let a = f.phase_units(p * n)?;
            let b = f.phase_units(p2 * n)?;
            Ok(unit_from_units((a + den - b) % den, den))
        })?,
        None => checkpointed(limit, &[], String::new(), |n| {
            Ok(unit(f.phase_f64(p * n)? - f.phase_f64(p2 * n)?))
        })?,
    };
    Ok(series.partials[0])
}

/// One entry of a [`KbszScan`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KbszEntry {
    pub p: u64,
    pub p_prime: u64,
    pub value: Complex64,
    pub abs: f64,
}

/// `|E f(pn) conj(f(p'n))|` over all unordered prime pairs of a range.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KbszScan {
    pub limit: u64,
    pub entries: Vec<KbszEntry>,
    pub max: f64,
}

impl KbszScan {
    pub fn to_csv(&self) -> Result<String> {
        let io = |e: csv::Error| Error::InvalidArgument(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["p", "p_prime", "re", "im", "abs"]).map_err(io)?;
        for e in &self.entries {
            w.write_record([
                e.p.to_string(),
                e.p_prime.to_string(),
                e.value.re.to_string(),
                e.value.im.to_string(),
                e.abs.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Bilinear correlations for all pairs `p < p'` of primes in `[lo, hi]`.
pub fn kbsz_scan(f: &DigitalSequence, lo: u64, hi: u64, limit: u64) -> Result<KbszScan> {
    let primes = primes_in(lo, hi.saturating_add(1))?;
    if primes.len() < 2 {
        return Err(Error::EmptyInput("prime range with at least two primes"));
    }
    let mut entries = Vec::new();
    for (i, &p) in primes.iter().enumerate() {
        for &p2 in &primes[i + 1..] {
            let value = kbsz_correlation(f, p, p2, limit)?;
            entries.push(KbszEntry {
                p,
                p_prime: p2,
                value,
                abs: value.norm(),
            });
        }
    }
    let max = entries.iter().map(|e| e.abs).fold(0.0, f64::max);
    Ok(KbszScan { limit, entries, max })
}

/// Partial sums `S_L = Σ_{l<L} Σ_{a<q} Re(1 - f(aq^l) e(-γ a q^l))` for
/// `L = 1, …, levels`. With `γ = 0` this is the Delange series.
pub fn ik_series(f: &DigitalSequence, gamma: Phase, levels: u32) -> Result<Vec<f64>> {
    if !f.class().is_multiplicative() {
        return Err(Error::Class(format!(
            "the series needs a q-multiplicative sequence, got class {}",
            f.class()
        )));
    }
    let q = f.base() as u64;
    let mut out = Vec::with_capacity(levels as usize);
    let mut sum = 0.0;
    let mut ql = 1u64;
    for l in 0..levels {
        if l > 0 {
            ql = ql
                .checked_mul(q)
                .ok_or_else(|| Error::Overflow(format!("q^{l} exceeds 64 bits")))?;
        }
        for a in 1..q {
            let n = ql
                .checked_mul(a)
                .ok_or_else(|| Error::Overflow(format!("{a} * q^{l} exceeds 64 bits")))?;
            let shift = match gamma {
                Phase::Rational(g) => gamma.mul_int((n % *g.denom() as u64) as i64),
                Phase::Float(_) => Phase::float(gamma.to_f64() * n as f64)?,
            };
            let x = f.eval_phase(n)?.sub(&shift);
            sum += 1.0 - (std::f64::consts::TAU * x.to_f64()).cos();
        }
        out.push(sum);
    }
    Ok(out)
}
