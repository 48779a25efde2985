use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::table::{CoefficientTable, CompiledTable, EXACT_DEN_LIMIT};
use crate::digits::{self, check_base, checked_pow, sum_digits, Pattern};
use crate::error::{Error, Result};
use crate::phase::{frac, unit, unit_from_units, Phase};

/// Class of a digital sequence together with its gap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassTag {
    /// q-multiplicative (gap 0).
    M,
    /// q-semimultiplicative with the given gap.
    SM(u32),
    /// q-quasimultiplicative with the given gap.
    QM(u32),
}

impl ClassTag {
    pub fn gap(&self) -> u32 {
        match *self {
            ClassTag::M => 0,
            ClassTag::SM(r) | ClassTag::QM(r) => r,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            ClassTag::M => 0,
            ClassTag::SM(_) => 1,
            ClassTag::QM(_) => 2,
        }
    }

    /// Smallest class containing both: the weaker kind with the larger gap.
    pub fn join(&self, other: &ClassTag) -> ClassTag {
        let gap = self.gap().max(other.gap());
        match self.rank().max(other.rank()) {
            0 => ClassTag::M,
            1 => ClassTag::SM(gap),
            _ => ClassTag::QM(gap),
        }
    }

    /// True for M, SM(0) and QM(0), which all coincide.
    pub fn is_multiplicative(&self) -> bool {
        self.gap() == 0
    }

    /// Parses `M`, `SM` or `QM` with a separate gap.
    pub fn from_parts(kind: &str, gap: u32) -> Result<ClassTag> {
        match kind.to_ascii_uppercase().as_str() {
            "M" => Ok(ClassTag::M),
            "SM" => Ok(ClassTag::SM(gap)),
            "QM" => Ok(ClassTag::QM(gap)),
            other => Err(Error::InvalidArgument(format!("unknown class {other:?}"))),
        }
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassTag::M => write!(f, "M"),
            ClassTag::SM(r) => write!(f, "SM({r})"),
            ClassTag::QM(r) => write!(f, "QM({r})"),
        }
    }
}

#[derive(Debug)]
enum Node {
    Table {
        table: Arc<CoefficientTable>,
        compiled: CompiledTable,
    },
    Linear {
        alpha: Phase,
    },
    DigitSum {
        alpha: Phase,
    },
    Block {
        pattern: Pattern,
        pattern_value: Option<(u64, u64)>,
        alpha: Phase,
    },
    Product(DigitalSequence, DigitalSequence),
    Conjugate(DigitalSequence),
    Dilate(DigitalSequence),
    Subsequence {
        inner: DigitalSequence,
        a: u64,
        b: u64,
    },
    Offset {
        inner: DigitalSequence,
        phase: Phase,
    },
}

#[derive(Debug)]
struct Inner {
    base: u32,
    class: ClassTag,
    strong: bool,
    den: Option<u64>,
    node: Node,
}

/// An evaluable sequence `n ↦ φ(n) ∈ ℝ/ℤ`, with `f(n) = e(φ(n))`.
///
/// Sequences are immutable and cheap to clone. When every coefficient in the
/// construction is rational the sequence carries a common denominator and is
/// evaluated exactly as a residue modulo it.
#[derive(Clone, Debug)]
pub struct DigitalSequence {
    inner: Arc<Inner>,
}

fn overflow(what: &str, n: u64) -> Error {
    Error::Overflow(format!("{what} at n = {n} exceeds 64 bits"))
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `frac(alpha * n)` keeping precision for large `n`.
fn linear_float(alpha: f64, n: u64) -> f64 {
    let hi = (n >> 32) as f64;
    let lo = (n & 0xffff_ffff) as f64;
    let shift = frac(alpha * 4_294_967_296.0);
    frac(frac(shift * hi) + alpha * lo)
}

/// `ceil(log_q(x))` for `x ≥ 1`.
pub fn ceil_log(q: u32, x: u64) -> u32 {
    let mut e = 0;
    let mut p: u128 = 1;
    while p < x as u128 {
        p *= q as u128;
        e += 1;
    }
    e
}

impl DigitalSequence {
    fn build(base: u32, class: ClassTag, strong: bool, den: Option<u64>, node: Node) -> Self {
        DigitalSequence {
            inner: Arc::new(Inner {
                base,
                class,
                strong,
                den,
                node,
            }),
        }
    }

    /// The sequence defined by a coefficient table; tagged SM(gap).
    pub fn from_coefficients(table: CoefficientTable) -> Result<Self> {
        table.validate()?;
        let compiled = table.compile();
        Ok(Self::build(
            table.base(),
            ClassTag::SM(table.gap()),
            table.is_strong(),
            compiled.den(),
            Node::Table {
                table: Arc::new(table),
                compiled,
            },
        ))
    }

    /// `φ(n) = αn`.
    pub fn linear(q: u32, alpha: Phase) -> Result<Self> {
        check_base(q)?;
        Ok(Self::build(
            q,
            ClassTag::M,
            false,
            alpha.denom(),
            Node::Linear { alpha },
        ))
    }

    /// `φ(n) = α s_q(n)`.
    pub fn digit_sum(q: u32, alpha: Phase) -> Result<Self> {
        check_base(q)?;
        Ok(Self::build(
            q,
            ClassTag::M,
            true,
            alpha.denom(),
            Node::DigitSum { alpha },
        ))
    }

    /// `φ(n) = α freq_q^u(n)`.
    pub fn block(q: u32, pattern: Pattern, alpha: Phase) -> Result<Self> {
        check_base(q)?;
        if pattern.base() != q {
            return Err(Error::BaseMismatch(pattern.base(), q));
        }
        let len = pattern.len() as u32;
        let pattern_value = checked_pow(q, len).map(|modulus| {
            let v = pattern
                .lsb_first()
                .iter()
                .rev()
                .fold(0u64, |acc, &d| acc * q as u64 + d as u64);
            (v, modulus)
        });
        Ok(Self::build(
            q,
            ClassTag::SM(len - 1),
            true,
            alpha.denom(),
            Node::Block {
                pattern,
                pattern_value,
                alpha,
            },
        ))
    }

    /// Thue–Morse, `(-1)^{s_2(n)}`, from its one-digit coefficient table.
    pub fn thue_morse() -> Self {
        let mut t = CoefficientTable::new(2, 0, true).expect("valid table");
        t.set(None, &[1], Phase::rational(1, 2).expect("1/2"))
            .expect("valid entry");
        Self::from_coefficients(t).expect("valid table")
    }

    /// Rudin–Shapiro, `(-1)^{freq_2^{11}(n)}`, from its two-digit window table.
    pub fn rudin_shapiro() -> Self {
        let mut t = CoefficientTable::new(2, 1, true).expect("valid table");
        t.set(None, &[1, 1], Phase::rational(1, 2).expect("1/2"))
            .expect("valid entry");
        Self::from_coefficients(t).expect("valid table")
    }

    /// The constant sequence `f ≡ 1`.
    pub fn one(q: u32) -> Result<Self> {
        Self::linear(q, Phase::zero())
    }

    /// Pointwise product: phases add.
    pub fn product(&self, other: &DigitalSequence) -> Result<Self> {
        if self.base() != other.base() {
            return Err(Error::BaseMismatch(self.base(), other.base()));
        }
        let den = match (self.inner.den, other.inner.den) {
            (Some(a), Some(b)) => Some(a.lcm(&b)).filter(|&l| l <= EXACT_DEN_LIMIT),
            _ => None,
        };
        Ok(Self::build(
            self.base(),
            self.class().join(&other.class()),
            self.is_strong() && other.is_strong(),
            den,
            Node::Product(self.clone(), other.clone()),
        ))
    }

    /// Pointwise conjugate: phase negates.
    pub fn conjugate(&self) -> Self {
        Self::build(
            self.base(),
            self.class(),
            self.is_strong(),
            self.inner.den,
            Node::Conjugate(self.clone()),
        )
    }

    /// `n ↦ f(qn)`.
    pub fn dilate(&self) -> Self {
        Self::build(
            self.base(),
            self.class(),
            self.is_strong(),
            self.inner.den,
            Node::Dilate(self.clone()),
        )
    }

    /// Gap increment declared for `n ↦ f(an + b)`:
    /// `ceil(log_q(a(b+1))) + 2`.
    pub fn subsequence_gap_increment(q: u32, a: u64, b: u64) -> Result<u32> {
        let span = a
            .checked_mul(b.checked_add(1).ok_or_else(|| overflow("b + 1", b))?)
            .ok_or_else(|| Error::Overflow(format!("a(b+1) for a = {a}, b = {b}")))?;
        Ok(ceil_log(q, span) + 2)
    }

    /// `n ↦ f(an + b)`, tagged QM(r + increment).
    pub fn subsequence(&self, a: u64, b: u64) -> Result<Self> {
        if a == 0 {
            return Err(Error::InvalidArgument("subsequence needs a ≥ 1".into()));
        }
        let inc = Self::subsequence_gap_increment(self.base(), a, b)?;
        Ok(Self::build(
            self.base(),
            ClassTag::QM(self.class().gap() + inc),
            false,
            self.inner.den,
            Node::Subsequence {
                inner: self.clone(),
                a,
                b,
            },
        ))
    }

    /// The rotation `e(c) f`. The additive relations of class M and QM break
    /// at `n = 0`, so the result is tagged SM with the same gap.
    pub fn rotate(&self, phase: Phase) -> Self {
        let den = match (self.inner.den, phase.denom()) {
            (Some(a), Some(b)) => Some(a.lcm(&b)).filter(|&l| l <= EXACT_DEN_LIMIT),
            _ => None,
        };
        Self::build(
            self.base(),
            ClassTag::SM(self.gap()),
            self.is_strong(),
            den,
            Node::Offset {
                inner: self.clone(),
                phase,
            },
        )
    }

    pub fn base(&self) -> u32 {
        self.inner.base
    }

    pub fn class(&self) -> ClassTag {
        self.inner.class
    }

    pub fn gap(&self) -> u32 {
        self.inner.class.gap()
    }

    pub fn is_strong(&self) -> bool {
        self.inner.strong
    }

    /// Common denominator of the exact path, if every phase is rational.
    pub fn denominator(&self) -> Option<u64> {
        self.inner.den
    }

    pub fn is_exact(&self) -> bool {
        self.inner.den.is_some()
    }

    /// The coefficient table, for table-backed sequences.
    pub fn table(&self) -> Option<&CoefficientTable> {
        match &self.inner.node {
            Node::Table { table, .. } => Some(table),
            _ => None,
        }
    }

    /// Human-readable construction tree.
    pub fn provenance(&self) -> String {
        let q = self.base();
        match &self.inner.node {
            Node::Table { table, .. } => format!(
                "table(q={q}, gap={}, strong={}, entries={})",
                table.gap(),
                table.is_strong(),
                table.entries().count()
            ),
            Node::Linear { alpha } => format!("linear(q={q}, alpha={alpha})"),
            Node::DigitSum { alpha } => format!("digit_sum(q={q}, alpha={alpha})"),
            Node::Block { pattern, alpha, .. } => {
                format!("block(q={q}, pattern={pattern}, alpha={alpha})")
            }
            Node::Product(a, b) => format!("product({}, {})", a.provenance(), b.provenance()),
            Node::Conjugate(a) => format!("conjugate({})", a.provenance()),
            Node::Dilate(a) => format!("dilate({})", a.provenance()),
            Node::Subsequence { inner, a, b } => {
                format!("subsequence({}, a={a}, b={b})", inner.provenance())
            }
            Node::Offset { inner, phase } => format!("offset({}, {phase})", inner.provenance()),
        }
    }

    /// Exact phase residue modulo [`denominator`](Self::denominator).
    ///
    /// # Panics
    /// If the sequence is not on the exact path.
    pub fn phase_units(&self, n: u64) -> Result<u64> {
        let den = self.inner.den.expect("phase_units on a float sequence");
        let scale =
            |child: &DigitalSequence, u: u64| -> u64 { mul_mod(u, den / child.inner.den.expect("exact child"), den) };
        Ok(match &self.inner.node {
            Node::Table { compiled, .. } => compiled.units(n),
            Node::Linear { alpha } => {
                let r = alpha.as_ratio().expect("rational");
                mul_mod(*r.numer() as u64, n % den, den)
            }
            Node::DigitSum { alpha } => {
                let r = alpha.as_ratio().expect("rational");
                mul_mod(*r.numer() as u64, sum_digits(n, self.base())? % den, den)
            }
            Node::Block { alpha, .. } => {
                let r = alpha.as_ratio().expect("rational");
                mul_mod(*r.numer() as u64, self.block_count(n)? % den, den)
            }
            Node::Product(a, b) => {
                let ua = scale(a, a.phase_units(n)?);
                let ub = scale(b, b.phase_units(n)?);
                ((ua as u128 + ub as u128) % den as u128) as u64
            }
            Node::Conjugate(a) => (den - a.phase_units(n)?) % den,
            Node::Dilate(a) => {
                let m = n.checked_mul(self.base() as u64).ok_or_else(|| overflow("qn", n))?;
                a.phase_units(m)?
            }
            Node::Subsequence { inner, a, b } => inner.phase_units(self.affine(n, *a, *b)?)?,
            Node::Offset { inner, phase } => {
                let r = phase.as_ratio().expect("rational");
                let uo = mul_mod(*r.numer() as u64, den / *r.denom() as u64, den);
                let ui = scale(inner, inner.phase_units(n)?);
                ((ui as u128 + uo as u128) % den as u128) as u64
            }
        })
    }

    fn affine(&self, n: u64, a: u64, b: u64) -> Result<u64> {
        n.checked_mul(a)
            .and_then(|x| x.checked_add(b))
            .ok_or_else(|| overflow("an + b", n))
    }

    fn block_count(&self, n: u64) -> Result<u64> {
        let Node::Block {
            pattern, pattern_value, ..
        } = &self.inner.node
        else {
            unreachable!()
        };
        match pattern_value {
            Some((value, modulus)) => {
                let q = self.base() as u64;
                let mut x = n;
                let mut count = 0;
                while x != 0 {
                    if x % modulus == *value {
                        count += 1;
                    }
                    x /= q;
                }
                Ok(count)
            }
            None => digits::block_count(n, pattern, self.base()),
        }
    }

    /// `φ(n)` as a float representative in `[0, 1)`.
    pub fn phase_f64(&self, n: u64) -> Result<f64> {
        if let Some(den) = self.inner.den {
            return Ok(self.phase_units(n)? as f64 / den as f64);
        }
        Ok(match &self.inner.node {
            Node::Table { compiled, .. } => compiled.float(n),
            Node::Linear { alpha } => linear_float(alpha.to_f64(), n),
            Node::DigitSum { alpha } => frac(alpha.to_f64() * sum_digits(n, self.base())? as f64),
            Node::Block { alpha, .. } => frac(alpha.to_f64() * self.block_count(n)? as f64),
            Node::Product(a, b) => frac(a.phase_f64(n)? + b.phase_f64(n)?),
            Node::Conjugate(a) => frac(-a.phase_f64(n)?),
            Node::Dilate(a) => {
                let m = n.checked_mul(self.base() as u64).ok_or_else(|| overflow("qn", n))?;
                a.phase_f64(m)?
            }
            Node::Subsequence { inner, a, b } => inner.phase_f64(self.affine(n, *a, *b)?)?,
            Node::Offset { inner, phase } => frac(inner.phase_f64(n)? + phase.to_f64()),
        })
    }

    /// `φ(n)`, exact when the sequence is on the rational path.
    pub fn eval_phase(&self, n: u64) -> Result<Phase> {
        match self.inner.den {
            Some(den) => Ok(Phase::from_units(self.phase_units(n)?, den)),
            None => Ok(Phase::Float(self.phase_f64(n)?)),
        }
    }

    /// `f(n) = e(φ(n))`.
    pub fn eval(&self, n: u64) -> Result<Complex64> {
        match self.inner.den {
            Some(den) => Ok(unit_from_units(self.phase_units(n)?, den)),
            None => Ok(unit(self.phase_f64(n)?)),
        }
    }

    /// Phases of `0..len`, computed in fixed-size chunks.
    pub fn phases_upto(&self, len: u64) -> Result<PhaseBuffer> {
        const CHUNK: u64 = 1 << 14;
        let chunks: Vec<u64> = (0..len.div_ceil(CHUNK)).collect();
        match self.inner.den {
            Some(den) => {
                let parts = chunks
                    .par_iter()
                    .map(|&c| {
                        (c * CHUNK..((c + 1) * CHUNK).min(len))
                            .map(|n| self.phase_units(n))
                            .collect::<Result<Vec<u64>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(PhaseBuffer::Exact {
                    den,
                    units: parts.concat(),
                })
            }
            None => {
                let parts = chunks
                    .par_iter()
                    .map(|&c| {
                        (c * CHUNK..((c + 1) * CHUNK).min(len))
                            .map(|n| self.phase_f64(n))
                            .collect::<Result<Vec<f64>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(PhaseBuffer::Float(parts.concat()))
            }
        }
    }
}

/// Precomputed phases of an initial segment.
#[derive(Clone, Debug)]
pub enum PhaseBuffer {
    Exact { den: u64, units: Vec<u64> },
    Float(Vec<f64>),
}

impl PhaseBuffer {
    pub fn len(&self) -> usize {
        match self {
            PhaseBuffer::Exact { units, .. } => units.len(),
            PhaseBuffer::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn phase_f64(&self, n: usize) -> f64 {
        match self {
            PhaseBuffer::Exact { den, units } => units[n] as f64 / *den as f64,
            PhaseBuffer::Float(v) => v[n],
        }
    }

    pub fn unit(&self, n: usize) -> Complex64 {
        match self {
            PhaseBuffer::Exact { den, units } => unit_from_units(units[n], *den),
            PhaseBuffer::Float(v) => unit(v[n]),
        }
    }
}
