use rayon::prelude::*;
use serde::Serialize;

use super::sequence::{ClassTag, DigitalSequence, PhaseBuffer};
use crate::digits::{self, IndexSet};
use crate::error::{Error, Result};
use crate::phase::{circle_norm, Phase, FLOAT_TOL};

/// Largest prefix length accepted by [`verify_class`].
pub const MAX_VERIFY_N: u64 = 1 << 26;

/// Number of violations stored in a report; all of them are counted.
pub const MAX_STORED_VIOLATIONS: usize = 1000;

/// One failing instance of a class relation. For the two-term relations
/// (M and QM) `k` is always 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub n: u64,
    pub m: u64,
    pub k: u64,
    pub l: u32,
    /// Circular distance between the two sides of the relation.
    pub discrepancy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassReport {
    pub class: ClassTag,
    pub limit: u64,
    pub checked_triples: u64,
    pub violation_count: u64,
    pub violations: Vec<Violation>,
}

impl ClassReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

struct Checker<'a> {
    buf: &'a PhaseBuffer,
}

impl Checker<'_> {
    /// Circular distance of `φ(a) + φ(b) - φ(c) - φ(d)` from 0, or `None`
    /// when it is within tolerance (zero on the exact path).
    fn defect(&self, a: u64, b: u64, c: u64, d: u64) -> Option<f64> {
        match self.buf {
            PhaseBuffer::Exact { den, units } => {
                let den = *den as u128;
                let get = |i: u64| units[i as usize] as u128;
                let v = (get(a) + get(b) + 2 * den - get(c) - get(d)) % den;
                (v != 0).then(|| circle_norm(v as f64 / den as f64))
            }
            PhaseBuffer::Float(v) => {
                let get = |i: u64| v[i as usize];
                let dist = circle_norm(get(a) + get(b) - get(c) - get(d));
                (dist > FLOAT_TOL).then_some(dist)
            }
        }
    }
}

#[derive(Default)]
struct Tally {
    checked: u64,
    count: u64,
    stored: Vec<Violation>,
}

impl Tally {
    fn record(&mut self, v: Violation) {
        self.count += 1;
        if self.stored.len() < MAX_STORED_VIOLATIONS {
            self.stored.push(v);
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checked += other.checked;
        self.count += other.count;
        for v in other.stored {
            if self.stored.len() >= MAX_STORED_VIOLATIONS {
                break;
            }
            self.stored.push(v);
        }
        self
    }
}

/// Exhaustively checks the defining relation of `class` on all admissible
/// tuples with `n + m + k < limit`.
///
/// * M: `φ(n+m) = φ(n) + φ(m)` for `m < q^l`, `q^l | n`.
/// * QM(r): the same with `q^{l+r} | n`.
/// * SM(r): `φ(n+m+k) = φ(n+m) - φ(m) + φ(m+k)` for `k < q^l`, `q^l | m`,
///   `m < q^{l+r}`, `q^{l+r} | n`.
pub fn verify_class(f: &DigitalSequence, class: ClassTag, limit: u64) -> Result<ClassReport> {
    if limit > MAX_VERIFY_N {
        return Err(Error::ResourceCap(format!(
            "verify_class limit {limit} exceeds {MAX_VERIFY_N}"
        )));
    }
    let buf = f.phases_upto(limit)?;
    let checker = Checker { buf: &buf };
    let q = f.base() as u64;
    let r = class.gap();

    let mut levels = Vec::new();
    let mut ql = 1u64;
    let mut l = 0u32;
    while ql < limit {
        levels.push((l, ql));
        l += 1;
        ql = match ql.checked_mul(q) {
            Some(x) => x,
            None => break,
        };
    }

    let tally = levels
        .into_iter()
        .map(|(l, ql)| {
            let step = digits::checked_pow(q as u32, l + r).unwrap_or(u64::MAX);
            let n_count = if step >= limit { 1 } else { limit.div_ceil(step) };
            (0..n_count)
                .into_par_iter()
                .map(|i| {
                    let n = i * step;
                    let mut t = Tally::default();
                    match class {
                        ClassTag::M | ClassTag::QM(_) => {
                            let m_end = ql.min(limit - n);
                            for m in 0..m_end {
                                t.checked += 1;
                                if let Some(d) = checker.defect(n, m, n + m, 0) {
                                    t.record(Violation {
                                        n,
                                        m,
                                        k: 0,
                                        l,
                                        discrepancy: d,
                                    });
                                }
                            }
                        }
                        ClassTag::SM(_) => {
                            let m_top = step.min(limit - n);
                            let mut m = 0;
                            while m < m_top {
                                let k_end = ql.min(limit - n - m);
                                for k in 0..k_end {
                                    t.checked += 1;
                                    if let Some(d) = checker.defect(n + m, m + k, n + m + k, m) {
                                        t.record(Violation {
                                            n,
                                            m,
                                            k,
                                            l,
                                            discrepancy: d,
                                        });
                                    }
                                }
                                m += ql;
                            }
                        }
                    }
                    t
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold(Tally::default(), Tally::merge)
        })
        .fold(Tally::default(), Tally::merge);

    Ok(ClassReport {
        class,
        limit,
        checked_triples: tally.checked,
        violation_count: tally.count,
        violations: tally.stored,
    })
}

/// Residual of the three-set reconstruction identity
/// `φ(n) - [φ(n|_{I1∪I2}) + φ(n|_{I2∪I3}) + φ(n|_{I3∪I1}) - φ(n|_{I1}) - φ(n|_{I2}) - φ(n|_{I3})]`.
///
/// `parts` must partition `[0, len)`; every maximal run of each part that
/// does not reach `len` must have length at least `r`, where `r` is the gap
/// of `f` (runs reaching `len` continue beyond it, so they are unrestricted).
pub fn reconstruct_check(f: &DigitalSequence, parts: [&IndexSet; 3], len: u32, n: u64) -> Result<Phase> {
    reconstruct_check_with_gap(f, f.gap(), parts, len, n)
}

/// [`reconstruct_check`] with the run-length condition taken from `r`
/// instead of the declared gap of `f`.
pub fn reconstruct_check_with_gap(
    f: &DigitalSequence,
    r: u32,
    parts: [&IndexSet; 3],
    len: u32,
    n: u64,
) -> Result<Phase> {
    let q = f.base();
    for (a, b) in [(0, 1), (1, 2), (0, 2)] {
        if !parts[a].is_disjoint(parts[b]) {
            return Err(Error::InvalidPartition(format!(
                "parts {} and {} overlap",
                a + 1,
                b + 1
            )));
        }
    }
    let total: usize = parts.iter().map(|p| p.len()).sum();
    if total != len as usize || parts.iter().any(|p| IndexSet::max(p).is_some_and(|m| m >= len)) {
        return Err(Error::InvalidPartition(format!(
            "parts do not cover [0, {len}) exactly"
        )));
    }
    for (j, p) in parts.iter().enumerate() {
        for (lo, hi) in p.runs() {
            if hi < len && hi - lo < r {
                return Err(Error::InvalidPartition(format!(
                    "part {} has run [{lo}, {hi}) shorter than the gap {r}",
                    j + 1
                )));
            }
        }
    }
    if digits::digit_len(n, q) > len as usize {
        return Err(Error::InvalidPartition(format!("support of {n} leaves [0, {len})")));
    }
    let phi = |set: &IndexSet| -> Result<Phase> { f.eval_phase(digits::restrict(n, set, q)?) };
    let [a, b, c] = parts;
    let mut rhs = phi(&a.union(b))?;
    rhs = rhs.add(&phi(&b.union(c))?);
    rhs = rhs.add(&phi(&c.union(a))?);
    for p in parts {
        rhs = rhs.sub(&phi(p)?);
    }
    Ok(f.eval_phase(n)?.sub(&rhs))
}
