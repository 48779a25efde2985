use num_integer::Integer;

use crate::digits::{check_base, checked_pow, MAX_DIGITS};
use crate::error::{Error, Result};
use crate::phase::{frac, Phase};

/// Largest common denominator kept on the exact path.
pub const EXACT_DEN_LIMIT: u64 = 1 << 62;

/// Largest number of windows `q^(r+1)` per table row.
pub const MAX_WINDOWS: u64 = 1 << 22;

/// Windowed coefficients of a q-semiadditive phase.
///
/// The phase of `n` is the sum over window positions `i` of the entry at
/// `(i, w)` where `w` holds the digits of `n` at positions `i..=i+gap`, least
/// significant first. A strong table has a single row used at every position;
/// a positional table has one row per declared position and contributes zero
/// beyond them. The all-zero window always carries phase 0.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    base: u32,
    gap: u32,
    strong: bool,
    rows: Vec<Vec<Phase>>,
}

impl CoefficientTable {
    /// The all-zero table.
    pub fn new(base: u32, gap: u32, strong: bool) -> Result<Self> {
        check_base(base)?;
        let windows = checked_pow(base, gap + 1)
            .filter(|&w| w <= MAX_WINDOWS)
            .ok_or_else(|| Error::InvalidTable(format!("{base}^{} windows exceed the limit", gap + 1)))?;
        let rows = if strong {
            vec![vec![Phase::zero(); windows as usize]]
        } else {
            Vec::new()
        };
        Ok(CoefficientTable {
            base,
            gap,
            strong,
            rows,
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn gap(&self) -> u32 {
        self.gap
    }

    pub fn is_strong(&self) -> bool {
        self.strong
    }

    /// Number of windows per row, `q^(gap+1)`.
    pub fn window_count(&self) -> usize {
        (self.base as usize).pow(self.gap + 1)
    }

    /// Number of explicitly stored positions (always 1 for strong tables).
    pub fn position_count(&self) -> usize {
        self.rows.len()
    }

    /// Index of a window given least-significant-first digits.
    pub fn window_index(&self, window: &[u32]) -> Result<usize> {
        if window.len() != self.gap as usize + 1 {
            return Err(Error::InvalidTable(format!(
                "window {window:?} has length {}, expected {}",
                window.len(),
                self.gap + 1
            )));
        }
        let mut idx = 0usize;
        for &d in window.iter().rev() {
            if d >= self.base {
                return Err(Error::InvalidDigit {
                    digit: d as u64,
                    base: self.base,
                });
            }
            idx = idx * self.base as usize + d as usize;
        }
        Ok(idx)
    }

    /// Sets the entry for `window` at position `pos`; `None` means every
    /// position (required for strong tables).
    pub fn set(&mut self, pos: Option<u32>, window: &[u32], phase: Phase) -> Result<()> {
        let idx = self.window_index(window)?;
        if idx == 0 && !phase.is_zero() {
            return Err(Error::InvalidTable("the all-zero window must carry phase 0".into()));
        }
        let windows = self.window_count();
        match (self.strong, pos) {
            (true, None) => self.rows[0][idx] = phase,
            (true, Some(p)) => {
                return Err(Error::InvalidTable(format!(
                    "strong tables are position independent, got position {p}"
                )))
            }
            (false, None) => {
                if self.rows.len() < MAX_DIGITS {
                    self.rows.resize(MAX_DIGITS, vec![Phase::zero(); windows]);
                }
                for row in &mut self.rows {
                    row[idx] = phase;
                }
            }
            (false, Some(p)) => {
                if p as usize >= MAX_DIGITS {
                    return Err(Error::InvalidTable(format!("position {p} beyond digit range")));
                }
                if self.rows.len() <= p as usize {
                    self.rows.resize(p as usize + 1, vec![Phase::zero(); windows]);
                }
                self.rows[p as usize][idx] = phase;
            }
        }
        Ok(())
    }

    /// Entry at `(pos, window index)`.
    pub fn get(&self, pos: u32, window: usize) -> Phase {
        let row = if self.strong {
            self.rows.first()
        } else {
            self.rows.get(pos as usize)
        };
        row.and_then(|r| r.get(window)).copied().unwrap_or_else(Phase::zero)
    }

    /// Checks the table invariants.
    pub fn validate(&self) -> Result<()> {
        let windows = self.window_count();
        if self.strong && self.rows.len() != 1 {
            return Err(Error::InvalidTable("strong table must have exactly one row".into()));
        }
        for (p, row) in self.rows.iter().enumerate() {
            if row.len() != windows {
                return Err(Error::InvalidTable(format!("row {p} has {} windows", row.len())));
            }
            if !row[0].is_zero() {
                return Err(Error::InvalidTable(format!(
                    "nonzero phase on the all-zero window at position {p}"
                )));
            }
        }
        Ok(())
    }

    /// A copy with every entry replaced by `op(entry)`; the zero window stays 0.
    pub fn map(&self, mut op: impl FnMut(u32, usize, Phase) -> Phase) -> Result<Self> {
        let mut out = self.clone();
        for (p, row) in out.rows.iter_mut().enumerate() {
            for (w, e) in row.iter_mut().enumerate().skip(1) {
                *e = op(p as u32, w, *e);
            }
        }
        out.validate()?;
        Ok(out)
    }

    /// Iterates over the nonzero entries as `(position or None, window, phase)`.
    pub fn entries(&self) -> impl Iterator<Item = (Option<u32>, Vec<u32>, Phase)> + '_ {
        let q = self.base as usize;
        let width = self.gap as usize + 1;
        self.rows.iter().enumerate().flat_map(move |(p, row)| {
            row.iter().enumerate().filter(|(_, e)| !e.is_zero()).map(move |(w, e)| {
                let mut digits = Vec::with_capacity(width);
                let mut x = w;
                for _ in 0..width {
                    digits.push((x % q) as u32);
                    x /= q;
                }
                let pos = if self.strong { None } else { Some(p as u32) };
                (pos, digits, *e)
            })
        })
    }

    pub(crate) fn compile(&self) -> CompiledTable {
        let den = self.rows.iter().flatten().try_fold(1u64, |acc, e| {
            let d = e.denom()?;
            let l = acc.lcm(&d);
            (l <= EXACT_DEN_LIMIT).then_some(l)
        });
        let coeffs = match den {
            Some(den) => Coeffs::Exact {
                den,
                rows: self
                    .rows
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|e| {
                                let r = e.as_ratio().expect("all rational");
                                (*r.numer() as u64) * (den / *r.denom() as u64)
                            })
                            .collect()
                    })
                    .collect(),
            },
            None => Coeffs::Float {
                rows: self
                    .rows
                    .iter()
                    .map(|row| row.iter().map(Phase::to_f64).collect())
                    .collect(),
            },
        };
        CompiledTable {
            base: self.base as u64,
            window_mod: self.window_count() as u64,
            strong: self.strong,
            coeffs,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Coeffs {
    Exact { den: u64, rows: Vec<Vec<u64>> },
    Float { rows: Vec<Vec<f64>> },
}

/// Flat evaluation form of a [`CoefficientTable`].
#[derive(Clone, Debug)]
pub(crate) struct CompiledTable {
    base: u64,
    window_mod: u64,
    strong: bool,
    coeffs: Coeffs,
}

impl CompiledTable {
    pub(crate) fn den(&self) -> Option<u64> {
        match &self.coeffs {
            Coeffs::Exact { den, .. } => Some(*den),
            Coeffs::Float { .. } => None,
        }
    }

    fn row<'a, T>(&self, rows: &'a [Vec<T>], i: usize) -> Option<&'a [T]> {
        if self.strong {
            rows.first().map(Vec::as_slice)
        } else {
            rows.get(i).map(Vec::as_slice)
        }
    }

    /// Phase residue modulo `den()`; only valid on the exact path.
    pub(crate) fn units(&self, n: u64) -> u64 {
        let Coeffs::Exact { den, rows } = &self.coeffs else {
            unreachable!("units() on a float table")
        };
        let mut x = n;
        let mut i = 0;
        let mut acc = 0u64;
        while x != 0 {
            let Some(row) = self.row(rows, i) else { break };
            acc += row[(x % self.window_mod) as usize];
            if acc >= *den {
                acc -= den;
            }
            x /= self.base;
            i += 1;
        }
        acc
    }

    pub(crate) fn float(&self, n: u64) -> f64 {
        match &self.coeffs {
            Coeffs::Exact { den, .. } => self.units(n) as f64 / *den as f64,
            Coeffs::Float { rows } => {
                let mut x = n;
                let mut i = 0;
                let mut acc = 0.0;
                while x != 0 {
                    let Some(row) = self.row(rows, i) else { break };
                    acc += row[(x % self.window_mod) as usize];
                    x /= self.base;
                    i += 1;
                }
                frac(acc)
            }
        }
    }
}
