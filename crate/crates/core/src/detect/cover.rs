use std::collections::HashSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seq::DigitalSequence;

/// Largest `d · (number of positions)` accepted by [`factor_cover_count`].
pub const COVER_BUDGET: u64 = 1 << 26;

/// The constant `C` in the bound `count ≤ C q^{2r} d / ε²`.
pub const COVER_CONSTANT: f64 = 8.0;

/// Starting positions of the sampled factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Positions {
    /// `start, start + 1, …, start + count - 1`.
    Range { start: u64, count: u64 },
    /// `count` seeded uniform draws from `[0, below)`, in draw order.
    Random { count: u64, below: u64, seed: u64 },
}

impl Positions {
    pub fn count(&self) -> u64 {
        match *self {
            Positions::Range { count, .. } | Positions::Random { count, .. } => count,
        }
    }

    fn list(&self) -> Result<Vec<u64>> {
        match *self {
            Positions::Range { start, count } => {
                start
                    .checked_add(count)
                    .ok_or_else(|| Error::Overflow("position range exceeds 64 bits".into()))?;
                Ok((start..start + count).collect())
            }
            Positions::Random { count, below, seed } => {
                if below == 0 {
                    return Err(Error::InvalidArgument("empty position range".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((0..count).map(|_| rng.gen_range(0..below)).collect())
            }
        }
    }
}

/// Size of a greedy ε-net over sampled factors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoverCount {
    pub count: usize,
    /// Number of distinct factors seen.
    pub distinct: usize,
    pub d: u32,
    pub epsilon: f64,
    /// `C q^{2r} d / ε²`.
    pub bound: f64,
}

fn sup_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Greedy cover of the factors `(f(n+j))_{j<d}` by sup-distance balls of
/// radius `ε`: factors are visited in sample order and a new centre opens
/// whenever no existing centre is within `ε`.
pub fn factor_cover_count(f: &DigitalSequence, d: u32, eps: f64, positions: &Positions) -> Result<CoverCount> {
    if d == 0 {
        return Err(Error::InvalidArgument("factor length must be positive".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("ε must be positive, got {eps}")));
    }
    let work = positions.count().saturating_mul(d as u64);
    if work > COVER_BUDGET {
        return Err(Error::ResourceCap(format!(
            "{work} factor entries exceed {COVER_BUDGET}"
        )));
    }
    let starts = positions.list()?;
    if let Some(&top) = starts.iter().max() {
        top.checked_add(d as u64)
            .ok_or_else(|| Error::Overflow("factor runs past 64 bits".into()))?;
    }
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut centres: Vec<Vec<Complex64>> = Vec::new();
    for &n in &starts {
        let key = (0..d as u64)
            .map(|j| match f.is_exact() {
                true => f.phase_units(n + j),
                false => Ok(f.phase_f64(n + j)?.to_bits()),
            })
            .collect::<Result<Vec<u64>>>()?;
        if !seen.insert(key) {
            continue;
        }
        let v = (0..d as u64)
            .map(|j| f.eval(n + j))
            .collect::<Result<Vec<Complex64>>>()?;
        if centres.iter().all(|c| sup_dist(c, &v) > eps) {
            centres.push(v);
        }
    }
    let q = f.base() as f64;
    Ok(CoverCount {
        count: centres.len(),
        distinct: seen.len(),
        d,
        epsilon: eps,
        bound: COVER_CONSTANT * q.powi(2 * f.gap() as i32) * d as f64 / (eps * eps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::Phase;

    #[test]
    fn constant_sequence_needs_one_box() {
        let one = DigitalSequence::one(2).unwrap();
        let c = factor_cover_count(&one, 8, 0.1, &Positions::Range { start: 0, count: 500 }).unwrap();
        assert_eq!(c.count, 1);
    }

    #[test]
    fn single_letters_fit_the_circle_bound() {
        let f = DigitalSequence::linear(2, Phase::float(0.5f64.sqrt()).unwrap()).unwrap();
        for eps in [0.05, 0.1, 0.3, 0.7] {
            let c = factor_cover_count(&f, 1, eps, &Positions::Range { start: 0, count: 4000 }).unwrap();
            assert!(
                c.count as f64 <= (std::f64::consts::TAU / eps).ceil() + 1.0,
                "ε = {eps}: {}",
                c.count
            );
            assert!(c.count as f64 <= c.bound);
        }
    }

    #[test]
    fn thue_morse_factors() {
        // the factor complexity of Thue–Morse at lengths 1..5
        let tm = DigitalSequence::thue_morse();
        let counts: Vec<usize> = (1..=5)
            .map(|d| {
                factor_cover_count(&tm, d, 0.5, &Positions::Range { start: 0, count: 4096 })
                    .unwrap()
                    .count
            })
            .collect();
        assert_eq!(counts, vec![2, 4, 6, 10, 12]);
    }

    #[test]
    fn random_positions_are_reproducible() {
        let rs = DigitalSequence::rudin_shapiro();
        let pos = Positions::Random {
            count: 2000,
            below: 1 << 30,
            seed: 9,
        };
        let a = factor_cover_count(&rs, 6, 0.3, &pos).unwrap();
        let b = factor_cover_count(&rs, 6, 0.3, &pos).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget() {
        let rs = DigitalSequence::rudin_shapiro();
        let pos = Positions::Range {
            start: 0,
            count: 1 << 25,
        };
        assert!(matches!(
            factor_cover_count(&rs, 4, 0.3, &pos),
            Err(Error::ResourceCap(_))
        ));
        assert!(factor_cover_count(&rs, 0, 0.3, &pos).is_err());
    }
}
