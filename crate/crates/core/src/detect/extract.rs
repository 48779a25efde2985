use num_integer::Integer;
use serde::Serialize;

use super::shadow::shadow;
use super::snap::{rational_snap, Snap};
use super::{covering_arc, support_points};
use crate::digits::{checked_pow, sum_digits, IndexSet};
use crate::error::{Error, Result};
use crate::lambda::{DEFAULT_EXACT_CAP, DEFAULT_MC_SAMPLES};
use crate::phase::{circle_norm, Phase};
use crate::seq::{ceil_log, DigitalSequence};

/// Options for [`extract_linear_phase`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtractOptions {
    /// Margin removed from each side of the interval; [`default_k0`] if unset.
    pub k0: Option<u32>,
    /// Exponent `t` of the snapping denominators `(p - p')^t`.
    pub snap_exponent: u32,
    pub exact_cap: u64,
    pub samples: u64,
    pub seed: u64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            k0: None,
            snap_exponent: 1,
            exact_cap: DEFAULT_EXACT_CAP,
            samples: DEFAULT_MC_SAMPLES,
            seed: 0,
        }
    }
}

/// Outcome of [`extract_linear_phase`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtractionResult {
    pub alpha: Phase,
    pub alpha_num: u64,
    pub alpha_den: u64,
    pub k0: u32,
    /// `J = [lo, hi)`.
    pub window: (u32, u32),
    /// Radius of the smallest arc containing `ψ(n)` for `supp(n) ⊆ I`.
    pub epsilon: f64,
    /// `1 / (8 (p - p')²)`.
    pub threshold: f64,
    /// Centre of that arc.
    pub psi_center: f64,
    /// Shadow of `φ(q^l) - φ(0)` over `l ∈ J`, an approximation of `α q^{min J}`.
    pub shadow: f64,
    pub snap: Snap,
    /// `max ‖φ(n) - φ(0) - α n‖ / s_q(n)` over `0 < n` with `supp(n) ⊆ J`.
    pub residual: f64,
    /// Set when `ε` exceeds the threshold.
    pub inconclusive: bool,
    /// Set when `ψ` or the residual was estimated from random points.
    pub sampled: bool,
    pub seed: u64,
}

/// `3r + ceil(log_q max(p, p')) + 4`.
pub fn default_k0(f: &DigitalSequence, p: u64, p2: u64) -> u32 {
    3 * f.gap() + ceil_log(f.base(), p.max(p2)) + 4
}

fn inverse_mod(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let e = (a as i128).extended_gcd(&(m as i128));
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(m as i128) as u64
}

/// Recovers `α` with `φ(n) ≈ φ(0) + α n` on `J = [min I + k0, max I - k0]`
/// from the concentration of `ψ(n) = φ(pn) - φ(p'n)` on `I = [lo, hi)`.
pub fn extract_linear_phase(
    f: &DigitalSequence,
    p: u64,
    p2: u64,
    lo: u32,
    hi: u32,
    opts: &ExtractOptions,
) -> Result<ExtractionResult> {
    let q = f.base();
    if p == 0 || p2 == 0 || p == p2 {
        return Err(Error::InvalidArgument(format!(
            "need distinct positive p, p', got {p}, {p2}"
        )));
    }
    let k0 = opts.k0.unwrap_or_else(|| default_k0(f, p, p2));
    let width = hi.saturating_sub(lo);
    if width <= 2 * k0 + 1 {
        return Err(Error::IntervalTooSmall(format!(
            "|I| = {width} must exceed 2 k0 + 1 = {}",
            2 * k0 + 1
        )));
    }
    checked_pow(q, hi)
        .and_then(|top| top.checked_mul(p.max(p2)))
        .ok_or_else(|| Error::Overflow(format!("{}·{q}^{hi} exceeds 64 bits", p.max(p2))))?;

    let set = IndexSet::interval(lo, hi);
    let (points, sampled_psi) = support_points(&set, q, opts.exact_cap, opts.samples, opts.seed)?;
    let psi = points
        .iter()
        .map(|&n| Ok(f.eval_phase(p * n)?.sub(&f.eval_phase(p2 * n)?).to_f64()))
        .collect::<Result<Vec<f64>>>()?;
    let (epsilon, psi_center) = covering_arc(&psi);
    let d = p.abs_diff(p2) as f64;
    let threshold = 1.0 / (8.0 * d * d);

    let (j0, j1) = (lo + k0, hi - k0);
    let base = f.eval_phase(0)?;
    let alphas = (j0..j1)
        .map(|l| {
            Ok(f.eval_phase(checked_pow(q, l).expect("checked above"))?
                .sub(&base)
                .to_f64())
        })
        .collect::<Result<Vec<f64>>>()?;
    let defects: Vec<f64> = alphas.windows(2).map(|w| circle_norm(w[1] - q as f64 * w[0])).collect();
    let mut tol = defects.clone();
    for i in (0..tol.len().saturating_sub(1)).rev() {
        tol[i] = tol[i].max(tol[i + 1]);
    }
    let beta = shadow(&alphas, &tol, q)?.beta();
    let snap = rational_snap(beta, p, p2, q, opts.snap_exponent)?;
    let b = snap.den;
    let shift = checked_pow(q, j0).expect("checked above") % b;
    let num = (snap.num as u128 * inverse_mod(shift, b) as u128 % b as u128) as u64;
    let alpha = Phase::rational(num as i64, b as i64)?;

    let jset = IndexSet::interval(j0, j1);
    let (jpoints, sampled_res) = support_points(&jset, q, opts.exact_cap, opts.samples, opts.seed.wrapping_add(1))?;
    let mut residual: f64 = 0.0;
    for &n in jpoints.iter().filter(|&&n| n != 0) {
        let dev = f.eval_phase(n)?.sub(&base).sub(&alpha.mul_int((n % b) as i64)).norm();
        residual = residual.max(dev / sum_digits(n, q)? as f64);
    }

    Ok(ExtractionResult {
        alpha,
        alpha_num: num,
        alpha_den: b,
        k0,
        window: (j0, j1),
        epsilon,
        threshold,
        psi_center,
        shadow: beta,
        snap,
        residual,
        inconclusive: epsilon > threshold,
        sampled: sampled_psi || sampled_res,
        seed: opts.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(num: i64, den: i64) -> DigitalSequence {
        DigitalSequence::linear(2, Phase::rational(num, den).unwrap()).unwrap()
    }

    #[test]
    fn recovers_a_third() {
        let f = lin(1, 3);
        let r = extract_linear_phase(&f, 5, 2, 0, 16, &ExtractOptions::default()).unwrap();
        assert_eq!((r.alpha_num, r.alpha_den), (1, 3));
        assert_eq!(r.k0, 7);
        assert_eq!(r.window, (7, 9));
        assert_eq!(r.epsilon, 0.0);
        assert_eq!(r.residual, 0.0);
        assert!(!r.inconclusive && !r.sampled);
    }

    #[test]
    fn dyadic_phase_leaves_no_residual() {
        let f = lin(1, 4);
        let r = extract_linear_phase(&f, 5, 2, 2, 18, &ExtractOptions::default()).unwrap();
        assert_eq!((r.alpha_num, r.alpha_den), (0, 1));
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn rotation_is_ignored() {
        let f = lin(2, 3).rotate(Phase::rational(1, 7).unwrap());
        let r = extract_linear_phase(&f, 5, 2, 0, 16, &ExtractOptions::default()).unwrap();
        assert_eq!((r.alpha_num, r.alpha_den), (2, 3));
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn rudin_shapiro_is_inconclusive() {
        let f = DigitalSequence::rudin_shapiro();
        let opts = ExtractOptions {
            k0: Some(3),
            ..Default::default()
        };
        let r = extract_linear_phase(&f, 3, 5, 0, 16, &opts).unwrap();
        assert!(r.inconclusive);
        assert!(r.epsilon > r.threshold);
    }

    #[test]
    fn small_interval_is_rejected() {
        let f = DigitalSequence::rudin_shapiro();
        let err = extract_linear_phase(&f, 3, 5, 0, 16, &ExtractOptions::default()).unwrap_err();
        assert!(matches!(err, Error::IntervalTooSmall(_)));
        assert!(extract_linear_phase(&f, 3, 3, 0, 40, &ExtractOptions::default()).is_err());
    }

    #[test]
    fn admissible_rationals_are_separated() {
        for d in 1u64..50 {
            let mut xs: Vec<(u64, u64)> = Vec::new();
            for b in (1..=d).filter(|b| d % b == 0) {
                xs.extend((0..b).filter(|a| a.gcd(&b) == 1).map(|a| (a, b)));
            }
            let eps0 = 1.0 / (8.0 * (d * d) as f64);
            for (i, &(a, b)) in xs.iter().enumerate() {
                for &(c, e) in &xs[i + 1..] {
                    let gap = circle_norm(a as f64 / b as f64 - c as f64 / e as f64);
                    assert!(gap > 2.0 * eps0, "d={d}: {a}/{b} vs {c}/{e}");
                }
            }
        }
    }
}
