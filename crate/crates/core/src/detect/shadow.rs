use serde::Serialize;

use crate::digits::check_base;
use crate::error::{Error, Result};
use crate::phase::{circle_norm, frac};

/// Slack allowed for float rounding when checking hypothesis and guarantee.
pub const SHADOW_TOL: f64 = 1e-12;

/// A real number `β = (k + a) / q^s` with integer `k` and `a ∈ [0, 1)`.
///
/// Keeping the lift `k` exact lets `q^i β mod 1` be evaluated without the
/// loss of `i` base-`q` digits that a plain float would suffer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Shadow {
    pub q: u32,
    pub s: u32,
    pub lift: i128,
    pub tail: f64,
}

impl Shadow {
    /// `β mod 1`.
    pub fn beta(&self) -> f64 {
        self.orbit(0)
    }

    /// `q^i β mod 1` for `i ≤ s`.
    pub fn orbit(&self, i: u32) -> f64 {
        let m = (self.q as i128).pow(self.s - i.min(self.s));
        frac((self.lift.rem_euclid(m) as f64 + self.tail) / m as f64)
    }
}

/// Finds `β` with `‖q^i β - α_i‖ ≤ ε_i` for every `i`, given an almost orbit
/// `‖α_{i+1} - q α_i‖ ≤ ε_i` with nonincreasing `ε`.
///
/// Follows the constructive proof: `β_0 ∈ [-1/2, 1/2)` lifts `α_0` and each
/// `β_{i+1}` is the lift of `α_{i+1}` under `×q^{i+1}` nearest to `β_i`. The
/// lifts are kept as `(α_i + k_i) / q^i` with integer `k_i`. The guarantee is
/// checked before returning.
pub fn shadow(alphas: &[f64], eps: &[f64], q: u32) -> Result<Shadow> {
    check_base(q)?;
    if alphas.is_empty() {
        return Err(Error::EmptyInput("orbit"));
    }
    if eps.len() + 1 < alphas.len() {
        return Err(Error::InvalidArgument(format!(
            "{} tolerances for {} orbit points",
            eps.len(),
            alphas.len()
        )));
    }
    let qf = q as f64;
    let alphas: Vec<f64> = alphas.iter().map(|&a| frac(a)).collect();
    for i in 0..alphas.len() {
        if i + 1 < eps.len() && eps[i + 1] > eps[i] {
            return Err(Error::ShadowHypothesis {
                index: i + 1,
                reason: format!("tolerances increase: {} > {}", eps[i + 1], eps[i]),
            });
        }
        if i + 1 < alphas.len() {
            let d = circle_norm(alphas[i + 1] - qf * alphas[i]);
            if d > eps[i] + SHADOW_TOL {
                return Err(Error::ShadowHypothesis {
                    index: i,
                    reason: format!("‖α_{} - q α_{i}‖ = {d} exceeds ε_{i} = {}", i + 1, eps[i]),
                });
            }
        }
    }
    let s = alphas.len() - 1;
    (q as i128)
        .checked_pow(s as u32)
        .ok_or_else(|| Error::Overflow(format!("{q}^{s} exceeds 128 bits")))?;
    let mut k: i128 = if alphas[0] >= 0.5 { -1 } else { 0 };
    for i in 0..s {
        let step = (qf * alphas[i] - alphas[i + 1]).round() as i128;
        k = k
            .checked_mul(q as i128)
            .and_then(|x| x.checked_add(step))
            .ok_or_else(|| Error::Overflow("shadow lift exceeds 128 bits".into()))?;
    }
    let out = Shadow {
        q,
        s: s as u32,
        lift: k,
        tail: alphas[s],
    };
    for (i, &a) in alphas.iter().enumerate() {
        let d = circle_norm(out.orbit(i as u32) - a);
        let bound = if i < eps.len() { eps[i] } else { 0.0 };
        if d > bound + SHADOW_TOL {
            return Err(Error::ShadowHypothesis {
                index: i,
                reason: format!("guarantee fails: ‖q^{i} β - α_{i}‖ = {d} > {bound}"),
            });
        }
    }
    Ok(out)
}
