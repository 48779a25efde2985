use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase::{circle_norm, frac, unit};

/// Centre of mass of a family of phases on the circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Concentration {
    /// Argument of the mean of `e(α_n)`, divided by `2π`, in `[0, 1)`.
    pub beta: f64,
    /// `|E e(α_n)|`.
    pub mean_abs: f64,
}

/// Argument of `z / 2π` in `[0, 1)`, or 0 for `z = 0`.
pub fn arg_phase(z: Complex64) -> f64 {
    if z.norm() == 0.0 {
        0.0
    } else {
        frac(z.arg() / std::f64::consts::TAU)
    }
}

/// `β` and `|E e(α_n)|` for phases given as representatives in ℝ.
pub fn concentration_center(phases: &[f64]) -> Result<Concentration> {
    if phases.is_empty() {
        return Err(Error::EmptyInput("phase list"));
    }
    let mean = phases.iter().map(|&a| unit(a)).sum::<Complex64>() / phases.len() as f64;
    Ok(Concentration {
        beta: arg_phase(mean),
        mean_abs: mean.norm().min(1.0),
    })
}

/// Number of phases with `‖α_n - β‖ > δ`.
pub fn exceedances(phases: &[f64], beta: f64, delta: f64) -> usize {
    phases.iter().filter(|&&a| circle_norm(a - beta) > delta).count()
}

/// The bound `ε N / (8 δ²)` on the number of exceedances.
pub fn exceedance_bound(eps: f64, delta: f64, n: usize) -> f64 {
    eps / (8.0 * delta * delta) * n as f64
}
