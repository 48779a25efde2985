//! Constructive detectors: phase concentration, shadowing of almost orbits,
//! rational snapping, linear phase extraction, q-almost periodic
//! approximation, factor covering and the bilinear dichotomy classifier.

mod approx;
mod classify;
mod concentration;
mod cover;
mod extract;
mod series;
mod shadow;
mod snap;
mod zero_run;

pub use approx::{
    periodic_approx, ApproxOptions, ApproxOutcome, PeriodicApprox, ProbeFailure, DEFAULT_HORIZON, DEFAULT_MAX_PERIOD,
};
pub use classify::{
    bilinear_sequence, classify, classify_blocks, ClassifyParams, DichotomyReport, Thresholds, Verdict,
};
pub use concentration::{arg_phase, concentration_center, exceedance_bound, exceedances, Concentration};
pub use cover::{factor_cover_count, CoverCount, Positions, COVER_BUDGET, COVER_CONSTANT};
pub use extract::{default_k0, extract_linear_phase, ExtractOptions, ExtractionResult};
pub use series::{block_intervals, lambda_sum_series};
pub use shadow::{shadow, Shadow, SHADOW_TOL};
pub use snap::{rational_snap, snap_denominators, Snap, SnapFamily, MAX_SNAP_EXPONENT};
pub use zero_run::{min_window_for_zero_run, words_avoiding_zero_run, MAX_ZERO_RUN_WINDOW};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::digits::IndexSet;
use crate::error::Result;
use crate::lambda::{random_point, Scatter};

/// All `n` with `supp(n) ⊆ set` when there are at most `cap` of them,
/// otherwise `samples` seeded uniform draws. The flag reports sampling.
pub(crate) fn support_points(set: &IndexSet, q: u32, cap: u64, samples: u64, seed: u64) -> Result<(Vec<u64>, bool)> {
    if set.point_count(q) <= cap as u128 {
        let sc = Scatter::new(set, q, cap)?;
        Ok(((0..sc.count).map(|t| sc.point(t)).collect(), false))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..samples)
            .map(|_| random_point(&mut rng, set, q))
            .collect::<Result<_>>()?;
        Ok((pts, true))
    }
}

/// Radius and centre of the shortest arc of ℝ/ℤ containing every phase.
pub(crate) fn covering_arc(phases: &[f64]) -> (f64, f64) {
    let mut v: Vec<f64> = phases.iter().map(|&x| crate::phase::frac(x)).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let mut best_gap = v[0] + 1.0 - v[v.len() - 1];
    let mut start = v[0];
    for w in v.windows(2) {
        if w[1] - w[0] > best_gap {
            best_gap = w[1] - w[0];
            start = w[1];
        }
    }
    let radius = (1.0 - best_gap) / 2.0;
    (radius, crate::phase::frac(start + radius))
}
