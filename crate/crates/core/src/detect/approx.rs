use num_complex::Complex64;
use serde::Serialize;

use super::concentration::arg_phase;
use super::support_points;
use super::zero_run::min_window_for_zero_run;
use crate::digits::{checked_pow, digit_at, IndexSet};
use crate::error::{Error, Result};
use crate::lambda::{average, lambda_exact_set, LambdaValue, DEFAULT_EXACT_CAP, DEFAULT_MC_SAMPLES};
use crate::phase::circle_norm;
use crate::seq::DigitalSequence;

/// Default number of starting positions `K` tried by [`periodic_approx`].
pub const DEFAULT_HORIZON: u32 = 24;

/// Default limit on the period `q^M` of the approximant.
pub const DEFAULT_MAX_PERIOD: u64 = 1 << 22;

/// Options for [`periodic_approx`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ApproxOptions {
    /// Width of the probe window `[K, K + w)`; `2r + 2` if unset.
    pub probe_width: Option<u32>,
    /// Largest starting position `K` tried.
    pub horizon: u32,
    pub max_period: u64,
    pub exact_cap: u64,
    pub samples: u64,
    pub seed: u64,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions {
            probe_width: None,
            horizon: DEFAULT_HORIZON,
            max_period: DEFAULT_MAX_PERIOD,
            exact_cap: DEFAULT_EXACT_CAP,
            samples: DEFAULT_MC_SAMPLES,
            seed: 0,
        }
    }
}

/// A `q^M`-periodic phase `g` with `‖φ(n) - g(n)‖ ≤ ε` for most `n < q^L`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicApprox {
    /// First position from which every probe has `λ ≤ ε³`.
    pub k: u32,
    /// Period exponent.
    pub m: u32,
    pub period: u64,
    pub levels: u32,
    /// `g(n)` for `n < q^M`, as phases in `[0, 1)`.
    #[serde(skip)]
    pub table: Vec<f64>,
    /// Proportion of tested `n < q^L` with `‖φ(n) - g(n)‖ > ε`.
    pub fraction_exceeding: f64,
    pub epsilon: f64,
    /// `q^L`.
    pub tested_range: u128,
    /// Number of `n` actually tested.
    pub tested: u64,
    pub sampled: bool,
    pub seed: u64,
}

impl PeriodicApprox {
    /// `g(n)`.
    pub fn phase(&self, n: u64) -> f64 {
        self.table[(n % self.period) as usize]
    }
}

/// A probe with `λ > ε³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeFailure {
    pub k: u32,
    pub lo: u32,
    pub hi: u32,
    pub lambda: LambdaValue,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum ApproxOutcome {
    Approx(PeriodicApprox),
    /// No `K` up to the horizon passes; one failing probe per `K`.
    NotAlmostPeriodic {
        horizon: u32,
        probe_width: u32,
        failures: Vec<ProbeFailure>,
    },
}

impl ApproxOutcome {
    pub fn approx(&self) -> Option<&PeriodicApprox> {
        match self {
            ApproxOutcome::Approx(a) => Some(a),
            ApproxOutcome::NotAlmostPeriodic { .. } => None,
        }
    }
}

fn first_failing_probe(f: &DigitalSequence, k: u32, w: u32, bound: f64, cap: u64) -> Result<Option<ProbeFailure>> {
    for lo in k..k + w {
        for hi in lo + 1..=k + w {
            let lambda = lambda_exact_set(f, &IndexSet::interval(lo, hi), cap)?;
            if lambda.is_infinite() || lambda.value() > bound {
                return Ok(Some(ProbeFailure { k, lo, hi, lambda }));
            }
        }
    }
    Ok(None)
}

/// Phase of `E f(n)` over `supp(n) ⊆ [lo, hi)`.
fn mean_phase(f: &DigitalSequence, lo: u32, hi: u32, opts: &ApproxOptions) -> Result<f64> {
    let set = IndexSet::interval(lo, hi);
    if set.point_count(f.base()) <= opts.exact_cap as u128 {
        return Ok(arg_phase(average(f, &set, opts.exact_cap)?.mean));
    }
    let seed = opts.seed ^ ((lo as u64) << 32);
    let (pts, _) = support_points(&set, f.base(), 0, opts.samples, seed)?;
    let sum = pts
        .iter()
        .try_fold(Complex64::new(0.0, 0.0), |acc, &n| Ok(acc + f.eval(n)?))?;
    Ok(arg_phase(sum))
}

/// Builds a `q^M`-periodic approximant of `f` on `[0, q^L)`, or reports that
/// no starting position `K` within the horizon has `λ ≤ ε³` on every probe
/// interval inside `[K, K + w)`.
pub fn periodic_approx(f: &DigitalSequence, eps: f64, levels: u32, opts: &ApproxOptions) -> Result<ApproxOutcome> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("ε must lie in (0, 1), got {eps}")));
    }
    let q = f.base();
    let r = f.gap();
    let w = opts.probe_width.unwrap_or(2 * r + 2);
    if w == 0 {
        return Err(Error::InvalidArgument("probe width must be positive".into()));
    }
    checked_pow(q, levels).ok_or_else(|| Error::Overflow(format!("{q}^{levels} exceeds 64 bits")))?;
    let bound = eps.powi(3);
    let mut failures = Vec::new();
    let mut found = None;
    for k in 0..=opts.horizon {
        if checked_pow(q, k + w).is_none() {
            break;
        }
        match first_failing_probe(f, k, w, bound, opts.exact_cap)? {
            Some(fail) => failures.push(fail),
            None => {
                found = Some(k);
                break;
            }
        }
    }
    let Some(k) = found else {
        return Ok(ApproxOutcome::NotAlmostPeriodic {
            horizon: opts.horizon,
            probe_width: w,
            failures,
        });
    };

    let m = k + min_window_for_zero_run(q, r, eps)?;
    if levels < m {
        return Err(Error::IntervalTooSmall(format!(
            "L = {levels} is below the period exponent {m}"
        )));
    }
    let period = checked_pow(q, m)
        .filter(|&p| p <= opts.max_period)
        .ok_or_else(|| Error::ResourceCap(format!("period {q}^{m} exceeds {}", opts.max_period)))?;

    let base = f.eval_phase(0)?.to_f64();
    let tops: Vec<f64> = (k..=m.saturating_sub(r).max(k))
        .map(|l| mean_phase(f, (l + r).min(levels), levels, opts))
        .collect::<Result<_>>()?;
    let table = (0..period)
        .map(|t| {
            let start = (k..=m.saturating_sub(r)).find(|&l| (l..l + r).all(|i| digit_at(t, i, q) == 0));
            match start {
                Some(l) => {
                    let low = t % checked_pow(q, l).expect("l ≤ M");
                    Ok(crate::phase::frac(f.phase_f64(low)? + tops[(l - k) as usize] - base))
                }
                None => Ok(crate::phase::frac(base)),
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let range = IndexSet::interval(0, levels);
    let (points, sampled) = support_points(&range, q, opts.exact_cap, opts.samples, opts.seed)?;
    let exceeding = points
        .iter()
        .map(|&n| Ok(circle_norm(f.phase_f64(n)? - table[(n % period) as usize]) > eps))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&b| b)
        .count();

    Ok(ApproxOutcome::Approx(PeriodicApprox {
        k,
        m,
        period,
        levels,
        table,
        fraction_exceeding: exceeding as f64 / points.len() as f64,
        epsilon: eps,
        tested_range: range.point_count(q),
        tested: points.len() as u64,
        sampled,
        seed: opts.seed,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::Phase;

    fn lin(num: i64, den: i64) -> DigitalSequence {
        DigitalSequence::linear(2, Phase::rational(num, den).unwrap()).unwrap()
    }

    #[test]
    fn dyadic_linear_phase() {
        let f = lin(3, 8);
        let out = periodic_approx(&f, 0.05, 16, &ApproxOptions::default()).unwrap();
        let a = out.approx().expect("approximable");
        assert_eq!((a.k, a.m, a.period), (3, 3, 8));
        assert_eq!(a.fraction_exceeding, 0.0);
        assert!(!a.sampled);
        for n in 0..1000u64 {
            assert!(circle_norm(a.phase(n) - 3.0 * n as f64 / 8.0) < 1e-12);
        }
    }

    #[test]
    fn thue_morse_is_not_almost_periodic() {
        let tm = DigitalSequence::thue_morse();
        match periodic_approx(
            &tm,
            0.05,
            16,
            &ApproxOptions {
                horizon: 8,
                ..Default::default()
            },
        )
        .unwrap()
        {
            ApproxOutcome::NotAlmostPeriodic { failures, .. } => {
                assert_eq!(failures.len(), 9);
                assert!(failures.iter().all(|f| f.lambda.is_infinite()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constant_one_and_rotations() {
        let one = DigitalSequence::one(3).unwrap();
        let a = periodic_approx(&one, 0.1, 8, &ApproxOptions::default()).unwrap();
        assert_eq!(a.approx().unwrap().period, 1);
        let rot = lin(1, 4).rotate(Phase::rational(2, 5).unwrap());
        let out = periodic_approx(&rot, 0.05, 14, &ApproxOptions::default()).unwrap();
        assert_eq!(out.approx().unwrap().fraction_exceeding, 0.0);
    }

    #[test]
    fn rudin_shapiro_has_no_approximant() {
        let f = DigitalSequence::block(
            2,
            crate::digits::Pattern::parse("11", 2).unwrap(),
            Phase::rational(1, 2).unwrap(),
        )
        .unwrap();
        let out = periodic_approx(
            &f,
            0.2,
            12,
            &ApproxOptions {
                horizon: 6,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(out.approx().is_none());
    }

    #[test]
    fn invalid_arguments() {
        let f = lin(1, 2);
        assert!(periodic_approx(&f, 0.0, 8, &ApproxOptions::default()).is_err());
        assert!(periodic_approx(&f, 1.5, 8, &ApproxOptions::default()).is_err());
        assert!(matches!(
            periodic_approx(&f, 0.05, 0, &ApproxOptions::default()),
            Err(Error::IntervalTooSmall(_))
        ));
    }
}
