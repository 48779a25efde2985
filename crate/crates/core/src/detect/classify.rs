use serde::Serialize;

use super::approx::{periodic_approx, ApproxOptions, ApproxOutcome};
use super::extract::{default_k0, extract_linear_phase, ExtractOptions, ExtractionResult};
use super::series::{block_intervals, lambda_sum_series};
use crate::digits::checked_pow;
use crate::error::{Error, Result};
use crate::lambda::{LambdaOptions, LambdaProfile};
use crate::phase::{Phase, PhaseJson};
use crate::seq::DigitalSequence;
use crate::sieve::{kbsz_scan, KbszScan};

/// Decision thresholds of [`classify`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    /// The series counts as bounded when its last-half increase is below this.
    pub plateau: f64,
    /// The series counts as growing when its last-half increase is at least
    /// this times the number of last-half blocks.
    pub growth: f64,
    /// Largest `|E f(pn) conj f(p'n)|` over the prime scan accepted as small.
    pub kbsz_small: f64,
    /// `ε` handed to the periodic approximation of the quotient.
    pub approx_epsilon: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            plateau: 0.05,
            growth: 0.4,
            kbsz_small: 0.25,
            approx_epsilon: 0.05,
        }
    }
}

/// Parameters of [`classify`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyParams {
    pub thresholds: Thresholds,
    /// Digit levels of the series for `g`; the largest `L ≤ 60` with
    /// `max(p, p') q^L < 2^63` if unset.
    pub levels: Option<u32>,
    /// Digit levels `L` of the periodic approximation of the quotient.
    pub approx_levels: u32,
    /// Inclusive prime range of the bilinear scan.
    pub kbsz_primes: (u64, u64),
    pub kbsz_limit: u64,
    pub seed: u64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            thresholds: Thresholds::default(),
            levels: None,
            approx_levels: 16,
            kbsz_primes: (3, 13),
            kbsz_limit: 1 << 16,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    AlmostPeriodicLike,
    KbszLike,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::AlmostPeriodicLike => "almost-periodic-like",
            Verdict::KbszLike => "kbsz-like",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Output of [`classify`]. The verdict is a finite-scale heuristic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DichotomyReport {
    pub p: u64,
    pub p_prime: u64,
    pub heuristic: bool,
    pub verdict: Verdict,
    pub thresholds: Thresholds,
    /// Block width and separation used for the series of `g`.
    pub block_width: u32,
    pub block_separation: u32,
    pub levels: u32,
    /// Increase of the series of `g` over its last half of blocks.
    pub last_half_increase: f64,
    pub last_half_blocks: usize,
    pub lambda_series: LambdaProfile,
    pub kbsz_max: f64,
    pub kbsz_scan: KbszScan,
    pub extracted_alpha: Option<PhaseJson>,
    pub extraction: Option<ExtractionResult>,
    pub quotient_series: Option<LambdaProfile>,
    pub approx: Option<ApproxOutcome>,
    pub seed: u64,
    pub diagnostics: Vec<String>,
}

/// `f(pn) conj f(p'n)`.
pub fn bilinear_sequence(f: &DigitalSequence, p: u64, p2: u64) -> Result<DigitalSequence> {
    f.subsequence(p, 0)?.product(&f.subsequence(p2, 0)?.conjugate())
}

fn default_levels(q: u32, p: u64) -> u32 {
    (0..=60u32)
        .rev()
        .find(|&l| {
            checked_pow(q, l)
                .and_then(|x| x.checked_mul(p))
                .is_some_and(|x| x < 1 << 63)
        })
        .unwrap_or(0)
}

/// Runs the dichotomy pipeline on the pair `(p, p')`: the `λ̄` series of
/// `g(n) = f(pn) conj f(p'n)` decides between a bounded branch (extract `α`,
/// divide out `e(αn)`, approximate the quotient periodically) and a growing
/// branch (confirm small bilinear averages over a prime scan).
pub fn classify(f: &DigitalSequence, p: u64, p2: u64, params: &ClassifyParams) -> Result<DichotomyReport> {
    if p == p2 || p == 0 || p2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "need distinct positive p, p', got {p}, {p2}"
        )));
    }
    let q = f.base();
    let th = params.thresholds;
    let g = bilinear_sequence(f, p, p2)?;
    let levels = params.levels.unwrap_or_else(|| default_levels(q, p.max(p2)));
    let w = g.gap() + 1;
    let lambda_opts = LambdaOptions {
        seed: params.seed,
        ..Default::default()
    };
    let lambda_series = lambda_sum_series(&g, levels, Some(w), Some(w), &lambda_opts)?;
    let rows = &lambda_series.rows;
    let half = rows.len() / 2;
    let before = if half == 0 { 0.0 } else { rows[half - 1].partial_bar_sum };
    let last_half_increase = lambda_series.total() - before;
    let last_half_blocks = rows.len() - half;

    let kbsz = kbsz_scan(f, params.kbsz_primes.0, params.kbsz_primes.1, params.kbsz_limit)?;
    let mut diagnostics = vec![
        "heuristic verdict from finite-scale evidence".to_string(),
        format!(
            "thresholds: plateau {}, growth {} per block, kbsz_small {}, approx ε {}",
            th.plateau, th.growth, th.kbsz_small, th.approx_epsilon
        ),
        format!(
            "g = f({p}n) conj f({p2}n) has gap {}; {} blocks of width {w} and separation {w} in [0, {levels})",
            g.gap(),
            rows.len()
        ),
        format!("last-half increase {last_half_increase} over {last_half_blocks} blocks"),
        format!(
            "kbsz max {} over primes in [{}, {}], N = {}",
            kbsz.max, params.kbsz_primes.0, params.kbsz_primes.1, params.kbsz_limit
        ),
    ];
    let mut report = DichotomyReport {
        p,
        p_prime: p2,
        heuristic: true,
        verdict: Verdict::Inconclusive,
        thresholds: th,
        block_width: w,
        block_separation: w,
        levels,
        last_half_increase,
        last_half_blocks,
        lambda_series: lambda_series.clone(),
        kbsz_max: kbsz.max,
        kbsz_scan: kbsz,
        extracted_alpha: None,
        extraction: None,
        quotient_series: None,
        approx: None,
        seed: params.seed,
        diagnostics: Vec::new(),
    };

    if rows.is_empty() {
        diagnostics.push("no blocks fit in the level range".into());
    } else if last_half_increase < th.plateau {
        diagnostics.push("series of g is bounded: extracting a linear phase".into());
        bounded_branch(f, p, p2, params, &mut report, &mut diagnostics)?;
    } else if last_half_increase >= th.growth * last_half_blocks as f64 {
        if report.kbsz_max <= th.kbsz_small {
            diagnostics.push("series of g grows linearly and bilinear averages are small".into());
            report.verdict = Verdict::KbszLike;
        } else {
            diagnostics.push("series of g grows linearly but bilinear averages are not small".into());
        }
    } else {
        diagnostics.push("series of g neither bounded nor linearly growing".into());
    }
    diagnostics.push(format!("verdict: {}", report.verdict));
    report.diagnostics = diagnostics;
    Ok(report)
}

fn bounded_branch(
    f: &DigitalSequence,
    p: u64,
    p2: u64,
    params: &ClassifyParams,
    report: &mut DichotomyReport,
    diagnostics: &mut Vec<String>,
) -> Result<()> {
    let q = f.base();
    let rows = &report.lambda_series.rows;
    let k0 = default_k0(f, p, p2);
    let width = 2 * k0 + 2;
    let top = report.levels;
    if width > top {
        diagnostics.push(format!("extraction interval of width {width} does not fit below {top}"));
        return Ok(());
    }
    let lo = rows[rows.len() / 2].interval_lo.min(top - width);
    let opts = ExtractOptions {
        seed: params.seed,
        ..Default::default()
    };
    let ext = match extract_linear_phase(f, p, p2, lo, lo + width, &opts) {
        Ok(e) => e,
        Err(e) => {
            diagnostics.push(format!("extraction failed: {e}"));
            return Ok(());
        }
    };
    diagnostics.push(format!(
        "extraction on [{lo}, {}): α = {}/{}, ψ spread {} (threshold {}), residual {}",
        lo + width,
        ext.alpha_num,
        ext.alpha_den,
        ext.epsilon,
        ext.threshold,
        ext.residual
    ));
    report.extracted_alpha = Some(PhaseJson::from(ext.alpha.clone()));
    let inconclusive = ext.inconclusive;
    let alpha: Phase = ext.alpha.clone();
    report.extraction = Some(ext);
    if inconclusive {
        diagnostics.push("ψ spread exceeds the uniqueness threshold".into());
        return Ok(());
    }
    let h = f.product(&DigitalSequence::linear(q, alpha.neg())?)?;
    let lambda_opts = LambdaOptions {
        seed: params.seed,
        ..Default::default()
    };
    report.quotient_series = Some(lambda_sum_series(&h, report.levels, None, None, &lambda_opts)?);
    let eps = params.thresholds.approx_epsilon;
    let approx_opts = ApproxOptions {
        seed: params.seed,
        ..Default::default()
    };
    let outcome = periodic_approx(&h, eps, params.approx_levels, &approx_opts);
    match outcome {
        Ok(out) => {
            match out.approx() {
                Some(a) if a.fraction_exceeding <= 2.0 * eps => {
                    diagnostics.push(format!(
                        "quotient is {q}^{}-periodic up to ε on all but {} of [0, {q}^{})",
                        a.m, a.fraction_exceeding, a.levels
                    ));
                    report.verdict = Verdict::AlmostPeriodicLike;
                }
                Some(a) => diagnostics.push(format!(
                    "periodic approximant misses on a fraction {} above 2ε",
                    a.fraction_exceeding
                )),
                None => diagnostics.push("quotient raised the not-almost-periodic signal".into()),
            }
            report.approx = Some(out);
        }
        Err(e) => diagnostics.push(format!("periodic approximation failed: {e}")),
    }
    Ok(())
}

/// The block intervals used for `g` by [`classify`].
pub fn classify_blocks(f: &DigitalSequence, p: u64, p2: u64, levels: u32) -> Result<Vec<(u32, u32)>> {
    let w = bilinear_sequence(f, p, p2)?.gap() + 1;
    block_intervals(levels, w, w)
}
