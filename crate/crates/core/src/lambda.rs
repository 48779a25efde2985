//! The cancellation functional `λ_f(I) = -log |E_{supp(n) ⊆ I} f(n)|`.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::cyclotomic;
use crate::digits::{checked_pow, IndexSet};
use crate::error::{Error, Result};
use crate::phase::{unit_from_units, FLOAT_TOL};
use crate::seq::DigitalSequence;

/// Default cap on `q^{|I|}` for exact enumeration.
pub const DEFAULT_EXACT_CAP: u64 = 1 << 20;

/// Largest denominator for which a vanishing mean is decided exactly.
pub const EXACT_ZERO_DEN_LIMIT: u64 = 1 << 16;

/// Means below this modulus count as zero when not decided exactly.
pub const ZERO_MEAN_TOL: f64 = 1e-12;

/// Default Monte Carlo sample count.
pub const DEFAULT_MC_SAMPLES: u64 = 1 << 16;

const CHUNK: u64 = 1 << 16;

/// A value of `λ`: a nonnegative real or `+∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LambdaValue {
    Finite(f64),
    Infinite,
}

impl LambdaValue {
    /// `-log m` for a mean modulus `m`, with `m = 0` mapped to `+∞`.
    pub fn from_modulus(m: f64) -> LambdaValue {
        if m <= 0.0 {
            LambdaValue::Infinite
        } else {
            LambdaValue::Finite((-m.ln()).max(0.0))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, LambdaValue::Infinite)
    }

    /// The value as a float, `+∞` included.
    pub fn value(&self) -> f64 {
        match *self {
            LambdaValue::Finite(x) => x,
            LambdaValue::Infinite => f64::INFINITY,
        }
    }

    /// `exp(-λ)`, the modulus of the mean.
    pub fn modulus(&self) -> f64 {
        (-self.value()).exp()
    }

    /// `λ̄ = min(λ, 1)`.
    pub fn bar(&self) -> f64 {
        lambda_bar(*self)
    }
}

impl fmt::Display for LambdaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaValue::Finite(x) => write!(f, "{x}"),
            LambdaValue::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for LambdaValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LambdaValue::Finite(x) => s.serialize_f64(*x),
            LambdaValue::Infinite => s.serialize_str("inf"),
        }
    }
}

/// `λ̄ = min(λ, 1)`, with `+∞ ↦ 1`.
pub fn lambda_bar(v: LambdaValue) -> f64 {
    v.value().min(1.0)
}

/// Positions of a set with their place values, for scattering digits.
pub(crate) struct Scatter {
    q: u64,
    pub(crate) places: Vec<u64>,
    pub(crate) count: u64,
}

impl Scatter {
    pub(crate) fn new(set: &IndexSet, q: u32, cap: u64) -> Result<Scatter> {
        let count = set.point_count(q);
        if count > cap as u128 {
            return Err(Error::TooLargeInterval { count, cap });
        }
        let places = set
            .iter()
            .map(|i| checked_pow(q, i).ok_or_else(|| Error::Overflow(format!("position {i} beyond 64-bit range"))))
            .collect::<Result<Vec<u64>>>()?;
        if let Some(&top) = places.last() {
            top.checked_mul(q as u64 - 1)
                .and_then(|x| x.checked_add(top - 1))
                .ok_or_else(|| Error::Overflow("largest point exceeds 64 bits".into()))?;
        }
        Ok(Scatter {
            q: q as u64,
            places,
            count: count as u64,
        })
    }

    /// The `t`-th integer supported on the set, in increasing order.
    pub(crate) fn point(&self, mut t: u64) -> u64 {
        let mut n = 0;
        for &p in &self.places {
            if t == 0 {
                break;
            }
            n += (t % self.q) * p;
            t /= self.q;
        }
        n
    }
}

/// Mean of `f` over `supp(n) ⊆ set`, with an exact zero decision when possible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Average {
    pub mean: Complex64,
    pub count: u64,
    /// True when the mean was decided to vanish.
    pub zero: bool,
    /// True when `zero` was decided by exact arithmetic.
    pub exact_zero_test: bool,
}

fn exact_histogram(f: &DigitalSequence, sc: &Scatter, den: u64) -> Result<Vec<u64>> {
    let chunks = sc.count.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut h = vec![0u64; den as usize];
            for t in c * CHUNK..((c + 1) * CHUNK).min(sc.count) {
                h[f.phase_units(sc.point(t))? as usize] += 1;
            }
            Ok(h)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut hist = vec![0u64; den as usize];
    for h in parts {
        for (a, b) in hist.iter_mut().zip(h) {
            *a += b;
        }
    }
    Ok(hist)
}

fn chunked_sum(f: &DigitalSequence, sc: &Scatter) -> Result<Complex64> {
    let chunks = sc.count.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            (c * CHUNK..((c + 1) * CHUNK).min(sc.count))
                .try_fold(Complex64::new(0.0, 0.0), |acc, t| Ok(acc + f.eval(sc.point(t))?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().sum())
}

/// Exact average of `f` over all `n` with `supp(n) ⊆ set`.
pub fn average(f: &DigitalSequence, set: &IndexSet, cap: u64) -> Result<Average> {
    let sc = Scatter::new(set, f.base(), cap)?;
    let count = sc.count;
    match f.denominator() {
        Some(den) if den <= EXACT_ZERO_DEN_LIMIT => {
            let hist = exact_histogram(f, &sc, den)?;
            let sum: Complex64 = hist
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(u, &c)| c as f64 * unit_from_units(u as u64, den))
                .sum();
            let mean = sum / count as f64;
            match cyclotomic::vanishes(&hist, den) {
                Some(zero) => Ok(Average {
                    mean,
                    count,
                    zero,
                    exact_zero_test: true,
                }),
                None => Ok(Average {
                    mean,
                    count,
                    zero: mean.norm() < ZERO_MEAN_TOL,
                    exact_zero_test: false,
                }),
            }
        }
        _ => {
            let mean = chunked_sum(f, &sc)? / count as f64;
            Ok(Average {
                mean,
                count,
                zero: mean.norm() < ZERO_MEAN_TOL,
                exact_zero_test: false,
            })
        }
    }
}

/// `λ_f(set)` by exact enumeration with a custom cap on `q^{|set|}`.
pub fn lambda_exact_set(f: &DigitalSequence, set: &IndexSet, cap: u64) -> Result<LambdaValue> {
    let avg = average(f, set, cap)?;
    if avg.zero {
        Ok(LambdaValue::Infinite)
    } else {
        Ok(LambdaValue::from_modulus(avg.mean.norm()))
    }
}

/// `λ_f([lo, hi))` by exact enumeration, with the default cap.
pub fn lambda_exact(f: &DigitalSequence, lo: u32, hi: u32) -> Result<LambdaValue> {
    lambda_exact_set(f, &IndexSet::interval(lo, hi), DEFAULT_EXACT_CAP)
}

/// A Monte Carlo estimate of `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub lambda: LambdaValue,
    /// Modulus of the sample mean.
    pub mean_abs: f64,
    /// Standard error of the complex sample mean.
    pub std_err: f64,
    /// 95% half-width in λ units (delta method), `+∞` when the mean is 0.
    pub ci_halfwidth: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Monte Carlo estimate of `λ_f(set)` from uniform draws with `supp(n) ⊆ set`.
pub fn lambda_mc_set(f: &DigitalSequence, set: &IndexSet, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples < 1000 {
        return Err(Error::InvalidArgument(format!(
            "need at least 1000 samples, got {samples}"
        )));
    }
    let sc = Scatter::new(set, f.base(), u64::MAX)?;
    let q = f.base();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<u64> = (0..samples)
        .map(|_| sc.places.iter().map(|&p| rng.gen_range(0..q) as u64 * p).sum())
        .collect();
    let chunks: Vec<&[u64]> = points.chunks(CHUNK as usize).collect();
    let values: Vec<Vec<Complex64>> = chunks
        .par_iter()
        .map(|c| c.iter().map(|&n| f.eval(n)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let s = samples as f64;
    let sum: Complex64 = values.iter().map(|c| c.iter().sum::<Complex64>()).sum();
    let mean = sum / s;
    let dev: f64 = values
        .iter()
        .map(|c| c.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>())
        .sum();
    let std_err = (dev / (s - 1.0) / s).sqrt();
    let mean_abs = mean.norm();
    let lambda = LambdaValue::from_modulus(mean_abs);
    let ci_halfwidth = if mean_abs > 0.0 {
        1.96 * std_err / mean_abs
    } else {
        f64::INFINITY
    };
    Ok(McEstimate {
        lambda,
        mean_abs,
        std_err,
        ci_halfwidth,
        samples,
        seed,
    })
}

/// Monte Carlo estimate of `λ_f([lo, hi))`.
pub fn lambda_mc(f: &DigitalSequence, lo: u32, hi: u32, samples: u64, seed: u64) -> Result<McEstimate> {
    lambda_mc_set(f, &IndexSet::interval(lo, hi), samples, seed)
}

/// How a λ value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Mc,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Mc => "mc",
        })
    }
}

/// Options for [`lambda_auto`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LambdaOptions {
    pub exact_cap: u64,
    pub samples: u64,
    pub seed: u64,
}

impl Default for LambdaOptions {
    fn default() -> Self {
        LambdaOptions {
            exact_cap: DEFAULT_EXACT_CAP,
            samples: DEFAULT_MC_SAMPLES,
            seed: 0,
        }
    }
}

/// `λ` of a set, exact within the cap and Monte Carlo beyond it; the second
/// component is the confidence half-width (0 for exact values).
pub fn lambda_auto(f: &DigitalSequence, set: &IndexSet, opts: &LambdaOptions) -> Result<(LambdaValue, Method, f64)> {
    if set.point_count(f.base()) <= opts.exact_cap as u128 {
        Ok((lambda_exact_set(f, set, opts.exact_cap)?, Method::Exact, 0.0))
    } else {
        let est = lambda_mc_set(f, set, opts.samples, opts.seed)?;
        Ok((est.lambda, Method::Mc, est.ci_halfwidth))
    }
}

/// Outcome of [`additivity_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Additivity {
    pub union: LambdaValue,
    pub parts: Vec<LambdaValue>,
    /// `λ(∪) - Σ λ(part)`; 0 when both sides are `+∞`, `+∞` when exactly one is.
    pub residual: f64,
    pub consistent: bool,
}

/// Checks `λ(∪ sets) = Σ λ(set)` for sets pairwise separated by gaps `> r`,
/// where `r` is the gap of `f`.
pub fn additivity_check(f: &DigitalSequence, sets: &[IndexSet]) -> Result<Additivity> {
    let r = f.gap();
    for (i, a) in sets.iter().enumerate() {
        for (j, b) in sets.iter().enumerate().skip(i + 1) {
            if !a.separated_from(b, r) {
                return Err(Error::InvalidFamily(format!(
                    "sets {i} and {j} are not separated by a gap longer than {r}"
                )));
            }
        }
    }
    let union = sets.iter().fold(IndexSet::new(), |acc, s| acc.union(s));
    let u = lambda_exact_set(f, &union, DEFAULT_EXACT_CAP)?;
    let parts = sets
        .iter()
        .map(|s| lambda_exact_set(f, s, DEFAULT_EXACT_CAP))
        .collect::<Result<Vec<_>>>()?;
    let any_inf = parts.iter().any(LambdaValue::is_infinite);
    let (residual, consistent) = match (u.is_infinite(), any_inf) {
        (true, true) => (0.0, true),
        (false, false) => {
            let res = u.value() - parts.iter().map(LambdaValue::value).sum::<f64>();
            (res, res.abs() <= FLOAT_TOL)
        }
        _ => (f64::INFINITY, false),
    };
    Ok(Additivity {
        union: u,
        parts,
        residual,
        consistent,
    })
}

/// Distribution of phases over `supp(n) ⊆ set` as sorted `(phase, weight)`.
pub fn phase_distribution(f: &DigitalSequence, set: &IndexSet, cap: u64) -> Result<Vec<(f64, u64)>> {
    let sc = Scatter::new(set, f.base(), cap)?;
    match f.denominator() {
        Some(den) if den <= EXACT_ZERO_DEN_LIMIT => {
            let hist = exact_histogram(f, &sc, den)?;
            Ok(hist
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(u, &c)| (u as f64 / den as f64, c))
                .collect())
        }
        _ => {
            let mut v = (0..sc.count)
                .map(|t| f.phase_f64(sc.point(t)))
                .collect::<Result<Vec<f64>>>()?;
            v.sort_by(f64::total_cmp);
            let mut out: Vec<(f64, u64)> = Vec::new();
            for x in v {
                match out.last_mut() {
                    Some((y, c)) if *y == x => *c += 1,
                    _ => out.push((x, 1)),
                }
            }
            Ok(out)
        }
    }
}

/// Minimum over `β ∈ ℝ/ℤ` of `Σ w ‖x - β‖² / Σ w` for weighted points in `[0, 1)`,
/// together with a minimiser.
///
/// The objective is quadratic between consecutive breakpoints `x + 1/2`; the
/// sweep keeps running sums of the nearest representatives and minimises each
/// piece in closed form.
pub fn weighted_circular_variance(points: &[(f64, u64)]) -> Result<(f64, f64)> {
    if points.is_empty() {
        return Err(Error::EmptyInput("phase distribution"));
    }
    let total: f64 = points.iter().map(|&(_, w)| w as f64).sum();
    // representative of x just after β = 0 and the breakpoint where it shifts by +1
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut events: Vec<(f64, f64, f64)> = Vec::with_capacity(points.len());
    for &(x, w) in points {
        let w = w as f64;
        let (rep, brk) = if x >= 0.5 { (x - 1.0, x - 0.5) } else { (x, x + 0.5) };
        s1 += w * rep;
        s2 += w * rep * rep;
        events.push((brk, w, rep));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = (f64::INFINITY, 0.0);
    let mut lo = 0.0;
    let mut consider = |lo: f64, hi: f64, s1: f64, s2: f64| {
        let beta = (s1 / total).clamp(lo, hi);
        let val = ((s2 - 2.0 * beta * s1 + beta * beta * total) / total).max(0.0);
        if val < best.0 {
            best = (val, beta);
        }
    };
    for &(brk, w, rep) in &events {
        consider(lo, brk, s1, s2);
        let new = rep + 1.0;
        s1 += w * (new - rep);
        s2 += w * (new * new - rep * rep);
        lo = brk;
    }
    consider(lo, 1.0, s1, s2);
    Ok((best.0, crate::phase::frac(best.1)))
}

/// `Q = inf_β E_{supp(n) ⊆ set} ‖φ(n) - β‖²`.
pub fn quadratic_form_set(f: &DigitalSequence, set: &IndexSet, cap: u64) -> Result<f64> {
    Ok(weighted_circular_variance(&phase_distribution(f, set, cap)?)?.0)
}

/// `Q` for the interval `[lo, hi)` with the default cap.
pub fn quadratic_form(f: &DigitalSequence, lo: u32, hi: u32) -> Result<f64> {
    quadratic_form_set(f, &IndexSet::interval(lo, hi), DEFAULT_EXACT_CAP)
}

/// Outcome of [`global_local_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlobalLocal {
    /// `Σ λ̄_f(I_i)`.
    pub lhs: f64,
    /// `10 q^{2r} λ_f(I)`.
    pub rhs: f64,
    pub lambda_whole: LambdaValue,
    pub lambda_parts: Vec<LambdaValue>,
    pub pass: bool,
}

/// Checks `Σ λ̄_f(I_i) ≤ 10 q^{2r} λ_f(I)` for subintervals `I_i = [K_i, L_i)` of
/// `I = [K, L)` with `K_i ≥ K + r`, `L_i + r ≤ L` and `K_{i+1} - L_i ≥ 2r`.
pub fn global_local_check(
    f: &DigitalSequence,
    whole: (u32, u32),
    parts: &[(u32, u32)],
    opts: &LambdaOptions,
) -> Result<GlobalLocal> {
    let r = f.gap();
    let (k, l) = whole;
    if k > l {
        return Err(Error::InvalidFamily(format!("[{k}, {l}) is not an interval")));
    }
    let mut prev_end: Option<u32> = None;
    for &(ki, li) in parts {
        if ki >= li {
            return Err(Error::InvalidFamily(format!("[{ki}, {li}) is empty")));
        }
        if ki < k + r || li + r > l {
            return Err(Error::InvalidFamily(format!(
                "[{ki}, {li}) is not {r} positions inside [{k}, {l})"
            )));
        }
        if let Some(pe) = prev_end {
            if ki < pe + 2 * r {
                return Err(Error::InvalidFamily(format!(
                    "[{ki}, {li}) is within {} positions of the previous interval",
                    2 * r
                )));
            }
        }
        prev_end = Some(li);
    }
    let (lambda_whole, _, _) = lambda_auto(f, &IndexSet::interval(k, l), opts)?;
    let lambda_parts = parts
        .iter()
        .map(|&(a, b)| lambda_auto(f, &IndexSet::interval(a, b), opts).map(|x| x.0))
        .collect::<Result<Vec<_>>>()?;
    let lhs: f64 = lambda_parts.iter().map(LambdaValue::bar).sum();
    let rho_inv = (f.base() as f64).powi(2 * r as i32);
    let rhs = 10.0 * rho_inv * lambda_whole.value();
    Ok(GlobalLocal {
        lhs,
        rhs,
        lambda_whole,
        lambda_parts,
        pass: lhs <= rhs + FLOAT_TOL,
    })
}

/// Local decomposition of an interval into `J_j = I ∩ (3sℤ + [js, (j+1)s))`
/// with `s = max(r, 1)`, and the ratio of `λ̄_f(I)` to the largest `λ̄_f(J)`
/// over the three sets and their pairwise unions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalDecomposition {
    pub lambda_bar_whole: f64,
    pub lambda_bar_local: Vec<f64>,
    /// `λ̄(I) / max λ̄(J)`, `0` when both vanish and `+∞` when only the
    /// denominator does.
    pub ratio: f64,
}

pub fn local_decomposition(f: &DigitalSequence, lo: u32, hi: u32) -> Result<LocalDecomposition> {
    let s = f.gap().max(1);
    let mut js: [Vec<u32>; 3] = Default::default();
    for i in lo..hi {
        js[((i / s) % 3) as usize].push(i);
    }
    let [a, b, c] = js.map(IndexSet::from);
    let family = [a.clone(), b.clone(), c.clone(), a.union(&b), b.union(&c), c.union(&a)];
    let lambda_bar_whole = lambda_exact(f, lo, hi)?.bar();
    let lambda_bar_local = family
        .iter()
        .map(|j| lambda_exact_set(f, j, DEFAULT_EXACT_CAP).map(|v| v.bar()))
        .collect::<Result<Vec<_>>>()?;
    let max = lambda_bar_local.iter().copied().fold(0.0, f64::max);
    let ratio = if max > 0.0 {
        lambda_bar_whole / max
    } else if lambda_bar_whole == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(LocalDecomposition {
        lambda_bar_whole,
        lambda_bar_local,
        ratio,
    })
}

/// One row of a [`LambdaProfile`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileRow {
    pub interval_lo: u32,
    pub interval_hi: u32,
    pub lambda: LambdaValue,
    pub lambda_bar: f64,
    pub partial_bar_sum: f64,
    pub method: Method,
    pub ci_halfwidth: f64,
}

/// λ values over a family of disjoint intervals with running sums of `λ̄`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LambdaProfile {
    pub rows: Vec<ProfileRow>,
}

impl LambdaProfile {
    /// Evaluates `λ` on each interval, which must be nonempty, disjoint and
    /// sorted.
    pub fn compute(f: &DigitalSequence, intervals: &[(u32, u32)], opts: &LambdaOptions) -> Result<LambdaProfile> {
        for w in intervals.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(Error::InvalidFamily("intervals overlap or are unsorted".into()));
            }
        }
        if intervals.iter().any(|&(a, b)| a >= b) {
            return Err(Error::InvalidFamily("empty interval".into()));
        }
        let mut sum = 0.0;
        let mut rows = Vec::with_capacity(intervals.len());
        for &(lo, hi) in intervals {
            let (lambda, method, ci) = lambda_auto(f, &IndexSet::interval(lo, hi), opts)?;
            let bar = lambda.bar();
            sum += bar;
            rows.push(ProfileRow {
                interval_lo: lo,
                interval_hi: hi,
                lambda,
                lambda_bar: bar,
                partial_bar_sum: sum,
                method,
                ci_halfwidth: ci,
            });
        }
        Ok(LambdaProfile { rows })
    }

    /// Final partial sum of `λ̄`.
    pub fn total(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.partial_bar_sum)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidArgument(e.to_string());
        w.write_record([
            "interval_lo",
            "interval_hi",
            "lambda",
            "lambda_bar",
            "partial_bar_sum",
            "method",
            "ci_halfwidth",
        ])
        .map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.interval_lo.to_string(),
                r.interval_hi.to_string(),
                r.lambda.to_string(),
                r.lambda_bar.to_string(),
                r.partial_bar_sum.to_string(),
                r.method.to_string(),
                r.ci_halfwidth.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Random point `n` with `supp(n) ⊆ set`, drawn uniformly.
pub fn random_point<R: Rng>(rng: &mut R, set: &IndexSet, q: u32) -> Result<u64> {
    let sc = Scatter::new(set, q, u64::MAX)?;
    Ok(sc.places.iter().map(|&p| rng.gen_range(0..q) as u64 * p).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::Phase;
    use crate::seq::CoefficientTable;
    use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, proptest};
    use std::f64::consts::{LN_2, PI};

    fn r(a: i64, b: i64) -> Phase {
        Phase::rational(a, b).unwrap()
    }

    fn table_seq(q: u32, gap: u32, seed: u64) -> DigitalSequence {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = CoefficientTable::new(q, gap, rng.gen()).unwrap();
        let den = rng.gen_range(2..13);
        let positions: Vec<Option<u32>> = if t.is_strong() {
            vec![None]
        } else {
            (0..16).map(Some).collect()
        };
        for pos in positions {
            for w in 1..t.window_count() {
                let mut digits = Vec::new();
                let mut x = w;
                for _ in 0..=gap {
                    digits.push((x % q as usize) as u32);
                    x /= q as usize;
                }
                t.set(pos, &digits, r(rng.gen_range(0..den), den)).unwrap();
            }
        }
        DigitalSequence::from_coefficients(t).unwrap()
    }

    #[test]
    fn lambda_examples() {
        let one = DigitalSequence::one(3).unwrap();
        assert_eq!(lambda_exact(&one, 2, 7).unwrap(), LambdaValue::Finite(0.0));
        let tm = DigitalSequence::thue_morse();
        for l in 0..10 {
            assert!(lambda_exact(&tm, l, l + 1).unwrap().is_infinite());
        }
        let third = DigitalSequence::linear(2, r(1, 3)).unwrap();
        let v = lambda_exact(&third, 0, 1).unwrap().value();
        assert!((v - LN_2).abs() < 1e-12);
    }

    #[test]
    fn empty_set_follows_the_definition() {
        let tm = DigitalSequence::thue_morse();
        assert_eq!(lambda_exact(&tm, 3, 3).unwrap(), LambdaValue::Finite(0.0));
    }

    #[test]
    fn cap_is_enforced() {
        let f = DigitalSequence::one(2).unwrap();
        assert!(matches!(lambda_exact(&f, 0, 21), Err(Error::TooLargeInterval { .. })));
        assert!(lambda_exact(&f, 0, 20).is_ok());
    }

    #[test]
    fn bar_clamps() {
        assert_eq!(lambda_bar(LambdaValue::Finite(0.0)), 0.0);
        assert_eq!(lambda_bar(LambdaValue::Infinite), 1.0);
        assert_eq!(lambda_bar(LambdaValue::Finite(0.3)), 0.3);
    }

    #[test]
    fn mc_examples() {
        let one = DigitalSequence::one(2).unwrap();
        let est = lambda_mc(&one, 0, 10, 4096, 1).unwrap();
        assert_eq!(est.lambda, LambdaValue::Finite(0.0));
        assert_eq!(est.std_err, 0.0);
        let tm = DigitalSequence::thue_morse();
        let est = lambda_mc(&tm, 0, 8, DEFAULT_MC_SAMPLES, 0).unwrap();
        assert!(est.lambda.value() >= 5.0, "{est:?}");
        let again = lambda_mc(&tm, 0, 8, DEFAULT_MC_SAMPLES, 0).unwrap();
        assert_eq!(est, again);
        assert!(lambda_mc(&tm, 0, 8, 999, 0).is_err());
    }

    #[test]
    fn mc_agrees_with_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..100 {
            let q = [2, 3][i % 2];
            let f = table_seq(q, rng.gen_range(0..3), rng.gen());
            let width = if q == 2 {
                rng.gen_range(1..=12)
            } else {
                rng.gen_range(1..=7)
            };
            let lo = rng.gen_range(0..6);
            let exact = lambda_exact(&f, lo, lo + width).unwrap().modulus();
            let est = lambda_mc(&f, lo, lo + width, 1 << 14, rng.gen()).unwrap();
            assert!(
                (est.mean_abs - exact).abs() <= 3.0 * est.std_err + 1e-12,
                "case {i}: exact {exact}, estimate {est:?}"
            );
        }
    }

    #[test]
    fn additivity_examples() {
        let rs = DigitalSequence::rudin_shapiro();
        let a = IndexSet::interval(0, 2);
        let b = IndexSet::interval(4, 6);
        let single = additivity_check(&rs, &[a.clone()]).unwrap();
        assert!(single.consistent && single.residual == 0.0);
        let pair = additivity_check(&rs, &[a, b]).unwrap();
        assert!(pair.consistent, "{pair:?}");
        let tm = DigitalSequence::thue_morse();
        let res = additivity_check(&tm, &[IndexSet::from(vec![0]), IndexSet::from(vec![2])]).unwrap();
        assert!(res.union.is_infinite() && res.consistent);
        let bad = additivity_check(&rs, &[IndexSet::from(vec![0]), IndexSet::from(vec![1])]);
        assert!(matches!(bad, Err(Error::InvalidFamily(_))));
    }

    #[test]
    fn quadratic_form_examples() {
        let one = DigitalSequence::one(2).unwrap();
        assert_eq!(quadratic_form(&one, 0, 6).unwrap(), 0.0);
        let (q, beta) = weighted_circular_variance(&[(0.0, 1), (0.5, 1)]).unwrap();
        assert!((q - 1.0 / 16.0).abs() < 1e-15);
        assert!((beta - 0.25).abs() < 1e-15 || (beta - 0.75).abs() < 1e-15);
        let (q, beta) = weighted_circular_variance(&[(0.95, 1), (0.05, 1)]).unwrap();
        assert!((q - 0.0025).abs() < 1e-12);
        assert!(beta < 1e-12 || beta > 1.0 - 1e-12);
    }

    /// Brute-force minimisation over a fine β grid refined by golden section.
    fn brute_q(points: &[(f64, u64)]) -> f64 {
        let total: f64 = points.iter().map(|p| p.1 as f64).sum();
        let obj = |b: f64| {
            points
                .iter()
                .map(|&(x, w)| w as f64 * crate::phase::circle_norm(x - b).powi(2))
                .sum::<f64>()
                / total
        };
        let grid = 20_000;
        (0..grid)
            .map(|i| obj(i as f64 / grid as f64))
            .fold(f64::INFINITY, f64::min)
    }

    proptest! {
        #[test]
        fn circular_variance_matches_grid(
            pts in prop::collection::vec((0.0f64..1.0, 1u64..5), 1..12)
        ) {
            let (q, beta) = weighted_circular_variance(&pts).unwrap();
            let brute = brute_q(&pts);
            prop_assert!(q <= brute + 1e-12);
            prop_assert!(brute - q < 1e-3);
            let total: f64 = pts.iter().map(|p| p.1 as f64).sum();
            let at_beta: f64 = pts
                .iter()
                .map(|&(x, w)| w as f64 * crate::phase::circle_norm(x - beta).powi(2))
                .sum::<f64>() / total;
            prop_assert!((at_beta - q).abs() < 1e-12);
        }

        #[test]
        fn quadratic_envelope(seed in any::<u64>(), lo in 0u32..4, width in 1u32..8) {
            let f = table_seq(2, 1, seed);
            let lam = lambda_exact(&f, lo, lo + width).unwrap();
            let q = quadratic_form(&f, lo, lo + width).unwrap();
            let gap = 1.0 - (-lam.value()).exp();
            prop_assert!(8.0 * q <= gap + 1e-12);
            prop_assert!(gap <= 2.0 * PI * PI * q + 1e-12);
        }

        #[test]
        fn dilation_shifts_lambda(seed in any::<u64>(), lo in 0u32..6, width in 1u32..9) {
            let f = table_seq(2, 1, seed);
            let d = f.dilate();
            prop_assert_eq!(
                lambda_exact(&d, lo, lo + width).unwrap(),
                lambda_exact(&f, lo + 1, lo + width + 1).unwrap()
            );
        }

        #[test]
        fn rotation_invariance(seed in any::<u64>(), num in 0i64..17, lo in 0u32..4, width in 1u32..8) {
            let f = table_seq(3, 1, seed);
            let g = f.rotate(r(num, 17));
            let a = lambda_exact(&f, lo, lo + width).unwrap();
            let b = lambda_exact(&g, lo, lo + width).unwrap();
            match (a, b) {
                (LambdaValue::Infinite, LambdaValue::Infinite) => {}
                (LambdaValue::Finite(x), LambdaValue::Finite(y)) => prop_assert!((x - y).abs() < 1e-9),
                _ => prop_assert!(false, "{a:?} vs {b:?}"),
            }
        }

        #[test]
        fn global_local_on_random_tables(seed in any::<u64>()) {
            let f = table_seq(2, 1, seed);
            let res = global_local_check(&f, (0, 10), &[(1, 3), (7, 9)], &LambdaOptions::default()).unwrap();
            prop_assert!(res.pass, "{res:?}");
        }
    }

    #[test]
    fn global_local_examples() {
        let one = DigitalSequence::one(2).unwrap();
        let res = global_local_check(&one, (0, 5), &[(0, 5)], &LambdaOptions::default()).unwrap();
        assert_eq!((res.lhs, res.rhs), (0.0, 0.0));
        assert!(res.pass);
        let rs = DigitalSequence::rudin_shapiro();
        let res = global_local_check(&rs, (0, 10), &[(1, 3), (7, 9)], &LambdaOptions::default()).unwrap();
        assert!(res.pass);
        let bad = global_local_check(&rs, (0, 10), &[(0, 3)], &LambdaOptions::default());
        assert!(matches!(bad, Err(Error::InvalidFamily(_))));
        let bad = global_local_check(&rs, (0, 10), &[(1, 3), (4, 6)], &LambdaOptions::default());
        assert!(matches!(bad, Err(Error::InvalidFamily(_))));
    }

    #[test]
    fn local_decomposition_of_rudin_shapiro() {
        let rs = DigitalSequence::rudin_shapiro();
        let d = local_decomposition(&rs, 0, 12).unwrap();
        assert_eq!(d.lambda_bar_local.len(), 6);
        assert!(d.ratio.is_finite());
    }

    #[test]
    fn profile_csv() {
        let tm = DigitalSequence::thue_morse();
        let p = LambdaProfile::compute(&tm, &[(0, 1), (3, 4), (6, 7)], &LambdaOptions::default()).unwrap();
        assert_eq!(p.total(), 3.0);
        let csv = p.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "interval_lo,interval_hi,lambda,lambda_bar,partial_bar_sum,method,ci_halfwidth"
        );
        assert_eq!(lines[1], "0,1,inf,1,1,exact,0");
        assert!(LambdaProfile::compute(&tm, &[(0, 3), (2, 4)], &LambdaOptions::default()).is_err());
    }

    #[test]
    fn large_intervals_fall_back_to_sampling() {
        let f = DigitalSequence::linear(2, r(1, 3)).unwrap();
        let opts = LambdaOptions {
            exact_cap: 1 << 10,
            ..Default::default()
        };
        let (v, m, ci) = lambda_auto(&f, &IndexSet::interval(2, 14), &opts).unwrap();
        assert_eq!(m, Method::Mc);
        assert!(ci.is_finite() && v.value().is_finite());
    }
}
