use std::fmt;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use digilab::detect::{
    block_intervals, classify, periodic_approx, ApproxOptions, ApproxOutcome, ClassifyParams, Thresholds,
};
use digilab::lambda::{LambdaOptions, LambdaProfile};
use digilab::phase::PhaseJson;
use digilab::seq::spec::parse_spec;
use digilab::seq::verify_class;
use digilab::sieve::{default_checkpoints, kbsz_scan, mobius_correlation};
use digilab::{ClassTag, DigitalSequence, Error};

use crate::args::{parse_list, parse_range, Cli, Command, Format};
use crate::render::{Meta, Table};

/// A failed run, sorted by exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Spec(String),
    Cap(String),
    Operation(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Operation(_) => 1,
            Failure::Spec(_) => 2,
            Failure::Cap(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Spec(m) | Failure::Cap(m) | Failure::Operation(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Spec(_) => Failure::Spec(e.to_string()),
            Error::ResourceCap(_) | Error::TooLargeInterval { .. } => Failure::Cap(e.to_string()),
            _ => Failure::Operation(e.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage(e: impl fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn load_spec(spec: Option<&str>) -> Outcome<DigitalSequence> {
    let spec = spec.ok_or_else(|| usage("--spec is required"))?;
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        fs::read_to_string(spec).map_err(|e| Failure::Spec(format!("cannot read {spec}: {e}")))?
    };
    Ok(parse_spec(&text)?)
}

fn write(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Operation(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("serializable value")
}

/// Runs the parsed command line.
pub fn run(cli: &Cli) -> Outcome<()> {
    let c = &cli.common;
    if c.threads == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(c.threads)
        .build_global()
        .map_err(|e| Failure::Operation(e.to_string()))?;
    let f = load_spec(c.spec.as_deref())?;
    let meta = Meta {
        command: cli.command.name(),
        seed: c.seed,
        sequence: f.provenance(),
    };
    let format = c.format.unwrap_or(cli.command.default_format());
    let text = match &cli.command {
        Command::Eval { n } => eval(&f, &meta, format, n)?,
        Command::Verify {
            class,
            gap,
            limit,
            violations,
        } => verify(&f, &meta, format, class, *gap, *limit, violations.as_deref())?,
        Command::Lambda {
            intervals,
            levels,
            width,
            sep,
            exact_cap,
            samples,
        } => {
            let family = match intervals {
                Some(list) => list
                    .split(',')
                    .map(|s| {
                        let (a, b) = parse_range(s)?;
                        Ok((
                            u32::try_from(a).map_err(|e| e.to_string())?,
                            u32::try_from(b).map_err(|e| e.to_string())?,
                        ))
                    })
                    .collect::<Result<Vec<(u32, u32)>, String>>()
                    .map_err(usage)?,
                None => {
                    let default = 2 * f.gap() + 1;
                    block_intervals(*levels, width.unwrap_or(default), sep.unwrap_or(default))?
                }
            };
            let opts = LambdaOptions {
                exact_cap: *exact_cap,
                samples: *samples,
                seed: c.seed,
            };
            let profile = LambdaProfile::compute(&f, &family, &opts)?;
            match format {
                Format::Csv => meta.csv(profile.to_csv()?),
                Format::Json => meta.json(json!({"rows": to_json(&profile.rows), "total": profile.total()})),
            }
        }
        Command::Mobius { limit, checkpoints } => {
            let cps = match checkpoints {
                Some(list) => parse_list(list).map_err(usage)?,
                None => default_checkpoints(*limit, f.base()),
            };
            let series = mobius_correlation(&f, *limit, &cps)?;
            match format {
                Format::Csv => meta.csv(series.to_csv()?),
                Format::Json => meta.json(to_json(&series)),
            }
        }
        Command::Kbsz { primes, limit } => {
            let (lo, hi) = parse_range(primes).map_err(usage)?;
            let scan = kbsz_scan(&f, lo, hi, *limit)?;
            match format {
                Format::Csv => meta.csv(scan.to_csv()?),
                Format::Json => meta.json(to_json(&scan)),
            }
        }
        Command::Classify {
            p,
            p_prime,
            levels,
            approx_levels,
            primes,
            kbsz_limit,
            plateau,
            growth,
            kbsz_small,
            approx_epsilon,
        } => {
            if format == Format::Csv {
                return Err(usage("classify writes JSON only"));
            }
            let params = ClassifyParams {
                thresholds: Thresholds {
                    plateau: *plateau,
                    growth: *growth,
                    kbsz_small: *kbsz_small,
                    approx_epsilon: *approx_epsilon,
                },
                levels: *levels,
                approx_levels: *approx_levels,
                kbsz_primes: parse_range(primes).map_err(usage)?,
                kbsz_limit: *kbsz_limit,
                seed: c.seed,
            };
            meta.json(to_json(&classify(&f, *p, *p_prime, &params)?))
        }
        Command::Approx {
            epsilon,
            levels,
            horizon,
            probe_width,
            max_period,
            table,
        } => {
            let opts = ApproxOptions {
                probe_width: *probe_width,
                horizon: *horizon,
                max_period: *max_period,
                seed: c.seed,
                ..ApproxOptions::default()
            };
            let outcome = periodic_approx(&f, *epsilon, *levels, &opts)?;
            if let Some(path) = table {
                write(Some(path), &approx_table(&meta, &outcome))?;
            }
            approx(&meta, format, &outcome)
        }
    };
    write(c.out.as_deref(), &text)
}

fn eval(f: &DigitalSequence, meta: &Meta, format: Format, n: &str) -> Outcome<String> {
    let ns = parse_list(n).map_err(usage)?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in &ns {
        let phase = f.eval_phase(n)?;
        rows.push((n, phase, phase.to_unit()));
    }
    Ok(match format {
        Format::Csv => {
            let mut t = Table::new(meta, &["n", "phase", "re", "im"]);
            for (n, phase, z) in rows {
                t.row(vec![
                    n.to_string(),
                    phase.to_string(),
                    z.re.to_string(),
                    z.im.to_string(),
                ]);
            }
            t.render()
        }
        Format::Json => meta.json(Value::Array(
            rows.into_iter()
                .map(|(n, phase, z)| json!({"n": n, "phase": to_json(&PhaseJson::from(phase)), "re": z.re, "im": z.im}))
                .collect(),
        )),
    })
}

fn verify(
    f: &DigitalSequence,
    meta: &Meta,
    format: Format,
    class: &str,
    gap: u32,
    limit: u64,
    violations: Option<&Path>,
) -> Outcome<String> {
    let class = ClassTag::from_parts(class, gap).map_err(usage)?;
    let report = verify_class(f, class, limit)?;
    if let Some(path) = violations {
        let mut t = Table::new(meta, &["n", "m", "k", "l", "discrepancy"]);
        for v in &report.violations {
            t.row(vec![
                v.n.to_string(),
                v.m.to_string(),
                v.k.to_string(),
                v.l.to_string(),
                v.discrepancy.to_string(),
            ]);
        }
        write(Some(path), &t.render())?;
    }
    Ok(match format {
        Format::Csv => {
            let mut t = Table::new(meta, &["class", "limit", "checked", "violations", "passed"]);
            t.row(vec![
                report.class.to_string(),
                report.limit.to_string(),
                report.checked_triples.to_string(),
                report.violation_count.to_string(),
                report.passed().to_string(),
            ]);
            t.render()
        }
        Format::Json => {
            let mut v = to_json(&report);
            v["passed"] = Value::Bool(report.passed());
            meta.json(v)
        }
    })
}

fn approx(meta: &Meta, format: Format, outcome: &ApproxOutcome) -> String {
    match (format, outcome) {
        (Format::Json, _) => meta.json(to_json(outcome)),
        (Format::Csv, ApproxOutcome::Approx(a)) => {
            let mut t = Table::new(
                meta,
                &[
                    "outcome",
                    "k",
                    "m",
                    "period",
                    "levels",
                    "epsilon",
                    "fraction_exceeding",
                    "tested",
                    "sampled",
                ],
            );
            t.row(vec![
                "approx".into(),
                a.k.to_string(),
                a.m.to_string(),
                a.period.to_string(),
                a.levels.to_string(),
                a.epsilon.to_string(),
                a.fraction_exceeding.to_string(),
                a.tested.to_string(),
                a.sampled.to_string(),
            ]);
            t.render()
        }
        (Format::Csv, ApproxOutcome::NotAlmostPeriodic { failures, .. }) => {
            let mut t = Table::new(meta, &["outcome", "k", "lo", "hi", "lambda"]);
            for p in failures {
                t.row(vec![
                    "not-almost-periodic".into(),
                    p.k.to_string(),
                    p.lo.to_string(),
                    p.hi.to_string(),
                    p.lambda.to_string(),
                ]);
            }
            t.render()
        }
    }
}

fn approx_table(meta: &Meta, outcome: &ApproxOutcome) -> String {
    let mut t = Table::new(meta, &["n", "g"]);
    if let Some(a) = outcome.approx() {
        for (n, g) in a.table.iter().enumerate() {
            t.row(vec![n.to_string(), g.to_string()]);
        }
    }
    t.render()
}
