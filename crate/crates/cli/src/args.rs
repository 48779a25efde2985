use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "digilab", version, about = "Experiments on base-q digital sequences")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Sequence spec: a JSON file path, or inline JSON starting with '{'.
    #[arg(long, global = true)]
    pub spec: Option<String>,
    /// Output file; standard output if omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed of every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Phases and values f(n) for a list of n.
    Eval {
        /// Comma separated integers and half-open ranges, e.g. `0..8,100`.
        #[arg(long, default_value = "0..16")]
        n: String,
    },
    /// Checks the class relation on every admissible tuple below --limit.
    Verify {
        /// M, SM or QM.
        #[arg(long)]
        class: String,
        /// Gap r of SM and QM.
        #[arg(long, default_value_t = 0)]
        gap: u32,
        #[arg(long, default_value_t = 1 << 16)]
        limit: u64,
        /// Also write every stored violation to this CSV file.
        #[arg(long)]
        violations: Option<PathBuf>,
    },
    /// λ over a family of digit intervals.
    Lambda {
        /// Explicit intervals `lo..hi`, comma separated.
        #[arg(long, conflicts_with_all = ["levels", "width", "sep"])]
        intervals: Option<String>,
        /// Total digit levels covered by the blocks.
        #[arg(long, default_value_t = 24)]
        levels: u32,
        /// Block width; 2r + 1 if omitted.
        #[arg(long)]
        width: Option<u32>,
        /// Separation between blocks; 2r + 1 if omitted.
        #[arg(long)]
        sep: Option<u32>,
        /// Largest point count evaluated exactly.
        #[arg(long, default_value_t = digilab::lambda::DEFAULT_EXACT_CAP)]
        exact_cap: u64,
        /// Monte Carlo samples beyond the exact cap.
        #[arg(long, default_value_t = digilab::lambda::DEFAULT_MC_SAMPLES)]
        samples: u64,
    },
    /// Partial averages of f(n)μ(n).
    Mobius {
        #[arg(long, default_value_t = 1_000_000)]
        limit: u64,
        /// Comma separated checkpoints; powers of 10 and of q if omitted.
        #[arg(long)]
        checkpoints: Option<String>,
    },
    /// Bilinear correlations E f(pn) conj f(p'n) over prime pairs.
    Kbsz {
        /// Inclusive prime range `lo..hi`.
        #[arg(long, default_value = "3..13")]
        primes: String,
        #[arg(long, default_value_t = 1 << 16)]
        limit: u64,
    },
    /// Almost periodic versus bilinear dichotomy report.
    Classify {
        #[arg(long)]
        p: u64,
        #[arg(long = "p-prime")]
        p_prime: u64,
        /// Digit levels of the λ̄ series; the largest safe value if omitted.
        #[arg(long)]
        levels: Option<u32>,
        #[arg(long, default_value_t = 16)]
        approx_levels: u32,
        /// Inclusive prime range of the bilinear scan.
        #[arg(long, default_value = "3..13")]
        primes: String,
        #[arg(long, default_value_t = 1 << 16)]
        kbsz_limit: u64,
        #[arg(long, default_value_t = 0.05)]
        plateau: f64,
        #[arg(long, default_value_t = 0.4)]
        growth: f64,
        #[arg(long, default_value_t = 0.25)]
        kbsz_small: f64,
        #[arg(long, default_value_t = 0.05)]
        approx_epsilon: f64,
    },
    /// q^M-periodic approximant of the phase.
    Approx {
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 16)]
        levels: u32,
        #[arg(long, default_value_t = digilab::detect::DEFAULT_HORIZON)]
        horizon: u32,
        /// Probe width; 2r + 2 if omitted.
        #[arg(long)]
        probe_width: Option<u32>,
        #[arg(long, default_value_t = digilab::detect::DEFAULT_MAX_PERIOD)]
        max_period: u64,
        /// Also write the table n, g(n) for n < q^M to this CSV file.
        #[arg(long)]
        table: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::Verify { .. } => "verify",
            Command::Lambda { .. } => "lambda",
            Command::Mobius { .. } => "mobius",
            Command::Kbsz { .. } => "kbsz",
            Command::Classify { .. } => "classify",
            Command::Approx { .. } => "approx",
        }
    }

    pub fn default_format(&self) -> Format {
        match self {
            Command::Classify { .. } | Command::Approx { .. } => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Parses `lo..hi` into its two ends.
pub fn parse_range(text: &str) -> Result<(u64, u64), String> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| format!("expected lo..hi, got {text:?}"))?;
    let num = |s: &str| s.trim().parse::<u64>().map_err(|e| format!("{s:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

/// Parses a comma separated list of integers and half-open ranges.
pub fn parse_list(text: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item.contains("..") {
            let (a, b) = parse_range(item)?;
            out.extend(a..b);
        } else {
            out.push(item.parse::<u64>().map_err(|e| format!("{item:?}: {e}"))?);
        }
    }
    Ok(out)
}
