//! Flag types and value parsers.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;

use qerc_core::experiment::ClickMode;
use qerc_core::protocol::AverageMode;

/// A real number given either as a decimal or as an exact ratio `a/b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Number {
    pub value: f64,
    pub exact: Option<Ratio<i64>>,
}

pub fn parse_number(s: &str) -> Result<Number, String> {
    let s = s.trim();
    if s.contains('/') {
        let r: Ratio<i64> = s
            .parse()
            .map_err(|_| format!("`{s}` is not a ratio of integers"))?;
        let value = *r.numer() as f64 / *r.denom() as f64;
        return Ok(Number { value, exact: Some(r) });
    }
    let value: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !value.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(Number { value, exact: None })
}

/// Positive integer count; accepts `10000000`, `10_000_000` or `1e7`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let cleaned = s.trim().replace('_', "");
    let n = match cleaned.parse::<u64>() {
        Ok(n) => n,
        Err(_) => {
            let x: f64 = cleaned.parse().map_err(|_| format!("`{s}` is not a count"))?;
            if x.fract() != 0.0 || !(0.0..=u64::MAX as f64).contains(&x) {
                return Err(format!("`{s}` is not a whole number"));
            }
            x as u64
        }
    };
    if n == 0 {
        return Err("must be at least 1".into());
    }
    Ok(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AverageArg {
    Bloch,
    FourState,
}

impl From<AverageArg> for AverageMode {
    fn from(a: AverageArg) -> Self {
        match a {
            AverageArg::Bloch => AverageMode::BlochHaar,
            AverageArg::FourState => AverageMode::FourState,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DetectorArg {
    Exact,
    PaperBound,
}

impl From<DetectorArg> for ClickMode {
    fn from(d: DetectorArg) -> Self {
        match d {
            DetectorArg::Exact => ClickMode::Exact,
            DetectorArg::PaperBound => ClickMode::PaperBound,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qerc", version, about = "Two-qubit bit-flip rejection code: protocol, optics and bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Uncoded and coded error rates by density-operator enumeration.
    ProtocolSweep(SweepArgs),
    /// Error-rate curves with the three-pair bound, one file per p.
    Fig2(Fig2Args),
    /// Three-pair C4 coefficients and the comparison with published values.
    ThreePairTable(TableArgs),
    /// Sampled coincidence counts of the optical set-up.
    MonteCarlo(McArgs),
    /// Randomized invariant suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct RateArgs {
    /// Flip rate of each channel use.
    #[arg(long, value_parser = parse_number, conflicts_with = "epsilon")]
    pub eta: Option<Number>,
    /// Leak parameter of the flip boxes; converted with ε/(1+ε).
    #[arg(long, value_parser = parse_number)]
    pub epsilon: Option<Number>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub rate: RateArgs,
    /// One-pair emission probability for the ec_prime column.
    #[arg(long, value_parser = parse_number)]
    pub p: Option<Number>,
    /// Grid size when no rate is given.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = AverageArg::FourState)]
    pub average: AverageArg,
    #[arg(long, default_value = "protocol_sweep.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Fig2Args {
    /// One-pair emission probability; defaults to 0.01, 0.005, 0.002 and 0.001.
    #[arg(long, value_parser = parse_number)]
    pub p: Option<Number>,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Averaging used for the ec_prime column.
    #[arg(long, value_enum, default_value_t = AverageArg::FourState)]
    pub average: AverageArg,
    /// Output directory.
    #[arg(long, default_value = "fig2")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Detector efficiency for the exact-click column.
    #[arg(long, value_parser = parse_number)]
    pub xi: Option<Number>,
    #[arg(long, default_value = "three_pair_table.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub rate: RateArgs,
    /// One-pair emission probability.
    #[arg(long, value_parser = parse_number, default_value = "1")]
    pub p: Number,
    #[arg(long, value_parser = parse_number, default_value = "1")]
    pub xi: Number,
    #[arg(long, value_parser = parse_count, default_value = "1000000")]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Parallel shards; the tally does not depend on this.
    #[arg(long, value_parser = parse_count, default_value = "1")]
    pub shards: u64,
    #[arg(long, value_enum, default_value_t = AverageArg::FourState)]
    pub average: AverageArg,
    #[arg(long, value_enum, default_value_t = DetectorArg::Exact)]
    pub detector_mode: DetectorArg,
    /// Also sample three-pair emissions.
    #[arg(long)]
    pub three_pair: bool,
    /// Drop five-fold clicks instead of counting them as C4.
    #[arg(long)]
    pub discard_five_fold: bool,
    #[arg(long, default_value = "monte_carlo.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Random instances per check.
    #[arg(long, value_parser = parse_count, default_value = "200")]
    pub cases: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
