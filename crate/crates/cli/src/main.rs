mod args;

use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::process::ExitCode;
use std::f64::consts::FRAC_PI_2;

use anyhow::{Context, Result};
use clap::Parser;
use num_rational::Ratio;

use args::{Cli, Command, Fig2Args, McArgs, Number, RateArgs, SweepArgs, TableArgs, VerifyArgs};
use qerc_core::analysis::{
    comparison_report, default_eta_grid, fig2_dataset, fmt_num, interval_below, protocol_sweep_point,
    three_pair_table, uniform_grid, write_fig2_csv, write_three_pair_csv, FIG2_P_VALUES,
};
use qerc_core::experiment::{
    build_circuit, two_pair_events, DetectorModel, FlipBoxParams, MonteCarlo, MultifoldPolicy,
};
use qerc_core::protocol::AverageMode;
use qerc_core::verify;

/// A flag value that passed parsing but is out of range.
#[derive(Debug)]
struct FlagError {
    flag: &'static str,
    message: String,
}

impl fmt::Display for FlagError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid value for --{}: {}", self.flag, self.message)
    }
}

impl std::error::Error for FlagError {}

fn flag_error(flag: &'static str, message: impl Into<String>) -> anyhow::Error {
    FlagError { flag, message: message.into() }.into()
}

fn require(flag: &'static str, value: f64, ok: bool, range: &str) -> Result<f64> {
    if ok {
        Ok(value)
    } else {
        Err(flag_error(flag, format!("{value} is outside {range}")))
    }
}

fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Resolved `(η, ε)` from either flag; `None` if neither was given.
fn resolve_rate(rate: &RateArgs) -> Result<Option<(f64, f64)>> {
    if let Some(Number { value, exact }) = rate.eta {
        let eta = require("eta", value, (0.0..0.5).contains(&value), "[0, 0.5)")?;
        let eps = match exact {
            Some(r) => ratio_to_f64(r / (Ratio::from_integer(1) - r)),
            None => eta / (1.0 - eta),
        };
        return Ok(Some((eta, eps)));
    }
    if let Some(Number { value, exact }) = rate.epsilon {
        let eps = require("epsilon", value, (0.0..1.0).contains(&value), "[0, 1)")?;
        let eta = match exact {
            Some(r) => ratio_to_f64(r / (Ratio::from_integer(1) + r)),
            None => eps / (1.0 + eps),
        };
        return Ok(Some((eta, eps)));
    }
    Ok(None)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn protocol_sweep(a: &SweepArgs) -> Result<()> {
    let mode: AverageMode = a.average.into();
    let p = match a.p {
        Some(n) => require("p", n.value, (0.0..1.0).contains(&n.value), "[0, 1)")?,
        None => 0.0,
    };
    let etas = match resolve_rate(&a.rate)? {
        Some((eta, _)) => vec![eta],
        None => {
            if a.points == 0 {
                return Err(flag_error("points", "must be at least 1"));
            }
            uniform_grid(0.005, 0.495, a.points)
        }
    };
    if p > 0.0 && etas.contains(&0.0) {
        return Err(flag_error("p", "must be 0 when eta is 0"));
    }
    let rows = etas
        .iter()
        .map(|&eta| protocol_sweep_point(eta, p, mode))
        .collect::<qerc_core::Result<Vec<_>>>()?;
    write_fig2_csv(create(&a.out)?, &rows)?;
    if let [row] = rows.as_slice() {
        println!(
            "eta {}  e0_bloch {}  e0_fourstate {}  ec_bloch {}  ec_fourstate {}  ec_prime {}",
            row.eta, row.e0_bloch, row.e0_fourstate, row.ec_bloch, row.ec_fourstate, row.ec_prime
        );
    }
    println!("wrote {} rows to {}", rows.len(), a.out.display());
    Ok(())
}

fn fig2(a: &Fig2Args) -> Result<()> {
    let mode: AverageMode = a.average.into();
    let ps: Vec<f64> = match a.p {
        Some(n) => vec![require("p", n.value, n.value > 0.0 && n.value < 1.0, "(0, 1)")?],
        None => FIG2_P_VALUES.to_vec(),
    };
    let grid = match a.points {
        0 => return Err(flag_error("points", "must be at least 1")),
        100 => default_eta_grid(),
        n => uniform_grid(0.005, 0.495, n),
    };
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for p in ps {
        let path = a.out.join(format!("fig2_p{p}.csv"));
        write_fig2_csv(create(&path)?, &fig2_dataset(p, &grid, mode)?)?;
        let show = |f: f64| -> Result<String> {
            Ok(match interval_below(p, mode, f)? {
                Some((lo, hi)) => format!("[{lo:.4}, {hi:.4}]"),
                None => "empty".into(),
            })
        };
        println!(
            "p = {p}: wrote {}; Ec' < E0 on {}, Ec' < E0/3 on {}",
            path.display(),
            show(1.0)?,
            show(1.0 / 3.0)?
        );
    }
    Ok(())
}

fn three_pair(a: &TableArgs) -> Result<()> {
    let xi = match a.xi {
        Some(n) => require("xi", n.value, n.value > 0.0 && n.value <= 1.0, "(0, 1]")?,
        None => 1.0,
    };
    let rows = three_pair_table(xi)?;
    write_three_pair_csv(create(&a.out)?, &rows)?;
    let dominated = rows
        .iter()
        .all(|r| r.oracle_coeff_exact <= r.oracle_coeff_paperbound + 1e-12);
    println!("wrote {} rows to {}", rows.len(), a.out.display());
    println!("exact coefficient <= bound coefficient on every row: {dominated}");
    let report = comparison_report()?;
    print!("{report}");
    println!("{} of {} comparisons disagree", report.mismatches().len(), report.entries.len());
    Ok(())
}

fn monte_carlo(a: &McArgs) -> Result<()> {
    let (eta, eps) = resolve_rate(&a.rate)?
        .ok_or_else(|| flag_error("eta", "one of --eta or --epsilon is required"))?;
    let p = require("p", a.p.value, a.p.value > 0.0 && a.p.value <= 1.0, "(0, 1]")?;
    let xi = require("xi", a.xi.value, a.xi.value > 0.0 && a.xi.value <= 1.0, "(0, 1]")?;
    let policy = if a.discard_five_fold {
        MultifoldPolicy::DiscardFiveFold
    } else {
        MultifoldPolicy::FiveFoldAsC4
    };
    let det = DetectorModel::new(xi, a.detector_mode.into(), policy)?;
    let mode: AverageMode = a.average.into();
    let boxes = [FlipBoxParams::new(eps, FRAC_PI_2, true)?; 2];
    let circuits = mode
        .nodes()
        .into_iter()
        .map(|(q, w)| Ok((build_circuit(q, boxes, det)?, w)))
        .collect::<Result<Vec<_>>>()?;
    let sampler = MonteCarlo::new(&circuits, p, a.three_pair).map_err(|e| flag_error("p", e.to_string()))?;
    let tally = sampler.run(a.trials, a.seed, a.shards as usize)?;

    let mut w = csv::Writer::from_writer(create(&a.out)?);
    let err = tally.conditional_error();
    let se = tally.conditional_error_std();
    let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
    w.write_record(["n1", "n4", "rejected", "three_fold", "trials", "conditional_error", "std_error", "acceptance_rate"])?;
    w.write_record([
        tally.n1.to_string(),
        tally.n4.to_string(),
        tally.rejected.to_string(),
        tally.three_fold.to_string(),
        tally.trials.to_string(),
        opt(err),
        opt(se),
        fmt_num(tally.acceptance_rate()),
    ])?;
    w.flush()?;

    println!(
        "eta {eta}  trials {}  N1 {}  N4 {}  rejected {} (three-fold {})",
        tally.trials, tally.n1, tally.n4, tally.rejected, tally.three_fold
    );
    match (err, se) {
        (Some(e), Some(s)) => println!("N4/(N1+N4) = {e:.6} ± {s:.6}"),
        _ => println!("no accepted events"),
    }
    if !a.three_pair {
        let exact = two_pair_events(eps, mode, det)?;
        println!(
            "exact two-pair reference: error {:.6}, acceptance per trial {:.6e}",
            exact.conditional_error().unwrap_or(f64::NAN),
            exact.accepted() * p * p
        );
    }
    println!("wrote {}", a.out.display());
    Ok(())
}

fn run_verify(a: &VerifyArgs) -> Result<bool> {
    let (results, secs) = verify::run_timed(a.cases as usize, a.seed);
    let mut ok = true;
    for r in &results {
        ok &= r.passed;
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{tag} {:<28} {:>5} cases  {}", r.name, r.cases, r.detail);
    }
    println!("suite finished in {secs:.2} s");
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::ProtocolSweep(a) => protocol_sweep(a).map(|_| true),
        Command::Fig2(a) => fig2(a).map(|_| true),
        Command::ThreePairTable(a) => three_pair(a).map(|_| true),
        Command::MonteCarlo(a) => monte_carlo(a).map(|_| true),
        Command::Verify(a) => run_verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<FlagError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
