//! Closed-form rates, the three-pair error bound, curve datasets and the
//! table comparison against the published numbers.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{check_range, Error, Result};
use crate::experiment::three_pair::{reference_amplitudes, three_pair_c4_probability, ThreePairInput};
use crate::experiment::{classify_event, ClickMode, DetectorModel, EmissionKind, Event, FlipConfig, MultifoldPolicy};
use crate::protocol::{coded_error_rate, direct_error_rate, AverageMode};

/// `ε/(1+ε)`.
pub fn eta_from_epsilon(epsilon: f64) -> Result<f64> {
    check_range("epsilon", epsilon, epsilon >= 0.0, "[0, inf)")?;
    Ok(epsilon / (1.0 + epsilon))
}

/// Error without coding: `2η/3` (Bloch) or `η/2` (four states).
pub fn e0(eta: f64, mode: AverageMode) -> f64 {
    eta * double_flip_error(mode)
}

/// Accepted error with coding, `w η²/((1-η)² + η²)` where `w` is
/// [`double_flip_error`].
pub fn ec(eta: f64, mode: AverageMode) -> f64 {
    let d = (1.0 - eta).powi(2) + eta * eta;
    double_flip_error(mode) * eta * eta / d
}

/// Mean of `1 - |<u|X|u>|²` over the input states: the chance that a
/// flipped qubit is detected as wrong.
pub fn double_flip_error(mode: AverageMode) -> f64 {
    match mode {
        AverageMode::BlochHaar => 2.0 / 3.0,
        AverageMode::FourState => 0.5,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParams {
    pub p: f64,
    pub xi: f64,
    pub eta: f64,
}

impl BoundParams {
    /// `p ∈ [0,1)`, `ξ ∈ (0,1]`, `η ∈ [0,1/2)`. `p = 0` and `η = 0` are
    /// admitted as limits.
    pub fn new(p: f64, xi: f64, eta: f64) -> Result<Self> {
        check_range("p", p, (0.0..1.0).contains(&p), "[0, 1)")?;
        check_range("xi", xi, xi > 0.0 && xi <= 1.0, "(0, 1]")?;
        check_range("eta", eta, (0.0..0.5).contains(&eta), "[0, 0.5)")?;
        Ok(BoundParams { p, xi, eta })
    }
}

/// Two-pair `C4` rate as published: `ξ⁴η²p²/16`. It counts every accepted
/// double flip as an error.
pub fn lambda2(params: &BoundParams) -> f64 {
    params.xi.powi(4) * params.eta.powi(2) * params.p.powi(2) / 16.0
}

/// Two-pair `C4` rate of the optical circuit: [`lambda2`] times
/// [`double_flip_error`].
pub fn lambda2_oracle(params: &BoundParams, mode: AverageMode) -> f64 {
    lambda2(params) * double_flip_error(mode)
}

/// Summed three-pair `C4` coefficients per flip configuration; `one` adds
/// both single-flip cases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Brackets {
    pub none: f64,
    pub one: f64,
    pub both: f64,
}

pub const PAPER_BRACKETS: Brackets = Brackets {
    none: 19.0 / 48.0,
    one: 7.0 / 24.0,
    both: 17.0 / 48.0,
};

impl Brackets {
    pub fn at(&self, eta: f64) -> f64 {
        (1.0 - eta).powi(2) * self.none + (1.0 - eta) * eta * self.one + eta * eta * self.both
    }

    /// Brackets built from per-state coefficients.
    pub fn from_states(table: &StateCoefficients) -> Self {
        let sum = |f: FlipConfig| table.get(EmissionKind::ThreePairR, f) + table.get(EmissionKind::ThreePairL, f);
        Brackets {
            none: sum(FlipConfig::None),
            one: sum(FlipConfig::First) + sum(FlipConfig::Second),
            both: sum(FlipConfig::Both),
        }
    }
}

/// `ξ⁴ · brackets(η) · 3p³/4`.
pub fn lambda3(params: &BoundParams, brackets: &Brackets) -> f64 {
    params.xi.powi(4) * brackets.at(params.eta) * 0.75 * params.p.powi(3)
}

/// `(1 + λ₃/λ₂)·E_c` with the published brackets and `λ₂`.
pub fn ec_prime(params: &BoundParams, mode: AverageMode) -> Result<f64> {
    ec_prime_with(params, mode, &PAPER_BRACKETS)
}

pub fn ec_prime_with(params: &BoundParams, mode: AverageMode, brackets: &Brackets) -> Result<f64> {
    Ok(bound_factor(params, brackets)? * ec(params.eta, mode))
}

/// `1 + λ₃/λ₂`; exactly 1 when `p = 0`.
pub fn bound_factor(params: &BoundParams, brackets: &Brackets) -> Result<f64> {
    if params.p == 0.0 {
        return Ok(1.0);
    }
    if params.eta == 0.0 {
        return Err(Error::Domain(
            "three-pair to two-pair ratio is undefined at eta = 0".into(),
        ));
    }
    Ok(1.0 + lambda3(params, brackets) / lambda2(params))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub eta: f64,
    pub e0_bloch: f64,
    pub e0_fourstate: f64,
    pub ec_bloch: f64,
    pub ec_fourstate: f64,
    pub ec_prime: f64,
}

pub const FIG2_P_VALUES: [f64; 4] = [0.01, 0.005, 0.002, 0.001];

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub fn default_eta_grid() -> Vec<f64> {
    uniform_grid(0.005, 0.495, 100)
}

/// One point per grid value; `ec_prime` uses `mode` for `E_c`.
pub fn fig2_dataset(p: f64, grid: &[f64], mode: AverageMode) -> Result<Vec<CurvePoint>> {
    grid.par_iter()
        .map(|&eta| {
            check_range("eta", eta, eta > 0.0 && eta < 0.5, "(0, 0.5)")?;
            let params = BoundParams::new(p, 1.0, eta)?;
            Ok(CurvePoint {
                eta,
                e0_bloch: e0(eta, AverageMode::BlochHaar),
                e0_fourstate: e0(eta, AverageMode::FourState),
                ec_bloch: ec(eta, AverageMode::BlochHaar),
                ec_fourstate: ec(eta, AverageMode::FourState),
                ec_prime: ec_prime(&params, mode)?,
            })
        })
        .collect()
}

/// Like a [`fig2_dataset`] point but with every rate computed by density
/// operator enumeration. `η = 0` is allowed when `p = 0`.
pub fn protocol_sweep_point(eta: f64, p: f64, mode: AverageMode) -> Result<CurvePoint> {
    let params = BoundParams::new(p, 1.0, eta)?;
    let ec_mode = coded_error_rate(eta, mode)?;
    Ok(CurvePoint {
        eta,
        e0_bloch: direct_error_rate(eta, AverageMode::BlochHaar)?,
        e0_fourstate: direct_error_rate(eta, AverageMode::FourState)?,
        ec_bloch: coded_error_rate(eta, AverageMode::BlochHaar)?,
        ec_fourstate: coded_error_rate(eta, AverageMode::FourState)?,
        ec_prime: bound_factor(&params, &PAPER_BRACKETS)? * ec_mode,
    })
}

/// The first contiguous `η` interval in `(0, 1/2)` where
/// `E_c′ < factor · E₀`, endpoints refined by bisection.
pub fn interval_below(p: f64, mode: AverageMode, factor: f64) -> Result<Option<(f64, f64)>> {
    let gap = |eta: f64| -> Result<f64> {
        let params = BoundParams::new(p, 1.0, eta)?;
        Ok(ec_prime(&params, mode)? - factor * e0(eta, mode))
    };
    let grid = uniform_grid(1e-4, 0.5 - 1e-4, 5000);
    let mut start = None;
    let mut prev = grid[0];
    for &eta in &grid {
        let below = gap(eta)? < 0.0;
        match (start, below) {
            (None, true) => {
                let lo = if eta == grid[0] { eta } else { bisect(&gap, prev, eta)? };
                start = Some(lo);
            }
            (Some(lo), false) => return Ok(Some((lo, bisect(&gap, prev, eta)?))),
            _ => {}
        }
        prev = eta;
    }
    Ok(start.map(|lo| (lo, *grid.last().expect("nonempty grid"))))
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<f64> {
    let fa_neg = f(a)? < 0.0;
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if (f(m)? < 0.0) == fa_neg {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

pub const FIG2_HEADER: [&str; 6] = ["eta", "e0_bloch", "e0_fourstate", "ec_bloch", "ec_fourstate", "ec_prime"];

pub const THREE_PAIR_HEADER: [&str; 9] = [
    "state",
    "alpha_re",
    "alpha_im",
    "beta_re",
    "beta_im",
    "flip_config",
    "paper_coeff",
    "oracle_coeff_paperbound",
    "oracle_coeff_exact",
];

/// Locale-independent scientific notation with 16 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.15e}")
}

pub fn write_fig2_csv<W: Write>(out: W, points: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIG2_HEADER).map_err(csv_err)?;
    for pt in points {
        w.write_record(
            [pt.eta, pt.e0_bloch, pt.e0_fourstate, pt.ec_bloch, pt.ec_fourstate, pt.ec_prime].map(fmt_num),
        )
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Short name of a three-pair case, e.g. `r_0` or `l_b`.
pub fn state_name(kind: EmissionKind, flip: FlipConfig) -> String {
    let side = match kind {
        EmissionKind::ThreePairL => "l",
        _ => "r",
    };
    let sub = match flip {
        FlipConfig::None => "0",
        FlipConfig::First => "1''",
        FlipConfig::Second => "3",
        FlipConfig::Both => "b",
    };
    format!("{side}_{sub}")
}

pub const THREE_PAIR_STATES: [(EmissionKind, FlipConfig); 8] = [
    (EmissionKind::ThreePairR, FlipConfig::None),
    (EmissionKind::ThreePairR, FlipConfig::First),
    (EmissionKind::ThreePairR, FlipConfig::Second),
    (EmissionKind::ThreePairR, FlipConfig::Both),
    (EmissionKind::ThreePairL, FlipConfig::None),
    (EmissionKind::ThreePairL, FlipConfig::First),
    (EmissionKind::ThreePairL, FlipConfig::Second),
    (EmissionKind::ThreePairL, FlipConfig::Both),
];

/// Published per-state averages, in [`THREE_PAIR_STATES`] order.
pub const PAPER_STATE_AVERAGES: [f64; 8] = [
    3.0 / 16.0,
    1.0 / 16.0,
    1.0 / 16.0,
    17.0 / 96.0,
    5.0 / 24.0,
    1.0 / 12.0,
    1.0 / 12.0,
    5.0 / 24.0,
];

/// Published per-input bounds for the unflipped `r` state, in
/// [`reference_amplitudes`] order.
pub const PAPER_R0_INPUTS: [f64; 4] = [1.0 / 24.0, 1.0 / 24.0, 7.0 / 48.0, 7.0 / 48.0];

/// Published per-term bounds for the unflipped `r` state at `α = β`, with
/// the first entry read as `ξ⁴/48` (it is printed with `ξ²`).
pub const PAPER_R0_TERMS: [f64; 8] = [
    1.0 / 48.0,
    1.0 / 48.0,
    1.0 / 24.0,
    1.0 / 24.0,
    1.0 / 96.0,
    1.0 / 96.0,
    0.0,
    0.0,
];

fn paper_coefficient(kind: EmissionKind, flip: FlipConfig, input: usize) -> f64 {
    if (kind, flip) == THREE_PAIR_STATES[0] {
        PAPER_R0_INPUTS[input]
    } else {
        let i = THREE_PAIR_STATES
            .iter()
            .position(|s| *s == (kind, flip))
            .expect("three-pair state");
        PAPER_STATE_AVERAGES[i]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThreePairRow {
    pub kind: EmissionKind,
    pub flip: FlipConfig,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub paper_coeff: f64,
    pub oracle_coeff_paperbound: f64,
    pub oracle_coeff_exact: f64,
    pub oracle_per_term: f64,
}

/// All eight states at the four reference inputs. Exact coefficients are
/// `C4/ξ⁴` at detector efficiency `xi`.
pub fn three_pair_table(xi: f64) -> Result<Vec<ThreePairRow>> {
    let det = DetectorModel::new(xi, ClickMode::Exact, MultifoldPolicy::FiveFoldAsC4)?;
    let cases: Vec<_> = THREE_PAIR_STATES
        .iter()
        .flat_map(|&s| (0..4).map(move |k| (s, k)))
        .collect();
    cases
        .par_iter()
        .map(|&((kind, flip), k)| {
            let (alpha, beta) = reference_amplitudes()[k];
            let r = three_pair_c4_probability(&ThreePairInput::new(alpha, beta, kind, flip)?, &det)?;
            Ok(ThreePairRow {
                kind,
                flip,
                alpha,
                beta,
                paper_coeff: paper_coefficient(kind, flip, k),
                oracle_coeff_paperbound: r.paper_bound_coefficient,
                oracle_coeff_exact: r.exact_coefficient,
                oracle_per_term: r.per_term_coefficient,
            })
        })
        .collect()
}

pub fn write_three_pair_csv<W: Write>(out: W, rows: &[ThreePairRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(THREE_PAIR_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            state_name(r.kind, r.flip),
            fmt_num(r.alpha.re),
            fmt_num(r.alpha.im),
            fmt_num(r.beta.re),
            fmt_num(r.beta.im),
            r.flip.to_string(),
            fmt_num(r.paper_coeff),
            fmt_num(r.oracle_coeff_paperbound),
            fmt_num(r.oracle_coeff_exact),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Four-input mean coefficient of each three-pair state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateCoefficients(pub [f64; 8]);

impl StateCoefficients {
    pub fn get(&self, kind: EmissionKind, flip: FlipConfig) -> f64 {
        let i = THREE_PAIR_STATES
            .iter()
            .position(|s| *s == (kind, flip))
            .expect("three-pair state");
        self.0[i]
    }

    pub fn from_rows(rows: &[ThreePairRow], value: impl Fn(&ThreePairRow) -> f64) -> Self {
        let mut out = [0.0; 8];
        for (i, s) in THREE_PAIR_STATES.iter().enumerate() {
            let vals: Vec<f64> = rows.iter().filter(|r| (r.kind, r.flip) == *s).map(&value).collect();
            out[i] = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
        }
        StateCoefficients(out)
    }
}

/// Nearest fraction with denominator at most `max_den`, for reporting.
pub fn as_fraction(x: f64, max_den: i64) -> Option<Ratio<i64>> {
    let mut best: Option<(f64, Ratio<i64>)> = None;
    for d in 1..=max_den {
        let n = (x * d as f64).round();
        let err = (x - n / d as f64).abs();
        if best.is_none_or(|(e, _)| err < e - 1e-15) {
            best = Some((err, Ratio::new(n as i64, d)));
        }
    }
    best.filter(|(e, _)| *e < 1e-12).map(|(_, r)| r)
}

fn show(x: f64) -> String {
    match as_fraction(x, 2000) {
        Some(r) => r.to_string(),
        None => format!("{x:.12}"),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub quantity: String,
    pub published: f64,
    pub oracle: f64,
    /// Extra numbers worth printing alongside, e.g. alternative readings.
    pub note: String,
}

impl Comparison {
    pub fn new(quantity: impl Into<String>, published: f64, oracle: f64, note: impl Into<String>) -> Self {
        Comparison {
            quantity: quantity.into(),
            published,
            oracle,
            note: note.into(),
        }
    }

    pub fn matches(&self) -> bool {
        (self.published - self.oracle).abs() <= 1e-12
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComparisonReport {
    pub entries: Vec<Comparison>,
}

impl ComparisonReport {
    pub fn mismatches(&self) -> Vec<&Comparison> {
        self.entries.iter().filter(|c| !c.matches()).collect()
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.entries {
            let flag = if c.matches() { "match   " } else { "MISMATCH" };
            write!(f, "{flag} {:<44} published {:>10}  oracle {:>10}", c.quantity, show(c.published), show(c.oracle))?;
            if !c.note.is_empty() {
                write!(f, "  ({})", c.note)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Published values next to the oracle's. Three-pair coefficients are
/// multiples of `ξ⁴` under the linear click bound; state averages are the
/// plain mean over the four reference inputs.
pub fn comparison_report() -> Result<ComparisonReport> {
    let rows = three_pair_table(1.0)?;
    let coherent = StateCoefficients::from_rows(&rows, |r| r.oracle_coeff_paperbound);
    let per_term = StateCoefficients::from_rows(&rows, |r| r.oracle_per_term);
    let r0: Vec<&ThreePairRow> = rows.iter().filter(|r| (r.kind, r.flip) == THREE_PAIR_STATES[0]).collect();
    let mut entries = Vec::new();

    let labels = ["(1,0)", "(0,1)", "(1,1)/√2", "(1,-1)/√2"];
    for (k, row) in r0.iter().enumerate() {
        entries.push(Comparison::new(
            format!("r_0 bound at input {}", labels[k]),
            PAPER_R0_INPUTS[k],
            row.oracle_coeff_paperbound,
            format!("sum of per-term bounds {}", show(row.oracle_per_term)),
        ));
    }

    let printed_sum: f64 = PAPER_R0_TERMS.iter().sum();
    let term1_as_printed = PAPER_R0_TERMS[1..].iter().sum::<f64>();
    entries.push(Comparison::new(
        "r_0 per-term table sum at (1,1)/√2",
        7.0 / 48.0,
        printed_sum,
        format!(
            "published arithmetic, terms re-added with term 1 read as ξ⁴/48; as printed the ξ⁴ terms sum to {}",
            show(term1_as_printed)
        ),
    ));

    // a C4 event needs four detectors to click, each contributing one ξ
    let c4_clicks = [true, false, true, true, true];
    debug_assert_eq!(classify_event(&c4_clicks, MultifoldPolicy::FiveFoldAsC4), Event::C4);
    entries.push(Comparison::new(
        "power of ξ in r_0 term 1",
        2.0,
        c4_clicks.iter().filter(|&&c| c).count() as f64,
        "printed as ξ²/48",
    ));

    let paper_mean = PAPER_R0_INPUTS.iter().sum::<f64>() / 4.0;
    entries.push(Comparison::new(
        "r_0 average vs mean of its own four inputs",
        PAPER_STATE_AVERAGES[0],
        paper_mean,
        "published arithmetic",
    ));

    for (i, &(kind, flip)) in THREE_PAIR_STATES.iter().enumerate() {
        entries.push(Comparison::new(
            format!("average C4 bound of {}", state_name(kind, flip)),
            PAPER_STATE_AVERAGES[i],
            coherent.0[i],
            format!("sum of per-term bounds {}", show(per_term.0[i])),
        ));
    }

    let paper_table = Brackets::from_states(&StateCoefficients(PAPER_STATE_AVERAGES));
    let oracle = Brackets::from_states(&coherent);
    for (name, printed, table, ours) in [
        ("no-flip bracket", PAPER_BRACKETS.none, paper_table.none, oracle.none),
        ("one-flip bracket", PAPER_BRACKETS.one, paper_table.one, oracle.one),
        ("both-flip bracket", PAPER_BRACKETS.both, paper_table.both, oracle.both),
    ] {
        entries.push(Comparison::new(
            format!("{name} vs published state table"),
            printed,
            table,
            "published arithmetic",
        ));
        entries.push(Comparison::new(format!("{name} vs oracle"), printed, ours, ""));
    }

    let eta = 0.1;
    let params = BoundParams::new(0.5, 1.0, eta)?;
    for mode in [AverageMode::BlochHaar, AverageMode::FourState] {
        let optics = crate::experiment::two_pair_events(eta / (1.0 - eta), mode, DetectorModel::ideal())?;
        let p2 = params.p * params.p;
        entries.push(Comparison::new(
            format!("two-pair C4 rate / (ξ⁴η²p²), {mode:?}"),
            lambda2(&params) / (eta * eta * p2),
            optics.n4 / (eta * eta),
            format!(
                "accepted double-flip rate / (ξ⁴η²) = {}",
                show((optics.accepted() - (1.0 - eta).powi(2) / 16.0) / (eta * eta))
            ),
        ));
        entries.push(Comparison::new(
            format!("E0 at eta = 0.1, {mode:?}"),
            e0(eta, mode),
            direct_error_rate(eta, mode)?,
            "",
        ));
        entries.push(Comparison::new(
            format!("Ec at eta = 0.1, {mode:?}"),
            ec(eta, mode),
            coded_error_rate(eta, mode)?,
            "",
        ));
    }
    Ok(ComparisonReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eta_examples() {
        assert_eq!(eta_from_epsilon(0.0).unwrap(), 0.0);
        assert_eq!(eta_from_epsilon(1.0).unwrap(), 0.5);
        assert!((eta_from_epsilon(1.0 / 9.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(eta_from_epsilon(-0.1).is_err());
    }

    #[test]
    fn bound_examples() {
        let params = BoundParams::new(0.002, 1.0, 0.1).unwrap();
        assert!((lambda2(&params) - 2.5e-9).abs() < 1e-22);
        assert!((PAPER_BRACKETS.at(0.1) - 0.35042).abs() < 1e-5);
        assert!((lambda3(&params, &PAPER_BRACKETS) / 2.1023e-9 - 1.0).abs() < 1e-4);
        let ecp = ec_prime(&params, AverageMode::BlochHaar).unwrap();
        assert!((ecp - 0.014968).abs() < 1e-6, "{ecp}");
        assert_eq!(lambda2(&BoundParams::new(0.002, 1.0, 0.0).unwrap()), 0.0);
        assert_eq!(lambda3(&BoundParams::new(0.0, 1.0, 0.1).unwrap(), &PAPER_BRACKETS), 0.0);
    }

    #[test]
    fn ec_prime_limits() {
        let zero_p = BoundParams::new(0.0, 1.0, 0.2).unwrap();
        assert_eq!(ec_prime(&zero_p, AverageMode::FourState).unwrap(), ec(0.2, AverageMode::FourState));
        assert!(ec_prime(&BoundParams::new(0.01, 1.0, 0.0).unwrap(), AverageMode::BlochHaar).is_err());
        assert_eq!(ec_prime(&BoundParams::new(0.0, 1.0, 0.0).unwrap(), AverageMode::BlochHaar).unwrap(), 0.0);
    }

    #[test]
    fn closed_forms_match_enumeration() {
        for eta in uniform_grid(0.01, 0.49, 13) {
            for mode in [AverageMode::BlochHaar, AverageMode::FourState] {
                assert!((ec(eta, mode) - coded_error_rate(eta, mode).unwrap()).abs() < 1e-13);
                assert!((e0(eta, mode) - direct_error_rate(eta, mode).unwrap()).abs() < 1e-13);
            }
        }
        assert!((ec(0.25, AverageMode::BlochHaar) - 1.0 / 15.0).abs() < 1e-15);
        assert!((ec(0.25, AverageMode::FourState) - 1.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn two_pair_rate_relates_to_lambda2() {
        for (eps, mode) in [(1.0 / 9.0, AverageMode::BlochHaar), (1.0 / 3.0, AverageMode::FourState)] {
            let eta = eps / (1.0 + eps);
            let optics = crate::experiment::two_pair_events(eps, mode, DetectorModel::ideal()).unwrap();
            let params = BoundParams::new(0.002, 1.0, eta).unwrap();
            let p2 = params.p * params.p;
            assert!((optics.n4 * p2 - lambda2_oracle(&params, mode)).abs() < 1e-12 * p2);
            let accepted = p2 * ((1.0 - eta).powi(2) + eta * eta) / 16.0;
            assert!((optics.accepted() * p2 - accepted).abs() < 1e-12 * p2);
        }
    }

    #[test]
    fn fig2_columns() {
        let pts = fig2_dataset(0.002, &[0.25], AverageMode::FourState).unwrap();
        assert!((pts[0].ec_bloch - 1.0 / 15.0).abs() < 1e-15);
        assert!((pts[0].ec_fourstate - 1.0 / 20.0).abs() < 1e-15);
        let zero = fig2_dataset(0.0, &default_eta_grid(), AverageMode::FourState).unwrap();
        assert!(zero.iter().all(|p| p.ec_prime == p.ec_fourstate));
        assert!(fig2_dataset(0.002, &[0.5], AverageMode::FourState).is_err());
    }

    #[test]
    fn fig2_bound_below_uncoded_rate() {
        for mode in [AverageMode::BlochHaar, AverageMode::FourState] {
            for p in [0.002, 0.001] {
                let pts = fig2_dataset(p, &uniform_grid(0.05, 0.45, 81), mode).unwrap();
                let e0 = |pt: &CurvePoint| match mode {
                    AverageMode::BlochHaar => pt.e0_bloch,
                    AverageMode::FourState => pt.e0_fourstate,
                };
                assert!(pts.iter().all(|pt| pt.ec_prime < e0(pt)));
            }
        }
    }

    #[test]
    fn csv_is_deterministic() {
        let run = || {
            let mut buf = Vec::new();
            write_fig2_csv(&mut buf, &fig2_dataset(0.005, &default_eta_grid(), AverageMode::FourState).unwrap()).unwrap();
            buf
        };
        let a = run();
        assert_eq!(a, run());
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("eta,e0_bloch,e0_fourstate,ec_bloch,ec_fourstate,ec_prime\n"));
        assert_eq!(text.lines().count(), 101);
    }

    #[test]
    fn interval_below_third_of_uncoded() {
        for p in [0.002, 0.001] {
            for mode in [AverageMode::BlochHaar, AverageMode::FourState] {
                let (lo, hi) = interval_below(p, mode, 1.0 / 3.0).unwrap().expect("nonempty");
                assert!(lo < hi);
                for eta in uniform_grid(lo + 1e-9, hi - 1e-9, 50) {
                    let params = BoundParams::new(p, 1.0, eta).unwrap();
                    assert!(ec_prime(&params, mode).unwrap() < e0(eta, mode) / 3.0);
                }
            }
        }
    }

    #[test]
    fn fractions() {
        assert_eq!(as_fraction(7.0 / 48.0, 1000), Some(Ratio::new(7, 48)));
        assert_eq!(as_fraction(0.0, 10), Some(Ratio::new(0, 1)));
        assert_eq!(as_fraction(std::f64::consts::PI, 50), None);
    }

    #[test]
    fn identical_inputs_give_empty_diff() {
        let report = ComparisonReport {
            entries: vec![Comparison::new("x", 0.25, 0.25, ""), Comparison::new("y", 1.0 / 3.0, 1.0 / 3.0, "")],
        };
        assert!(report.mismatches().is_empty());
    }

    #[test]
    fn published_bracket_arithmetic() {
        let t = Brackets::from_states(&StateCoefficients(PAPER_STATE_AVERAGES));
        assert!((t.none - 19.0 / 48.0).abs() < 1e-15);
        assert!((t.one - 7.0 / 24.0).abs() < 1e-15);
        assert!((t.both - 37.0 / 96.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn ratio_is_efficiency_free(p in 1e-4f64..0.05, eta in 0.01f64..0.49) {
            let ratios: Vec<f64> = [0.1, 0.5, 1.0]
                .iter()
                .map(|&xi| {
                    let b = BoundParams::new(p, xi, eta).unwrap();
                    lambda3(&b, &PAPER_BRACKETS) / lambda2(&b)
                })
                .collect();
            let closed = 12.0 * p * PAPER_BRACKETS.at(eta) / (eta * eta);
            for r in ratios {
                prop_assert!(((r - closed) / closed).abs() < 1e-14);
            }
        }

        #[test]
        fn coding_helps_and_bound_dominates(p in 1e-4f64..0.05, eta in 0.001f64..0.499) {
            for mode in [AverageMode::BlochHaar, AverageMode::FourState] {
                prop_assert!(ec(eta, mode) < e0(eta, mode));
            }
            let b = BoundParams::new(p, 1.0, eta).unwrap();
            let bloch = ec_prime(&b, AverageMode::BlochHaar).unwrap();
            prop_assert!(bloch >= ec(eta, AverageMode::BlochHaar));
            prop_assert!(bloch >= ec(eta, AverageMode::FourState));
            prop_assert!(ec_prime(&b, AverageMode::FourState).unwrap() >= ec(eta, AverageMode::FourState));
        }
    }
}
