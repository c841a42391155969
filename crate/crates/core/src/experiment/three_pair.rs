//! Four-fold coincidences caused by three-pair emissions.
//!
//! The flip boxes are replaced by deterministic `X` flips so that each of the
//! eight (emission, flip configuration) cases is a single pure state.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::protocol::PureQubit;

use super::circuit::{build_circuit, events_from_counts, ChannelAction, Circuit, FlipConfig};
use super::detector::{ClickMode, DetectorModel, MultifoldPolicy};
use super::flip_box::FlipBoxParams;
use super::source::{EmissionKind, SourceEmission};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreePairInput {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub kind: EmissionKind,
    pub flip: FlipConfig,
}

impl ThreePairInput {
    pub fn new(alpha: Complex64, beta: Complex64, kind: EmissionKind, flip: FlipConfig) -> Result<Self> {
        if kind == EmissionKind::TwoPair {
            return Err(Error::Domain("three-pair input needs a three-pair emission".into()));
        }
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::OutOfRange {
                name: "|alpha|^2+|beta|^2",
                value: norm,
                range: "1",
            });
        }
        Ok(ThreePairInput { alpha, beta, kind, flip })
    }

    pub fn qubit(&self) -> Result<PureQubit> {
        PureQubit::from_amplitudes(self.alpha, self.beta)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TermContribution {
    /// The pre-measurement Fock term.
    pub term: String,
    /// Its own `C4` coefficient of `ξ⁴` under the linear click bound.
    pub coefficient: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThreePairC4 {
    /// Coefficient of `ξ⁴` with the linear click bound.
    pub paper_bound_coefficient: f64,
    /// `C4` probability with exact click probabilities at the model's `ξ`.
    pub exact_probability: f64,
    /// `exact_probability / ξ⁴`.
    pub exact_coefficient: f64,
    /// Sum of per-term bound coefficients, ignoring interference between
    /// the terms of the pre-measurement state.
    pub per_term_coefficient: f64,
    pub terms: Vec<TermContribution>,
}

fn circuit_for(input: &ThreePairInput, det: DetectorModel) -> Result<Circuit> {
    let boxes = [FlipBoxParams::new(0.0, FRAC_PI_2, true)?; 2];
    build_circuit(input.qubit()?, boxes, det)
}

/// Bound coefficient of `ξ⁴`: the linear click weights at `ξ = 1`, where a
/// five-fold discard only contributes at higher order.
fn bound_coefficient(circuit: &Circuit, state: &FockState) -> Result<f64> {
    let bound = DetectorModel::new(1.0, ClickMode::PaperBound, MultifoldPolicy::FiveFoldAsC4)?;
    Ok(events_from_counts(&circuit.port_counts(state), &bound).n4)
}

pub fn three_pair_c4_probability(input: &ThreePairInput, det: &DetectorModel) -> Result<ThreePairC4> {
    let circuit = circuit_for(input, *det)?;
    let emission = SourceEmission::new(circuit.registry(), input.kind, 1.0)?;
    let channel = ChannelAction::Flips(input.flip);
    let pre = circuit.propagate_to_measurement(&emission.state, channel)?;
    let out = circuit.measurement_optics(&pre)?;

    let exact_det = DetectorModel::new(det.efficiency(), ClickMode::Exact, det.multifold)?;
    let exact_probability = events_from_counts(&circuit.port_counts(&out), &exact_det).n4;

    let mut terms = Vec::new();
    for (occ, amp) in pre.terms() {
        let single = FockState::from_terms(circuit.registry(), [(occ.clone(), *amp)])?;
        let coefficient = bound_coefficient(&circuit, &circuit.measurement_optics(&single)?)?;
        if coefficient > 0.0 {
            terms.push(TermContribution {
                term: single.to_string(),
                coefficient,
            });
        }
    }
    Ok(ThreePairC4 {
        paper_bound_coefficient: bound_coefficient(&circuit, &out)?,
        exact_probability,
        exact_coefficient: exact_probability / det.efficiency().powi(4),
        per_term_coefficient: terms.iter().map(|t| t.coefficient).sum(),
        terms,
    })
}

/// `(α, β)` of the four reference inputs `(1,0)`, `(0,1)`, `(1,±1)/√2`.
pub fn reference_amplitudes() -> [(Complex64, Complex64); 4] {
    let r = 0.5f64.sqrt();
    let c = |x: f64| Complex64::new(x, 0.0);
    [(c(1.0), c(0.0)), (c(0.0), c(1.0)), (c(r), c(r)), (c(r), c(-r))]
}

/// Bound coefficient averaged uniformly over the four reference inputs.
pub fn four_state_bound_coefficient(kind: EmissionKind, flip: FlipConfig) -> Result<f64> {
    let mut sum = 0.0;
    for (a, b) in reference_amplitudes() {
        let input = ThreePairInput::new(a, b, kind, flip)?;
        sum += three_pair_c4_probability(&input, &DetectorModel::ideal())?.paper_bound_coefficient;
    }
    Ok(sum / 4.0)
}
