//! Exact enumeration of detection outcomes.

use std::f64::consts::FRAC_PI_2;

use crate::error::Result;
use crate::protocol::AverageMode;

use super::circuit::{build_circuit, ChannelAction, Circuit};
use super::detector::{DetectorModel, EventProbabilities};
use super::flip_box::FlipBoxParams;
use super::source::{EmissionKind, SourceEmission};

/// The four `(θ, θ₁)` phase settings, each run for the same duration.
pub const BOX_SETTINGS: [(f64, f64); 4] = [
    (FRAC_PI_2, FRAC_PI_2),
    (FRAC_PI_2, -FRAC_PI_2),
    (-FRAC_PI_2, FRAC_PI_2),
    (-FRAC_PI_2, -FRAC_PI_2),
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Settings {
    Fixed { theta: f64, theta1: f64 },
    AllFour,
}

impl Settings {
    pub fn list(&self) -> Vec<(f64, f64)> {
        match *self {
            Settings::Fixed { theta, theta1 } => vec![(theta, theta1)],
            Settings::AllFour => BOX_SETTINGS.to_vec(),
        }
    }
}

/// Event probabilities per trial for one emission, weighted by the
/// emission's own probability.
pub fn run_exact(
    emission: &SourceEmission,
    circuit: &Circuit,
    settings: Settings,
) -> Result<EventProbabilities> {
    let list = settings.list();
    let w = emission.probability / list.len() as f64;
    let mut total = EventProbabilities::default();
    for (theta, theta1) in list {
        let out = circuit.propagate(&emission.state, ChannelAction::Boxes { theta, theta1 })?;
        total = total.merge(&circuit.events(&out).scaled(w));
    }
    Ok(total)
}

/// Two-pair events averaged over input states and all four settings, with
/// unit emission weight.
pub fn two_pair_events(
    epsilon: f64,
    average: AverageMode,
    detector: DetectorModel,
) -> Result<EventProbabilities> {
    let boxes = [FlipBoxParams::new(epsilon, FRAC_PI_2, true)?; 2];
    let mut total = EventProbabilities::default();
    for (q, w) in average.nodes() {
        let circuit = build_circuit(q, boxes, detector)?;
        let emission = SourceEmission::new(circuit.registry(), EmissionKind::TwoPair, 1.0)?;
        total = total.merge(&run_exact(&emission, &circuit, Settings::AllFour)?.scaled(w));
    }
    Ok(total)
}

/// Accepted error `C4/(C1+C4)` of the optical circuit for two-pair
/// emission.
pub fn two_pair_conditional_error(
    epsilon: f64,
    average: AverageMode,
    detector: DetectorModel,
) -> Result<f64> {
    let e = two_pair_events(epsilon, average, detector)?;
    e.conditional_error().ok_or(crate::Error::Domain(
        "no accepted events".into(),
    ))
}
