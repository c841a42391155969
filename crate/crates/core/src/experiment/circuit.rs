//! The optical realization of the two-qubit code: preparation, encoding,
//! flip boxes, parity check and decoding measurement.
//!
//! Beams: `0`, `1`, `2`, `3` leave the two sources; the first PBS merges `1`
//! and `2` into `1''` and `2'`; the second merges `1''` and `3` into `I1` and
//! `3''`. Detection happens after every interferometric element, which is
//! equivalent to measuring `2'` early since later elements do not touch it.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fock::{Beam, FockState, ModeLabel, ModeRegistry, ModeUnitary, Polarization};
use crate::protocol::PureQubit;

use super::detector::{events_for_counts, Detector, DetectorModel, EventProbabilities};
use super::flip_box::{apply_flip_box, FlipBoxParams};

pub const BEAMS: [&str; 8] = ["0", "1", "2", "3", "1''", "2'", "3''", "I1"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Preparation,
    Encoding,
    Channel,
    ParityCheck,
    Measurement,
}

/// Which of the two code photons a flip box acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxSlot {
    /// Beam `1''`, phase `θ`.
    First,
    /// Beam `3`, phase `θ₁`.
    Second,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Element {
    HalfWavePlate { beam: Beam, angle: f64 },
    PhaseShiftV { beam: Beam, theta: f64 },
    /// Passes only `pass`; the absorbed component never reaches a detector,
    /// so the filter is applied at readout.
    Polarizer { beam: Beam, pass: Polarization },
    Pbs { in1: Beam, in2: Beam, out1: Beam, out2: Beam },
    FlipBox { beam: Beam, slot: BoxSlot },
    Detect { detector: Detector, mode: ModeLabel },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub name: &'static str,
    pub stage: Stage,
    pub element: Element,
}

/// What the flip boxes do on a given run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelAction {
    /// Physical boxes with phases `(θ, θ₁)`.
    Boxes { theta: f64, theta1: f64 },
    /// Deterministic `X` on the selected photons.
    Flips(FlipConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlipConfig {
    None,
    First,
    Second,
    Both,
}

impl FlipConfig {
    pub const ALL: [FlipConfig; 4] = [
        FlipConfig::None,
        FlipConfig::First,
        FlipConfig::Second,
        FlipConfig::Both,
    ];

    pub fn flips(self) -> (bool, bool) {
        match self {
            FlipConfig::None => (false, false),
            FlipConfig::First => (true, false),
            FlipConfig::Second => (false, true),
            FlipConfig::Both => (true, true),
        }
    }

    pub fn weight(self, eta: f64) -> f64 {
        let (a, b) = self.flips();
        let w = |f: bool| if f { eta } else { 1.0 - eta };
        w(a) * w(b)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FlipConfig::None => "none",
            FlipConfig::First => "beam1''",
            FlipConfig::Second => "beam3",
            FlipConfig::Both => "both",
        }
    }
}

impl fmt::Display for FlipConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Photon-count patterns at the five detector ports, indexed by
/// [`Detector::index`], with their probabilities.
pub type CountDistribution = BTreeMap<[u8; 5], f64>;

#[derive(Clone, Debug)]
pub struct Circuit {
    registry: Arc<ModeRegistry>,
    input: PureQubit,
    boxes: [FlipBoxParams; 2],
    detector: DetectorModel,
    steps: Vec<Step>,
    ports: [usize; 5],
}

fn beam(s: &str) -> Beam {
    Beam::new(s)
}

pub fn build_circuit(
    input: PureQubit,
    boxes: [FlipBoxParams; 2],
    detector: DetectorModel,
) -> Result<Circuit> {
    let registry = ModeRegistry::from_beams(BEAMS)?;
    let (g, phi) = (input.gamma, input.phi);
    let step = |name, stage, element| Step { name, stage, element };
    use Element::*;
    use Stage::*;
    let steps = vec![
        step("HWP1", Preparation, HalfWavePlate { beam: beam("1"), angle: g / 2.0 }),
        step("Pv+", Preparation, PhaseShiftV { beam: beam("1"), theta: phi }),
        step("Ph", Preparation, Polarizer { beam: beam("0"), pass: Polarization::H }),
        step(
            "PBS1",
            Encoding,
            Pbs { in1: beam("1"), in2: beam("2"), out1: beam("1''"), out2: beam("2'") },
        ),
        step("box1", Channel, FlipBox { beam: beam("1''"), slot: BoxSlot::First }),
        step("box2", Channel, FlipBox { beam: beam("3"), slot: BoxSlot::Second }),
        step(
            "PBS2",
            ParityCheck,
            Pbs { in1: beam("1''"), in2: beam("3"), out1: beam("I1"), out2: beam("3''") },
        ),
        step("HWP2", Measurement, HalfWavePlate { beam: beam("2'"), angle: FRAC_PI_4 }),
        step("HWP3", Measurement, HalfWavePlate { beam: beam("3''"), angle: FRAC_PI_4 }),
        step("Pv-", Measurement, PhaseShiftV { beam: beam("I1"), theta: -phi }),
        // the rotated PBS is a plate undoing the preparation followed by a plain split
        step("RPBS", Measurement, HalfWavePlate { beam: beam("I1"), angle: -g / 2.0 }),
        step("D0", Measurement, Detect { detector: Detector::D0, mode: ModeLabel::h("0") }),
        step("D2", Measurement, Detect { detector: Detector::D2, mode: ModeLabel::v("2'") }),
        step("D3", Measurement, Detect { detector: Detector::D3, mode: ModeLabel::v("3''") }),
        step("D1", Measurement, Detect { detector: Detector::D1, mode: ModeLabel::h("I1") }),
        step("D4", Measurement, Detect { detector: Detector::D4, mode: ModeLabel::v("I1") }),
    ];
    Circuit::from_steps(registry, input, boxes, detector, steps)
}

impl Circuit {
    /// Validates a step list against the registry. Every detector must be
    /// attached exactly once.
    pub fn from_steps(
        registry: Arc<ModeRegistry>,
        input: PureQubit,
        boxes: [FlipBoxParams; 2],
        detector: DetectorModel,
        steps: Vec<Step>,
    ) -> Result<Self> {
        let mut ports: [Option<usize>; 5] = [None; 5];
        let mut last_stage = Stage::Preparation;
        for s in &steps {
            if s.stage < last_stage {
                return Err(Error::Circuit(format!("step {} is out of stage order", s.name)));
            }
            last_stage = s.stage;
            match &s.element {
                Element::HalfWavePlate { beam, .. }
                | Element::PhaseShiftV { beam, .. }
                | Element::Polarizer { beam, .. }
                | Element::FlipBox { beam, .. } => {
                    registry.beam_modes(beam)?;
                }
                Element::Pbs { in1, in2, out1, out2 } => {
                    for b in [in1, in2, out1, out2] {
                        registry.beam_modes(b)?;
                    }
                }
                Element::Detect { detector, mode } => {
                    let slot = &mut ports[detector.index()];
                    if slot.is_some() {
                        return Err(Error::Circuit(format!("{detector} attached twice")));
                    }
                    *slot = Some(registry.index_of(mode)?);
                }
            }
        }
        let mut resolved = [0; 5];
        for d in Detector::ALL {
            resolved[d.index()] = ports[d.index()]
                .ok_or_else(|| Error::Circuit(format!("{d} is not attached")))?;
        }
        Ok(Circuit {
            registry,
            input,
            boxes,
            detector,
            steps,
            ports: resolved,
        })
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn input(&self) -> PureQubit {
        self.input
    }

    pub fn boxes(&self) -> &[FlipBoxParams; 2] {
        &self.boxes
    }

    pub fn detector(&self) -> &DetectorModel {
        &self.detector
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Mode carried to each detector, indexed by [`Detector::index`].
    pub fn port_modes(&self) -> [ModeLabel; 5] {
        self.ports.map(|i| self.registry.modes()[i].clone())
    }

    /// Runs every step up to and including the parity-check PBS.
    pub fn propagate_to_measurement(&self, state: &FockState, channel: ChannelAction) -> Result<FockState> {
        self.run(state, channel, |s| s < Stage::Measurement)
    }

    /// Runs the measurement-stage optics only.
    pub fn measurement_optics(&self, state: &FockState) -> Result<FockState> {
        self.run(state, ChannelAction::Flips(FlipConfig::None), |s| s == Stage::Measurement)
    }

    pub fn propagate(&self, state: &FockState, channel: ChannelAction) -> Result<FockState> {
        self.run(state, channel, |_| true)
    }

    fn run(
        &self,
        state: &FockState,
        channel: ChannelAction,
        include: impl Fn(Stage) -> bool,
    ) -> Result<FockState> {
        if !Arc::ptr_eq(state.registry(), &self.registry) && state.registry().modes() != self.registry.modes() {
            return Err(Error::RegistryMismatch);
        }
        let mut s = state.clone();
        for step in self.steps.iter().filter(|st| include(st.stage)) {
            s = match &step.element {
                Element::HalfWavePlate { beam, angle } => s.apply_mode_unitary(
                    &ModeUnitary::half_wave_plate(*angle),
                    &[ModeLabel::new(beam.clone(), Polarization::H), ModeLabel::new(beam.clone(), Polarization::V)],
                )?,
                Element::PhaseShiftV { beam, theta } => s.apply_phase_shift_v(beam, *theta)?,
                Element::Pbs { in1, in2, out1, out2 } => s.apply_pbs(in1, in2, out1, out2)?,
                Element::FlipBox { beam, slot } => self.apply_channel(&s, beam, *slot, channel)?,
                Element::Polarizer { .. } | Element::Detect { .. } => s,
            };
        }
        Ok(s)
    }

    fn apply_channel(&self, s: &FockState, beam: &Beam, slot: BoxSlot, channel: ChannelAction) -> Result<FockState> {
        let k = match slot {
            BoxSlot::First => 0,
            BoxSlot::Second => 1,
        };
        match channel {
            ChannelAction::Boxes { theta, theta1 } => {
                let params = self.boxes[k].with_theta(if k == 0 { theta } else { theta1 })?;
                apply_flip_box(s, beam, &params)
            }
            ChannelAction::Flips(config) => {
                let (a, b) = config.flips();
                if [a, b][k] {
                    s.apply_mode_unitary(
                        &ModeUnitary::bit_flip(),
                        &[ModeLabel::new(beam.clone(), Polarization::H), ModeLabel::new(beam.clone(), Polarization::V)],
                    )
                } else {
                    Ok(s.clone())
                }
            }
        }
    }

    /// Photon counts at the detector ports of a fully propagated state.
    pub fn port_counts(&self, state: &FockState) -> CountDistribution {
        let mut dist = CountDistribution::new();
        for (occ, amp) in state.terms() {
            let key = self.ports.map(|i| occ.get(i));
            *dist.entry(key).or_insert(0.0) += amp.norm_sqr();
        }
        dist
    }

    /// Coincidence-event probabilities of a fully propagated state, weighted
    /// by its squared norm.
    pub fn events(&self, state: &FockState) -> EventProbabilities {
        events_from_counts(&self.port_counts(state), &self.detector)
    }
}

pub fn events_from_counts(dist: &CountDistribution, det: &DetectorModel) -> EventProbabilities {
    dist.iter()
        .map(|(counts, p)| events_for_counts(counts, det).scaled(*p))
        .fold(EventProbabilities::default(), |acc, e| acc.merge(&e))
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{:>5}  {:?}  {:?}", s.name, s.stage, s.element)?;
        }
        Ok(())
    }
}
