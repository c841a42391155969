//! Qubit-level model of the two-qubit bit-flip error-rejection code.
//!
//! The unknown qubit `|u> = cos(γ/2)|0> + e^{iφ} sin(γ/2)|1>` is encoded into
//! `cos(γ/2)|00> + e^{iφ} sin(γ/2)|11>`, each qubit is flipped independently
//! with probability `η`, and the receiver keeps the pair only if a parity
//! check finds equal bit values. Decoding measures qubit 1 in `|±>` and
//! applies `Z` to qubit 2 on `|->`.
//!
//! Everything here is exact: channels are enumerated as weighted
//! [`FlipPattern`]s over 4x4 density operators and averages over input states
//! use quadrature nodes. Closed-form rates live in [`crate::analysis`] and are
//! checked against this engine.

pub mod bloch;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;

use crate::error::{check_range, Error, Result};

pub use bloch::{average_over_bloch, BlochAverage, Estimate};

pub type TwoQubitState = Vector4<Complex64>;
pub type TwoQubitDensity = Matrix4<Complex64>;
pub type QubitDensity = Matrix2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerated odd-parity weight at the decoder input.
const PARITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureQubit {
    pub gamma: f64,
    pub phi: f64,
}

impl PureQubit {
    /// `γ ∈ [0, π]`; `φ` is reduced to `[0, 2π)`.
    pub fn new(gamma: f64, phi: f64) -> Result<Self> {
        check_range("gamma", gamma, (0.0..=PI).contains(&gamma), "[0, pi]")?;
        check_range("phi", phi, phi.is_finite(), "a finite angle")?;
        Ok(Self::new_unchecked(gamma, phi))
    }

    pub(crate) fn new_unchecked(gamma: f64, phi: f64) -> Self {
        PureQubit {
            gamma,
            phi: phi.rem_euclid(2.0 * PI),
        }
    }

    /// The state with amplitudes proportional to `(alpha, beta)`, up to a
    /// global phase.
    pub fn from_amplitudes(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let gamma = 2.0 * (alpha.norm() / norm).clamp(0.0, 1.0).acos();
        let phi = if beta.norm() == 0.0 || alpha.norm() == 0.0 {
            0.0
        } else {
            beta.arg() - alpha.arg()
        };
        Ok(Self::new_unchecked(gamma, phi))
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new((self.gamma / 2.0).cos(), 0.0)
    }

    pub fn beta(&self) -> Complex64 {
        Complex64::from_polar((self.gamma / 2.0).sin(), self.phi)
    }

    pub fn vector(&self) -> Vector2<Complex64> {
        Vector2::new(self.alpha(), self.beta())
    }

    /// The bit-flipped state `X|u>`.
    pub fn flipped(&self) -> Vector2<Complex64> {
        Vector2::new(self.beta(), self.alpha())
    }

    pub fn density(&self) -> QubitDensity {
        let v = self.vector();
        v * v.adjoint()
    }

    /// `<u|rho|u>`.
    pub fn fidelity(&self, rho: &QubitDensity) -> f64 {
        let v = self.vector();
        (v.adjoint() * rho * v)[(0, 0)].re
    }

    /// `<u⊥|rho|u⊥>`, the weight of the orthogonal state. Equal to
    /// `1 - fidelity` for unit trace, without the cancellation.
    pub fn infidelity(&self, rho: &QubitDensity) -> f64 {
        let w = Vector2::new(-self.beta().conj(), self.alpha().conj());
        // a PSD form, so anything below zero is rounding
        (w.adjoint() * rho * w)[(0, 0)].re.max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BitFlipChannel {
    eta: f64,
}

impl BitFlipChannel {
    pub fn new(eta: f64) -> Result<Self> {
        check_range("eta", eta, (0.0..0.5).contains(&eta), "[0, 0.5)")?;
        Ok(BitFlipChannel { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `(1-η) rho + η X rho X`.
    pub fn apply(&self, rho: &QubitDensity) -> QubitDensity {
        let x = pauli_x();
        rho.scale(1.0 - self.eta) + (x * rho * x).scale(self.eta)
    }

    /// The four joint flip patterns for two independent uses of the channel.
    pub fn patterns(&self) -> [FlipPattern; 4] {
        let e = self.eta;
        [
            FlipPattern::new(false, false, (1.0 - e) * (1.0 - e)),
            FlipPattern::new(true, false, e * (1.0 - e)),
            FlipPattern::new(false, true, e * (1.0 - e)),
            FlipPattern::new(true, true, e * e),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlipPattern {
    pub first: bool,
    pub second: bool,
    pub weight: f64,
}

impl FlipPattern {
    pub fn new(first: bool, second: bool, weight: f64) -> Self {
        FlipPattern {
            first,
            second,
            weight,
        }
    }

    pub fn none() -> Self {
        Self::new(false, false, 1.0)
    }
}

/// Which set of input states an error rate is averaged over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AverageMode {
    /// Haar average over the whole Bloch sphere.
    BlochHaar,
    /// The four states `(1,0)`, `(0,1)`, `(1,±1)/√2`.
    FourState,
}

impl AverageMode {
    /// Input states and weights (summing to one) that realize the average
    /// exactly for the fidelities used in this crate.
    pub fn nodes(&self) -> Vec<(PureQubit, f64)> {
        match self {
            AverageMode::BlochHaar => bloch::quadrature_nodes(4, 8),
            AverageMode::FourState => four_states()
                .into_iter()
                .map(|q| (q, 0.25))
                .collect(),
        }
    }
}

/// `(α,β) = (1,0), (0,1), (1,1)/√2, (1,-1)/√2`.
pub fn four_states() -> [PureQubit; 4] {
    [
        PureQubit::new_unchecked(0.0, 0.0),
        PureQubit::new_unchecked(PI, 0.0),
        PureQubit::new_unchecked(FRAC_PI_2, 0.0),
        PureQubit::new_unchecked(FRAC_PI_2, PI),
    ]
}

fn pauli_x() -> QubitDensity {
    Matrix2::new(ZERO, ONE, ONE, ZERO)
}

fn pauli_z() -> QubitDensity {
    Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

/// Basis index of `|b1 b2>`.
fn idx(b1: usize, b2: usize) -> usize {
    2 * b1 + b2
}

/// `|00> -> |00>`, `|10> -> |11>` applied to `q ⊗ |0>`.
pub fn encode(q: &PureQubit) -> TwoQubitState {
    let mut input = Vector4::zeros();
    input[idx(0, 0)] = q.alpha();
    input[idx(1, 0)] = q.beta();
    cnot() * input
}

fn cnot() -> TwoQubitDensity {
    let mut m = Matrix4::zeros();
    m[(idx(0, 0), idx(0, 0))] = ONE;
    m[(idx(0, 1), idx(0, 1))] = ONE;
    m[(idx(1, 1), idx(1, 0))] = ONE;
    m[(idx(1, 0), idx(1, 1))] = ONE;
    m
}

fn flip_operator(pattern: &FlipPattern) -> TwoQubitDensity {
    let x = pauli_x();
    let id = Matrix2::identity();
    let a = if pattern.first { x } else { id };
    let b = if pattern.second { x } else { id };
    a.kronecker(&b)
}

pub fn apply_flip_pattern(code: &TwoQubitState, pattern: &FlipPattern) -> TwoQubitState {
    flip_operator(pattern) * code
}

pub fn pure_density(v: &TwoQubitState) -> TwoQubitDensity {
    v * v.adjoint()
}

/// Two-outcome parity instrument `{P_even, P_odd}`. Branch states are
/// normalized; a branch with zero probability has no state.
#[derive(Clone, Debug)]
pub struct ParityBranches {
    pub accept_probability: f64,
    pub accepted: Option<TwoQubitDensity>,
    pub reject_probability: f64,
    pub rejected: Option<TwoQubitDensity>,
}

fn parity_projectors() -> (TwoQubitDensity, TwoQubitDensity) {
    let mut even = Matrix4::zeros();
    even[(idx(0, 0), idx(0, 0))] = ONE;
    even[(idx(1, 1), idx(1, 1))] = ONE;
    (even, Matrix4::identity() - even)
}

pub fn parity_check(rho: &TwoQubitDensity) -> ParityBranches {
    let (even, odd) = parity_projectors();
    let branch = |p: &TwoQubitDensity| {
        let post = p * rho * p;
        let prob = post.trace().re;
        let state = (prob > 0.0).then(|| post.unscale(prob));
        (prob, state)
    };
    let (accept_probability, accepted) = branch(&even);
    let (reject_probability, rejected) = branch(&odd);
    ParityBranches {
        accept_probability,
        accepted,
        reject_probability,
        rejected,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeOutcome {
    Plus,
    Minus,
}

#[derive(Clone, Debug)]
pub struct DecodeBranch {
    pub outcome: DecodeOutcome,
    pub probability: f64,
    /// Corrected, normalized state of qubit 2.
    pub state: Option<QubitDensity>,
}

/// Partial trace over qubit 1.
fn trace_first(rho: &TwoQubitDensity) -> QubitDensity {
    let mut out = Matrix2::zeros();
    for a in 0..2 {
        for b in 0..2 {
            out[(a, b)] = rho[(idx(0, a), idx(0, b))] + rho[(idx(1, a), idx(1, b))];
        }
    }
    out
}

fn check_even(rho: &TwoQubitDensity) -> Result<()> {
    let (_, odd) = parity_projectors();
    let weight = (odd * rho * odd).trace().re;
    if weight > PARITY_TOLERANCE * rho.trace().re.max(1.0) {
        return Err(Error::OddParity { weight });
    }
    Ok(())
}

/// The two measurement branches of the decoder, each with qubit 2 already
/// corrected.
pub fn decode_branches(rho: &TwoQubitDensity) -> Result<[DecodeBranch; 2]> {
    check_even(rho)?;
    let r = FRAC_1_SQRT_2;
    let plus = Vector2::new(Complex64::new(r, 0.0), Complex64::new(r, 0.0));
    let minus = Vector2::new(Complex64::new(r, 0.0), Complex64::new(-r, 0.0));
    let z = pauli_z();
    let branch = |outcome, v: Vector2<Complex64>, correction: QubitDensity| {
        let proj = (v * v.adjoint()).kronecker(&Matrix2::identity());
        let reduced = trace_first(&(proj * rho * proj));
        let corrected = correction * reduced * correction.adjoint();
        let probability = corrected.trace().re;
        DecodeBranch {
            outcome,
            probability,
            state: (probability > 0.0).then(|| corrected.unscale(probability)),
        }
    };
    Ok([
        branch(DecodeOutcome::Plus, plus, Matrix2::identity()),
        branch(DecodeOutcome::Minus, minus, z),
    ])
}

/// Decoded single-qubit state: the probability-weighted mixture over both
/// decoder outcomes.
pub fn decode(rho: &TwoQubitDensity) -> Result<QubitDensity> {
    let total = rho.trace().re;
    if total <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let mut out = Matrix2::zeros();
    for b in decode_branches(rho)? {
        if let Some(s) = b.state {
            out += s.scale(b.probability);
        }
    }
    Ok(out.unscale(total))
}

#[derive(Clone, Debug)]
pub struct CodedTransmission {
    pub accept_probability: f64,
    pub output: QubitDensity,
}

/// Encode, send both qubits through the channel, parity-check and decode.
pub fn transmit_coded(q: &PureQubit, channel: &BitFlipChannel) -> Result<CodedTransmission> {
    let code = encode(q);
    let mixed = channel
        .patterns()
        .iter()
        .fold(Matrix4::zeros(), |acc, pat| {
            acc + pure_density(&apply_flip_pattern(&code, pat)).scale(pat.weight)
        });
    let parity = parity_check(&mixed);
    let accepted = parity
        .accepted
        .ok_or_else(|| Error::Domain("parity check never accepts".into()))?;
    Ok(CodedTransmission {
        accept_probability: parity.accept_probability,
        output: decode(&accepted)?,
    })
}

/// Error `1 - F` of the decoded qubit for one input state.
pub fn coded_error_for(q: &PureQubit, channel: &BitFlipChannel) -> Result<f64> {
    let t = transmit_coded(q, channel)?;
    Ok(q.infidelity(&t.output))
}

/// Error of sending the bare qubit through one use of the channel.
pub fn direct_error_for(q: &PureQubit, channel: &BitFlipChannel) -> f64 {
    q.infidelity(&channel.apply(&q.density()))
}

/// Average error after successful decoding, computed by exact enumeration
/// of flip patterns over the nodes of `mode`.
pub fn coded_error_rate(eta: f64, mode: AverageMode) -> Result<f64> {
    let channel = BitFlipChannel::new(eta)?;
    mode.nodes()
        .iter()
        .map(|(q, w)| coded_error_for(q, &channel).map(|e| w * e))
        .sum()
}

/// Average error of direct transmission, by the same enumeration.
pub fn direct_error_rate(eta: f64, mode: AverageMode) -> Result<f64> {
    let channel = BitFlipChannel::new(eta)?;
    Ok(mode
        .nodes()
        .iter()
        .map(|(q, w)| w * direct_error_for(q, &channel))
        .sum())
}
