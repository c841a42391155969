//! Multi-pair emissions of the two down-conversion sources.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{check_range, Result};
use crate::fock::{FockState, ModeLabel, ModeRegistry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EmissionKind {
    /// One pair in beams 0/1 and one pair in beams 2/3.
    TwoPair,
    /// One pair in 0/1 and two pairs in 2/3.
    ThreePairL,
    /// Two pairs in 0/1 and one pair in 2/3.
    ThreePairR,
}

impl EmissionKind {
    pub const ALL: [EmissionKind; 3] = [
        EmissionKind::TwoPair,
        EmissionKind::ThreePairL,
        EmissionKind::ThreePairR,
    ];

    /// Pairs emitted into (beams 0/1, beams 2/3).
    pub fn pair_counts(self) -> (u32, u32) {
        match self {
            EmissionKind::TwoPair => (1, 1),
            EmissionKind::ThreePairL => (1, 2),
            EmissionKind::ThreePairR => (2, 1),
        }
    }

    /// Per-trial emission probability for single-pair probability `p`.
    /// Three-pair events with every pair in one source never fire all four
    /// coincidence channels and are left out.
    pub fn weight(self, p: f64) -> f64 {
        match self {
            EmissionKind::TwoPair => p * p,
            EmissionKind::ThreePairL | EmissionKind::ThreePairR => 0.75 * p * p * p,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SourceEmission {
    pub kind: EmissionKind,
    pub probability: f64,
    pub state: FockState,
}

impl SourceEmission {
    pub fn new(registry: &Arc<ModeRegistry>, kind: EmissionKind, p: f64) -> Result<Self> {
        check_range("p", p, (0.0..=1.0).contains(&p), "[0, 1]")?;
        let (left, right) = kind.pair_counts();
        let mut state = FockState::vacuum(registry);
        for _ in 0..left {
            state = state.apply_creation_polynomial(&pair_polynomial("0", "1"))?;
        }
        for _ in 0..right {
            state = state.apply_creation_polynomial(&pair_polynomial("2", "3"))?;
        }
        Ok(SourceEmission {
            kind,
            probability: kind.weight(p),
            state: state.normalize()?,
        })
    }
}

/// `a†_H a†_H + a†_V a†_V` on two beams; one application on vacuum gives
/// `|Φ+>` up to normalization.
pub fn pair_polynomial(a: &str, b: &str) -> Vec<(Complex64, Vec<ModeLabel>)> {
    let one = Complex64::new(1.0, 0.0);
    vec![
        (one, vec![ModeLabel::h(a), ModeLabel::h(b)]),
        (one, vec![ModeLabel::v(a), ModeLabel::v(b)]),
    ]
}
