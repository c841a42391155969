//! Threshold detectors, coincidence classification and event tallies.

use std::fmt;
use std::ops::Add;

use crate::error::{check_range, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Detector {
    D0,
    D1,
    D2,
    D3,
    D4,
}

impl Detector {
    pub const ALL: [Detector; 5] = [
        Detector::D0,
        Detector::D1,
        Detector::D2,
        Detector::D3,
        Detector::D4,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D{}", self.index())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClickMode {
    /// `1 - (1-ξ)^n`.
    Exact,
    /// The linear overestimate `nξ`. Used as a weight in exact
    /// enumeration; Monte Carlo clamps it to 1.
    PaperBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MultifoldPolicy {
    FiveFoldAsC4,
    DiscardFiveFold,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorModel {
    efficiency: f64,
    pub click_mode: ClickMode,
    pub multifold: MultifoldPolicy,
}

impl DetectorModel {
    pub fn new(efficiency: f64, click_mode: ClickMode, multifold: MultifoldPolicy) -> Result<Self> {
        check_range(
            "xi",
            efficiency,
            efficiency > 0.0 && efficiency <= 1.0,
            "(0, 1]",
        )?;
        Ok(DetectorModel {
            efficiency,
            click_mode,
            multifold,
        })
    }

    pub fn ideal() -> Self {
        DetectorModel {
            efficiency: 1.0,
            click_mode: ClickMode::Exact,
            multifold: MultifoldPolicy::FiveFoldAsC4,
        }
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn with_efficiency(&self, efficiency: f64) -> Result<Self> {
        Self::new(efficiency, self.click_mode, self.multifold)
    }

    /// Click weight for `n` incident photons; a probability in `Exact` mode.
    pub fn click_weight(&self, n: u8) -> f64 {
        match self.click_mode {
            ClickMode::Exact => 1.0 - (1.0 - self.efficiency).powi(i32::from(n)),
            ClickMode::PaperBound => f64::from(n) * self.efficiency,
        }
    }

    pub fn click_probability(&self, n: u8) -> f64 {
        self.click_weight(n).min(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event {
    C1,
    C4,
    Reject,
}

/// Maps a click pattern (indexed by [`Detector::index`]) to an event. `D0`,
/// `D2`, `D3` must all click; then `D1` alone is `C1`, `D4` alone is `C4` and
/// both follow the multifold policy.
pub fn classify_event(clicks: &[bool; 5], policy: MultifoldPolicy) -> Event {
    let core = clicks[0] && clicks[2] && clicks[3];
    match (core, clicks[1], clicks[4]) {
        (true, true, false) => Event::C1,
        (true, false, true) => Event::C4,
        (true, true, true) => match policy {
            MultifoldPolicy::FiveFoldAsC4 => Event::C4,
            MultifoldPolicy::DiscardFiveFold => Event::Reject,
        },
        _ => Event::Reject,
    }
}

/// Exactly three of the four coincidence channels (`D0`, `D2`, `D3`, and
/// `D1` or `D4`) fired.
pub fn is_three_fold(clicks: &[bool; 5]) -> bool {
    let channels = [clicks[0], clicks[2], clicks[3], clicks[1] || clicks[4]];
    channels.iter().filter(|&&c| c).count() == 3
}

/// Event counts (Monte Carlo) or probabilities (exact enumeration).
/// `three_fold` is a sub-counter of `rejected`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tally<T> {
    pub n1: T,
    pub n4: T,
    pub rejected: T,
    pub three_fold: T,
    pub trials: T,
}

pub type EventTally = Tally<u64>;
pub type EventProbabilities = Tally<f64>;

impl<T: Add<Output = T> + Copy> Tally<T> {
    pub fn merge(&self, other: &Self) -> Self {
        Tally {
            n1: self.n1 + other.n1,
            n4: self.n4 + other.n4,
            rejected: self.rejected + other.rejected,
            three_fold: self.three_fold + other.three_fold,
            trials: self.trials + other.trials,
        }
    }
}

impl<T: Add<Output = T> + Copy> Add for Tally<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        self.merge(&rhs)
    }
}

impl EventTally {
    pub fn record(&mut self, event: Event, three_fold: bool) {
        self.trials += 1;
        match event {
            Event::C1 => self.n1 += 1,
            Event::C4 => self.n4 += 1,
            Event::Reject => {
                self.rejected += 1;
                if three_fold {
                    self.three_fold += 1;
                }
            }
        }
    }

    pub fn accepted(&self) -> u64 {
        self.n1 + self.n4
    }

    /// `N4/(N1+N4)`, or `None` if nothing was accepted.
    pub fn conditional_error(&self) -> Option<f64> {
        let acc = self.accepted();
        (acc > 0).then(|| self.n4 as f64 / acc as f64)
    }

    /// Binomial standard error of [`conditional_error`](Self::conditional_error).
    pub fn conditional_error_std(&self) -> Option<f64> {
        let e = self.conditional_error()?;
        Some((e * (1.0 - e) / self.accepted() as f64).sqrt())
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.accepted() as f64 / self.trials as f64
        }
    }
}

impl EventProbabilities {
    pub fn accepted(&self) -> f64 {
        self.n1 + self.n4
    }

    pub fn conditional_error(&self) -> Option<f64> {
        let acc = self.accepted();
        (acc > 0.0).then(|| self.n4 / acc)
    }

    pub fn scaled(&self, w: f64) -> Self {
        Tally {
            n1: self.n1 * w,
            n4: self.n4 * w,
            rejected: self.rejected * w,
            three_fold: self.three_fold * w,
            trials: self.trials * w,
        }
    }
}

/// Event probabilities for one pattern of photon counts at the five
/// detectors.
pub fn events_for_counts(counts: &[u8; 5], det: &DetectorModel) -> EventProbabilities {
    let w = counts.map(|n| det.click_weight(n));
    let core = w[0] * w[2] * w[3];
    let n1 = core * w[1] * (1.0 - w[4]).max(0.0);
    let n4 = match det.multifold {
        MultifoldPolicy::FiveFoldAsC4 => core * w[4],
        MultifoldPolicy::DiscardFiveFold => core * w[4] * (1.0 - w[1]).max(0.0),
    };
    // three-fold bookkeeping uses proper probabilities
    let p = counts.map(|n| det.click_probability(n));
    let mut three_fold = 0.0;
    for mask in 0u32..32 {
        let clicks: [bool; 5] = std::array::from_fn(|d| mask & (1 << d) != 0);
        if is_three_fold(&clicks) {
            three_fold += (0..5)
                .map(|d| if clicks[d] { p[d] } else { 1.0 - p[d] })
                .product::<f64>();
        }
    }
    Tally {
        n1,
        n4,
        rejected: 1.0 - n1 - n4,
        three_fold,
        trials: 1.0,
    }
}
