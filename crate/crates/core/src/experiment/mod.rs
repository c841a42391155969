//! Linear-optical realization with down-conversion sources and threshold
//! detectors.

pub mod circuit;
pub mod detector;
pub mod exact;
pub mod flip_box;
pub mod monte_carlo;
pub mod source;
pub mod three_pair;

#[cfg(test)]
mod properties;

pub use circuit::{build_circuit, ChannelAction, Circuit, CountDistribution, Element, FlipConfig, Stage, Step};
pub use detector::{
    classify_event, ClickMode, Detector, DetectorModel, Event, EventProbabilities, EventTally,
    MultifoldPolicy, Tally,
};
pub use exact::{run_exact, two_pair_conditional_error, two_pair_events, Settings, BOX_SETTINGS};
pub use flip_box::{apply_flip_box, FlipBoxParams};
pub use monte_carlo::{run_monte_carlo, MonteCarlo};
pub use source::{EmissionKind, SourceEmission};
pub use three_pair::{three_pair_c4_probability, ThreePairC4, ThreePairInput};
