//! Seeded sampling of emissions, box settings and detector clicks.
//!
//! Trials are cut into fixed-size blocks and block `b` draws from ChaCha8
//! stream `b` of the seed, so the merged tally does not depend on how blocks
//! are spread over shards or threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_range, Error, Result};

use super::circuit::{ChannelAction, Circuit};
use super::detector::{classify_event, is_three_fold, DetectorModel, EventTally};
use super::exact::BOX_SETTINGS;
use super::source::{EmissionKind, SourceEmission};

pub const BLOCK_TRIALS: u64 = 1 << 16;

/// Largest photon number a detector port can see (three pairs).
const MAX_PORT_PHOTONS: usize = 6;

#[derive(Clone, Debug)]
struct CountTable {
    patterns: Vec<[u8; 5]>,
    cdf: Vec<f64>,
}

impl CountTable {
    fn sample(&self, u: f64) -> [u8; 5] {
        let x = u * self.cdf.last().copied().unwrap_or(0.0);
        let i = self.cdf.partition_point(|&c| c <= x);
        self.patterns[i.min(self.patterns.len() - 1)]
    }
}

#[derive(Clone, Debug)]
pub struct MonteCarlo {
    kinds: Vec<EmissionKind>,
    /// Cumulative emission probabilities aligned with `kinds`.
    emission_cdf: Vec<f64>,
    node_cdf: Vec<f64>,
    /// `tables[node][kind][setting]`.
    tables: Vec<Vec<[CountTable; 4]>>,
    click: [f64; MAX_PORT_PHOTONS + 1],
    detector: DetectorModel,
}

impl MonteCarlo {
    /// `circuits` are the input-state nodes with sampling weights; they must
    /// share one detector model.
    pub fn new(circuits: &[(Circuit, f64)], p: f64, three_pair: bool) -> Result<Self> {
        check_range("p", p, (0.0..=1.0).contains(&p), "[0, 1]")?;
        let first = circuits
            .first()
            .ok_or_else(|| Error::Domain("no input states to sample".into()))?;
        let detector = *first.0.detector();
        if circuits.iter().any(|(c, _)| *c.detector() != detector) {
            return Err(Error::Domain("circuits disagree on the detector model".into()));
        }
        let kinds: Vec<EmissionKind> = if three_pair {
            EmissionKind::ALL.to_vec()
        } else {
            vec![EmissionKind::TwoPair]
        };
        let mut emission_cdf = Vec::with_capacity(kinds.len());
        let mut acc = 0.0;
        for k in &kinds {
            acc += k.weight(p);
            emission_cdf.push(acc);
        }
        if acc > 1.0 + 1e-12 {
            return Err(Error::OutOfRange {
                name: "p",
                value: p,
                range: "values whose emission probabilities sum to at most 1",
            });
        }

        let mut node_cdf = Vec::with_capacity(circuits.len());
        let mut acc = 0.0;
        for (_, w) in circuits {
            check_range("node weight", *w, *w >= 0.0, "[0, inf)")?;
            acc += w;
            node_cdf.push(acc);
        }
        if acc <= 0.0 {
            return Err(Error::Domain("node weights sum to zero".into()));
        }
        node_cdf.iter_mut().for_each(|c| *c /= acc);

        let mut tables = Vec::with_capacity(circuits.len());
        for (circuit, _) in circuits {
            let mut per_kind = Vec::with_capacity(kinds.len());
            for &kind in &kinds {
                let emission = SourceEmission::new(circuit.registry(), kind, p)?;
                let mut per_setting = Vec::with_capacity(4);
                for (theta, theta1) in BOX_SETTINGS {
                    let out = circuit.propagate(&emission.state, ChannelAction::Boxes { theta, theta1 })?;
                    let dist = circuit.port_counts(&out);
                    let mut patterns = Vec::with_capacity(dist.len());
                    let mut cdf = Vec::with_capacity(dist.len());
                    let mut c = 0.0;
                    for (pattern, prob) in dist {
                        c += prob;
                        patterns.push(pattern);
                        cdf.push(c);
                    }
                    per_setting.push(CountTable { patterns, cdf });
                }
                per_kind.push(per_setting.try_into().expect("four settings"));
            }
            tables.push(per_kind);
        }
        let click = std::array::from_fn(|n| detector.click_probability(n as u8));
        Ok(MonteCarlo {
            kinds,
            emission_cdf,
            node_cdf,
            tables,
            click,
            detector,
        })
    }

    pub fn detector(&self) -> &DetectorModel {
        &self.detector
    }

    /// Runs `trials` trials split over `shards` workers.
    pub fn run(&self, trials: u64, seed: u64, shards: usize) -> Result<EventTally> {
        if trials == 0 {
            return Err(Error::OutOfRange {
                name: "trials",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        if shards == 0 {
            return Err(Error::OutOfRange {
                name: "shards",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        let blocks = trials.div_ceil(BLOCK_TRIALS);
        let shards = shards as u64;
        Ok((0..shards)
            .into_par_iter()
            .map(|s| {
                (s..blocks)
                    .step_by(shards as usize)
                    .map(|b| self.run_block(seed, b, trials))
                    .fold(EventTally::default(), |acc, t| acc.merge(&t))
            })
            .reduce(EventTally::default, |a, b| a.merge(&b)))
    }

    /// Trials of block `b` out of a run of `total` trials.
    pub fn run_block(&self, seed: u64, b: u64, total: u64) -> EventTally {
        let n = BLOCK_TRIALS.min(total.saturating_sub(b * BLOCK_TRIALS));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b);
        let mut tally = EventTally::default();
        for _ in 0..n {
            let u: f64 = rng.random();
            let Some(k) = self.emission_cdf.iter().position(|&c| u < c) else {
                tally.record(super::detector::Event::Reject, false);
                continue;
            };
            let node = if self.node_cdf.len() == 1 {
                0
            } else {
                let v: f64 = rng.random();
                self.node_cdf.partition_point(|&c| c <= v).min(self.node_cdf.len() - 1)
            };
            let setting = rng.random_range(0..4usize);
            let counts = self.tables[node][k][setting].sample(rng.random());
            let clicks: [bool; 5] = std::array::from_fn(|d| {
                let n = counts[d] as usize;
                n > 0 && rng.random::<f64>() < self.click[n.min(MAX_PORT_PHOTONS)]
            });
            let event = classify_event(&clicks, self.detector.multifold);
            tally.record(event, is_three_fold(&clicks));
        }
        tally
    }

    pub fn kinds(&self) -> &[EmissionKind] {
        &self.kinds
    }
}

/// Single-input convenience wrapper with two-pair emission only.
pub fn run_monte_carlo(p: f64, circuit: &Circuit, trials: u64, seed: u64) -> Result<EventTally> {
    MonteCarlo::new(&[(circuit.clone(), 1.0)], p, false)?.run(trials, seed, 1)
}
