//! Randomized invariant checks over every layer of the simulator.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::experiment::{
    apply_flip_box, build_circuit, ClickMode, DetectorModel, EventTally, FlipBoxParams, MonteCarlo,
    MultifoldPolicy,
};
use crate::fock::{Beam, FockState, ModeLabel, ModeRegistry, ModeUnitary};
use crate::protocol::{decode, decode_branches, parity_check, AverageMode, BitFlipChannel, PureQubit};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Largest deviation seen, or a failure description.
    pub detail: String,
}

impl CheckResult {
    fn from_deviation(name: &'static str, cases: usize, worst: f64, tol: f64) -> Self {
        CheckResult {
            name,
            passed: worst <= tol,
            cases,
            detail: format!("max deviation {worst:.2e} (tolerance {tol:.0e})"),
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ModeUnitary {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    ModeUnitary::new(q).expect("QR factor is unitary")
}

fn random_state(registry: &std::sync::Arc<ModeRegistry>, photons: usize, terms: usize, rng: &mut ChaCha8Rng) -> FockState {
    let modes = registry.modes().to_vec();
    let mut out = FockState::empty(registry);
    for _ in 0..terms {
        let mut t = FockState::vacuum(registry).scale(gaussian(rng));
        for _ in 0..photons {
            t = t.create(&modes[rng.random_range(0..modes.len())]).expect("registered mode");
        }
        out = out.add(&t).expect("same registry");
    }
    out.normalize().expect("nonzero random state")
}

fn random_qubit(rng: &mut ChaCha8Rng) -> PureQubit {
    let u: f64 = rng.random_range(-1.0..=1.0);
    PureQubit::new(u.acos(), rng.random_range(0.0..std::f64::consts::TAU)).expect("valid angles")
}

fn unitarity(cases: usize, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for k in 0..cases {
        let u = random_unitary(2 + k % 5, rng);
        worst = worst.max(u.deviation_from_unitary());
        let eps = rng.random_range(0.0..2.0);
        let theta = if rng.random::<bool>() { FRAC_PI_2 } else { -FRAC_PI_2 };
        let b = FlipBoxParams::new(eps, theta, true).expect("valid box");
        worst = worst.max(b.matrix().deviation_from_unitary());
        worst = worst.max(ModeUnitary::half_wave_plate(rng.random_range(-3.0..3.0)).deviation_from_unitary());
    }
    CheckResult::from_deviation("unitarity", cases, worst, 1e-12)
}

fn photon_conservation(cases: usize, rng: &mut ChaCha8Rng) -> CheckResult {
    let registry = ModeRegistry::from_beams(["a", "b", "c"]).expect("distinct beams");
    let modes = registry.modes().to_vec();
    let mut worst: f64 = 0.0;
    for k in 0..cases {
        let photons = 1 + k % 4;
        let s = random_state(&registry, photons, 3, rng);
        let n = 2 + rng.random_range(0..=modes.len() - 2);
        let mut picked = modes.clone();
        for i in (1..picked.len()).rev() {
            picked.swap(i, rng.random_range(0..=i));
        }
        picked.truncate(n);
        let u = random_unitary(n, rng);
        let out = s.apply_mode_unitary(&u, &picked).expect("valid modes");
        worst = worst.max((out.norm_sqr() - 1.0).abs());
        let dist = out.photon_number_distribution();
        worst = worst.max((dist.get(&(photons as u32)).copied().unwrap_or(0.0) - 1.0).abs());
        let pbs = s.apply_pbs(&Beam::new("a"), &Beam::new("b"), &Beam::new("b"), &Beam::new("a"));
        if let Ok(p) = pbs {
            worst = worst.max((p.norm_sqr() - 1.0).abs());
        }
        let back = out.apply_mode_unitary(&u.adjoint(), &picked).expect("valid modes");
        worst = worst.max(back.max_amplitude_diff(&s));
    }
    CheckResult::from_deviation("photon-number conservation", cases, worst, 1e-11)
}

fn projector_completeness(cases: usize, rng: &mut ChaCha8Rng) -> CheckResult {
    let registry = ModeRegistry::from_beams(["a", "b"]).expect("distinct beams");
    let mut worst: f64 = 0.0;
    for k in 0..cases {
        let photons = 1 + k % 4;
        let s = random_state(&registry, photons, 4, rng);
        let beam = Beam::new("a");
        let total: f64 = (0..=photons as u32)
            .map(|n| s.project_photon_count(&beam, n).expect("registered").1)
            .sum();
        worst = worst.max((total - 1.0).abs());
        let single = s.project_photon_count(&beam, 1).expect("registered").1;
        let basis_total: f64 = s
            .measure_basis(&beam, &crate::fock::BasisPair::diagonal())
            .expect("orthonormal")
            .iter()
            .map(|b| b.probability)
            .sum();
        worst = worst.max((basis_total - single).abs());

        let v = nalgebra::Vector4::from_fn(|_, _| gaussian(rng));
        let rho = (v * v.adjoint()).unscale(v.norm_squared());
        let branches = parity_check(&rho);
        worst = worst.max((branches.accept_probability + branches.reject_probability - 1.0).abs());
    }
    CheckResult::from_deviation("projector completeness", cases, worst, 1e-12)
}

fn random_tally(rng: &mut ChaCha8Rng) -> EventTally {
    let n1 = rng.random_range(0..1_000_000);
    let n4 = rng.random_range(0..1_000_000);
    let rejected = rng.random_range(0..1_000_000);
    EventTally {
        n1,
        n4,
        rejected,
        three_fold: rejected / 3,
        trials: n1 + n4 + rejected,
    }
}

fn tally_associativity(cases: usize, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut failures = 0;
    for _ in 0..cases {
        let (a, b, c) = (random_tally(rng), random_tally(rng), random_tally(rng));
        if a.merge(&b).merge(&c) != a.merge(&b.merge(&c)) || a.merge(&b) != b.merge(&a) {
            failures += 1;
        }
    }
    // sharded sampling must reproduce the single-shard tally
    let det = DetectorModel::new(0.7, ClickMode::Exact, MultifoldPolicy::DiscardFiveFold).expect("valid");
    let boxes = [FlipBoxParams::new(0.2, FRAC_PI_2, true).expect("valid"); 2];
    let circuits: Vec<_> = AverageMode::FourState
        .nodes()
        .into_iter()
        .map(|(q, w)| (build_circuit(q, boxes, det).expect("valid circuit"), w))
        .collect();
    let mc = MonteCarlo::new(&circuits, 0.3, true).expect("valid sampler");
    let trials = 200_003;
    let one = mc.run(trials, 42, 1).expect("valid run");
    for shards in [2, 3, 7] {
        if mc.run(trials, 42, shards).expect("valid run") != one {
            failures += 1;
        }
    }
    CheckResult {
        name: "tally-merge associativity",
        passed: failures == 0,
        cases: cases + 3,
        detail: format!("{failures} failures"),
    }
}

fn decode_equivalence(cases: usize, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        // random mixed state supported on span{|00>, |11>}
        let mut rho = Matrix4::<Complex64>::zeros();
        for _ in 0..3 {
            let (a, b) = (gaussian(rng), gaussian(rng));
            let mut v = nalgebra::Vector4::zeros();
            v[0] = a;
            v[3] = b;
            rho += v * v.adjoint();
        }
        let tr = rho.trace().re;
        let out = decode(&rho).expect("even parity");
        let direct = nalgebra::Matrix2::new(rho[(0, 0)], rho[(0, 3)], rho[(3, 0)], rho[(3, 3)]).unscale(tr);
        worst = worst.max((out - direct).norm());
        for b in decode_branches(&rho).expect("even parity") {
            worst = worst.max((b.probability - 0.5 * tr).abs());
            if let Some(s) = b.state {
                worst = worst.max((s - direct).norm());
            }
        }
    }
    CheckResult::from_deviation("decode-branch equivalence", cases, worst, 1e-12)
}

fn channel_law(cases: usize, rng: &mut ChaCha8Rng) -> CheckResult {
    let registry = ModeRegistry::from_beams(["a"]).expect("one beam");
    let beam = Beam::new("a");
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let q = random_qubit(rng);
        let eps = rng.random_range(0.0..0.99);
        let s = FockState::vacuum(&registry)
            .create(&ModeLabel::h("a"))
            .expect("registered")
            .scale(q.alpha())
            .add(&FockState::vacuum(&registry).create(&ModeLabel::v("a")).expect("registered").scale(q.beta()))
            .expect("same registry");
        let mut rho = nalgebra::Matrix2::<Complex64>::zeros();
        for theta in [FRAC_PI_2, -FRAC_PI_2] {
            let out = apply_flip_box(&s, &beam, &FlipBoxParams::new(eps, theta, true).expect("valid"))
                .expect("registered beam");
            let h = out.amplitude(&out.occupation(&[(ModeLabel::h("a"), 1)]).expect("registered"));
            let v = out.amplitude(&out.occupation(&[(ModeLabel::v("a"), 1)]).expect("registered"));
            let amp = nalgebra::Vector2::new(h, v);
            rho += (amp * amp.adjoint()).scale(0.5);
        }
        let channel = BitFlipChannel::new(eps / (1.0 + eps)).expect("valid rate");
        worst = worst.max((rho - channel.apply(&q.density())).norm());
    }
    CheckResult::from_deviation("flip-box channel law", cases, worst, 1e-12)
}

/// Runs every check with `cases` random instances each.
pub fn run_all(cases: usize, seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        unitarity(cases, &mut rng),
        photon_conservation(cases, &mut rng),
        projector_completeness(cases, &mut rng),
        tally_associativity(cases, &mut rng),
        decode_equivalence(cases, &mut rng),
        channel_law(cases, &mut rng),
    ]
}

/// [`run_all`] plus wall-clock seconds.
pub fn run_timed(cases: usize, seed: u64) -> (Vec<CheckResult>, f64) {
    let start = Instant::now();
    let results = run_all(cases, seed);
    (results, start.elapsed().as_secs_f64())
}
