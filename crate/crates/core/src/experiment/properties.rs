use std::f64::consts::FRAC_PI_2;

use nalgebra::Matrix2;
use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::fock::{Beam, FockState, ModeLabel};
use crate::protocol::{coded_error_rate, AverageMode, BitFlipChannel, PureQubit};

fn qubit() -> impl Strategy<Value = PureQubit> {
    (-1.0f64..=1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(u, phi)| PureQubit::new(u.acos(), phi).unwrap())
}

fn tally() -> impl Strategy<Value = EventTally> {
    (0u64..1 << 40, 0u64..1 << 40, 0u64..1 << 40).prop_map(|(n1, n4, rejected)| Tally {
        n1,
        n4,
        rejected,
        three_fold: rejected / 2,
        trials: n1 + n4 + rejected,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn averaged_box_is_the_bit_flip_channel(q in qubit(), eps in 0.0f64..0.99) {
        let reg = crate::fock::ModeRegistry::from_beams(["a"]).unwrap();
        let beam = Beam::new("a");
        let h = FockState::vacuum(&reg).create(&ModeLabel::h("a")).unwrap();
        let v = FockState::vacuum(&reg).create(&ModeLabel::v("a")).unwrap();
        let s = h.scale(q.alpha()).add(&v.scale(q.beta())).unwrap();
        let mut rho = Matrix2::<Complex64>::zeros();
        for theta in [FRAC_PI_2, -FRAC_PI_2] {
            let out = apply_flip_box(&s, &beam, &FlipBoxParams::new(eps, theta, true).unwrap()).unwrap();
            let amp = nalgebra::Vector2::new(
                out.amplitude(&out.occupation(&[(ModeLabel::h("a"), 1)]).unwrap()),
                out.amplitude(&out.occupation(&[(ModeLabel::v("a"), 1)]).unwrap()),
            );
            rho += (amp * amp.adjoint()).scale(0.5);
        }
        let channel = BitFlipChannel::new(eps / (1.0 + eps)).unwrap();
        prop_assert!((rho - channel.apply(&q.density())).norm() < 1e-12);
    }

    #[test]
    fn single_flip_never_leaves_one_photon_for_the_parity_port(q in qubit(), second in any::<bool>()) {
        let boxes = [FlipBoxParams::new(0.0, FRAC_PI_2, true).unwrap(); 2];
        let c = build_circuit(q, boxes, DetectorModel::ideal()).unwrap();
        let e = SourceEmission::new(c.registry(), EmissionKind::TwoPair, 1.0).unwrap();
        let config = if second { FlipConfig::Second } else { FlipConfig::First };
        let s = c.propagate_to_measurement(&e.state, ChannelAction::Flips(config)).unwrap();
        let (code, _) = s.project_photon_count(&Beam::new("2'"), 1).unwrap();
        let (_, p) = code.project_photon_count(&Beam::new("3''"), 1).unwrap();
        prop_assert_eq!(p, 0.0);
    }

    #[test]
    fn merge_is_associative_and_commutative(a in tally(), b in tally(), c in tally()) {
        prop_assert_eq!(a.merge(&b).merge(&c), a.merge(&b.merge(&c)));
        prop_assert_eq!(a.merge(&b), b.merge(&a));
        let m = a.merge(&b);
        prop_assert_eq!(m.n1 + m.n4 + m.rejected, m.trials);
    }

    #[test]
    fn events_partition_branch_weight(counts in prop::array::uniform5(0u8..4), xi in 0.01f64..=1.0) {
        let det = DetectorModel::new(xi, ClickMode::Exact, MultifoldPolicy::DiscardFiveFold).unwrap();
        let e = detector::events_for_counts(&counts, &det);
        prop_assert!(e.n1 >= 0.0 && e.n4 >= 0.0 && e.rejected >= -1e-15);
        prop_assert!(e.three_fold <= e.rejected + 1e-15);
        prop_assert!((e.n1 + e.n4 + e.rejected - 1.0).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn post_selected_error_is_the_protocol_error(eps in 0.0f64..0.99) {
        let eta = eps / (1.0 + eps);
        for mode in [AverageMode::FourState, AverageMode::BlochHaar] {
            let optics = two_pair_conditional_error(eps, mode, DetectorModel::ideal()).unwrap();
            prop_assert!((optics - coded_error_rate(eta, mode).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn accepted_weight_scales_as_fourth_power(eps in 0.0f64..0.99, xi in 0.05f64..1.0) {
        let at = |xi| {
            let det = DetectorModel::new(xi, ClickMode::Exact, MultifoldPolicy::FiveFoldAsC4).unwrap();
            two_pair_events(eps, AverageMode::FourState, det).unwrap()
        };
        let (full, part) = (at(1.0), at(xi));
        let exponent = (part.accepted() / full.accepted()).ln() / xi.ln();
        prop_assert!((exponent - 4.0).abs() < 1e-9);
        prop_assert!((part.n4 / full.n4.max(1e-300) - xi.powi(4)).abs() < 1e-12 || full.n4 == 0.0);
    }
}
