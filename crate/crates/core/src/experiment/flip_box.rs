//! The tunable bit-flip element placed on each code photon.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{check_range, Error, Result};
use crate::fock::{Beam, FockState, ModeLabel, ModeUnitary};

const SETTING_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlipBoxParams {
    epsilon: f64,
    theta: f64,
    deterministic: bool,
}

impl FlipBoxParams {
    /// With `deterministic` set, `theta` must be `±π/2`.
    pub fn new(epsilon: f64, theta: f64, deterministic: bool) -> Result<Self> {
        check_range("epsilon", epsilon, epsilon >= 0.0, "[0, inf)")?;
        check_range("theta", theta, theta.is_finite(), "a finite angle")?;
        if deterministic
            && (theta.abs() - FRAC_PI_2).abs() > SETTING_TOLERANCE
        {
            return Err(Error::Domain(format!(
                "flip-box phase {theta} is not one of ±π/2"
            )));
        }
        Ok(FlipBoxParams {
            epsilon,
            theta,
            deterministic,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.epsilon, theta, self.deterministic)
    }

    /// Flip probability `ε/(1+ε)` of the phase-averaged box.
    pub fn eta(&self) -> f64 {
        self.epsilon / (1.0 + self.epsilon)
    }

    /// Angle of the inner wave plate, `asin(√(ε/(1+ε)))`.
    pub fn plate_angle(&self) -> f64 {
        self.eta().sqrt().asin()
    }

    /// `H -> (H + √ε e^{iθ} V)/√(1+ε)`, `V -> (V - √ε e^{-iθ} H)/√(1+ε)`.
    pub fn matrix(&self) -> ModeUnitary {
        let n = (1.0 + self.epsilon).sqrt().recip();
        let s = self.epsilon.sqrt();
        let leak = Complex64::from_polar(s * n, self.theta);
        let c = Complex64::new(n, 0.0);
        // rows index output (H, V), columns input (H, V)
        ModeUnitary::two_by_two([[c, -leak.conj()], [leak, c]])
            .expect("flip-box matrix is unitary by construction")
    }
}

/// The two phase settings used for each box.
pub const BOX_PHASES: [f64; 2] = [FRAC_PI_2, -FRAC_PI_2];

/// Applies the box as phase `-θ` on V, the wave plate, then phase `+θ` on V.
pub fn apply_flip_box(state: &FockState, beam: &Beam, params: &FlipBoxParams) -> Result<FockState> {
    let modes = [
        ModeLabel::new(beam.clone(), crate::fock::Polarization::H),
        ModeLabel::new(beam.clone(), crate::fock::Polarization::V),
    ];
    let plate = ModeUnitary::half_wave_plate(params.plate_angle());
    state
        .apply_phase_shift_v(beam, -params.theta)?
        .apply_mode_unitary(&plate, &modes)?
        .apply_phase_shift_v(beam, params.theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ModeRegistry;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn realization_matches_matrix() {
        let reg = ModeRegistry::from_beams(["a"]).unwrap();
        let beam = Beam::new("a");
        let modes = [ModeLabel::h("a"), ModeLabel::v("a")];
        for theta in [FRAC_PI_2, -FRAC_PI_2, 0.3] {
            let p = FlipBoxParams::new(0.37, theta, false).unwrap();
            for ops in [vec![ModeLabel::h("a")], vec![ModeLabel::v("a")], vec![ModeLabel::h("a"), ModeLabel::v("a")]] {
                let mut s = FockState::vacuum(&reg);
                for m in &ops {
                    s = s.create(m).unwrap();
                }
                let s = s.normalize().unwrap();
                let via_plates = apply_flip_box(&s, &beam, &p).unwrap();
                let direct = s.apply_mode_unitary(&p.matrix(), &modes).unwrap();
                assert!(via_plates.max_amplitude_diff(&direct) < 1e-14);
            }
        }
    }

    #[test]
    fn zero_leak_is_identity() {
        let p = FlipBoxParams::new(0.0, FRAC_PI_2, true).unwrap();
        assert!(p.matrix().matrix().iter().zip(ModeUnitary::identity(2).matrix().iter()).all(|(a, b)| (a - b).norm() < 1e-15));
    }

    #[test]
    fn deterministic_flag_restricts_phase() {
        assert!(FlipBoxParams::new(0.1, 0.3, true).is_err());
        assert!(FlipBoxParams::new(0.1, -FRAC_PI_2, true).is_ok());
        assert!(FlipBoxParams::new(-0.1, FRAC_PI_2, true).is_err());
    }

    #[test]
    fn single_photon_image_and_phase_average() {
        // |u> = α|H> + β|V> maps to (|u> + √ε e^{iθ}(α|V> - e^{-2iθ}β|H>))/√(1+ε);
        // with e^{-2iθ} = -1 the leak term is √ε e^{iθ}|u_f>, so the θ = ±π/2
        // mixture is (|u><u| + ε|u_f><u_f|)/(1+ε).
        let eps = 0.25;
        let (alpha, beta) = (c(0.6, 0.0), c(0.0, 0.8));
        let mut rho = [[c(0.0, 0.0); 2]; 2];
        for theta in BOX_PHASES {
            let m = FlipBoxParams::new(eps, theta, true).unwrap().matrix();
            let m = m.matrix();
            let out = [
                m[(0, 0)] * alpha + m[(0, 1)] * beta,
                m[(1, 0)] * alpha + m[(1, 1)] * beta,
            ];
            let norm = (1.0 + eps).sqrt();
            let leak = Complex64::from_polar(eps.sqrt(), theta);
            let expected = [(alpha + leak * beta) / norm, (beta + leak * alpha) / norm];
            for k in 0..2 {
                assert!((out[k] - expected[k]).norm() < 1e-15);
            }
            for i in 0..2 {
                for j in 0..2 {
                    rho[i][j] += 0.5 * out[i] * out[j].conj();
                }
            }
        }
        let u = [alpha, beta];
        let uf = [beta, alpha];
        for i in 0..2 {
            for j in 0..2 {
                let expected = (u[i] * u[j].conj() + eps * uf[i] * uf[j].conj()) / (1.0 + eps);
                assert!((rho[i][j] - expected).norm() < 1e-15);
            }
        }
    }
}
