//! Averages of state-dependent functionals over the Bloch sphere.
//!
//! The measure is Haar, `sin γ dγ dφ / 4π`. The quadrature route is
//! Gauss–Legendre in `cos γ` times a uniform grid in `φ`; it is exact for
//! functionals that are low-degree polynomials in the state amplitudes,
//! which covers every fidelity in this crate. Halton sampling is kept as an
//! independent check and reports a standard error.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use super::PureQubit;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BlochAverage {
    Quadrature { polar: usize, azimuth: usize },
    Halton { samples: usize },
}

impl Default for BlochAverage {
    fn default() -> Self {
        BlochAverage::Quadrature {
            polar: 6,
            azimuth: 12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// `None` for quadrature, which is exact for the functionals it is used on.
    pub std_error: Option<f64>,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Golub–Welsch).
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "need at least one node");
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        jacobi[(k, k - 1)] = b;
        jacobi[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut nodes: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], 2.0 * v0 * v0)
        })
        .collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    nodes
}

/// Product-rule nodes with Haar weights summing to one.
pub fn quadrature_nodes(polar: usize, azimuth: usize) -> Vec<(PureQubit, f64)> {
    let mut out = Vec::with_capacity(polar * azimuth);
    for (u, w) in gauss_legendre(polar) {
        let gamma = u.clamp(-1.0, 1.0).acos();
        for k in 0..azimuth {
            let phi = 2.0 * PI * k as f64 / azimuth as f64;
            out.push((PureQubit::new_unchecked(gamma, phi), 0.5 * w / azimuth as f64));
        }
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

/// `i`-th point of the 2-3 Halton sequence mapped to the sphere (uniform in
/// `cos γ` and `φ`).
pub fn halton_point(i: u64) -> PureQubit {
    let u = 2.0 * radical_inverse(i + 1, 2) - 1.0;
    let phi = 2.0 * PI * radical_inverse(i + 1, 3);
    PureQubit::new_unchecked(u.clamp(-1.0, 1.0).acos(), phi)
}

pub fn average_over_bloch<F>(f: F, method: BlochAverage) -> Estimate
where
    F: Fn(&PureQubit) -> f64,
{
    match method {
        BlochAverage::Quadrature { polar, azimuth } => Estimate {
            value: quadrature_nodes(polar, azimuth)
                .iter()
                .map(|(q, w)| w * f(q))
                .sum(),
            std_error: None,
        },
        BlochAverage::Halton { samples } => {
            assert!(samples >= 2, "need at least two samples");
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for i in 0..samples as u64 {
                let x = f(&halton_point(i));
                sum += x;
                sum_sq += x * x;
            }
            let n = samples as f64;
            let mean = sum / n;
            let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
            Estimate {
                value: mean,
                std_error: Some((var / n).sqrt()),
            }
        }
    }
}
