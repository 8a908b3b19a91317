#![allow(dead_code)]

use atomradio::{khz, AtomFieldParams, DensityMatrix};
use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::Rng;

/// Rabi frequencies in 2π·[1, 300] kHz, detunings in 2π·[−500, 500] kHz.
pub fn random_params<R: Rng>(rng: &mut R) -> AtomFieldParams {
    AtomFieldParams {
        omega_opt_rabi: khz(rng.random_range(1.0..300.0)),
        delta_opt: khz(rng.random_range(-500.0..500.0)),
        omega_mu_rabi: khz(rng.random_range(1.0..300.0)),
        delta_mu: khz(rng.random_range(-500.0..500.0)),
    }
}

/// `A·A† / Tr(A·A†)` for a random complex `A`.
pub fn random_density<R: Rng>(rng: &mut R) -> DensityMatrix {
    let a = Matrix3::from_fn(|_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = a * a.adjoint();
    let m = m / m.trace();
    let m = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::new(m).unwrap()
}

/// Random Hermitian (not necessarily positive) matrix.
pub fn random_hermitian<R: Rng>(rng: &mut R) -> Matrix3<Complex64> {
    let a = Matrix3::from_fn(|_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn max_abs(m: &Matrix3<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
