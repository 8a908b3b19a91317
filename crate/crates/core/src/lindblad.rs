//! Rotating-wave Hamiltonian and Lindblad dissipator of the three-level system.
//!
//! All frequencies and rates are angular (rad/s) with ħ = 1. The basis order is
//! `{|e⟩, |g₂⟩, |g₁⟩}`: the optical field couples `|g₂⟩ ↔ |e⟩`, the microwave
//! field couples `|g₁⟩ ↔ |g₂⟩`.

use nalgebra::{Matrix3, SMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{from_coords, to_coords, DensityMatrix, HermitianCoords, Level};
use crate::error::{Error, Result};
use crate::{hz, khz};

/// Natural linewidth of the Rb D₂ line, Hz.
pub const RB_D2_LINEWIDTH_HZ: f64 = 6.07e6;

/// Optical Rabi frequency of the default configuration, Hz. Chosen so that the
/// ground-state optical pumping (and with it the transduction response) runs
/// on a millisecond scale.
pub const DEFAULT_OPTICAL_RABI_HZ: f64 = 44.0e3;

/// Real generator acting on [`HermitianCoords`].
pub type Generator = SMatrix<f64, 9, 9>;

/// Vectorised (row-major, `vec(ρ)[3i + j] = ρ_ij`) complex superoperator.
pub type Superoperator = SMatrix<Complex64, 9, 9>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomFieldParams {
    /// Ω_opt, rad/s.
    pub omega_opt_rabi: f64,
    /// Δ_opt, rad/s.
    pub delta_opt: f64,
    /// Ω_μ, rad/s.
    pub omega_mu_rabi: f64,
    /// Δ_μ, rad/s.
    pub delta_mu: f64,
}

impl Default for AtomFieldParams {
    fn default() -> Self {
        AtomFieldParams {
            omega_opt_rabi: hz(DEFAULT_OPTICAL_RABI_HZ),
            delta_opt: 0.0,
            omega_mu_rabi: khz(74.0),
            delta_mu: 0.0,
        }
    }
}

impl AtomFieldParams {
    pub const ZERO: AtomFieldParams = AtomFieldParams {
        omega_opt_rabi: 0.0,
        delta_opt: 0.0,
        omega_mu_rabi: 0.0,
        delta_mu: 0.0,
    };

    pub fn with_microwave(self, omega_mu_rabi: f64, delta_mu: f64) -> Self {
        AtomFieldParams {
            omega_mu_rabi,
            delta_mu,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.omega_opt_rabi,
            self.delta_opt,
            self.omega_mu_rabi,
            self.delta_mu,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("field parameters must be finite".into()));
        }
        if self.omega_opt_rabi < 0.0 || self.omega_mu_rabi < 0.0 {
            return Err(Error::InvalidParameter(
                "Rabi frequencies must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceParams {
    /// Spontaneous decay `|e⟩ → |g₁⟩`, rad/s.
    pub gamma_e_g1: f64,
    /// Spontaneous decay `|e⟩ → |g₂⟩`, rad/s.
    pub gamma_e_g2: f64,
    /// Population exchange between the ground states, rad/s (split evenly
    /// between the two directions).
    pub gamma_ground_relax: f64,
    /// Pure dephasing of the `g₁–g₂` coherence, rad/s.
    pub gamma_mw_dephase: f64,
}

impl Default for DecoherenceParams {
    fn default() -> Self {
        let gamma = hz(RB_D2_LINEWIDTH_HZ);
        DecoherenceParams {
            gamma_e_g1: gamma / 2.0,
            gamma_e_g2: gamma / 2.0,
            gamma_ground_relax: hz(10.0),
            gamma_mw_dephase: hz(10.0),
        }
    }
}

impl DecoherenceParams {
    pub const ZERO: DecoherenceParams = DecoherenceParams {
        gamma_e_g1: 0.0,
        gamma_e_g2: 0.0,
        gamma_ground_relax: 0.0,
        gamma_mw_dephase: 0.0,
    };

    pub fn total(&self) -> f64 {
        self.gamma_e_g1 + self.gamma_e_g2 + self.gamma_ground_relax + self.gamma_mw_dephase
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.gamma_e_g1,
            self.gamma_e_g2,
            self.gamma_ground_relax,
            self.gamma_mw_dephase,
        ];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidParameter(
                "decoherence rates must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Fastest rate present; bounds the stable explicit step.
pub fn max_rate(p: &AtomFieldParams, d: &DecoherenceParams) -> f64 {
    [
        p.omega_opt_rabi,
        p.omega_mu_rabi,
        p.delta_opt.abs(),
        p.delta_mu.abs(),
        d.total(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// `H/ħ = ½ [[2Δ_opt, Ω_opt, 0], [Ω_opt, 0, Ω_μ], [0, Ω_μ, 2Δ_μ]]`.
pub fn build_hamiltonian(p: &AtomFieldParams) -> Matrix3<Complex64> {
    let c = |x: f64| Complex64::new(x, 0.0);
    Matrix3::new(
        c(p.delta_opt),
        c(0.5 * p.omega_opt_rabi),
        c(0.0),
        c(0.5 * p.omega_opt_rabi),
        c(0.0),
        c(0.5 * p.omega_mu_rabi),
        c(0.0),
        c(0.5 * p.omega_mu_rabi),
        c(p.delta_mu),
    )
}

/// A jump operator with its rate.
#[derive(Debug, Clone, Copy)]
pub struct JumpOperator {
    pub operator: Matrix3<Complex64>,
    pub rate: f64,
}

fn transition(to: Level, from: Level) -> Matrix3<Complex64> {
    let mut m = Matrix3::zeros();
    m[(to.index(), from.index())] = Complex64::new(1.0, 0.0);
    m
}

/// The five dissipation channels: two spontaneous decays, two directions of
/// ground-state exchange and microwave dephasing.
pub fn jump_operators(d: &DecoherenceParams) -> [JumpOperator; 5] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let dephase = Matrix3::from_diagonal(&nalgebra::Vector3::new(
        Complex64::new(0.0, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(-s, 0.0),
    ));
    [
        JumpOperator {
            operator: transition(Level::G1, Level::Excited),
            rate: d.gamma_e_g1,
        },
        JumpOperator {
            operator: transition(Level::G2, Level::Excited),
            rate: d.gamma_e_g2,
        },
        JumpOperator {
            operator: transition(Level::G1, Level::G2),
            rate: 0.5 * d.gamma_ground_relax,
        },
        JumpOperator {
            operator: transition(Level::G2, Level::G1),
            rate: 0.5 * d.gamma_ground_relax,
        },
        JumpOperator {
            operator: dephase,
            rate: d.gamma_mw_dephase,
        },
    ]
}

/// `dρ/dt = −i[H, ρ] + Σ_k γ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})` on a raw matrix.
pub fn liouvillian_matrix(
    rho: &Matrix3<Complex64>,
    p: &AtomFieldParams,
    d: &DecoherenceParams,
) -> Matrix3<Complex64> {
    let h = build_hamiltonian(p);
    let i = Complex64::new(0.0, 1.0);
    let mut out = (h * rho - rho * h) * (-i);
    for jump in jump_operators(d) {
        if jump.rate == 0.0 {
            continue;
        }
        let l = jump.operator;
        let ld = l.adjoint();
        let ldl = ld * l;
        let term = l * rho * ld - (ldl * rho + rho * ldl) * Complex64::new(0.5, 0.0);
        out += term * Complex64::new(jump.rate, 0.0);
    }
    out
}

pub fn liouvillian_apply(
    rho: &DensityMatrix,
    p: &AtomFieldParams,
    d: &DecoherenceParams,
) -> Matrix3<Complex64> {
    liouvillian_matrix(rho.matrix(), p, d)
}

/// Builds the 9×9 complex superoperator column by column from
/// [`liouvillian_matrix`] applied to the matrix units `|i⟩⟨j|`.
pub fn superoperator(p: &AtomFieldParams, d: &DecoherenceParams) -> Superoperator {
    let mut s = Superoperator::zeros();
    for col in 0..9 {
        let mut unit = Matrix3::zeros();
        unit[(col / 3, col % 3)] = Complex64::new(1.0, 0.0);
        let image = liouvillian_matrix(&unit, p, d);
        for row in 0..9 {
            s[(row, col)] = image[(row / 3, row % 3)];
        }
    }
    s
}

/// Real generator on [`HermitianCoords`]. Its first row (the trace
/// derivative) is exactly zero.
pub fn generator(p: &AtomFieldParams, d: &DecoherenceParams) -> Generator {
    let mut g = Generator::zeros();
    for col in 0..9 {
        let mut e = HermitianCoords::zeros();
        e[col] = 1.0;
        let image = to_coords(&liouvillian_matrix(&from_coords(&e), p, d));
        g.set_column(col, &image);
    }
    g.row_mut(0).fill(0.0);
    g
}

/// Affine decomposition of the generator in the four field parameters, so a
/// time-dependent generator can be assembled without re-deriving it.
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    dissipator: Generator,
    per_omega_opt: Generator,
    per_delta_opt: Generator,
    per_omega_mu: Generator,
    per_delta_mu: Generator,
}

impl GeneratorBasis {
    pub fn new(d: &DecoherenceParams) -> Self {
        let unit = |f: fn(&mut AtomFieldParams)| {
            let mut p = AtomFieldParams::ZERO;
            f(&mut p);
            generator(&p, &DecoherenceParams::ZERO)
        };
        GeneratorBasis {
            dissipator: generator(&AtomFieldParams::ZERO, d),
            per_omega_opt: unit(|p| p.omega_opt_rabi = 1.0),
            per_delta_opt: unit(|p| p.delta_opt = 1.0),
            per_omega_mu: unit(|p| p.omega_mu_rabi = 1.0),
            per_delta_mu: unit(|p| p.delta_mu = 1.0),
        }
    }

    pub fn generator(&self, p: &AtomFieldParams) -> Generator {
        let mut g = self.dissipator;
        g += self.per_omega_opt * p.omega_opt_rabi;
        g += self.per_delta_opt * p.delta_opt;
        g += self.per_omega_mu * p.omega_mu_rabi;
        g += self.per_delta_mu * p.delta_mu;
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TAU;

    fn zero_matrix_norm(m: &Matrix3<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn hamiltonian_fig3_entries() {
        let p = AtomFieldParams {
            omega_opt_rabi: TAU * 1e6,
            delta_opt: 0.0,
            omega_mu_rabi: TAU * 74e3,
            delta_mu: TAU * 95e3,
        };
        let h = build_hamiltonian(&p);
        let pi = std::f64::consts::PI;
        assert!((h[(0, 1)].re - pi * 1e6).abs() < 1e-6);
        assert!((h[(1, 2)].re - pi * 74e3).abs() < 1e-9);
        assert!((h[(2, 2)].re - TAU * 95e3).abs() < 1e-9);
        assert_eq!(h, h.adjoint());
        assert!(h.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn hamiltonian_zero_and_single_coupling() {
        assert_eq!(build_hamiltonian(&AtomFieldParams::ZERO), Matrix3::zeros());
        let p = AtomFieldParams {
            omega_mu_rabi: TAU * 10e3,
            ..AtomFieldParams::ZERO
        };
        let h = build_hamiltonian(&p);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if (i, j) == (1, 2) || (i, j) == (2, 1) {
                    std::f64::consts::PI * 10e3
                } else {
                    0.0
                };
                assert_eq!(h[(i, j)].re, expected);
            }
        }
    }

    #[test]
    fn no_dynamics_without_fields_or_rates() {
        let rho = DensityMatrix::maximally_mixed();
        let out = liouvillian_apply(&rho, &AtomFieldParams::ZERO, &DecoherenceParams::ZERO);
        assert_eq!(zero_matrix_norm(&out), 0.0);
    }

    #[test]
    fn single_decay_channel() {
        let gamma = 3.0e6;
        let d = DecoherenceParams {
            gamma_e_g1: gamma,
            ..DecoherenceParams::ZERO
        };
        let out = liouvillian_apply(
            &DensityMatrix::pure(Level::Excited),
            &AtomFieldParams::ZERO,
            &d,
        );
        assert_eq!(out[(0, 0)].re, -gamma);
        assert_eq!(out[(2, 2)].re, gamma);
        for (i, j) in [(0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 0), (2, 1)] {
            assert_eq!(out[(i, j)], Complex64::new(0.0, 0.0));
        }
    }

    // Term-by-term expansion of each dissipator on a diagonal state, written
    // out by hand rather than through matrix products.
    #[test]
    fn maximally_mixed_flow_matches_hand_expansion() {
        let d = DecoherenceParams {
            gamma_e_g1: 1.3e6,
            gamma_e_g2: 2.9e6,
            gamma_ground_relax: 700.0,
            gamma_mw_dephase: 300.0,
        };
        let third = 1.0 / 3.0;
        let out = liouvillian_apply(&DensityMatrix::maximally_mixed(), &AtomFieldParams::ZERO, &d);
        // |g1><e|: e loses γ1/3, g1 gains γ1/3. |g2><e|: e loses γ2/3, g2 gains.
        // Ground exchange with equal populations: zero net. Dephasing: no
        // population change.
        let de = -(d.gamma_e_g1 + d.gamma_e_g2) * third;
        let dg2 = d.gamma_e_g2 * third;
        let dg1 = d.gamma_e_g1 * third;
        assert!((out[(0, 0)].re - de).abs() < 1e-6);
        assert!((out[(1, 1)].re - dg2).abs() < 1e-6);
        assert!((out[(2, 2)].re - dg1).abs() < 1e-6);
        assert!(out.trace().norm() < 1e-12 * d.total());
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(out[(i, j)], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn dephasing_rate_is_coherence_decay_rate() {
        let gamma = 123.0;
        let d = DecoherenceParams {
            gamma_mw_dephase: gamma,
            ..DecoherenceParams::ZERO
        };
        let mut m = Matrix3::from_diagonal_element(Complex64::new(1.0 / 3.0, 0.0));
        m[(1, 2)] = Complex64::new(0.1, 0.0);
        m[(2, 1)] = Complex64::new(0.1, 0.0);
        let out = liouvillian_matrix(&m, &AtomFieldParams::ZERO, &d);
        assert!((out[(1, 2)].re + gamma * 0.1).abs() < 1e-12);
    }

    #[test]
    fn generator_matches_matrix_form() {
        let p = AtomFieldParams {
            omega_opt_rabi: 2.0e5,
            delta_opt: -3.0e4,
            omega_mu_rabi: 4.0e5,
            delta_mu: 1.0e5,
        };
        let d = DecoherenceParams::default();
        let g = generator(&p, &d);
        let from_basis = GeneratorBasis::new(&d).generator(&p);
        let scale = max_rate(&p, &d);
        assert!((g - from_basis).abs().max() < 1e-12 * scale);
        let mut m = Matrix3::zeros();
        m[(0, 0)] = Complex64::new(0.1, 0.0);
        m[(1, 1)] = Complex64::new(0.3, 0.0);
        m[(2, 2)] = Complex64::new(0.6, 0.0);
        m[(0, 2)] = Complex64::new(0.05, 0.02);
        m[(2, 0)] = m[(0, 2)].conj();
        m[(1, 2)] = Complex64::new(-0.1, 0.07);
        m[(2, 1)] = m[(1, 2)].conj();
        let direct = liouvillian_matrix(&m, &p, &d);
        let via_generator = from_coords(&(g * to_coords(&m)));
        assert!(zero_matrix_norm(&(direct - via_generator)) < 1e-12 * scale);
    }
}
