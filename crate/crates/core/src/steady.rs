//! Steady state of the Lindblad equation, probe transmission and its
//! first-order sensitivities to the microwave parameters.

use nalgebra::{Matrix3, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{DensityMatrix, Level};
use crate::error::{Error, Result};
use crate::lindblad::{generator, liouvillian_matrix, max_rate, superoperator, AtomFieldParams, DecoherenceParams};
use crate::hz;

/// Singular values below this fraction of the largest count as zero.
const NULLITY_TOL: f64 = 1e-12;
/// Residual bound relative to the fastest rate.
const RESIDUAL_TOL: f64 = 1e-10;

/// Beer–Lambert mapping from the `|g₂⟩` population to probe transmission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmissionModel {
    /// Resonant optical depth d₀ ≥ 0.
    pub optical_depth: f64,
}

impl Default for TransmissionModel {
    fn default() -> Self {
        TransmissionModel { optical_depth: 1.0 }
    }
}

impl TransmissionModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.optical_depth >= 0.0) || !self.optical_depth.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "optical depth must be finite and non-negative, got {}",
                self.optical_depth
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn of_population(&self, p_g2: f64) -> f64 {
        (-self.optical_depth * p_g2).exp()
    }
}

/// `T = exp(−d₀ · ρ_g2g2)`.
pub fn transmission(rho: &DensityMatrix, m: &TransmissionModel) -> f64 {
    m.of_population(rho.population(Level::G2))
}

/// Number of (numerically) zero singular values of the Liouvillian.
pub fn liouvillian_nullity(p: &AtomFieldParams, d: &DecoherenceParams) -> usize {
    let sv = superoperator(p, d).singular_values();
    let largest = sv.max();
    if largest == 0.0 {
        return 9;
    }
    sv.iter().filter(|&&s| s <= NULLITY_TOL * largest).count()
}

/// Solves `L(ρ) = 0` with `Tr ρ = 1`.
///
/// The 9×9 superoperator's null space is checked to be one-dimensional; the
/// equation for `ρ_ee` is then replaced by the trace constraint and the
/// resulting linear system solved directly.
pub fn solve_steady_state(p: &AtomFieldParams, d: &DecoherenceParams) -> Result<DensityMatrix> {
    p.validate()?;
    d.validate()?;
    let nullity = liouvillian_nullity(p, d);
    if nullity != 1 {
        return Err(Error::DegenerateNullSpace { nullity });
    }
    let mut s = superoperator(p, d);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    for col in 0..9 {
        s[(0, col)] = if col % 4 == 0 { one } else { zero };
    }
    let mut rhs = SVector::<Complex64, 9>::zeros();
    rhs[0] = one;
    let x = s
        .lu()
        .solve(&rhs)
        .ok_or(Error::DegenerateNullSpace { nullity: 2 })?;
    let raw = Matrix3::from_fn(|i, j| x[3 * i + j]);
    let mut rho = (raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
    let trace = rho.trace().re;
    rho /= Complex64::new(trace, 0.0);

    let bound = RESIDUAL_TOL * max_rate(p, d);
    let residual = liouvillian_matrix(&rho, p, d)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if !(residual <= bound) {
        return Err(Error::SteadyStateResidual { residual, bound });
    }
    Ok(DensityMatrix::from_matrix_unchecked(rho))
}

/// Slowest relaxation rate towards the steady state: the smallest `|Re λ|`
/// over the Liouvillian eigenvalues other than the stationary one, s⁻¹.
pub fn slowest_rate(p: &AtomFieldParams, d: &DecoherenceParams) -> Result<f64> {
    let mut re: Vec<f64> = generator(p, d)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re.abs())
        .collect();
    re.sort_by(f64::total_cmp);
    let gap = re[1];
    if !(gap > NULLITY_TOL * re[8]) {
        return Err(Error::DegenerateNullSpace { nullity: 2 });
    }
    Ok(gap)
}

/// Steady-state transmission for the given parameters. The sign of Ω_μ is a
/// phase convention, so its magnitude is used.
pub fn steady_transmission(
    p: &AtomFieldParams,
    d: &DecoherenceParams,
    m: &TransmissionModel,
) -> Result<f64> {
    let p = AtomFieldParams {
        omega_mu_rabi: p.omega_mu_rabi.abs(),
        ..*p
    };
    Ok(transmission(&solve_steady_state(&p, d)?, m))
}

/// Relative finite-difference step.
pub const FD_RELATIVE_STEP: f64 = 1e-4;
/// Richardson agreement required between steps `h` and `h/2`.
pub const RICHARDSON_TOL: f64 = 0.01;

/// `∂T/∂Ω_μ` and `∂T/∂Δ_μ` (units of seconds) with an accuracy check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivities {
    pub d_omega_mu: f64,
    pub d_delta_mu: f64,
    /// Relative change of each derivative when the step is halved.
    pub richardson_change: [f64; 2],
    /// `false` when either derivative failed the Richardson check.
    pub accurate: bool,
}

impl Sensitivities {
    pub fn warning(&self) -> Option<String> {
        (!self.accurate).then(|| {
            format!(
                "finite-difference sensitivities may be inaccurate (step-halving changes {:.2e}, {:.2e})",
                self.richardson_change[0], self.richardson_change[1]
            )
        })
    }
}

/// Finite-difference steps `(h_Ω, h_Δ)` used at this operating point.
pub fn fd_steps(p: &AtomFieldParams) -> (f64, f64) {
    let floor = hz(1.0);
    let h_omega = (FD_RELATIVE_STEP * p.omega_mu_rabi).max(floor);
    let delta_scale = p.delta_mu.abs().max(p.omega_mu_rabi);
    let h_delta = (FD_RELATIVE_STEP * delta_scale).max(floor);
    (h_omega, h_delta)
}

fn central<F: Fn(f64) -> Result<f64>>(f: &F, h: f64) -> Result<f64> {
    Ok((f(h)? - f(-h)?) / (2.0 * h))
}

fn richardson_change(coarse: f64, fine: f64, h: f64) -> f64 {
    let diff = (coarse - fine).abs();
    // Differences at the rounding floor of T count as agreement.
    if diff <= 1e-12 / h {
        return 0.0;
    }
    diff / fine.abs().max(f64::MIN_POSITIVE)
}

pub fn transmission_sensitivities(
    p: &AtomFieldParams,
    d: &DecoherenceParams,
    m: &TransmissionModel,
) -> Result<Sensitivities> {
    let (h_omega, h_delta) = fd_steps(p);
    let along_omega = |dx: f64| steady_transmission(&p.with_microwave(p.omega_mu_rabi + dx, p.delta_mu), d, m);
    let along_delta = |dx: f64| steady_transmission(&p.with_microwave(p.omega_mu_rabi, p.delta_mu + dx), d, m);

    let d_omega = central(&along_omega, h_omega)?;
    let d_omega_fine = central(&along_omega, 0.5 * h_omega)?;
    let d_delta = if p.omega_mu_rabi == 0.0 {
        // Without microwave drive Δ_μ only enters an undriven coherence.
        0.0
    } else {
        central(&along_delta, h_delta)?
    };
    let d_delta_fine = if p.omega_mu_rabi == 0.0 {
        0.0
    } else {
        central(&along_delta, 0.5 * h_delta)?
    };
    let change = [
        richardson_change(d_omega, d_omega_fine, h_omega),
        richardson_change(d_delta, d_delta_fine, h_delta),
    ];
    Ok(Sensitivities {
        d_omega_mu: d_omega,
        d_delta_mu: d_delta,
        richardson_change: change,
        accurate: change.iter().all(|&c| c < RICHARDSON_TOL),
    })
}
