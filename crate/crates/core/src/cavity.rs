//! Microwave cavity: input power calibration and single-mode Lorentzian
//! filtering of the modulated carrier.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulation::CarrierTrajectory;
use crate::{hz, khz};

/// Ground-state hyperfine transition the carrier detuning is measured from, Hz.
pub const ATOMIC_TRANSITION_HZ: f64 = 6.834_682_610e9;

/// Rabi frequency produced by 1 mW at the cavity input, Hz.
pub const RABI_PER_SQRT_MW_HZ: f64 = 58.6e3;

/// Minimum ratio between the trajectory sample rate and its modulation
/// frequency.
pub const MIN_OVERSAMPLING: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityParams {
    /// Resonance frequency, Hz.
    pub f_resonance: f64,
    pub quality_factor: f64,
    /// Ω_μ produced by 1 mW of input power, rad/s per √mW.
    pub rabi_per_sqrt_mw: f64,
}

impl Default for CavityParams {
    fn default() -> Self {
        CavityParams {
            f_resonance: ATOMIC_TRANSITION_HZ,
            quality_factor: 27_000.0,
            rabi_per_sqrt_mw: khz(RABI_PER_SQRT_MW_HZ / 1e3),
        }
    }
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.f_resonance > 0.0
            && self.f_resonance.is_finite()
            && self.quality_factor > 0.0
            && self.quality_factor.is_finite()
            && self.rabi_per_sqrt_mw >= 0.0
            && self.rabi_per_sqrt_mw.is_finite();
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "cavity needs positive finite f_resonance and quality_factor and a finite non-negative calibration, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Full linewidth κ = 2π·f/Q, rad/s.
    pub fn linewidth(&self) -> f64 {
        hz(self.f_resonance) / self.quality_factor
    }

    /// Angular offset of the atomic transition from the cavity resonance.
    pub fn atom_offset(&self) -> f64 {
        hz(ATOMIC_TRANSITION_HZ - self.f_resonance)
    }

    /// Amplitude transfer `H(δ) = 1 / (1 + 2iδ/κ)` at angular offset `δ` from
    /// resonance.
    pub fn transfer(&self, delta: f64) -> Complex64 {
        1.0 / Complex64::new(1.0, 2.0 * delta / self.linewidth())
    }
}

/// Microwave Rabi frequency (rad/s) for `p_dbm` at the cavity input.
///
/// The default calibration gives `Ω/2π = 58.6 kHz · 10^(P/20)`.
pub fn input_power_to_rabi(p_dbm: f64, c: &CavityParams) -> f64 {
    c.rabi_per_sqrt_mw * 10f64.powf(p_dbm / 20.0)
}

/// Inverse of [`input_power_to_rabi`].
pub fn rabi_to_input_power(omega: f64, c: &CavityParams) -> f64 {
    20.0 * (omega / c.rabi_per_sqrt_mw).log10()
}

/// Passes the carrier through the cavity mode.
///
/// The intracavity field obeys `ȧ = −(κ/2)(a − s)` in the frame of the
/// cavity resonance, driven by the complex envelope `s` whose amplitude is
/// `Ω_μ` and whose instantaneous frequency is the carrier's offset from
/// resonance. Each sample holds its amplitude and frequency for one sample
/// period, over which the equation is solved exactly; the field starts in
/// steady state with the first sample. The output amplitude is `|a|` at the
/// end of each sample period and the detuning passes through unchanged.
pub fn cavity_transfer(carrier: &CarrierTrajectory, c: &CavityParams) -> Result<CarrierTrajectory> {
    c.validate()?;
    carrier.validate()?;
    if let Some(f_mod) = carrier.modulation_freq_hz {
        let required = MIN_OVERSAMPLING * f_mod;
        if carrier.sample_rate < required {
            return Err(Error::Aliasing {
                sample_rate: carrier.sample_rate,
                frequency: f_mod,
                required,
            });
        }
    }
    let k = 0.5 * c.linewidth();
    let dt = 1.0 / carrier.sample_rate;
    let decay = (-k * dt).exp();
    let offset = c.atom_offset();

    // Field relative to the drive phase at the start of the current sample.
    let delta0 = carrier.delta_mu[0] + offset;
    let mut b = c.transfer(delta0) * carrier.omega_mu[0];
    let mut omega_out = Vec::with_capacity(carrier.len());
    for (&amp, &det) in carrier.omega_mu.iter().zip(&carrier.delta_mu) {
        let delta = det + offset;
        let rot = Complex64::from_polar(1.0, delta * dt);
        let drive = if delta == 0.0 {
            Complex64::new(1.0 - decay, 0.0)
        } else {
            k * (rot - decay) / Complex64::new(k, delta)
        };
        b = (b * decay + drive * amp) / rot;
        omega_out.push(b.norm());
    }
    Ok(CarrierTrajectory {
        omega_mu: omega_out,
        delta_mu: carrier.delta_mu.clone(),
        sample_rate: carrier.sample_rate,
        modulation_freq_hz: carrier.modulation_freq_hz,
    })
}
