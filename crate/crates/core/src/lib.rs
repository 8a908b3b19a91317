//! Simulation of atomic microwave-to-optical signal transduction.
//!
//! An audio waveform is encoded as amplitude or frequency modulation of a
//! microwave carrier, filtered by a high-Q cavity, and applied to a
//! three-level atom (`|e⟩`, `|g₂⟩`, `|g₁⟩`) that is simultaneously probed by
//! an optical field. The probe transmission follows the `|g₂⟩` population, so
//! the modulation reappears on the optical signal, where a photodiode and a
//! lock-in amplifier recover it.
//!
//! The crate is organised along that chain:
//!
//! - [`lindblad`] and [`integrate`]: rotating-wave Hamiltonian, dissipator and
//!   time evolution of the density matrix.
//! - [`steady`]: null-space steady state, probe transmission and its
//!   first-order sensitivities.
//! - [`cavity`]: power calibration and Lorentzian filtering of the carrier.
//! - [`modulation`] and [`wav`]: audio signals, test tones, AM/FM encoding.
//! - [`transduction`]: quasi-static and dynamic transmission time series,
//!   photodiode model, response-time extraction.
//! - [`lockin`]: digital lock-in demodulation and parameter sweeps.
//! - [`pipeline`]: the whole chain behind one configuration.
//!
//! Batch work (sweeps, tables, random checks) goes through [`exec`], which
//! uses rayon when the `parallel` feature is enabled and runs sequentially
//! otherwise.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod density;
pub mod error;
pub mod exec;
pub mod export;
pub mod integrate;
pub mod lindblad;
pub mod lockin;
pub mod modulation;
pub mod pipeline;
pub mod spectrum;
pub mod steady;
pub mod transduction;
pub mod wav;


pub use cavity::{cavity_transfer, input_power_to_rabi, CavityParams};
pub use density::{DensityMatrix, Level};
pub use error::{Error, Result};
pub use exec::Exec;
pub use integrate::{evolve_interval, ConstantDrive, Drive, Evolution};
pub use lindblad::{AtomFieldParams, DecoherenceParams};
pub use lockin::{demodulate, sweep, LockInConfig, LockInOutput, SweepAxis};
pub use modulation::{encode, make_tone, AudioSignal, CarrierTrajectory, ModulationConfig, ModulationMode, ToneShape};
pub use pipeline::{Chain, TransductionPath};
pub use steady::{solve_steady_state, transmission, transmission_sensitivities, TransmissionModel};
pub use transduction::{
    extract_response_time, photodiode, transduce_dynamic, transduce_quasi_static, PhotodiodeModel,
};


/// 2π, for converting between Hz and rad/s.
pub const TAU: f64 = std::f64::consts::TAU;

/// Converts a frequency in Hz to an angular frequency in rad/s.
#[inline]
pub fn hz(f: f64) -> f64 {
    TAU * f
}

/// Converts a frequency in kHz to an angular frequency in rad/s.
#[inline]
pub fn khz(f: f64) -> f64 {
    TAU * 1e3 * f
}
