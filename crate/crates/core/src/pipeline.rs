//! The complete signal chain, from a voltage waveform to the lock-in output.

use crate::cavity::{cavity_transfer, CavityParams};
use crate::error::{Error, Result};
use crate::integrate::stable_step;
use crate::lindblad::{AtomFieldParams, DecoherenceParams};
use crate::lockin::{demodulate, LockInConfig, LockInOutput};
use crate::modulation::{encode, make_tone, AudioSignal, CarrierTrajectory, ModulationConfig, ToneShape};
use crate::steady::{solve_steady_state, TransmissionModel};
use crate::transduction::{
    photodiode, transduce_dynamic_with, transduce_quasi_static_with, trajectory_step,
    PhotodiodeModel, QuasiStaticOptions,
};
use crate::exec::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransductionPath {
    Quasi,
    #[default]
    Dynamic,
}

impl std::str::FromStr for TransductionPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quasi" => Ok(TransductionPath::Quasi),
            "dynamic" => Ok(TransductionPath::Dynamic),
            _ => Err(Error::InvalidParameter(format!("unknown transduction path `{s}` (quasi|dynamic)"))),
        }
    }
}

/// Every setting of the chain. Rates and frequencies in rad/s unless the
/// field says otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    /// Optical drive. Its microwave fields are replaced by the carrier.
    pub atom: AtomFieldParams,
    pub decoherence: DecoherenceParams,
    pub cavity: CavityParams,
    /// Scalar power loss between source and cavity, dB.
    pub link_loss_db: f64,
    pub modulation: ModulationConfig,
    pub transmission: TransmissionModel,
    pub photodiode: PhotodiodeModel,
    pub path: TransductionPath,
    /// Tone used by lock-in measurements, Hz.
    pub mod_frequency: f64,
    /// Tone amplitude, volts.
    pub tone_amplitude: f64,
    pub tone_shape: ToneShape,
    /// Tone samples per modulation period.
    pub samples_per_period: f64,
    /// Lock-in time constant in units of `1/ω_m`.
    pub lockin_time_constant_rad: f64,
    pub lockin_filter_order: u32,
    pub lockin_reference_phase: f64,
    /// Time simulated before the lock-in record starts, seconds. Rounded up
    /// to whole modulation periods.
    pub warmup: f64,
    /// Record length after lock-in settling, in modulation periods.
    pub window_periods: f64,
    /// Explicit integrator step bound, seconds; `None` picks the stable
    /// step from the fastest rate.
    pub dt_max: Option<f64>,
    /// Relative accuracy demanded of the quasi-static interpolation table.
    pub table_tolerance: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for Chain {
    fn default() -> Self {
        Chain {
            atom: AtomFieldParams::default(),
            decoherence: DecoherenceParams::default(),
            cavity: CavityParams::default(),
            link_loss_db: 0.0,
            modulation: ModulationConfig::default(),
            transmission: TransmissionModel::default(),
            photodiode: PhotodiodeModel::default(),
            path: TransductionPath::Dynamic,
            mod_frequency: 1e3,
            tone_amplitude: 1.0,
            tone_shape: ToneShape::Sine,
            samples_per_period: 100.0,
            lockin_time_constant_rad: 10.0,
            lockin_filter_order: 4,
            lockin_reference_phase: 0.0,
            warmup: 5e-3,
            window_periods: 10.0,
            dt_max: None,
            table_tolerance: QuasiStaticOptions::default().table_tolerance,
            seed: 0,
            exec: Exec::Sequential,
        }
    }
}

impl Chain {
    pub fn validate(&self) -> Result<()> {
        self.atom.validate()?;
        self.decoherence.validate()?;
        self.cavity.validate()?;
        self.transmission.validate()?;
        self.photodiode.validate()?;
        self.lockin_config().validate()?;
        let positive = [
            self.mod_frequency,
            self.samples_per_period,
            self.window_periods,
        ];
        if positive.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "modulation frequency, samples per period and window must be positive".into(),
            ));
        }
        if !(self.warmup >= 0.0) || !self.link_loss_db.is_finite() || !self.tone_amplitude.is_finite() {
            return Err(Error::InvalidParameter(
                "warm-up must be non-negative and link loss and tone amplitude finite".into(),
            ));
        }
        if !(self.table_tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "table tolerance must be positive, got {}",
                self.table_tolerance
            )));
        }
        if let Some(dt) = self.dt_max {
            if !(dt > 0.0) {
                return Err(Error::InvalidParameter(format!("dt_max must be positive, got {dt}")));
            }
        }
        Ok(())
    }

    pub fn lockin_config(&self) -> LockInConfig {
        LockInConfig {
            reference_freq: self.mod_frequency,
            time_constant: self.lockin_time_constant_rad / crate::hz(self.mod_frequency),
            filter_order: self.lockin_filter_order,
            reference_phase: self.lockin_reference_phase,
        }
    }

    /// Tone sample rate, Hz.
    pub fn sample_rate(&self) -> f64 {
        self.samples_per_period * self.mod_frequency
    }

    /// Encodes `v`, filters it through the cavity and returns the carrier
    /// seen by the atoms.
    pub fn carrier(&self, v: &AudioSignal) -> Result<CarrierTrajectory> {
        cavity_transfer(&encode(v, &self.modulation)?, &self.cavity)
    }

    /// Probe transmission for the carrier trajectory along the configured
    /// path. The dynamic path starts in the steady state of the first sample.
    pub fn transmission_series(&self, traj: &CarrierTrajectory) -> Result<Vec<f64>> {
        match self.path {
            TransductionPath::Quasi => transduce_quasi_static_with(
                traj,
                &self.atom,
                &self.decoherence,
                &self.transmission,
                &QuasiStaticOptions {
                    table_tolerance: self.table_tolerance,
                    exec: self.exec,
                    ..QuasiStaticOptions::default()
                },
            ),
            TransductionPath::Dynamic => {
                let start = self.atom.with_microwave(traj.omega_mu[0], traj.delta_mu[0]);
                let rho0 = solve_steady_state(&start, &self.decoherence)?;
                let dt = self
                    .dt_max
                    .unwrap_or_else(|| trajectory_step(traj, &self.atom, &self.decoherence));
                transduce_dynamic_with(traj, &rho0, &self.atom, &self.decoherence, &self.transmission, dt)
            }
        }
    }

    /// Photodiode voltage for the input waveform.
    pub fn detect(&self, v: &AudioSignal) -> Result<AudioSignal> {
        let traj = self.carrier(v)?;
        let t = self.transmission_series(&traj)?;
        let mut out = photodiode(&t, traj.sample_rate, &self.photodiode, self.seed)?;
        out.modulation_freq_hz = v.modulation_freq_hz;
        Ok(out)
    }

    /// Lock-in output for the configured tone.
    ///
    /// The detector output is AC-coupled first: the mean over the whole
    /// periods at the end of the record is subtracted, so the probe's DC
    /// level does not leak through the finite filter settling.
    pub fn lockin_response(&self) -> Result<LockInOutput> {
        let lockin = self.lockin_config();
        let f = self.mod_frequency;
        let warmup_periods = (self.warmup * f).ceil();
        let warmup = warmup_periods / f;
        let duration = warmup + lockin.settling_time() + self.window_periods / f;
        let tone = make_tone(f, self.tone_amplitude, self.tone_shape, duration, self.sample_rate())?;
        let v = self.detect(&tone)?.skip_time(warmup);
        let tail = crate::spectrum::whole_periods(&v.samples, v.sample_rate, f);
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        demodulate(&v.map(|x| x - mean), &lockin)
    }

    /// The stable step at the unmodulated operating point, seconds.
    pub fn nominal_step(&self) -> f64 {
        let p = self
            .atom
            .with_microwave(self.modulation.carrier_rabi_0, self.modulation.carrier_detuning_0);
        stable_step(&p, &self.decoherence, crate::integrate::DEFAULT_STEP_FRACTION)
    }

    /// Steady-state transmission for a constant carrier after the cavity.
    pub fn static_transmission(&self, omega_mu: f64, delta_mu: f64) -> Result<f64> {
        let h = self.cavity.transfer(delta_mu + self.cavity.atom_offset()).norm();
        crate::steady::steady_transmission(
            &self.atom.with_microwave(omega_mu * h, delta_mu),
            &self.decoherence,
            &self.transmission,
        )
    }

    /// `Ω²·∂²T/∂Ω²` at the carrier amplitude `omega_mu` and detuning
    /// `delta_mu`, cavity included. Its zero is the inflection of the AM
    /// transfer curve, where second-harmonic distortion vanishes to leading
    /// order.
    pub fn am_curvature(&self, omega_mu: f64, delta_mu: f64) -> Result<f64> {
        let h = 1e-3;
        let t = |s: f64| self.static_transmission(omega_mu * (1.0 + s), delta_mu);
        Ok((t(h)? - 2.0 * t(0.0)? + t(-h)?) / (h * h))
    }

    /// Carrier detuning in `[lo, hi]` (rad/s) at which the AM transfer curve
    /// of the configured carrier amplitude is locally linear, found by
    /// bisection on [`Chain::am_curvature`]. The interval must bracket a
    /// sign change.
    pub fn linear_am_detuning(&self, lo: f64, hi: f64) -> Result<f64> {
        let omega = self.modulation.carrier_rabi_0;
        let f = |det: f64| self.am_curvature(omega, det);
        let (mut a, mut b) = (lo, hi);
        let (mut fa, fb) = (f(a)?, f(b)?);
        if fa.signum() == fb.signum() {
            return Err(Error::InvalidParameter(format!(
                "AM curvature does not change sign between {lo} and {hi} rad/s"
            )));
        }
        while b - a > 1e-6 * (1.0 + a.abs().max(b.abs())) {
            let mid = 0.5 * (a + b);
            let fm = f(mid)?;
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }
}
