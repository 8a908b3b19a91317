//! The run configuration: one TOML document in human units (kHz, MHz, dBm,
//! kHz/V). Every key has a default and unknown keys are rejected.

use std::path::{Path, PathBuf};

use atomradio::cavity::input_power_to_rabi;
use atomradio::{
    hz, khz, AtomFieldParams, CavityParams, Chain, DecoherenceParams, Exec, ModulationConfig, ModulationMode,
    PhotodiodeModel, ToneShape, TransductionPath, TransmissionModel,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Seeds the photodiode noise and the randomized selftest parameters.
    pub seed: u64,
    pub atom: AtomSection,
    pub decoherence: DecoherenceSection,
    pub cavity: CavitySection,
    pub modulation: ModulationSection,
    pub probe: ProbeSection,
    pub photodiode: PhotodiodeSection,
    pub input: InputSection,
    pub transduction: TransductionSection,
    pub lockin: LockInSection,
    pub solver: SolverSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

/// Optical probe/pump field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AtomSection {
    /// Ω_opt/2π. The default gives an optical pumping rate near 1000 s⁻¹.
    pub optical_rabi_khz: f64,
    /// Δ_opt/2π.
    pub optical_detuning_khz: f64,
}

impl Default for AtomSection {
    fn default() -> Self {
        AtomSection {
            optical_rabi_khz: 44.0,
            optical_detuning_khz: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecoherenceSection {
    /// `|e⟩ → |g₁⟩` decay rate/2π.
    pub decay_to_g1_mhz: f64,
    /// `|e⟩ → |g₂⟩` decay rate/2π.
    pub decay_to_g2_mhz: f64,
    /// Ground-state population exchange/2π.
    pub ground_relaxation_hz: f64,
    /// `g₁–g₂` pure dephasing/2π.
    pub microwave_dephasing_hz: f64,
}

impl Default for DecoherenceSection {
    fn default() -> Self {
        DecoherenceSection {
            decay_to_g1_mhz: 3.035,
            decay_to_g2_mhz: 3.035,
            ground_relaxation_hz: 10.0,
            microwave_dephasing_hz: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CavitySection {
    pub resonance_ghz: f64,
    pub quality_factor: f64,
    /// Resonant Ω_μ/2π per √mW of input power.
    pub rabi_per_sqrt_mw_khz: f64,
    /// Power lost between source and cavity.
    pub link_loss_db: f64,
}

impl Default for CavitySection {
    fn default() -> Self {
        CavitySection {
            resonance_ghz: 6.834_682_61,
            quality_factor: 27_000.0,
            rabi_per_sqrt_mw_khz: 58.6,
            link_loss_db: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModulationSection {
    pub mode: ModulationMode,
    /// Fractional change of Ω_μ per volt.
    pub am_depth_per_volt: f64,
    /// Carrier frequency deviation per volt.
    pub fm_deviation_khz_per_volt: f64,
    /// Resonant-equivalent carrier Ω_μ/2π. Ignored when `carrier_power_dbm`
    /// is set.
    pub carrier_rabi_khz: f64,
    /// Cavity input power; overrides `carrier_rabi_khz` through the power
    /// calibration, after the link loss.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier_power_dbm: Option<f64>,
    /// Δ_μ/2π of the unmodulated carrier.
    pub carrier_detuning_khz: f64,
}

impl Default for ModulationSection {
    fn default() -> Self {
        ModulationSection {
            mode: ModulationMode::Am,
            am_depth_per_volt: 0.15,
            fm_deviation_khz_per_volt: 40.0,
            carrier_rabi_khz: 74.0,
            carrier_power_dbm: None,
            carrier_detuning_khz: -5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeSection {
    /// Resonant optical depth in `T = exp(−d₀·ρ_g2g2)`.
    pub optical_depth: f64,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection { optical_depth: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhotodiodeSection {
    pub gain_v: f64,
    pub offset_v: f64,
    pub noise_rms_v: f64,
}

impl Default for PhotodiodeSection {
    fn default() -> Self {
        PhotodiodeSection {
            gain_v: 1.0,
            offset_v: 0.0,
            noise_rms_v: 0.0,
        }
    }
}

/// Source waveform for `transduce`: a WAV file or a generated tone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InputSection {
    /// 16-bit PCM file, relative to the config file. Replaces the tone.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wav: Option<PathBuf>,
    pub tone_hz: f64,
    pub tone_amplitude_v: f64,
    pub tone_shape: ToneShape,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    /// Integer linear-interpolation upsampling applied before encoding.
    pub upsample: usize,
}

impl Default for InputSection {
    fn default() -> Self {
        InputSection {
            wav: None,
            tone_hz: 500.0,
            tone_amplitude_v: 1.0,
            tone_shape: ToneShape::Sine,
            duration_s: 0.05,
            sample_rate_hz: 50_000.0,
            upsample: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransductionSection {
    pub path: TransductionPath,
}

impl Default for TransductionSection {
    fn default() -> Self {
        TransductionSection {
            path: TransductionPath::Dynamic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LockInSection {
    pub mod_frequency_hz: f64,
    pub tone_amplitude_v: f64,
    pub samples_per_period: f64,
    /// Filter time constant times ω_m.
    pub time_constant_rad: f64,
    pub filter_order: u32,
    pub reference_phase_rad: f64,
    /// Simulated time before the record, rounded up to whole periods.
    pub warmup_s: f64,
    /// Record length after filter settling.
    pub window_periods: f64,
    /// Detunings searched for the largest response at each point of a
    /// modulation-frequency sweep. Empty means the carrier detuning only.
    pub detuning_candidates_khz: Vec<f64>,
}

impl Default for LockInSection {
    fn default() -> Self {
        LockInSection {
            mod_frequency_hz: 1e3,
            tone_amplitude_v: 0.1,
            samples_per_period: 100.0,
            time_constant_rad: 10.0,
            filter_order: 4,
            reference_phase_rad: 0.0,
            warmup_s: 5e-3,
            window_periods: 10.0,
            detuning_candidates_khz: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    /// Integrator step bound. Unset picks a tenth of the inverse fastest rate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_max_s: Option<f64>,
    /// Relative accuracy of the quasi-static interpolation table.
    pub table_tolerance: f64,
    /// Evaluate sweep points on all cores.
    pub parallel: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            dt_max_s: None,
            table_tolerance: 1e-7,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// `name:start:stop:n`, or a bare axis name together with `values`.
    /// Units: detuning and rabi in kHz, power in dBm, mod_frequency in Hz.
    pub axis: String,
    /// Explicit axis values, used only with a bare axis name.
    pub values: Vec<f64>,
    /// Ω_μ/2π of each transmission column of a steady-state detuning sweep.
    /// Empty means the carrier Rabi frequency only.
    pub columns_rabi_khz: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            axis: "detuning:-300:300:61".into(),
            values: Vec::new(),
            columns_rabi_khz: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Peak level of the written WAV after mean removal.
    pub wav_peak_dbfs: f64,
    /// Upper bound on the WAV gain, so numerical residue of a silent
    /// signal is not blown up to full scale.
    pub max_gain: f64,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            wav_peak_dbfs: -6.0,
            max_gain: 1e6,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads and validates a config file. Relative input paths are resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if let (Some(wav), Some(dir)) = (&cfg.input.wav, path.parent()) {
            if wav.is_relative() {
                cfg.input.wav = Some(dir.join(wav));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Key-level checks; physics checks happen when the chain is built.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |key: &str, why: &str| Err(CliError::Config(format!("`{key}` {why}")));
        if self.input.upsample == 0 {
            return bad("input.upsample", "must be at least 1");
        }
        if !(self.input.duration_s > 0.0) {
            return bad("input.duration_s", "must be positive");
        }
        if !(self.input.sample_rate_hz > 0.0) {
            return bad("input.sample_rate_hz", "must be positive");
        }
        if !(self.output.max_gain > 0.0) {
            return bad("output.max_gain", "must be positive");
        }
        if !(self.output.wav_peak_dbfs <= 0.0) {
            return bad("output.wav_peak_dbfs", "must be at most 0 dBFS");
        }
        if self.solver.dt_max_s.is_some_and(|dt| !(dt > 0.0)) {
            return bad("solver.dt_max_s", "must be positive");
        }
        if self.modulation.carrier_power_dbm.is_some_and(|p| !p.is_finite()) {
            return bad("modulation.carrier_power_dbm", "must be finite");
        }
        crate::axis::AxisSpec::from_section(&self.sweep)?;
        self.chain()?.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn atom(&self) -> AtomFieldParams {
        AtomFieldParams {
            omega_opt_rabi: khz(self.atom.optical_rabi_khz),
            delta_opt: khz(self.atom.optical_detuning_khz),
            omega_mu_rabi: 0.0,
            delta_mu: 0.0,
        }
    }

    pub fn decoherence(&self) -> DecoherenceParams {
        let d = &self.decoherence;
        DecoherenceParams {
            gamma_e_g1: hz(d.decay_to_g1_mhz * 1e6),
            gamma_e_g2: hz(d.decay_to_g2_mhz * 1e6),
            gamma_ground_relax: hz(d.ground_relaxation_hz),
            gamma_mw_dephase: hz(d.microwave_dephasing_hz),
        }
    }

    pub fn cavity(&self) -> CavityParams {
        CavityParams {
            f_resonance: self.cavity.resonance_ghz * 1e9,
            quality_factor: self.cavity.quality_factor,
            rabi_per_sqrt_mw: khz(self.cavity.rabi_per_sqrt_mw_khz),
        }
    }

    /// Resonant-equivalent carrier Rabi frequency, rad/s.
    pub fn carrier_rabi(&self) -> f64 {
        match self.modulation.carrier_power_dbm {
            Some(p) => input_power_to_rabi(p - self.cavity.link_loss_db, &self.cavity()),
            None => khz(self.modulation.carrier_rabi_khz),
        }
    }

    pub fn modulation(&self) -> ModulationConfig {
        ModulationConfig {
            mode: self.modulation.mode,
            m_am: self.modulation.am_depth_per_volt,
            m_fm: atomradio::modulation::fm_sensitivity_from_khz_per_volt(self.modulation.fm_deviation_khz_per_volt),
            carrier_rabi_0: self.carrier_rabi(),
            carrier_detuning_0: khz(self.modulation.carrier_detuning_khz),
        }
    }

    pub fn exec(&self) -> Exec {
        if self.solver.parallel {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }

    /// The signal chain described by this config.
    pub fn chain(&self) -> CliResult<Chain> {
        let l = &self.lockin;
        Ok(Chain {
            atom: self.atom(),
            decoherence: self.decoherence(),
            cavity: self.cavity(),
            link_loss_db: self.cavity.link_loss_db,
            modulation: self.modulation(),
            transmission: TransmissionModel {
                optical_depth: self.probe.optical_depth,
            },
            photodiode: PhotodiodeModel {
                gain: self.photodiode.gain_v,
                offset: self.photodiode.offset_v,
                noise_rms: self.photodiode.noise_rms_v,
            },
            path: self.transduction.path,
            mod_frequency: l.mod_frequency_hz,
            tone_amplitude: l.tone_amplitude_v,
            tone_shape: ToneShape::Sine,
            samples_per_period: l.samples_per_period,
            lockin_time_constant_rad: l.time_constant_rad,
            lockin_filter_order: l.filter_order,
            lockin_reference_phase: l.reference_phase_rad,
            warmup: l.warmup_s,
            window_periods: l.window_periods,
            dt_max: self.solver.dt_max_s,
            table_tolerance: self.solver.table_tolerance,
            seed: self.seed,
            exec: self.exec(),
        })
    }
}
