//! Audio signals, test tones and AM/FM encoding onto the microwave carrier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{hz, khz};

/// Minimum ratio between sample rate and tone frequency for [`make_tone`].
pub const TONE_OVERSAMPLING: f64 = 20.0;

/// A sampled voltage waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    /// Volts.
    pub samples: Vec<f64>,
    /// Samples per second.
    pub sample_rate: f64,
    /// Highest nominal modulation frequency in the signal, Hz, when known.
    /// Used by sample-rate preconditions further down the chain.
    pub modulation_freq_hz: Option<f64>,
}

impl AudioSignal {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        let s = AudioSignal {
            samples,
            sample_rate,
            modulation_freq_hz: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_modulation_freq(mut self, f: f64) -> Self {
        self.modulation_freq_hz = Some(f);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0) || !self.sample_rate.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if self.samples.is_empty() {
            return Err(Error::InvalidParameter("signal has no samples".into()));
        }
        if self.samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("signal samples must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 / self.sample_rate
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Scaled copy with peak 1 V. An all-zero signal is returned unchanged.
    pub fn normalized(&self) -> AudioSignal {
        self.scaled_to_peak(1.0)
    }

    /// Scaled copy with the given peak. An all-zero signal is returned
    /// unchanged.
    pub fn scaled_to_peak(&self, peak: f64) -> AudioSignal {
        let current = self.peak();
        let factor = if current > 0.0 { peak / current } else { 1.0 };
        self.map(|x| x * factor)
    }

    /// Copy with the mean subtracted.
    pub fn without_dc(&self) -> AudioSignal {
        let mean = self.mean();
        self.map(|x| x - mean)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> AudioSignal {
        AudioSignal {
            samples: self.samples.iter().map(|&x| f(x)).collect(),
            ..self.clone()
        }
    }

    /// Samples from `start` seconds onwards.
    pub fn skip_time(&self, start: f64) -> AudioSignal {
        let first = ((start * self.sample_rate).round() as usize).min(self.samples.len());
        AudioSignal {
            samples: self.samples[first..].to_vec(),
            ..self.clone()
        }
    }

    /// Linear-interpolation upsampling by an integer factor. The last input
    /// sample is held.
    pub fn upsample(&self, factor: usize) -> Result<AudioSignal> {
        if factor == 0 {
            return Err(Error::InvalidParameter("upsampling factor must be at least 1".into()));
        }
        let n = self.samples.len();
        let mut out = Vec::with_capacity(n * factor);
        for i in 0..n {
            let a = self.samples[i];
            let b = self.samples[(i + 1).min(n - 1)];
            for k in 0..factor {
                out.push(a + (b - a) * k as f64 / factor as f64);
            }
        }
        Ok(AudioSignal {
            samples: out,
            sample_rate: self.sample_rate * factor as f64,
            modulation_freq_hz: self.modulation_freq_hz,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ToneShape {
    #[default]
    Sine,
    Square,
}

/// A test tone `A·sin(2πft)` or `A·sgn(sin 2πft)` with `sgn(0) = 0`.
pub fn make_tone(
    freq: f64,
    amplitude: f64,
    shape: ToneShape,
    duration: f64,
    sample_rate: f64,
) -> Result<AudioSignal> {
    if !(freq >= 0.0) || !freq.is_finite() || !amplitude.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tone frequency must be finite and non-negative and amplitude finite, got {freq}, {amplitude}"
        )));
    }
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tone duration must be positive, got {duration}"
        )));
    }
    let required = TONE_OVERSAMPLING * freq;
    if !(sample_rate >= required) || !sample_rate.is_finite() {
        return Err(Error::Aliasing {
            sample_rate,
            frequency: freq,
            required,
        });
    }
    let n = ((duration * sample_rate).round() as usize).max(1);
    let samples = (0..n)
        .map(|i| {
            // Phase in cycles, reduced to [0, 1) before the trig call so that
            // half-period samples land exactly on zero.
            let cycles = (freq * i as f64 / sample_rate).fract();
            match shape {
                ToneShape::Sine => amplitude * (crate::TAU * cycles).sin(),
                ToneShape::Square => {
                    if cycles == 0.0 || cycles == 0.5 {
                        0.0
                    } else if cycles < 0.5 {
                        amplitude
                    } else {
                        -amplitude
                    }
                }
            }
        })
        .collect();
    Ok(AudioSignal {
        samples,
        sample_rate,
        modulation_freq_hz: Some(freq),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ModulationMode {
    #[default]
    Am,
    Fm,
}

impl std::str::FromStr for ModulationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "am" => Ok(ModulationMode::Am),
            "fm" => Ok(ModulationMode::Fm),
            _ => Err(Error::InvalidParameter(format!("unknown modulation mode `{s}` (am|fm)"))),
        }
    }
}

impl std::fmt::Display for ModulationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModulationMode::Am => "am",
            ModulationMode::Fm => "fm",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationConfig {
    pub mode: ModulationMode,
    /// Fractional change of Ω_μ per volt.
    pub m_am: f64,
    /// Change of Δ_μ per volt, rad/s/V.
    pub m_fm: f64,
    /// Unmodulated Ω_μ, rad/s.
    pub carrier_rabi_0: f64,
    /// Unmodulated Δ_μ, rad/s.
    pub carrier_detuning_0: f64,
}

impl Default for ModulationConfig {
    fn default() -> Self {
        ModulationConfig {
            mode: ModulationMode::Am,
            m_am: 0.15,
            m_fm: khz(40.0),
            carrier_rabi_0: khz(74.0),
            carrier_detuning_0: khz(-5.0),
        }
    }
}

impl ModulationConfig {
    fn validate(&self) -> Result<()> {
        let all = [self.m_am, self.m_fm, self.carrier_rabi_0, self.carrier_detuning_0];
        if all.iter().any(|x| !x.is_finite()) || self.carrier_rabi_0 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "modulation parameters must be finite with a non-negative carrier Rabi frequency, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Sampled microwave parameters `(Ω_μ(t), Δ_μ(t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CarrierTrajectory {
    /// rad/s.
    pub omega_mu: Vec<f64>,
    /// rad/s.
    pub delta_mu: Vec<f64>,
    pub sample_rate: f64,
    /// Highest nominal modulation frequency, Hz, when known.
    pub modulation_freq_hz: Option<f64>,
}

impl CarrierTrajectory {
    /// `n` samples of an unmodulated carrier.
    pub fn constant(omega_mu: f64, delta_mu: f64, n: usize, sample_rate: f64) -> Self {
        CarrierTrajectory {
            omega_mu: vec![omega_mu; n],
            delta_mu: vec![delta_mu; n],
            sample_rate,
            modulation_freq_hz: None,
        }
    }

    pub fn len(&self) -> usize {
        self.omega_mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega_mu.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 / self.sample_rate
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega_mu.len() != self.delta_mu.len() {
            return Err(Error::InvalidParameter(format!(
                "trajectory lengths differ: {} vs {}",
                self.omega_mu.len(),
                self.delta_mu.len()
            )));
        }
        if self.omega_mu.is_empty() {
            return Err(Error::InvalidParameter("trajectory has no samples".into()));
        }
        if !(self.sample_rate > 0.0) || !self.sample_rate.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if self.omega_mu.iter().any(|&w| !(w >= 0.0) || !w.is_finite())
            || self.delta_mu.iter().any(|d| !d.is_finite())
        {
            return Err(Error::InvalidParameter(
                "trajectory needs finite values and non-negative Rabi frequencies".into(),
            ));
        }
        Ok(())
    }
}

/// Encodes `v` onto the carrier: AM scales Ω_μ by `1 + m_AM·V`, FM shifts Δ_μ
/// by `m_FM·V`.
pub fn encode(v: &AudioSignal, cfg: &ModulationConfig) -> Result<CarrierTrajectory> {
    v.validate()?;
    cfg.validate()?;
    let n = v.samples.len();
    let (omega_mu, delta_mu) = match cfg.mode {
        ModulationMode::Am => {
            let depth = cfg.m_am.abs() * v.peak();
            if depth >= 1.0 {
                return Err(Error::Overmodulation { depth });
            }
            (
                v.samples
                    .iter()
                    .map(|&x| cfg.carrier_rabi_0 * (1.0 + cfg.m_am * x))
                    .collect(),
                vec![cfg.carrier_detuning_0; n],
            )
        }
        ModulationMode::Fm => (
            vec![cfg.carrier_rabi_0; n],
            v.samples
                .iter()
                .map(|&x| cfg.carrier_detuning_0 + cfg.m_fm * x)
                .collect(),
        ),
    };
    Ok(CarrierTrajectory {
        omega_mu,
        delta_mu,
        sample_rate: v.sample_rate,
        modulation_freq_hz: v.modulation_freq_hz,
    })
}

/// Converts an FM sensitivity in kHz/V to rad/s/V.
pub fn fm_sensitivity_from_khz_per_volt(k: f64) -> f64 {
    khz(k)
}

/// Converts an FM sensitivity in rad/s/V to kHz/V.
pub fn fm_sensitivity_to_khz_per_volt(m: f64) -> f64 {
    m / hz(1e3)
}
