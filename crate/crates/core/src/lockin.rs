//! Digital lock-in amplifier and lock-in parameter sweeps.

use serde::{Deserialize, Serialize};

use crate::cavity::input_power_to_rabi;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::modulation::AudioSignal;
use crate::pipeline::Chain;

/// Settling time in filter time constants discarded before reading.
pub const SETTLING_TIME_CONSTANTS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LockInConfig {
    /// Hz.
    pub reference_freq: f64,
    /// Seconds. Should exceed one reference period.
    pub time_constant: f64,
    /// Number of cascaded single-pole stages.
    pub filter_order: u32,
    /// Radians.
    pub reference_phase: f64,
}

impl LockInConfig {
    /// Order 4, time constant `10/ω_m`, zero phase.
    pub fn for_frequency(reference_freq: f64) -> Self {
        LockInConfig {
            reference_freq,
            time_constant: 10.0 / crate::hz(reference_freq),
            filter_order: 4,
            reference_phase: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reference_freq > 0.0) || !self.reference_freq.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "reference frequency must be positive, got {}",
                self.reference_freq
            )));
        }
        if !(self.time_constant > 0.0) || !self.time_constant.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time constant must be positive, got {}",
                self.time_constant
            )));
        }
        if self.filter_order == 0 {
            return Err(Error::InvalidParameter("filter order must be at least 1".into()));
        }
        if !self.reference_phase.is_finite() {
            return Err(Error::InvalidParameter("reference phase must be finite".into()));
        }
        Ok(())
    }

    /// Shortest signal accepted by [`demodulate`], seconds.
    pub fn settling_time(&self) -> f64 {
        SETTLING_TIME_CONSTANTS * self.time_constant
    }
}

/// In-phase and quadrature amplitudes, volts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LockInOutput {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

impl LockInOutput {
    pub fn from_xy(x: f64, y: f64) -> Self {
        LockInOutput { x, y, r: x.hypot(y) }
    }

    /// Output for the reference phase advanced by `delta`.
    pub fn rotated(&self, delta: f64) -> Self {
        let (s, c) = delta.sin_cos();
        LockInOutput {
            x: self.x * c - self.y * s,
            y: self.y * c + self.x * s,
            r: self.r,
        }
    }

    /// Phase advance that puts all of the signal into `x` (positive).
    pub fn phase_to_x(&self) -> f64 {
        -self.y.atan2(self.x)
    }
}

/// `X = LP[2s·cos(ω_m t + φ)]`, `Y = LP[2s·sin(ω_m t + φ)]` with `t = 0` at
/// the first sample.
///
/// The first [`SETTLING_TIME_CONSTANTS`] time constants are discarded; the
/// filter outputs are then averaged over the whole reference periods at the
/// end of the remaining record (or read at the last sample if less than one
/// period remains), which removes the residual `2ω_m` ripple.
pub fn demodulate(signal: &AudioSignal, cfg: &LockInConfig) -> Result<LockInOutput> {
    signal.validate()?;
    cfg.validate()?;
    let dt = 1.0 / signal.sample_rate;
    let settle = cfg.settling_time();
    let first = (settle / dt).ceil() as usize;
    if first >= signal.len() {
        return Err(Error::InsufficientDuration {
            duration: signal.duration(),
            required: settle + dt,
        });
    }
    let alpha = -(-dt / cfg.time_constant).exp_m1();
    let order = cfg.filter_order as usize;
    let mut xs = vec![0.0; order];
    let mut ys = vec![0.0; order];
    let w = crate::hz(cfg.reference_freq);
    let mut out_x = Vec::with_capacity(signal.len() - first);
    let mut out_y = Vec::with_capacity(signal.len() - first);
    for (i, &s) in signal.samples.iter().enumerate() {
        let (sin, cos) = (w * i as f64 * dt + cfg.reference_phase).sin_cos();
        let mut ix = 2.0 * s * cos;
        let mut iy = 2.0 * s * sin;
        for k in 0..order {
            xs[k] += alpha * (ix - xs[k]);
            ys[k] += alpha * (iy - ys[k]);
            ix = xs[k];
            iy = ys[k];
        }
        if i >= first {
            out_x.push(ix);
            out_y.push(iy);
        }
    }
    let per_period = signal.sample_rate / cfg.reference_freq;
    let periods = (out_x.len() as f64 / per_period).floor();
    let take = if periods >= 1.0 {
        ((periods * per_period).round() as usize).clamp(1, out_x.len())
    } else {
        1
    };
    let mean = |v: &[f64]| v[v.len() - take..].iter().sum::<f64>() / take as f64;
    Ok(LockInOutput::from_xy(mean(&out_x), mean(&out_y)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Carrier detuning Δ_μ,0, rad/s.
    Detuning,
    /// Cavity input power, dBm.
    Power,
    /// Modulation frequency, Hz.
    ModFrequency,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "detuning" => Ok(SweepAxis::Detuning),
            "power" => Ok(SweepAxis::Power),
            "mod_frequency" | "mod-frequency" => Ok(SweepAxis::ModFrequency),
            _ => Err(Error::InvalidParameter(format!(
                "unknown sweep axis `{s}` (detuning|power|mod_frequency)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub output: LockInOutput,
    /// Carrier detuning used at this point, rad/s.
    pub detuning: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Reference phase (radians) that maximises `X` at the largest-`R`
    /// point; every output is reported at this phase.
    pub reference_phase: f64,
}

/// Runs the full chain at each axis value and demodulates at the modulation
/// frequency.
///
/// `detuning_candidates` (rad/s) are the carrier detunings searched for the
/// largest `R` at each point of a [`SweepAxis::ModFrequency`] sweep; other
/// axes ignore them. Outputs are rotated to the common reference phase that
/// maximises `|X|` at the peak point, which is equivalent to demodulating
/// with that phase since `X + iY` is linear in the reference phasor.
pub fn sweep(
    axis: SweepAxis,
    points: &[f64],
    chain: &Chain,
    detuning_candidates: &[f64],
    exec: Exec,
) -> Result<SweepResult> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one point".into()));
    }
    chain.validate()?;
    let raw: Vec<SweepPoint> = match axis {
        SweepAxis::Detuning => exec.try_map(points, |&v| {
            let mut c = chain.clone();
            c.modulation.carrier_detuning_0 = v;
            Ok::<_, Error>(SweepPoint {
                axis_value: v,
                output: c.lockin_response()?,
                detuning: v,
            })
        })?,
        SweepAxis::Power => exec.try_map(points, |&v| {
            let mut c = chain.clone();
            c.modulation.carrier_rabi_0 = input_power_to_rabi(v - c.link_loss_db, &c.cavity);
            Ok::<_, Error>(SweepPoint {
                axis_value: v,
                output: c.lockin_response()?,
                detuning: c.modulation.carrier_detuning_0,
            })
        })?,
        SweepAxis::ModFrequency => {
            if detuning_candidates.is_empty() {
                return Err(Error::InvalidParameter(
                    "modulation-frequency sweep needs detuning candidates".into(),
                ));
            }
            let jobs: Vec<(f64, f64)> = points
                .iter()
                .flat_map(|&f| detuning_candidates.iter().map(move |&det| (f, det)))
                .collect();
            let outputs = exec.try_map(&jobs, |&(f, det)| {
                let mut c = chain.clone();
                c.mod_frequency = f;
                c.modulation.carrier_detuning_0 = det;
                c.lockin_response()
            })?;
            points
                .iter()
                .zip(outputs.chunks(detuning_candidates.len()))
                .map(|(&f, outs)| {
                    let (k, best) = outs
                        .iter()
                        .enumerate()
                        .fold((0, outs[0]), |b, (k, o)| if o.r > b.1.r { (k, *o) } else { b });
                    SweepPoint {
                        axis_value: f,
                        output: best,
                        detuning: detuning_candidates[k],
                    }
                })
                .collect()
        }
    };
    let peak = raw
        .iter()
        .fold(raw[0], |b, p| if p.output.r > b.output.r { *p } else { b });
    let delta = peak.output.phase_to_x();
    Ok(SweepResult {
        points: raw
            .into_iter()
            .map(|p| SweepPoint {
                output: p.output.rotated(delta),
                ..p
            })
            .collect(),
        reference_phase: chain.lockin_reference_phase + delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::{make_tone, ToneShape};

    #[test]
    fn sine_calibration() {
        let f = 1e3;
        let s = make_tone(f, 0.3, ToneShape::Sine, 0.2, 100e3).unwrap();
        let out = demodulate(&s, &LockInConfig::for_frequency(f)).unwrap();
        assert!((out.r - 0.3).abs() < 3e-4);
        // sin(ωt) against cos(ωt): all of it lands in Y at zero phase.
        assert!(out.x.abs() < 1e-3);
        let out = out.rotated(out.phase_to_x());
        assert!((out.x - out.r).abs() < 1e-15 && out.y.abs() < 1e-15);
    }

    #[test]
    fn too_short_signal() {
        let s = make_tone(1e3, 1.0, ToneShape::Sine, 1e-3, 100e3).unwrap();
        assert!(matches!(
            demodulate(&s, &LockInConfig::for_frequency(1e3)),
            Err(Error::InsufficientDuration { .. })
        ));
    }

    #[test]
    fn axis_parsing() {
        assert_eq!("mod_frequency".parse::<SweepAxis>().unwrap(), SweepAxis::ModFrequency);
        assert!("phase".parse::<SweepAxis>().is_err());
    }
}
