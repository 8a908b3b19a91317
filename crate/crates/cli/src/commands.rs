//! The subcommands. Each builds all of its output in memory and returns it;
//! [`Outputs::write_to`] then writes every file once.

use std::io::Cursor;
use std::path::{Path, PathBuf};

use atomradio::cavity::input_power_to_rabi;
use atomradio::export::{format_value, write_table, write_trajectory, write_transmission};
use atomradio::steady::steady_transmission;
use atomradio::wav::{load_wav, write_wav};
use atomradio::{khz, make_tone, photodiode, sweep, AudioSignal, SweepAxis, TAU};

use crate::axis::{AxisName, AxisSpec};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Maps an axis value and column index to (Ω_μ, Δ_μ).
type PointFn = dyn Fn(f64, usize) -> (f64, f64) + Sync;

/// Files produced by a command, by name, plus a human-readable summary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: String,
}

impl Outputs {
    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    pub fn write_to(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| CliError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(io(&path))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// `key = value` lines.
fn key_values(pairs: &[(&str, String)]) -> Vec<u8> {
    pairs
        .iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect::<String>()
        .into_bytes()
}

/// Column-name form of a number: six decimals at most, `m` for minus.
fn label(x: f64) -> String {
    ((x * 1e6).round() / 1e6).to_string().replace('-', "m")
}

/// Steady-state transmission table along the axis, without the cavity. A
/// detuning axis gets one column per `sweep.columns_rabi_khz` entry.
pub fn steady_sweep(cfg: &RunConfig, axis: &AxisSpec) -> CliResult<Outputs> {
    let base = cfg.atom();
    let d = cfg.decoherence();
    let chain = cfg.chain()?;
    let m = chain.transmission;
    let carrier_khz = cfg.carrier_rabi() / TAU / 1e3;
    let det0 = chain.modulation.carrier_detuning_0;

    // (Ω_μ, Δ_μ) in rad/s for each row and column.
    let (columns, point): (Vec<String>, Box<PointFn>) = match axis.name {
        AxisName::Detuning => {
            let rabis = if cfg.sweep.columns_rabi_khz.is_empty() {
                vec![carrier_khz]
            } else {
                cfg.sweep.columns_rabi_khz.clone()
            };
            let names = rabis.iter().map(|r| format!("T_rabi_{}_khz", label(*r))).collect();
            (names, Box::new(move |v, c| (khz(rabis[c]), khz(v))))
        }
        AxisName::Rabi => (vec!["T".into()], Box::new(move |v, _| (khz(v), det0))),
        AxisName::Power => {
            let cav = chain.cavity;
            let loss = chain.link_loss_db;
            (
                vec!["T".into()],
                Box::new(move |v, _| (input_power_to_rabi(v - loss, &cav), det0)),
            )
        }
        AxisName::ModFrequency => {
            return Err(CliError::Config(
                "steady-sweep supports the detuning, rabi and power axes".into(),
            ))
        }
    };
    let ncol = columns.len();
    let rows = cfg.exec().try_map(&axis.values, |&v| {
        let mut row = vec![v];
        for c in 0..ncol {
            let (omega, delta) = point(v, c);
            row.push(steady_transmission(&base.with_microwave(omega, delta), &d, &m)?);
        }
        Ok::<_, atomradio::Error>(row)
    })?;
    let mut header = vec![axis.name.header().to_string()];
    header.extend(columns);
    let mut csv = Vec::new();
    write_table(&mut csv, &header, &rows)?;
    Ok(Outputs {
        files: vec![("steady_sweep.csv".into(), csv)],
        summary: format!("steady-sweep: {} points along {}", rows.len(), axis.name),
    })
}

/// The input waveform of `transduce`.
pub fn input_signal(cfg: &RunConfig) -> CliResult<(AudioSignal, String)> {
    let i = &cfg.input;
    let (signal, source) = match &i.wav {
        Some(path) => (load_wav(path)?, path.display().to_string()),
        None => (
            make_tone(i.tone_hz, i.tone_amplitude_v, i.tone_shape, i.duration_s, i.sample_rate_hz)?,
            format!("{} tone {} Hz, {} V", format!("{:?}", i.tone_shape).to_lowercase(), i.tone_hz, i.tone_amplitude_v),
        ),
    };
    let signal = if i.upsample > 1 { signal.upsample(i.upsample)? } else { signal };
    Ok((signal, source))
}

/// Encodes the input, runs it through cavity, atoms and photodiode, and
/// writes the AC-coupled detector voltage as WAV together with the raw
/// transmission and the carrier trajectory.
pub fn transduce(cfg: &RunConfig) -> CliResult<Outputs> {
    let chain = cfg.chain()?;
    let (input, source) = input_signal(cfg)?;
    let traj = chain.carrier(&input)?;
    let t = chain.transmission_series(&traj)?;
    let volts = photodiode(&t, traj.sample_rate, &chain.photodiode, chain.seed)?;

    let mean = volts.mean();
    let ac = volts.without_dc();
    let peak = ac.peak();
    let target = 10f64.powf(cfg.output.wav_peak_dbfs / 20.0);
    let gain = if peak > 0.0 {
        (target / peak).min(cfg.output.max_gain)
    } else {
        cfg.output.max_gain
    };
    let scaled = ac.map(|x| x * gain);
    let out_peak = scaled.peak();
    let mut wav = Cursor::new(Vec::new());
    write_wav(&scaled, &mut wav)?;

    let peak_dbfs = if out_peak > 0.0 {
        format!("{}", 20.0 * out_peak.log10())
    } else {
        "-inf".into()
    };
    let meta = key_values(&[
        ("source", source.clone()),
        ("mode", chain.modulation.mode.to_string()),
        ("path", format!("{:?}", chain.path).to_lowercase()),
        ("seed", chain.seed.to_string()),
        ("sample_rate_hz", traj.sample_rate.to_string()),
        ("samples", volts.len().to_string()),
        ("mean_removed_v", format_value(mean)),
        ("gain", format_value(gain)),
        ("peak_dbfs", peak_dbfs),
        ("target_peak_dbfs", cfg.output.wav_peak_dbfs.to_string()),
        ("max_gain", cfg.output.max_gain.to_string()),
        ("wav_value", "(detector_v - mean_removed_v) * gain, 1.0 = full scale".into()),
    ]);
    let mut t_csv = Vec::new();
    write_transmission(&mut t_csv, &t, traj.sample_rate)?;
    let mut c_csv = Vec::new();
    write_trajectory(&mut c_csv, &traj)?;
    Ok(Outputs {
        files: vec![
            ("transduce.wav".into(), wav.into_inner()),
            ("transduce.wav.meta".into(), meta),
            ("transmission.csv".into(), t_csv),
            ("carrier.csv".into(), c_csv),
        ],
        summary: format!(
            "transduce: {} samples of {source}, {} mode, {:?} path, WAV gain {gain:e}",
            volts.len(),
            chain.modulation.mode,
            chain.path
        ),
    })
}

/// Lock-in readings along the axis.
pub fn lockin_sweep(cfg: &RunConfig, axis: &AxisSpec) -> CliResult<Outputs> {
    let chain = cfg.chain()?;
    let (core_axis, points): (SweepAxis, Vec<f64>) = match axis.name {
        AxisName::Detuning => (SweepAxis::Detuning, axis.values.iter().map(|&v| khz(v)).collect()),
        AxisName::Power => (SweepAxis::Power, axis.values.clone()),
        AxisName::ModFrequency => (SweepAxis::ModFrequency, axis.values.clone()),
        AxisName::Rabi => {
            return Err(CliError::Config(
                "lockin-sweep supports the detuning, power and mod_frequency axes".into(),
            ))
        }
    };
    let candidates_khz = if cfg.lockin.detuning_candidates_khz.is_empty() {
        vec![cfg.modulation.carrier_detuning_khz]
    } else {
        cfg.lockin.detuning_candidates_khz.clone()
    };
    let candidates: Vec<f64> = candidates_khz.iter().map(|&k| khz(k)).collect();
    // Report detunings in the kHz values they were requested in.
    let requested: Vec<f64> = candidates_khz
        .iter()
        .copied()
        .chain([cfg.modulation.carrier_detuning_khz])
        .chain(if axis.name == AxisName::Detuning { axis.values.clone() } else { Vec::new() })
        .collect();
    let in_khz = |rad: f64| {
        requested
            .iter()
            .copied()
            .find(|&k| khz(k) == rad)
            .unwrap_or(rad / TAU / 1e3)
    };
    let res = sweep(core_axis, &points, &chain, &candidates, cfg.exec())?;
    let header: Vec<String> = [axis.name.header(), "X_V", "Y_V", "R_V", "detuning_khz"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<f64>> = res
        .points
        .iter()
        .zip(&axis.values)
        .map(|(p, &v)| vec![v, p.output.x, p.output.y, p.output.r, in_khz(p.detuning)])
        .collect();
    let mut csv = Vec::new();
    write_table(&mut csv, &header, &rows)?;
    let meta = key_values(&[
        ("axis", axis.name.to_string()),
        ("mode", chain.modulation.mode.to_string()),
        ("path", format!("{:?}", chain.path).to_lowercase()),
        ("seed", chain.seed.to_string()),
        ("mod_frequency_hz", chain.mod_frequency.to_string()),
        ("reference_phase_rad", format_value(res.reference_phase)),
    ]);
    Ok(Outputs {
        files: vec![
            ("lockin_sweep.csv".into(), csv),
            ("lockin_sweep.meta".into(), meta),
        ],
        summary: format!(
            "lockin-sweep: {} points along {}, reference phase {:.4} rad",
            rows.len(),
            axis.name,
            res.reference_phase
        ),
    })
}

/// The selftest report as printed by the `selftest` command.
pub fn selftest_text(cfg: &RunConfig) -> String {
    format!("{}\n", crate::selftest::run(cfg))
}
