//! Tone and harmonic analysis of sampled signals.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Complex amplitude of the component at `freq`: `x(t) ≈ Re[c·e^{iωt}]`,
/// so `|c|` is the sine amplitude. Exact for whole numbers of periods.
pub fn tone_component(samples: &[f64], sample_rate: f64, freq: f64) -> Complex64 {
    let n = samples.len();
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let w = crate::TAU * freq / sample_rate;
    let sum: Complex64 = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| x * Complex64::from_polar(1.0, -w * i as f64))
        .sum();
    sum * (2.0 / n as f64)
}

/// Largest number of samples that spans whole periods of `freq`, with the
/// window aligned to the end of the signal.
pub fn whole_periods(samples: &[f64], sample_rate: f64, freq: f64) -> &[f64] {
    let per_period = sample_rate / freq;
    let periods = (samples.len() as f64 / per_period).floor();
    if periods < 1.0 {
        return samples;
    }
    let n = (periods * per_period).round() as usize;
    &samples[samples.len() - n.min(samples.len())..]
}

/// Amplitudes of the fundamental and its first harmonics (`count` values,
/// index 0 is the fundamental), measured over whole periods at the end of
/// the signal.
pub fn harmonic_amplitudes(samples: &[f64], sample_rate: f64, fundamental: f64, count: usize) -> Vec<f64> {
    let window = whole_periods(samples, sample_rate, fundamental);
    (1..=count)
        .map(|k| tone_component(window, sample_rate, k as f64 * fundamental).norm())
        .collect()
}

/// Total harmonic distortion `√(Σ_{k≥2} A_k²) / A_1` over `harmonics`
/// harmonics including the fundamental.
pub fn thd(samples: &[f64], sample_rate: f64, fundamental: f64, harmonics: usize) -> f64 {
    let a = harmonic_amplitudes(samples, sample_rate, fundamental, harmonics.max(2));
    let rest: f64 = a[1..].iter().map(|x| x * x).sum();
    rest.sqrt() / a[0]
}

/// Frequency of the largest non-DC bin of the mean-removed spectrum, Hz.
pub fn dominant_frequency(samples: &[f64], sample_rate: f64) -> Result<f64> {
    let n = samples.len();
    if n < 4 {
        return Err(Error::InvalidParameter("need at least 4 samples for a spectrum".into()));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let (bin, _) = buf[1..=n / 2]
        .iter()
        .enumerate()
        .map(|(i, z)| (i + 1, z.norm_sqr()))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(bin as f64 * sample_rate / n as f64)
}

/// RMS about the mean.
pub fn ac_rms(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}
