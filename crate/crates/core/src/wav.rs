//! 16-bit PCM WAV input and output.
//!
//! Full scale maps to ±1 V: a sample `k` reads as `k / 32768`.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};
use crate::modulation::AudioSignal;

const FULL_SCALE: f64 = 32768.0;

/// Reads a 16-bit PCM file. Only the first channel of multichannel files is
/// kept.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioSignal> {
    let mut reader = WavReader::open(path)?;
    let spec = reader.spec();
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::Format(format!(
            "expected 16-bit integer PCM, found {:?} with {} bits",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    let channels = spec.channels.max(1) as usize;
    let mut samples = Vec::with_capacity(reader.len() as usize / channels);
    for (i, s) in reader.samples::<i16>().enumerate() {
        let s = s?;
        if i % channels == 0 {
            samples.push(s as f64 / FULL_SCALE);
        }
    }
    if samples.is_empty() {
        return Err(Error::Format("file contains no samples".into()));
    }
    AudioSignal::new(samples, spec.sample_rate as f64)
}

/// Writes a mono 16-bit PCM file. Samples must lie within ±1 V; the sample
/// rate is rounded to the nearest integer.
pub fn save_wav(a: &AudioSignal, path: impl AsRef<Path>) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_wav(a, file)
}

/// [`save_wav`] into any seekable writer.
pub fn write_wav<W: std::io::Write + std::io::Seek>(a: &AudioSignal, out: W) -> Result<()> {
    a.validate()?;
    let peak = a.peak();
    if peak > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "samples exceed full scale (peak {peak} V); normalise before saving"
        )));
    }
    let rate = a.sample_rate.round();
    if !(rate >= 1.0 && rate <= u32::MAX as f64) {
        return Err(Error::Format(format!("unsupported sample rate {}", a.sample_rate)));
    }
    let spec = WavSpec {
        channels: 1,
        sample_rate: rate as u32,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::new(out, spec)?;
    for &x in &a.samples {
        let k = (x * FULL_SCALE).round().clamp(-FULL_SCALE, FULL_SCALE - 1.0);
        writer.write_sample(k as i16)?;
    }
    writer.finalize()?;
    Ok(())
}
