//! CSV export. Values are written in Rust's shortest round-trip float
//! formatting, so parsing a file gives back the exact doubles.

use std::io::Write;

use crate::error::Result;
use crate::lockin::SweepPoint;
use crate::modulation::CarrierTrajectory;

pub const TRAJECTORY_HEADER: [&str; 3] = ["t_s", "omega_mu_rad_s", "delta_mu_rad_s"];
pub const TRANSMISSION_HEADER: [&str; 2] = ["t_s", "transmission"];
pub const SWEEP_HEADER: [&str; 4] = ["axis_value", "X_V", "Y_V", "R_V"];

/// Shortest round-trip text of `x`, in exponent form outside `[1e-4, 1e15)`.
pub fn format_value(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn row<W: Write>(w: &mut csv::Writer<W>, values: &[f64]) -> Result<()> {
    w.write_record(values.iter().map(|&v| format_value(v)))?;
    Ok(())
}

pub fn write_trajectory<W: Write>(out: W, traj: &CarrierTrajectory) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for i in 0..traj.len() {
        row(&mut w, &[traj.time(i), traj.omega_mu[i], traj.delta_mu[i]])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_transmission<W: Write>(out: W, t_series: &[f64], sample_rate: f64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRANSMISSION_HEADER)?;
    for (i, &t) in t_series.iter().enumerate() {
        row(&mut w, &[i as f64 / sample_rate, t])?;
    }
    w.flush()?;
    Ok(())
}

/// Sweep table; `axis_values` overrides the recorded axis values (e.g. to
/// report them in the units they were requested in).
pub fn write_sweep<W: Write>(out: W, points: &[SweepPoint], axis_values: Option<&[f64]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for (i, p) in points.iter().enumerate() {
        let axis = axis_values.map_or(p.axis_value, |a| a[i]);
        row(&mut w, &[axis, p.output.x, p.output.y, p.output.r])?;
    }
    w.flush()?;
    Ok(())
}

/// Generic table with a caller-supplied header.
pub fn write_table<W: Write>(out: W, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        row(&mut w, r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV of numbers, returning the header and the rows.
pub fn read_table<R: std::io::Read>(input: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let values = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| crate::Error::Format(format!("bad number `{s}`: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transmission_round_trip() {
        let t = vec![0.1, 1.0 / 3.0, 0.6065306597126334];
        let mut buf = Vec::new();
        write_transmission(&mut buf, &t, 1e3).unwrap();
        let (header, rows) = read_table(buf.as_slice()).unwrap();
        assert_eq!(header, TRANSMISSION_HEADER);
        let back: Vec<f64> = rows.iter().map(|r| r[1]).collect();
        assert_eq!(back, t);
        assert_eq!(rows[2][0], 2e-3);
    }

    #[test]
    fn formatted_values_round_trip() {
        for x in [0.0, -0.0, 1.0, 4.336808689942018e-19, -1e-4, 9.99e-5, 1e15, 6.02e23, -123.456] {
            assert_eq!(format_value(x).parse::<f64>().unwrap().to_bits(), x.to_bits(), "{x}");
        }
        assert_eq!(format_value(4.336808689942018e-19), "4.336808689942018e-19");
        assert_eq!(format_value(0.25), "0.25");
    }
}
