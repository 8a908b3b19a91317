//! Sweep axis specifications: `name:start:stop:n` with linear spacing.

use std::fmt;

use crate::config::SweepSection;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisName {
    /// Carrier detuning, kHz.
    Detuning,
    /// Resonant-equivalent carrier Rabi frequency, kHz.
    Rabi,
    /// Cavity input power, dBm.
    Power,
    /// Modulation frequency, Hz.
    ModFrequency,
}

impl AxisName {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "detuning" => Ok(AxisName::Detuning),
            "rabi" => Ok(AxisName::Rabi),
            "power" => Ok(AxisName::Power),
            "mod_frequency" | "mod-frequency" => Ok(AxisName::ModFrequency),
            _ => Err(CliError::Config(format!(
                "unknown axis `{s}` (detuning|rabi|power|mod_frequency)"
            ))),
        }
    }

    /// CSV column header, carrying the unit.
    pub fn header(self) -> &'static str {
        match self {
            AxisName::Detuning => "detuning_khz",
            AxisName::Rabi => "rabi_khz",
            AxisName::Power => "power_dbm",
            AxisName::ModFrequency => "mod_frequency_hz",
        }
    }
}

impl fmt::Display for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AxisName::Detuning => "detuning",
            AxisName::Rabi => "rabi",
            AxisName::Power => "power",
            AxisName::ModFrequency => "mod_frequency",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpec {
    pub name: AxisName,
    /// In the axis unit.
    pub values: Vec<f64>,
}

impl AxisSpec {
    /// Parses `name:start:stop:n`. `n = 1` gives the single point `start`.
    pub fn parse(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [name, start, stop, n] = parts[..] else {
            return Err(CliError::Config(format!(
                "axis `{s}` must have the form name:start:stop:n"
            )));
        };
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Config(format!("axis `{s}`: `{x}` is not a finite number")))
        };
        let (start, stop) = (num(start)?, num(stop)?);
        let n: usize = n
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| CliError::Config(format!("axis `{s}`: point count must be a positive integer")))?;
        let values = if n == 1 {
            vec![start]
        } else {
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        stop
                    } else {
                        start + (stop - start) * i as f64 / (n - 1) as f64
                    }
                })
                .collect()
        };
        Ok(AxisSpec {
            name: AxisName::parse(name.trim())?,
            values,
        })
    }

    /// The axis of a `[sweep]` table: either a full spec, or a bare name
    /// with explicit `values`.
    pub fn from_section(s: &SweepSection) -> CliResult<Self> {
        if s.axis.contains(':') {
            if !s.values.is_empty() {
                return Err(CliError::Config(
                    "`sweep.values` requires a bare axis name in `sweep.axis`".into(),
                ));
            }
            return Self::parse(&s.axis);
        }
        if s.values.is_empty() || s.values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config(format!(
                "`sweep.axis = \"{}\"` needs finite `sweep.values`, or use name:start:stop:n",
                s.axis
            )));
        }
        Ok(AxisSpec {
            name: AxisName::parse(&s.axis)?,
            values: s.values.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_axis_hits_both_ends() {
        let a = AxisSpec::parse("detuning:-300:300:7").unwrap();
        assert_eq!(a.name, AxisName::Detuning);
        assert_eq!(a.values, vec![-300.0, -200.0, -100.0, 0.0, 100.0, 200.0, 300.0]);
        let one = AxisSpec::parse("power:-5:-5:1").unwrap();
        assert_eq!(one.values, vec![-5.0]);
    }

    #[test]
    fn malformed_axes_are_config_errors() {
        for bad in ["detuning:0:1", "phase:0:1:3", "detuning:a:1:3", "detuning:0:1:0", "rabi:0:inf:2"] {
            assert!(matches!(AxisSpec::parse(bad), Err(CliError::Config(_))), "{bad}");
        }
    }
}
