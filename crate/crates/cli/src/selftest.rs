//! Invariant checks on the configured model. Failures are reported, not
//! returned as errors.

use std::fmt;

use atomradio::integrate::stable_step;
use atomradio::spectrum::tone_component;
use atomradio::steady::{slowest_rate, steady_transmission};
use atomradio::transduction::transduce_quasi_static;
use atomradio::{
    encode, evolve_interval, khz, make_tone, solve_steady_state, transmission_sensitivities, AtomFieldParams,
    ConstantDrive, DecoherenceParams, DensityMatrix, Level, ModulationConfig, ModulationMode, ToneShape, TAU,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;

pub const TRACE_TOL: f64 = 1e-8;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const EIGENVALUE_TOL: f64 = -1e-9;
pub const RABI_TOL: f64 = 1e-6;
pub const STEADY_TOL: f64 = 1e-6;
pub const EVEN_TOL: f64 = 1e-9;
pub const SMALL_SIGNAL_TOL: f64 = 0.01;
/// Random parameter sets in the integrity check.
pub const INTEGRITY_SETS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// Not applicable to this configuration.
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        };
        write!(f, "{tag} {:<20} {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| c.outcome == Outcome::Fail).count()
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(f, "{} of {} checks failed", self.failures(), self.checks.len())
    }
}

fn check(name: &'static str, ok: bool, detail: String) -> Check {
    Check {
        name,
        outcome: if ok { Outcome::Pass } else { Outcome::Fail },
        detail,
    }
}

fn failed(name: &'static str, e: impl fmt::Display) -> Check {
    Check {
        name,
        outcome: Outcome::Fail,
        detail: e.to_string(),
    }
}

fn step(cfg: &RunConfig, p: &AtomFieldParams, d: &DecoherenceParams, fraction: f64) -> f64 {
    cfg.solver.dt_max_s.unwrap_or_else(|| stable_step(p, d, fraction))
}

fn random_density(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let w: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.05..1.0));
    let total: f64 = w.iter().sum();
    DensityMatrix::diagonal(w[0] / total, w[1] / total, w[2] / total).expect("normalised weights")
}

/// Trace, Hermiticity and positivity over 10 ms for random drives with the
/// configured decoherence.
fn integrity(cfg: &RunConfig) -> Check {
    let name = "integrity";
    let d = cfg.decoherence();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut drift, mut herm, mut min_eig) = (0.0f64, 0.0f64, f64::INFINITY);
    for _ in 0..INTEGRITY_SETS {
        let p = AtomFieldParams {
            omega_opt_rabi: khz(rng.random_range(1.0..300.0)),
            delta_opt: khz(rng.random_range(-500.0..500.0)),
            omega_mu_rabi: khz(rng.random_range(1.0..300.0)),
            delta_mu: khz(rng.random_range(-500.0..500.0)),
        };
        let rho0 = random_density(&mut rng);
        let ev = match evolve_interval(&rho0, &ConstantDrive(p), &d, 10e-3, step(cfg, &p, &d, 0.1), 20) {
            Ok(ev) => ev,
            Err(e) => return failed(name, e),
        };
        for s in &ev.states {
            drift = drift.max((s.trace() - 1.0).abs());
            herm = herm.max(s.hermiticity_defect());
            min_eig = min_eig.min(s.min_eigenvalue());
        }
    }
    check(
        name,
        drift <= TRACE_TOL && herm <= HERMITICITY_TOL && min_eig >= EIGENVALUE_TOL,
        format!(
            "trace drift {drift:.2e} (<= {TRACE_TOL:e}), Hermiticity defect {herm:.2e} (<= {HERMITICITY_TOL:e}), \
             min eigenvalue {min_eig:.2e} (>= {EIGENVALUE_TOL:e}) over {INTEGRITY_SETS} random drives"
        ),
    )
}

/// Decoherence-free two-level reduction against cos²(Ω_μt/2) over ten
/// Rabi periods.
fn rabi(cfg: &RunConfig) -> Check {
    let name = "rabi-oscillation";
    let omega = if cfg.carrier_rabi() > 0.0 { cfg.carrier_rabi() } else { khz(10.0) };
    let p = AtomFieldParams {
        omega_mu_rabi: omega,
        ..AtomFieldParams::ZERO
    };
    let d = DecoherenceParams::ZERO;
    let t_span = 10.0 * TAU / omega;
    let ev = match evolve_interval(&DensityMatrix::pure(Level::G1), &ConstantDrive(p), &d, t_span, step(cfg, &p, &d, 0.02), 400) {
        Ok(ev) => ev,
        Err(e) => return failed(name, e),
    };
    let worst = ev
        .times
        .iter()
        .zip(&ev.states)
        .map(|(t, s)| (s.population(Level::G1) - (0.5 * omega * t).cos().powi(2)).abs())
        .fold(0.0, f64::max);
    check(
        name,
        worst <= RABI_TOL,
        format!("max |p_g1 - cos^2| {worst:.2e} (<= {RABI_TOL:e}) over 10 periods"),
    )
}

/// Null-space steady state against long integration at the operating point.
fn steady(cfg: &RunConfig, p: &AtomFieldParams, d: &DecoherenceParams) -> Check {
    let name = "steady-state";
    let rho_ss = match solve_steady_state(p, d) {
        Ok(r) => r,
        Err(e) => return failed(name, e),
    };
    let t_end = match slowest_rate(p, d) {
        Ok(g) => 100.0 / g,
        Err(e) => return failed(name, e),
    };
    match evolve_interval(&DensityMatrix::maximally_mixed(), &ConstantDrive(*p), d, t_end, step(cfg, p, d, 0.1), 1) {
        Ok(ev) => {
            let diff = ev.last().max_abs_diff(&rho_ss);
            check(
                name,
                diff <= STEADY_TOL,
                format!("max elementwise difference {diff:.2e} (<= {STEADY_TOL:e}) after {t_end:.3} s"),
            )
        }
        Err(e) => failed(name, e),
    }
}

fn symmetry(cfg: &RunConfig, p: &AtomFieldParams) -> Check {
    let name = "detuning-symmetry";
    let d = cfg.decoherence();
    let m = atomradio::TransmissionModel {
        optical_depth: cfg.probe.optical_depth,
    };
    let mut worst = 0.0f64;
    for k in 1..=50 {
        let det = khz(10.0 * k as f64);
        let t = |x| steady_transmission(&p.with_microwave(p.omega_mu_rabi, x), &d, &m);
        match (t(det), t(-det)) {
            (Ok(a), Ok(b)) => worst = worst.max((a - b).abs()),
            (Err(e), _) | (_, Err(e)) => return failed(name, e),
        }
    }
    check(
        name,
        worst <= EVEN_TOL,
        format!("max |T(D) - T(-D)| {worst:.2e} (<= {EVEN_TOL:e}) for |D|/2pi up to 500 kHz"),
    )
}

/// Quasi-static response to a small tone against the first-order
/// sensitivity prediction.
fn small_signal(cfg: &RunConfig, p: &AtomFieldParams, mode: ModulationMode) -> Check {
    let name = match mode {
        ModulationMode::Am => "small-signal-am",
        ModulationMode::Fm => "small-signal-fm",
    };
    let d = cfg.decoherence();
    let m = atomradio::TransmissionModel {
        optical_depth: cfg.probe.optical_depth,
    };
    let omega0 = p.omega_mu_rabi;
    let depth = 1e-3;
    let modulation = ModulationConfig {
        mode,
        m_am: depth,
        m_fm: depth * omega0.max(khz(1.0)),
        carrier_rabi_0: omega0,
        carrier_detuning_0: p.delta_mu,
    };
    let run = || -> atomradio::Result<(f64, f64)> {
        let (f, fs) = (500.0, 50e3);
        let tone = make_tone(f, 1.0, ToneShape::Sine, 0.01, fs)?;
        let t = transduce_quasi_static(&encode(&tone, &modulation)?, p, &d, &m)?;
        let measured = tone_component(&t, fs, f).norm();
        let s = transmission_sensitivities(p, &d, &m)?;
        let predicted = match mode {
            ModulationMode::Am => depth * omega0 * s.d_omega_mu,
            ModulationMode::Fm => modulation.m_fm * s.d_delta_mu,
        };
        Ok((measured, predicted.abs()))
    };
    match run() {
        Ok((measured, predicted)) => {
            let err = (measured - predicted).abs();
            check(
                name,
                err <= SMALL_SIGNAL_TOL * predicted + 1e-9,
                format!(
                    "amplitude {measured:.4e} vs first-order {predicted:.4e}, relative error {:.2e} (<= {SMALL_SIGNAL_TOL})",
                    err / predicted.max(f64::MIN_POSITIVE)
                ),
            )
        }
        Err(e) => failed(name, e),
    }
}

/// Runs every check. Checks that need a unique steady state are skipped
/// when the operating point has none.
pub fn run(cfg: &RunConfig) -> Report {
    let d = cfg.decoherence();
    let p = cfg.atom().with_microwave(cfg.carrier_rabi(), khz(cfg.modulation.carrier_detuning_khz));
    let mut checks = vec![integrity(cfg), rabi(cfg)];
    let steady = steady(cfg, &p, &d);
    let unique = solve_steady_state(&p, &d).is_ok();
    checks.push(steady);
    if unique {
        checks.push(symmetry(cfg, &p));
        checks.push(small_signal(cfg, &p, ModulationMode::Am));
        checks.push(small_signal(cfg, &p, ModulationMode::Fm));
    } else {
        for name in ["detuning-symmetry", "small-signal-am", "small-signal-fm"] {
            checks.push(Check {
                name,
                outcome: Outcome::Skip,
                detail: "needs a unique steady state".into(),
            });
        }
    }
    Report { checks }
}
