//! Probe transmission driven by a carrier trajectory, photodiode conversion
//! and step-response analysis.
//!
//! Two paths produce `T(t)`:
//!
//! - [`transduce_quasi_static`] assumes the atoms follow the drive
//!   adiabatically and evaluates the steady state at every sample, through a
//!   verified interpolation table when the trajectory is long.
//! - [`transduce_dynamic`] integrates the Lindblad equation with the drive
//!   held constant over each sample period.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::integrate::{stable_step, Drive, Integrator, DEFAULT_STEP_FRACTION};
use crate::lindblad::{AtomFieldParams, DecoherenceParams};
use crate::modulation::{AudioSignal, CarrierTrajectory};
use crate::steady::{steady_transmission, transmission, TransmissionModel};

/// Number of trajectory points checked against direct solves when a table is
/// used.
pub const TABLE_CHECK_POINTS: usize = 100;

/// Seed of the table verification sample.
const TABLE_CHECK_SEED: u64 = 0x7ab1e;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiStaticOptions {
    /// Largest accepted relative interpolation error at the check points.
    pub table_tolerance: f64,
    /// Nodes per varying axis of the first table attempt.
    pub initial_nodes: usize,
    pub exec: Exec,
}

impl Default for QuasiStaticOptions {
    fn default() -> Self {
        QuasiStaticOptions {
            table_tolerance: 1e-7,
            initial_nodes: 17,
            exec: Exec::default(),
        }
    }
}

/// Steady-state transmission for every sample of `traj`, with the optical
/// field taken from `base`.
pub fn transduce_quasi_static(
    traj: &CarrierTrajectory,
    base: &AtomFieldParams,
    d: &DecoherenceParams,
    m: &TransmissionModel,
) -> Result<Vec<f64>> {
    transduce_quasi_static_with(traj, base, d, m, &QuasiStaticOptions::default())
}

pub fn transduce_quasi_static_with(
    traj: &CarrierTrajectory,
    base: &AtomFieldParams,
    d: &DecoherenceParams,
    m: &TransmissionModel,
    opts: &QuasiStaticOptions,
) -> Result<Vec<f64>> {
    traj.validate()?;
    m.validate()?;
    let solve = |&(w, det): &(f64, f64)| steady_transmission(&base.with_microwave(w, det), d, m);

    let mut unique: Vec<(f64, f64)> = Vec::new();
    let mut index: HashMap<(u64, u64), usize> = HashMap::new();
    let keys: Vec<usize> = traj
        .omega_mu
        .iter()
        .zip(&traj.delta_mu)
        .map(|(&w, &det)| {
            *index.entry((w.to_bits(), det.to_bits())).or_insert_with(|| {
                unique.push((w, det));
                unique.len() - 1
            })
        })
        .collect();

    let direct = |unique: &[(f64, f64)]| -> Result<Vec<f64>> {
        let values = opts.exec.try_map(unique, solve)?;
        Ok(keys.iter().map(|&k| values[k]).collect())
    };

    let mut nodes = opts.initial_nodes.max(4);
    loop {
        let table = TransmissionTable::covering(traj, nodes);
        if table.node_count() * 2 > unique.len() {
            return direct(&unique);
        }
        let table = table.fill(base, d, m, opts.exec)?;
        if table.verify(traj, base, d, m, opts)? {
            return Ok(keys.iter().map(|&k| table.eval(unique[k].0, unique[k].1)).collect());
        }
        nodes = 2 * nodes - 1;
    }
}

/// Uniform axis for tensor-product cubic interpolation.
#[derive(Debug, Clone)]
struct Axis {
    start: f64,
    step: f64,
    len: usize,
}

impl Axis {
    fn covering(values: &[f64], nodes: usize) -> Axis {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            Axis {
                start: lo,
                step: (hi - lo) / (nodes - 1) as f64,
                len: nodes,
            }
        } else {
            Axis {
                start: lo,
                step: 0.0,
                len: 1,
            }
        }
    }

    fn node(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    /// First node of the 4-point stencil and the Lagrange weights at `x`.
    fn stencil(&self, x: f64) -> (usize, [f64; 4], usize) {
        if self.len == 1 {
            return (0, [1.0, 0.0, 0.0, 0.0], 1);
        }
        let u = (x - self.start) / self.step;
        let cell = (u.floor().max(0.0) as usize).min(self.len - 2);
        let first = cell.saturating_sub(1).min(self.len - 4);
        let s = u - first as f64;
        let w = [
            -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
            s * (s - 2.0) * (s - 3.0) / 2.0,
            -s * (s - 1.0) * (s - 3.0) / 2.0,
            s * (s - 1.0) * (s - 2.0) / 6.0,
        ];
        (first, w, 4)
    }
}

/// Steady-state transmission on a `Ω_μ × Δ_μ` grid with bicubic (4×4-point
/// Lagrange) interpolation.
#[derive(Debug, Clone)]
pub struct TransmissionTable {
    omega: Axis,
    delta: Axis,
    values: Vec<f64>,
}

impl TransmissionTable {
    fn covering(traj: &CarrierTrajectory, nodes: usize) -> TransmissionTable {
        TransmissionTable {
            omega: Axis::covering(&traj.omega_mu, nodes),
            delta: Axis::covering(&traj.delta_mu, nodes),
            values: Vec::new(),
        }
    }

    fn node_count(&self) -> usize {
        self.omega.len * self.delta.len
    }

    fn fill(
        mut self,
        base: &AtomFieldParams,
        d: &DecoherenceParams,
        m: &TransmissionModel,
        exec: Exec,
    ) -> Result<Self> {
        let points: Vec<(f64, f64)> = (0..self.omega.len)
            .flat_map(|i| (0..self.delta.len).map(move |j| (i, j)))
            .map(|(i, j)| (self.omega.node(i), self.delta.node(j)))
            .collect();
        self.values = exec.try_map(&points, |&(w, det)| {
            steady_transmission(&base.with_microwave(w, det), d, m)
        })?;
        Ok(self)
    }

    pub fn eval(&self, omega_mu: f64, delta_mu: f64) -> f64 {
        let (i0, wi, ni) = self.omega.stencil(omega_mu);
        let (j0, wj, nj) = self.delta.stencil(delta_mu);
        let mut acc = 0.0;
        for (a, w_row) in wi[..ni].iter().enumerate() {
            let row = (i0 + a) * self.delta.len + j0;
            let inner: f64 = wj[..nj].iter().zip(&self.values[row..row + nj]).map(|(w, v)| w * v).sum();
            acc += w_row * inner;
        }
        acc
    }

    fn verify(
        &self,
        traj: &CarrierTrajectory,
        base: &AtomFieldParams,
        d: &DecoherenceParams,
        m: &TransmissionModel,
        opts: &QuasiStaticOptions,
    ) -> Result<bool> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(TABLE_CHECK_SEED);
        let picks: Vec<usize> = (0..TABLE_CHECK_POINTS)
            .map(|_| rng.random_range(0..traj.len()))
            .collect();
        let errors = opts.exec.try_map(&picks, |&i| {
            let (w, det) = (traj.omega_mu[i], traj.delta_mu[i]);
            let exact = steady_transmission(&base.with_microwave(w, det), d, m)?;
            Ok::<f64, Error>(((self.eval(w, det) - exact) / exact).abs())
        })?;
        Ok(errors.into_iter().all(|e| e <= opts.table_tolerance))
    }
}

/// A trajectory viewed as a zero-order-hold drive: sample `i` holds over
/// `[i/fs, (i+1)/fs)`.
pub struct ZeroOrderHold<'a> {
    pub base: AtomFieldParams,
    pub traj: &'a CarrierTrajectory,
}

impl ZeroOrderHold<'_> {
    fn index(&self, t: f64) -> usize {
        ((t * self.traj.sample_rate).floor().max(0.0) as usize).min(self.traj.len() - 1)
    }

    fn params(&self, i: usize) -> AtomFieldParams {
        self.base
            .with_microwave(self.traj.omega_mu[i], self.traj.delta_mu[i])
    }
}

impl Drive for ZeroOrderHold<'_> {
    fn params_at(&self, t: f64) -> AtomFieldParams {
        self.params(self.index(t))
    }

    fn constant_on(&self, t0: f64, t1: f64) -> Option<AtomFieldParams> {
        // Nudge inwards so that boundaries computed in floating point land in
        // the intended sample.
        let slack = 1e-9 / self.traj.sample_rate;
        let i0 = self.index(t0 + slack);
        let i1 = self.index(t1 - slack);
        (i0 == i1).then(|| self.params(i0))
    }
}

/// Step bound for integrating the whole trajectory.
pub fn trajectory_step(traj: &CarrierTrajectory, base: &AtomFieldParams, d: &DecoherenceParams) -> f64 {
    let omega = traj.omega_mu.iter().cloned().fold(0.0, f64::max);
    let delta = traj.delta_mu.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    stable_step(&base.with_microwave(omega, delta), d, DEFAULT_STEP_FRACTION)
}

/// Transmission from integrating the Lindblad equation along `traj`, starting
/// from `rho0` at the first sample. Uses the default step bound.
pub fn transduce_dynamic(
    traj: &CarrierTrajectory,
    rho0: &DensityMatrix,
    base: &AtomFieldParams,
    d: &DecoherenceParams,
    m: &TransmissionModel,
) -> Result<Vec<f64>> {
    transduce_dynamic_with(traj, rho0, base, d, m, trajectory_step(traj, base, d))
}

/// [`transduce_dynamic`] with an explicit largest step.
pub fn transduce_dynamic_with(
    traj: &CarrierTrajectory,
    rho0: &DensityMatrix,
    base: &AtomFieldParams,
    d: &DecoherenceParams,
    m: &TransmissionModel,
    dt_max: f64,
) -> Result<Vec<f64>> {
    traj.validate()?;
    m.validate()?;
    base.validate()?;
    let mut integrator = Integrator::new(d, dt_max)?;
    let interval = 1.0 / traj.sample_rate;
    let mut out = Vec::with_capacity(traj.len());
    out.push(transmission(rho0, m));
    let mut y = rho0.coords();
    for i in 1..traj.len() {
        let p = base.with_microwave(traj.omega_mu[i - 1], traj.delta_mu[i - 1]);
        y = integrator.step_constant(&y, &p, interval);
        let rho = DensityMatrix::from_coords_unchecked(&y);
        rho.check(traj.time(i))?;
        out.push(transmission(&rho, m));
    }
    Ok(out)
}

/// Amplified photodiode: `V = gain·T + offset + noise`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotodiodeModel {
    /// Volts per unit transmission.
    pub gain: f64,
    /// Volts.
    pub offset: f64,
    /// RMS of additive white Gaussian noise, volts.
    pub noise_rms: f64,
}

impl Default for PhotodiodeModel {
    fn default() -> Self {
        PhotodiodeModel {
            gain: 1.0,
            offset: 0.0,
            noise_rms: 0.0,
        }
    }
}

impl PhotodiodeModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain > 0.0) || !self.gain.is_finite() || !self.offset.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "photodiode gain must be positive and offset finite, got {self:?}"
            )));
        }
        if !(self.noise_rms >= 0.0) || !self.noise_rms.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "photodiode noise must be finite and non-negative, got {}",
                self.noise_rms
            )));
        }
        Ok(())
    }
}

/// Converts a transmission series sampled at `sample_rate` to volts. The
/// noise sequence is fully determined by `seed`.
pub fn photodiode(t_series: &[f64], sample_rate: f64, pd: &PhotodiodeModel, seed: u64) -> Result<AudioSignal> {
    pd.validate()?;
    let mut samples: Vec<f64> = t_series.iter().map(|&t| pd.gain * t + pd.offset).collect();
    if pd.noise_rms > 0.0 {
        let normal = Normal::new(0.0, pd.noise_rms)
            .map_err(|e| Error::InvalidParameter(format!("noise distribution: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut samples {
            *v += normal.sample(&mut rng);
        }
    }
    AudioSignal::new(samples, sample_rate)
}

/// Least-squares fit of `T(t) = T∞ + (T₀ − T∞)·exp(−t/τ)` after a step edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFit {
    /// Seconds.
    pub tau: f64,
    pub t_initial: f64,
    pub t_final: f64,
    pub residual_rms: f64,
    /// Index of the last sample before the edge; the fit starts here.
    pub edge_index: usize,
    /// Number of samples in the fitted segment.
    pub segment_len: usize,
}

/// Samples of settled level required on each side of an edge.
pub const MIN_SETTLED_SAMPLES: usize = 10;
/// Fit residual RMS bound relative to the step height.
pub const FIT_RESIDUAL_TOL: f64 = 0.05;

/// Time constant of the first step edge in `series`.
pub fn extract_response_time(series: &[f64], sample_rate: f64) -> Result<f64> {
    Ok(fit_step_response(series, sample_rate)?.tau)
}

/// Finds the first edge (the sharpest change of slope) and fits an
/// exponential to the segment that runs up to the next edge.
pub fn fit_step_response(series: &[f64], sample_rate: f64) -> Result<StepFit> {
    if !(sample_rate > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    let n = series.len();
    if n < 2 * MIN_SETTLED_SAMPLES + 2 || series.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoEdge);
    }
    let curvature: Vec<f64> = (1..n - 1)
        .map(|i| (series[i + 1] - 2.0 * series[i] + series[i - 1]).abs())
        .collect();
    let kink = |i: usize| curvature[i - 1];
    let scale = series.iter().fold(0.0, |m: f64, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let peak = curvature.iter().cloned().fold(0.0, f64::max);
    if peak <= 1e-12 * scale {
        return Err(Error::NoEdge);
    }
    let lo = MIN_SETTLED_SAMPLES;
    let hi = n - 1 - MIN_SETTLED_SAMPLES;
    let mut edge = (lo..=hi).find(|&i| kink(i) >= 0.5 * peak).ok_or(Error::NoEdge)?;
    while edge < hi && kink(edge + 1) > kink(edge) {
        edge += 1;
    }
    let end = (edge + 2..n - 1)
        .find(|&i| kink(i) >= 0.5 * kink(edge))
        .unwrap_or(n - 1);
    let segment = &series[edge..=end];
    if segment.len() < MIN_SETTLED_SAMPLES {
        return Err(Error::NoEdge);
    }

    let dt = 1.0 / sample_rate;
    let fit_at = |log_tau: f64| exponential_lsq(segment, dt, log_tau.exp());
    let span = segment.len() as f64 * dt;
    let (a, b) = ((1e-3 * dt).ln(), (10.0 * span).ln());
    let grid = 400;
    let best = (0..=grid)
        .map(|k| a + (b - a) * k as f64 / grid as f64)
        .min_by(|x, y| fit_at(*x).0.total_cmp(&fit_at(*y).0))
        .expect("non-empty grid");
    let h = (b - a) / grid as f64;
    let log_tau = golden_section(&|x| fit_at(x).0, (best - h).max(a), (best + h).min(b));
    let tau = log_tau.exp();
    let (sse, t_final, amplitude) = fit_at(log_tau);
    let residual_rms = (sse / segment.len() as f64).sqrt();
    let bound = FIT_RESIDUAL_TOL * amplitude.abs();
    if !(residual_rms < bound) {
        return Err(Error::PoorFit { residual_rms, bound });
    }
    Ok(StepFit {
        tau,
        t_initial: t_final + amplitude,
        t_final,
        residual_rms,
        edge_index: edge,
        segment_len: segment.len(),
    })
}

/// For fixed τ, the least-squares `(T∞, A)` of `T∞ + A·e^{−t/τ}`; returns
/// `(sse, T∞, A)`.
fn exponential_lsq(y: &[f64], dt: f64, tau: f64) -> (f64, f64, f64) {
    let n = y.len() as f64;
    let q = (-dt / tau).exp();
    let (mut se, mut see, mut sy, mut sey) = (0.0, 0.0, 0.0, 0.0);
    let mut e = 1.0;
    for &v in y {
        se += e;
        see += e * e;
        sy += v;
        sey += e * v;
        e *= q;
    }
    let det = n * see - se * se;
    let (c, a) = if det.abs() <= 1e-300 {
        (sy / n, 0.0)
    } else {
        ((see * sy - se * sey) / det, (n * sey - se * sy) / det)
    };
    let mut sse = 0.0;
    let mut e = 1.0;
    for &v in y {
        let r = v - c - a * e;
        sse += r * r;
        e *= q;
    }
    (sse, c, a)
}

fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
