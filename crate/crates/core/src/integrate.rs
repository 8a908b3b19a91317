//! Fixed-step fourth-order Runge–Kutta integration of the Lindblad equation.
//!
//! The generator is linear, so one RK4 step of size `h` under a constant
//! generator `G` is the matrix `P = I + hG + (hG)²/2 + (hG)³/6 + (hG)⁴/24`.
//! Over an interval where the drive is constant the `m` steps are applied as
//! `P^m` by repeated squaring, which is the same scheme evaluated in
//! `O(log m)` matrix products. Intervals with a continuously varying drive
//! are stepped one at a time with the drive sampled at the RK4 stage times.
//!
//! States are carried in [`HermitianCoords`]; the generator's trace row is
//! exactly zero, so the trace is preserved to the last bit.

use crate::density::{DensityMatrix, HermitianCoords};
use crate::error::{Error, Result};
use crate::lindblad::{max_rate, AtomFieldParams, DecoherenceParams, Generator, GeneratorBasis};

/// Default ratio between the step and the inverse of the fastest rate.
pub const DEFAULT_STEP_FRACTION: f64 = 0.1;

/// Time-dependent field parameters.
pub trait Drive {
    fn params_at(&self, t: f64) -> AtomFieldParams;

    /// The parameters, if the drive is constant on `[t0, t1)`.
    fn constant_on(&self, _t0: f64, _t1: f64) -> Option<AtomFieldParams> {
        None
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantDrive(pub AtomFieldParams);

impl Drive for ConstantDrive {
    fn params_at(&self, _t: f64) -> AtomFieldParams {
        self.0
    }

    fn constant_on(&self, _t0: f64, _t1: f64) -> Option<AtomFieldParams> {
        Some(self.0)
    }
}

impl<F> Drive for F
where
    F: Fn(f64) -> AtomFieldParams,
{
    fn params_at(&self, t: f64) -> AtomFieldParams {
        self(t)
    }
}

/// Largest step satisfying `step · max_rate ≤ fraction` for the given drive
/// values.
pub fn stable_step(p: &AtomFieldParams, d: &DecoherenceParams, fraction: f64) -> f64 {
    let rate = max_rate(p, d);
    if rate > 0.0 {
        fraction / rate
    } else {
        f64::INFINITY
    }
}

/// One RK4 step of size `h` under the constant generator `g`.
pub fn rk4_step_map(g: &Generator, h: f64) -> Generator {
    let hg = g * h;
    let eye = Generator::identity();
    // Horner form of the degree-4 Taylor polynomial.
    let mut acc = eye + hg * 0.25;
    acc = eye + (hg * acc) * (1.0 / 3.0);
    acc = eye + (hg * acc) * 0.5;
    eye + hg * acc
}

/// `m`-th power by binary exponentiation.
pub fn matrix_power(base: &Generator, mut m: u64) -> Generator {
    let mut result = Generator::identity();
    let mut square = *base;
    let mut first = true;
    while m > 0 {
        if m & 1 == 1 {
            result = if first { square } else { result * square };
            first = false;
        }
        m >>= 1;
        if m > 0 {
            square = square * square;
        }
    }
    result
}

fn rk4_step_varying(
    basis: &GeneratorBasis,
    drive: &dyn Drive,
    y: &HermitianCoords,
    t: f64,
    h: f64,
) -> HermitianCoords {
    let g0 = basis.generator(&drive.params_at(t));
    let gm = basis.generator(&drive.params_at(t + 0.5 * h));
    let g1 = basis.generator(&drive.params_at(t + h));
    let k1 = g0 * y;
    let k2 = gm * (y + k1 * (0.5 * h));
    let k3 = gm * (y + k2 * (0.5 * h));
    let k4 = g1 * (y + k3 * h);
    y + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)
}

/// Recorded states at uniformly spaced times, `times[0] = 0`.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Evolution {
    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("evolution has at least one state")
    }
}

/// Reusable integrator bound to one set of decoherence rates.
#[derive(Debug, Clone)]
pub struct Integrator {
    basis: GeneratorBasis,
    dt_max: f64,
    cached: Option<(AtomFieldParams, u64, u64, Generator)>,
}

impl Integrator {
    pub fn new(d: &DecoherenceParams, dt_max: f64) -> Result<Self> {
        d.validate()?;
        if !(dt_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt_max must be positive, got {dt_max}"
            )));
        }
        Ok(Integrator {
            basis: GeneratorBasis::new(d),
            dt_max,
            cached: None,
        })
    }

    pub fn dt_max(&self) -> f64 {
        self.dt_max
    }

    fn substeps(&self, interval: f64) -> u64 {
        ((interval / self.dt_max).ceil() as u64).max(1)
    }

    /// Propagator over `interval` for constant parameters, memoised on the
    /// last request (ZOH drives repeat the same parameters across samples).
    fn constant_propagator(&mut self, p: &AtomFieldParams, interval: f64) -> Generator {
        let m = self.substeps(interval);
        if let Some((cp, cm, ci, g)) = &self.cached {
            if cp == p && *cm == m && *ci == interval.to_bits() {
                return *g;
            }
        }
        let h = interval / m as f64;
        let step = rk4_step_map(&self.basis.generator(p), h);
        let g = matrix_power(&step, m);
        self.cached = Some((*p, m, interval.to_bits(), g));
        g
    }

    /// Advances `y` by `interval` under constant parameters.
    pub fn step_constant(&mut self, y: &HermitianCoords, p: &AtomFieldParams, interval: f64) -> HermitianCoords {
        self.constant_propagator(p, interval) * y
    }

    /// Advances `y` from `t0` to `t1`.
    pub fn advance(
        &mut self,
        y: &HermitianCoords,
        drive: &dyn Drive,
        t0: f64,
        t1: f64,
    ) -> HermitianCoords {
        let interval = t1 - t0;
        match drive.constant_on(t0, t1) {
            Some(p) => self.constant_propagator(&p, interval) * y,
            None => {
                let m = self.substeps(interval);
                let h = interval / m as f64;
                let mut y = *y;
                for k in 0..m {
                    y = rk4_step_varying(&self.basis, drive, &y, t0 + k as f64 * h, h);
                }
                y
            }
        }
    }

    /// Integrates over `[0, t_span]` and records `records + 1` states at
    /// `t_k = k·t_span/records`, checking trace and positivity on each.
    pub fn evolve(
        &mut self,
        rho0: &DensityMatrix,
        drive: &dyn Drive,
        t_span: f64,
        records: usize,
    ) -> Result<Evolution> {
        if !(t_span > 0.0) || !t_span.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t_span must be positive, got {t_span}"
            )));
        }
        if records == 0 {
            return Err(Error::InvalidParameter("records must be at least 1".into()));
        }
        let mut times = Vec::with_capacity(records + 1);
        let mut states = Vec::with_capacity(records + 1);
        let mut y = rho0.coords();
        times.push(0.0);
        states.push(*rho0);
        let mut t0 = 0.0;
        for k in 1..=records {
            let t1 = t_span * k as f64 / records as f64;
            y = self.advance(&y, drive, t0, t1);
            let rho = DensityMatrix::from_coords_unchecked(&y);
            rho.check(t1)?;
            times.push(t1);
            states.push(rho);
            t0 = t1;
        }
        Ok(Evolution { times, states })
    }
}

/// Integrates the Lindblad equation from `rho0` over `[0, t_span]` with steps
/// no longer than `dt_max`, recording `records + 1` uniformly spaced states.
///
/// Fails with [`Error::TraceDrift`] or [`Error::Positivity`] if a recorded
/// state is unphysical, which happens when `dt_max` is beyond the stability
/// limit of the scheme.
pub fn evolve_interval(
    rho0: &DensityMatrix,
    drive: &dyn Drive,
    d: &DecoherenceParams,
    t_span: f64,
    dt_max: f64,
    records: usize,
) -> Result<Evolution> {
    Integrator::new(d, dt_max)?.evolve(rho0, drive, t_span, records)
}
