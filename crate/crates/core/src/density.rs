//! Three-level density matrix in the basis `{|e⟩, |g₂⟩, |g₁⟩}`.

use nalgebra::{Matrix3, SVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Trace tolerance accepted for any evolved or solved state.
pub const TRACE_TOL: f64 = 1e-8;
/// Lowest eigenvalue accepted before a state counts as unphysical.
pub const POSITIVITY_TOL: f64 = -1e-9;
/// Hermiticity tolerance for states built from external data.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Basis levels. The discriminant is the matrix index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Excited = 0,
    G2 = 1,
    G1 = 2,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Excited, Level::G2, Level::G1];

    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }
}

/// Real coordinates of a Hermitian 3×3 matrix.
///
/// Layout: `[trace, ρ_ee, ρ_g2g2, Re ρ_e,g2, Im ρ_e,g2, Re ρ_e,g1, Im ρ_e,g1,
/// Re ρ_g2,g1, Im ρ_g2,g1]`. Keeping the trace as its own coordinate lets a
/// trace-preserving generator have an exactly zero first row.
pub type HermitianCoords = SVector<f64, 9>;

const OFF_DIAG: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Maps a Hermitian matrix to [`HermitianCoords`]. Only the upper triangle
/// and the diagonal are read.
pub fn to_coords(m: &Matrix3<Complex64>) -> HermitianCoords {
    let mut y = HermitianCoords::zeros();
    y[0] = m[(0, 0)].re + m[(1, 1)].re + m[(2, 2)].re;
    y[1] = m[(0, 0)].re;
    y[2] = m[(1, 1)].re;
    for (k, &(i, j)) in OFF_DIAG.iter().enumerate() {
        y[3 + 2 * k] = m[(i, j)].re;
        y[4 + 2 * k] = m[(i, j)].im;
    }
    y
}

/// Inverse of [`to_coords`].
pub fn from_coords(y: &HermitianCoords) -> Matrix3<Complex64> {
    let mut m = Matrix3::zeros();
    m[(0, 0)] = Complex64::new(y[1], 0.0);
    m[(1, 1)] = Complex64::new(y[2], 0.0);
    m[(2, 2)] = Complex64::new(y[0] - y[1] - y[2], 0.0);
    for (k, &(i, j)) in OFF_DIAG.iter().enumerate() {
        let z = Complex64::new(y[3 + 2 * k], y[4 + 2 * k]);
        m[(i, j)] = z;
        m[(j, i)] = z.conj();
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    elements: Matrix3<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(elements: Matrix3<Complex64>) -> Result<Self> {
        let rho = DensityMatrix { elements };
        let defect = rho.hermiticity_defect();
        if !(defect <= HERMITIAN_TOL) {
            return Err(Error::InvalidParameter(format!(
                "density matrix is not Hermitian (defect {defect:e})"
            )));
        }
        rho.check(0.0)?;
        Ok(rho)
    }

    /// Wraps a matrix without validation. Used by solvers that enforce the
    /// invariants themselves.
    pub(crate) fn from_matrix_unchecked(elements: Matrix3<Complex64>) -> Self {
        DensityMatrix { elements }
    }

    pub(crate) fn from_coords_unchecked(y: &HermitianCoords) -> Self {
        DensityMatrix {
            elements: from_coords(y),
        }
    }

    /// The pure state `|level⟩⟨level|`.
    pub fn pure(level: Level) -> Self {
        let mut m = Matrix3::zeros();
        m[(level.index(), level.index())] = Complex64::new(1.0, 0.0);
        DensityMatrix { elements: m }
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix {
            elements: Matrix3::from_diagonal_element(Complex64::new(1.0 / 3.0, 0.0)),
        }
    }

    /// Diagonal state with the given populations (need not be normalised;
    /// the result is checked).
    pub fn diagonal(p_e: f64, p_g2: f64, p_g1: f64) -> Result<Self> {
        let m = Matrix3::from_diagonal(&nalgebra::Vector3::new(
            Complex64::new(p_e, 0.0),
            Complex64::new(p_g2, 0.0),
            Complex64::new(p_g1, 0.0),
        ));
        DensityMatrix::new(m)
    }

    pub fn matrix(&self) -> &Matrix3<Complex64> {
        &self.elements
    }

    pub fn coords(&self) -> HermitianCoords {
        to_coords(&self.elements)
    }

    #[inline]
    pub fn element(&self, row: Level, col: Level) -> Complex64 {
        self.elements[(row.index(), col.index())]
    }

    #[inline]
    pub fn population(&self, level: Level) -> f64 {
        self.element(level, level).re
    }

    pub fn trace(&self) -> f64 {
        self.elements.trace().re
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.elements[(i, j)] - self.elements[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        // Hermitize before the eigen solve so that rounding in the lower
        // triangle cannot leak in.
        let h = (self.elements + self.elements.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().min()
    }

    /// Largest absolute elementwise difference.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (self.elements - other.elements)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Checks the trace and positivity invariants; `time` is only used for
    /// the error report.
    pub fn check(&self, time: f64) -> Result<()> {
        let trace = self.trace();
        if !((trace - 1.0).abs() <= TRACE_TOL) || self.elements.iter().any(|z| !z.is_finite()) {
            return Err(Error::TraceDrift { time, trace });
        }
        let min_eigenvalue = self.min_eigenvalue();
        if !(min_eigenvalue >= POSITIVITY_TOL) {
            return Err(Error::Positivity {
                time,
                min_eigenvalue,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coords_round_trip() {
        let mut m = Matrix3::zeros();
        m[(0, 0)] = Complex64::new(0.2, 0.0);
        m[(1, 1)] = Complex64::new(0.3, 0.0);
        m[(2, 2)] = Complex64::new(0.5, 0.0);
        m[(0, 1)] = Complex64::new(0.01, -0.02);
        m[(1, 0)] = m[(0, 1)].conj();
        m[(1, 2)] = Complex64::new(-0.1, 0.05);
        m[(2, 1)] = m[(1, 2)].conj();
        let y = to_coords(&m);
        assert_eq!(y[0], 1.0);
        let back = from_coords(&y);
        assert!((back - m).iter().all(|z| z.norm() < 1e-16));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = Matrix3::from_diagonal_element(Complex64::new(1.0 / 3.0, 0.0));
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn rejects_negative_population() {
        assert!(matches!(
            DensityMatrix::diagonal(1.1, -0.1, 0.0),
            Err(Error::Positivity { .. })
        ));
        assert!(matches!(
            DensityMatrix::diagonal(0.5, 0.4, 0.0),
            Err(Error::TraceDrift { .. })
        ));
    }

    #[test]
    fn pure_state_properties() {
        let rho = DensityMatrix::pure(Level::G1);
        assert_eq!(rho.population(Level::G1), 1.0);
        assert_eq!(rho.trace(), 1.0);
        assert!(rho.min_eigenvalue().abs() < 1e-15);
        rho.check(0.0).unwrap();
    }
}
