//! Dense spectral kernels.
//!
//! Everything here is a pure function of its inputs. Complex singular values
//! are computed from the real `2n × 2n` embedding `[[X, -Y], [Y, X]]` of
//! `X + iY`, whose singular values come in equal pairs; the pairing is checked
//! on every call.

mod eigen;
mod householder;
mod subspace;
mod svd;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::matrix::{ComplexMatrix, Matrix};

pub use subspace::{distance_to_span, norm as vector_norm, OrthonormalBasis};
pub use svd::singular_values;

/// Relative tolerance for the pairing of embedding singular values.
pub const PAIRING_TOL: f64 = 1e-6;

/// Shifted values `s ≤ NUMERICAL_FLOOR · s_1` are reported as "at numerical floor".
pub const NUMERICAL_FLOOR: f64 = 1e-12;

/// A complex shift `z` together with an optional deterministic matrix `M`
/// whose operator norm is at most `R·√n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftSpec {
    pub z: Complex64,
    #[serde(skip)]
    pub m: Option<Arc<Matrix>>,
    pub r: f64,
}

impl PartialEq for ShiftSpec {
    fn eq(&self, other: &Self) -> bool {
        self.z == other.z && self.r == other.r && self.m == other.m
    }
}

impl ShiftSpec {
    pub fn scalar(z: Complex64) -> Self {
        ShiftSpec { z, m: None, r: 0.0 }
    }

    pub fn zero() -> Self {
        Self::scalar(Complex64::new(0.0, 0.0))
    }

    /// Shift with a deterministic matrix; checks `‖M‖ ≤ R·√n` to 1e-8 relative.
    pub fn with_matrix(z: Complex64, m: Matrix, r: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(LabError::ShapeMismatch("deterministic matrix must be square".into()));
        }
        if !(r >= 0.0) {
            return Err(LabError::invalid("R", "norm budget must be nonnegative"));
        }
        let norm = operator_norm(&m)?;
        let budget = r * (m.rows() as f64).sqrt();
        if norm > budget * (1.0 + 1e-8) + f64::MIN_POSITIVE {
            return Err(LabError::invalid(
                "M",
                format!("operator norm {norm} exceeds R·√n = {budget}"),
            ));
        }
        Ok(ShiftSpec {
            z,
            m: Some(Arc::new(m)),
            r,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    /// Whether the `1/√n` normalisation has already been applied.
    pub normalized: bool,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest distance between an eigenvalue with nonzero imaginary part and
    /// the nearest conjugate of another eigenvalue.
    pub fn conjugate_pairing_error(&self) -> f64 {
        let ev = &self.eigenvalues;
        let mut worst: f64 = 0.0;
        for (i, a) in ev.iter().enumerate() {
            let target = a.conj();
            let best = ev
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i || a.im == 0.0)
                .map(|(_, b)| (b - target).norm())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    /// Nonincreasing, nonnegative.
    pub values: Vec<f64>,
    pub shift: ShiftSpec,
    pub n: usize,
}

impl SingularSpectrum {
    /// Wraps an arbitrary list of singular values (sorted here).
    pub fn from_values(mut values: Vec<f64>, shift: ShiftSpec) -> Result<Self> {
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(LabError::invalid("values", "singular values must be nonnegative"));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let n = values.len();
        Ok(SingularSpectrum { values, shift, n })
    }

    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn smallest(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `s_n ≤ NUMERICAL_FLOOR · s_1`
    pub fn at_numerical_floor(&self) -> bool {
        self.smallest() <= NUMERICAL_FLOOR * self.largest()
    }
}

/// How complex singular values are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SvdRoute {
    /// Embedding for genuinely complex input; for real input the embedding is
    /// `diag(X, X)` and its pairs are the singular values of `X`, which are
    /// computed directly.
    #[default]
    Auto,
    /// Always decompose the full `2n × 2n` embedding.
    Embedding,
}

/// All `n` eigenvalues of a real square matrix (not normalised).
pub fn eigenvalues(a: &Matrix) -> Result<Spectrum> {
    Ok(Spectrum {
        eigenvalues: eigen::real_eigenvalues(a)?,
        normalized: false,
    })
}

/// `A/√n + M/√n − z·Id` as a complex matrix.
pub fn shifted_matrix(a: &Matrix, shift: &ShiftSpec) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(LabError::ShapeMismatch("shifted matrix needs a square input".into()));
    }
    let n = a.rows();
    let scale = 1.0 / (n as f64).sqrt();
    let base = match &shift.m {
        Some(m) => {
            if m.rows() != n || m.cols() != n {
                return Err(LabError::ShapeMismatch(format!(
                    "M is {}×{}, A is {n}×{n}",
                    m.rows(),
                    m.cols()
                )));
            }
            a.add(m)?
        }
        None => a.clone(),
    };
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        let v = Complex64::new(base[(i, j)] * scale, 0.0);
        if i == j {
            v - shift.z
        } else {
            v
        }
    }))
}

/// Singular values of a complex matrix, nonincreasing.
pub fn complex_singular_values(c: &ComplexMatrix, route: SvdRoute) -> Result<Vec<f64>> {
    if route == SvdRoute::Auto && c.is_real() {
        return singular_values(&c.real_part());
    }
    let all = singular_values(&c.real_embedding())?;
    unpair(&all)
}

/// Splits the embedding's `2k` values into `k` pairs, one representative each.
fn unpair(all: &[f64]) -> Result<Vec<f64>> {
    let top = all.first().copied().unwrap_or(0.0);
    let mut out = Vec::with_capacity(all.len() / 2);
    for (k, pair) in all.chunks(2).enumerate() {
        let [a, b] = pair else {
            return Err(LabError::Numerical("odd number of embedding values".into()));
        };
        let scale = a.max(top * PAIRING_TOL);
        if (a - b).abs() > PAIRING_TOL * scale {
            return Err(LabError::Numerical(format!(
                "embedding pair {k} mismatched: {a} vs {b}"
            )));
        }
        out.push(*a);
    }
    Ok(out)
}

/// Singular values of `A/√n + M/√n − z·Id`.
pub fn shifted_singular_values(a: &Matrix, shift: &ShiftSpec) -> Result<SingularSpectrum> {
    shifted_singular_values_with(a, shift, SvdRoute::Auto)
}

pub fn shifted_singular_values_with(
    a: &Matrix,
    shift: &ShiftSpec,
    route: SvdRoute,
) -> Result<SingularSpectrum> {
    let c = shifted_matrix(a, shift)?;
    let values = complex_singular_values(&c, route)?;
    Ok(SingularSpectrum {
        n: values.len(),
        values,
        shift: shift.clone(),
    })
}

/// `s_n(A/√n + M/√n − z·Id)`.
pub fn smallest_singular_value(a: &Matrix, shift: &ShiftSpec) -> Result<f64> {
    Ok(shifted_singular_values(a, shift)?.smallest())
}

/// `‖A‖ = s_1(A)`.
pub fn operator_norm(a: &Matrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Both sides of the Hoffman–Wielandt inequality for singular values:
/// `(Σ|s_i(C) − s_i(C')|², ‖C − C'‖²_HS)`.
pub fn hoffman_wielandt_gap(c: &ComplexMatrix, c2: &ComplexMatrix) -> Result<(f64, f64)> {
    let diff = c.sub(c2)?;
    let s = complex_singular_values(c, SvdRoute::Auto)?;
    let s2 = complex_singular_values(c2, SvdRoute::Auto)?;
    let lhs = s.iter().zip(&s2).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((lhs, diff.frobenius_norm().powi(2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_matrix_unit_shift() {
        let s = shifted_singular_values(&Matrix::zeros(4, 4), &ShiftSpec::scalar(c(1.0, 0.0))).unwrap();
        assert!(s.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
        let s = shifted_singular_values_with(
            &Matrix::zeros(4, 4),
            &ShiftSpec::scalar(c(0.0, 1.0)),
            SvdRoute::Embedding,
        )
        .unwrap();
        assert_eq!(s.n, 4);
        assert!(s.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn diagonal_scaled() {
        let a = Matrix::from_diagonal(&[3.0, 4.0]);
        let s = shifted_singular_values(&a, &ShiftSpec::zero()).unwrap();
        assert!((s.values[0] - 4.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!((s.values[1] - 3.0 / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_smallest_is_zero() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let s = smallest_singular_value(&a, &ShiftSpec::zero()).unwrap();
        assert!(s.abs() < 1e-8);
        assert_eq!(smallest_singular_value(&Matrix::zeros(3, 3), &ShiftSpec::scalar(c(1.0, 0.0))).unwrap(), 1.0);
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&Matrix::identity(5)).unwrap() - 1.0).abs() < 1e-14);
        assert!((operator_norm(&Matrix::from_diagonal(&[-7.0, 2.0])).unwrap() - 7.0).abs() < 1e-14);
    }

    #[test]
    fn hoffman_wielandt_examples() {
        let a = Matrix::from_diagonal(&[1.0, 2.0]).to_complex();
        let b = Matrix::from_diagonal(&[2.0, 1.0]).to_complex();
        assert_eq!(hoffman_wielandt_gap(&a, &a).unwrap(), (0.0, 0.0));
        let (lhs, rhs) = hoffman_wielandt_gap(&a, &b).unwrap();
        assert!(lhs.abs() < 1e-28);
        assert!((rhs - 2.0).abs() < 1e-14);
        assert!(hoffman_wielandt_gap(&a, &ComplexMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn shift_matrix_budget() {
        let n = 4;
        let m = Matrix::identity(n).scaled(2.0);
        assert!(ShiftSpec::with_matrix(c(0.0, 0.0), m.clone(), 1.0).is_ok());
        assert!(ShiftSpec::with_matrix(c(0.0, 0.0), m, 0.9).is_err());
    }

    #[test]
    fn shift_matrix_folded_in() {
        let n = 4;
        let m = Matrix::identity(n).scaled(2.0);
        let shift = ShiftSpec::with_matrix(c(1.0, 0.0), m, 1.0).unwrap();
        let s = shifted_singular_values(&Matrix::zeros(n, n), &shift).unwrap();
        assert!(s.values.iter().all(|v| v.abs() < 1e-14));
        assert!(s.at_numerical_floor());
    }

    #[test]
    fn unpair_rejects_mismatch() {
        assert!(unpair(&[2.0, 2.0, 1.0, 0.5]).is_err());
        assert_eq!(unpair(&[2.0, 2.0, 1.0, 1.0]).unwrap(), vec![2.0, 1.0]);
    }

    #[test]
    fn conjugate_pairing_of_rotation() {
        let a = Matrix::from_rows(&[vec![0.0, 2.0], vec![-2.0, 0.0]]).unwrap();
        let s = eigenvalues(&a).unwrap();
        assert!(s.conjugate_pairing_error() < 1e-14);
        let fake = Spectrum {
            eigenvalues: vec![c(0.0, 1.0), c(0.0, 2.0)],
            normalized: false,
        };
        assert!(fake.conjugate_pairing_error() >= 1.0);
    }
}
