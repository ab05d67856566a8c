//! Distances to spans of complex vectors.

use num_complex::Complex64;

use crate::error::{LabError, Result};

/// Vectors whose residual after orthogonalisation falls below this fraction of
/// their norm are treated as lying in the span.
const RANK_TOL: f64 = 1e-10;

/// Incrementally built orthonormal basis (classical Gram–Schmidt with one
/// full reorthogonalisation pass).
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    dim: usize,
    vectors: Vec<Vec<Complex64>>,
    dependent: usize,
}

impl OrthonormalBasis {
    pub fn new(dim: usize) -> Self {
        OrthonormalBasis {
            dim,
            vectors: Vec::new(),
            dependent: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of orthonormal vectors held (the rank of what was pushed).
    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    /// Pushed vectors that turned out to be (numerically) in the span.
    pub fn dependent_count(&self) -> usize {
        self.dependent
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    /// Component of `v` orthogonal to the span.
    pub fn residual(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut w = v.to_vec();
        for _ in 0..2 {
            for q in &self.vectors {
                let c: Complex64 = q.iter().zip(&w).map(|(qi, wi)| qi.conj() * wi).sum();
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        w
    }

    pub fn distance(&self, v: &[Complex64]) -> f64 {
        norm(&self.residual(v))
    }

    /// Adds `v` to the span. Returns `false` when `v` was already in it.
    pub fn push(&mut self, v: &[Complex64]) -> Result<bool> {
        if v.len() != self.dim {
            return Err(LabError::ShapeMismatch(format!(
                "vector of length {} in C^{}",
                v.len(),
                self.dim
            )));
        }
        let original = norm(v);
        let w = self.residual(v);
        let r = norm(&w);
        if original == 0.0 || r <= RANK_TOL * original || self.vectors.len() == self.dim {
            self.dependent += 1;
            return Ok(false);
        }
        self.vectors.push(w.into_iter().map(|x| x / r).collect());
        Ok(true)
    }
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean distance from `v` to `span(rows)`.
pub fn distance_to_span(v: &[Complex64], rows: &[Vec<Complex64>]) -> Result<f64> {
    let mut basis = OrthonormalBasis::new(v.len());
    for r in rows {
        basis.push(r)?;
    }
    Ok(basis.distance(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn basis_vectors() {
        let d = distance_to_span(&real(&[0., 0., 1.]), &[real(&[1., 0., 0.]), real(&[0., 1., 0.])]).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        let d = distance_to_span(&real(&[1., 1., 0.]), &[real(&[1., 0., 0.])]).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_span_is_norm() {
        let d = distance_to_span(&real(&[3., 4.]), &[]).unwrap();
        assert!((d - 5.0).abs() < 1e-15);
    }

    #[test]
    fn rank_deficient_rows() {
        let rows = [real(&[1., 1., 0.]), real(&[2., 2., 0.]), real(&[0., 0., 0.])];
        let mut b = OrthonormalBasis::new(3);
        for r in &rows {
            b.push(r).unwrap();
        }
        assert_eq!(b.rank(), 1);
        assert_eq!(b.dependent_count(), 2);
        let d = b.distance(&real(&[1., 0., 0.]));
        assert!((d - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn vector_in_span_is_zero() {
        let rows = [
            vec![Complex64::new(1.0, 2.0), Complex64::new(0.5, -1.0), Complex64::new(0.0, 1.0)],
            vec![Complex64::new(-1.0, 0.0), Complex64::new(2.0, 2.0), Complex64::new(1.0, 0.0)],
        ];
        let v: Vec<Complex64> = rows[0]
            .iter()
            .zip(&rows[1])
            .map(|(a, b)| Complex64::new(0.3, -1.1) * a + Complex64::new(2.0, 0.7) * b)
            .collect();
        let d = distance_to_span(&v, &rows).unwrap();
        assert!(d <= 1e-8 * norm(&v), "{d}");
    }

    #[test]
    fn length_mismatch() {
        assert!(distance_to_span(&real(&[1., 0.]), &[real(&[1., 0., 0.])]).is_err());
    }
}
