#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rmlab_core::rng::rng_from_seed;
use rmlab_core::{ComplexMatrix, Matrix};

pub fn gaussian_matrix(n: usize, seed: u64) -> Matrix {
    let mut rng = rng_from_seed(seed);
    Matrix::from_fn(n, n, |_, _| rng.sample(StandardNormal))
}

pub fn complex_gaussian(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = rng_from_seed(seed);
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn to_na(c: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(c.rows(), c.cols(), |i, j| c[(i, j)])
}

pub fn real_to_na(a: &Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

/// `|det(A/√n − z)|` from an LU factorisation.
pub fn shifted_abs_det(a: &Matrix, z: Complex64) -> f64 {
    let n = a.rows();
    let s = 1.0 / (n as f64).sqrt();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let v = Complex64::new(a[(i, j)] * s, 0.0);
        if i == j {
            v - z
        } else {
            v
        }
    });
    m.determinant().norm()
}

/// Singular values from nalgebra's SVD, nonincreasing.
pub fn oracle_singular_values(c: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(c).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Simpson's rule on `[a, b]` with `m` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}
