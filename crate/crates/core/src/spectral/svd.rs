//! Singular values of dense real matrices.
//!
//! Householder bidiagonalisation followed by implicit-shift Golub–Kahan QR on
//! the bidiagonal (the LINPACK `dsvdc` iteration, values only). All updates of
//! the row-major work matrix run along contiguous rows.

use crate::error::{LabError, Result};
use crate::matrix::Matrix;

use super::householder::{axpy, dot, reflector};

/// Singular values of `a`, sorted nonincreasing. Length `min(rows, cols)`.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(Vec::new());
    }
    if !a.is_finite() {
        return Err(LabError::Numerical("non-finite matrix entry".into()));
    }
    let mut work = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.transpose()
    };
    let (d, e) = bidiagonalize(&mut work);
    bidiagonal_singular_values(d, e)
}

/// Reduces `a` (m ≥ n) to upper bidiagonal form; returns (diagonal, superdiagonal).
/// The superdiagonal has length n with a trailing zero.
fn bidiagonalize(a: &mut Matrix) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (a.rows(), a.cols());
    debug_assert!(m >= n);
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut v = vec![0.0; m];
    let mut w = vec![0.0; n];
    let data = a.as_mut_slice();

    for k in 0..n {
        let len = m - k;
        for i in 0..len {
            v[i] = data[(k + i) * n + k];
        }
        let (alpha, beta) = reflector(&mut v[..len]);
        diag[k] = alpha;
        if k + 1 == n {
            break;
        }

        // w = βᵀ·vᵀ·A[k.., k+1..]
        let wk = &mut w[k + 1..n];
        if beta != 0.0 {
            wk.fill(0.0);
            for (i, &vi) in v[..len].iter().enumerate() {
                if vi != 0.0 {
                    let row = &data[(k + i) * n + k + 1..(k + i + 1) * n];
                    axpy(vi, row, wk);
                }
            }
            for x in wk.iter_mut() {
                *x *= beta;
            }
        }

        // Row k first: it defines the right reflector.
        {
            let row = &mut data[k * n + k + 1..(k + 1) * n];
            if beta != 0.0 {
                axpy(-v[0], wk, row);
            }
        }
        let right_len = n - k - 1;
        let mut u: Vec<f64> = Vec::new();
        let mut gamma = 0.0;
        if right_len >= 2 {
            u = data[k * n + k + 1..(k + 1) * n].to_vec();
            let (alpha_r, g) = reflector(&mut u);
            sup[k] = alpha_r;
            gamma = g;
        } else {
            sup[k] = data[k * n + k + 1];
        }

        // Remaining rows: left update then right update while the row is hot.
        for i in 1..len {
            let row = &mut data[(k + i) * n + k + 1..(k + i + 1) * n];
            if beta != 0.0 && v[i] != 0.0 {
                axpy(-v[i], wk, row);
            }
            if gamma != 0.0 {
                let s = gamma * dot(row, &u);
                axpy(-s, &u, row);
            }
        }
    }
    (diag, sup)
}

/// Golub–Kahan implicit QR on the bidiagonal `(s, e)`, values only.
fn bidiagonal_singular_values(mut s: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>> {
    let n = s.len();
    let eps = f64::EPSILON;
    let tiny = 2f64.powi(-966);
    let cap = 75 * n.max(1);
    let mut iters = 0usize;
    let mut p = n;

    while p > 0 {
        // Largest k < p-1 with negligible e[k] (or none).
        let mut k = p as isize - 2;
        while k >= 0 {
            let ku = k as usize;
            if e[ku].abs() <= tiny + eps * (s[ku].abs() + s[ku + 1].abs()) {
                e[ku] = 0.0;
                break;
            }
            k -= 1;
        }
        let kase;
        if k == p as isize - 2 {
            kase = 4;
        } else {
            let mut ks = p as isize - 1;
            while ks > k {
                let ksu = ks as usize;
                let t = (if ksu != p { e[ksu].abs() } else { 0.0 })
                    + (if ks != k + 1 { e[ksu - 1].abs() } else { 0.0 });
                if s[ksu].abs() <= tiny + eps * t {
                    s[ksu] = 0.0;
                    break;
                }
                ks -= 1;
            }
            if ks == k {
                kase = 3;
            } else if ks == p as isize - 1 {
                kase = 1;
            } else {
                kase = 2;
                k = ks;
            }
        }
        let k = (k + 1) as usize;

        match kase {
            // Deflate negligible s[p-1].
            1 => {
                let mut f = e[p - 2];
                e[p - 2] = 0.0;
                for j in (k..=p - 2).rev() {
                    let t = s[j].hypot(f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    if j != k {
                        f = -sn * e[j - 1];
                        e[j - 1] *= cs;
                    }
                }
            }
            // Split at negligible s[k-1].
            2 => {
                let mut f = e[k - 1];
                e[k - 1] = 0.0;
                for j in k..p {
                    let t = s[j].hypot(f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    f = -sn * e[j];
                    e[j] *= cs;
                }
            }
            // One QR sweep with the Wilkinson-type shift from the trailing 2×2.
            3 => {
                if iters >= cap {
                    return Err(LabError::NonConvergence {
                        routine: "bidiagonal_qr",
                        converged: n - p,
                        n,
                    });
                }
                let scale = s[p - 1]
                    .abs()
                    .max(s[p - 2].abs())
                    .max(e[p - 2].abs())
                    .max(s[k].abs())
                    .max(e[k].abs());
                let sp = s[p - 1] / scale;
                let spm1 = s[p - 2] / scale;
                let epm1 = e[p - 2] / scale;
                let sk = s[k] / scale;
                let ek = e[k] / scale;
                let b = ((spm1 + sp) * (spm1 - sp) + epm1 * epm1) / 2.0;
                let c = (sp * epm1) * (sp * epm1);
                let mut shift = 0.0;
                if b != 0.0 || c != 0.0 {
                    shift = (b * b + c).sqrt();
                    if b < 0.0 {
                        shift = -shift;
                    }
                    shift = c / (b + shift);
                }
                let mut f = (sk + sp) * (sk - sp) + shift;
                let mut g = sk * ek;
                for j in k..p - 1 {
                    let mut t = f.hypot(g);
                    let mut cs = f / t;
                    let mut sn = g / t;
                    if j != k {
                        e[j - 1] = t;
                    }
                    f = cs * s[j] + sn * e[j];
                    e[j] = cs * e[j] - sn * s[j];
                    g = sn * s[j + 1];
                    s[j + 1] *= cs;
                    t = f.hypot(g);
                    cs = f / t;
                    sn = g / t;
                    s[j] = t;
                    f = cs * e[j] + sn * s[j + 1];
                    s[j + 1] = -sn * e[j] + cs * s[j + 1];
                    g = sn * e[j + 1];
                    e[j + 1] *= cs;
                }
                e[p - 2] = f;
                iters += 1;
            }
            // s[p-1] converged.
            _ => {
                if s[k] < 0.0 {
                    s[k] = -s[k];
                }
                p -= 1;
            }
        }
    }
    if s.iter().any(|x| !x.is_finite()) {
        return Err(LabError::Numerical("non-finite singular value".into()));
    }
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}
