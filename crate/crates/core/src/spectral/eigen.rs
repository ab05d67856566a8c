//! Eigenvalues of dense real non-symmetric matrices.
//!
//! Balancing by powers of two, Householder reduction to upper Hessenberg form,
//! then the Francis double-shift QR iteration restricted to the active window
//! (no Schur vectors are accumulated). Exceptional shifts are taken every ten
//! stagnant sweeps; the total number of sweeps is capped at `30·n`.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::matrix::Matrix;

use super::householder::{axpy, dot, reflector};

pub fn real_eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(LabError::ShapeMismatch(format!(
            "eigenvalues of a {}×{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(LabError::Numerical("non-finite matrix entry".into()));
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    hessenberg_qr(&mut h)
}

fn balance(a: &mut Matrix) {
    const RADIX: f64 = 2.0;
    const SQRDX: f64 = RADIX * RADIX;
    let n = a.rows();
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / RADIX;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= RADIX;
                c *= SQRDX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= SQRDX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for x in a.row_mut(i) {
                    *x *= g;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

fn hessenberg(a: &mut Matrix) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n - 2 {
        let len = n - k - 1;
        for i in 0..len {
            v[i] = a[(k + 1 + i, k)];
        }
        let (alpha, beta) = reflector(&mut v[..len]);
        if beta == 0.0 {
            continue;
        }
        // Left: rows k+1.., columns k+1.. (column k is set explicitly below).
        let wk = &mut w[k + 1..n];
        wk.fill(0.0);
        for (i, &vi) in v[..len].iter().enumerate() {
            axpy(vi, &a.row(k + 1 + i)[k + 1..], wk);
        }
        for (i, &vi) in v[..len].iter().enumerate() {
            axpy(-beta * vi, wk, &mut a.row_mut(k + 1 + i)[k + 1..]);
        }
        // Right: every row, columns k+1..
        for i in 0..n {
            let row = &mut a.row_mut(i)[k + 1..];
            let s = beta * dot(row, &v[..len]);
            axpy(-s, &v[..len], row);
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

fn hessenberg_qr(h: &mut Matrix) -> Result<Vec<Complex64>> {
    let n = h.rows();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(out);
    }
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += h[(i, j)].abs();
        }
    }
    let cap = 30 * n;
    let mut total = 0usize;
    let mut its = 0usize;
    let mut t = 0.0;
    let mut nn = n as isize - 1;

    while nn >= 0 {
        let hi = nn as usize;
        let mut l = hi;
        while l >= 1 {
            let mut s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = anorm;
            }
            if h[(l, l - 1)].abs() <= f64::EPSILON * s {
                h[(l, l - 1)] = 0.0;
                break;
            }
            l -= 1;
        }
        let mut x = h[(hi, hi)];
        if l == hi {
            out[hi] = Complex64::new(x + t, 0.0);
            nn -= 1;
            its = 0;
            continue;
        }
        let mut y = h[(hi - 1, hi - 1)];
        let mut w = h[(hi, hi - 1)] * h[(hi - 1, hi)];
        if l == hi - 1 {
            let p = 0.5 * (y - x);
            let q = p * p + w;
            let z = q.abs().sqrt();
            x += t;
            if q >= 0.0 {
                let z = p + z.copysign(p);
                out[hi - 1] = Complex64::new(x + z, 0.0);
                out[hi] = Complex64::new(if z != 0.0 { x - w / z } else { x + z }, 0.0);
            } else {
                out[hi - 1] = Complex64::new(x + p, z);
                out[hi] = Complex64::new(x + p, -z);
            }
            nn -= 2;
            its = 0;
            continue;
        }

        if total >= cap {
            return Err(LabError::NonConvergence {
                routine: "hessenberg_qr",
                converged: n - 1 - hi,
                n,
            });
        }
        if its > 0 && its % 10 == 0 {
            t += x;
            for i in 0..=hi {
                h[(i, i)] -= x;
            }
            let s = h[(hi, hi - 1)].abs() + h[(hi - 1, hi - 2)].abs();
            x = 0.75 * s;
            y = x;
            w = -0.4375 * s * s;
        }
        its += 1;
        total += 1;

        // Look for two consecutive small subdiagonal elements.
        let mut m = hi - 2;
        let (mut p, mut q, mut r);
        loop {
            let z = h[(m, m)];
            let r0 = x - z;
            let s0 = y - z;
            p = (r0 * s0 - w) / h[(m + 1, m)] + h[(m, m + 1)];
            q = h[(m + 1, m + 1)] - z - r0 - s0;
            r = h[(m + 2, m + 1)];
            let s = p.abs() + q.abs() + r.abs();
            p /= s;
            q /= s;
            r /= s;
            if m == l {
                break;
            }
            let u = h[(m, m - 1)].abs() * (q.abs() + r.abs());
            let v = p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs());
            if u <= f64::EPSILON * v {
                break;
            }
            m -= 1;
        }
        for i in m + 2..=hi {
            h[(i, i - 2)] = 0.0;
            if i != m + 2 {
                h[(i, i - 3)] = 0.0;
            }
        }

        // Double-shift bulge chase on rows/columns m..=hi.
        for k in m..hi {
            let last = k == hi - 1;
            if k != m {
                p = h[(k, k - 1)];
                q = h[(k + 1, k - 1)];
                r = if last { 0.0 } else { h[(k + 2, k - 1)] };
                x = p.abs() + q.abs() + r.abs();
                if x != 0.0 {
                    p /= x;
                    q /= x;
                    r /= x;
                }
            }
            let s = (p * p + q * q + r * r).sqrt().copysign(p);
            if s == 0.0 {
                continue;
            }
            if k == m {
                if l != m {
                    h[(k, k - 1)] = -h[(k, k - 1)];
                }
            } else {
                h[(k, k - 1)] = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            let z = r / s;
            q /= p;
            r /= p;
            for j in k..=hi {
                let mut pp = h[(k, j)] + q * h[(k + 1, j)];
                if !last {
                    pp += r * h[(k + 2, j)];
                    h[(k + 2, j)] -= pp * z;
                }
                h[(k + 1, j)] -= pp * y;
                h[(k, j)] -= pp * x;
            }
            let mmin = hi.min(k + 3);
            for i in l..=mmin {
                let mut pp = x * h[(i, k)] + y * h[(i, k + 1)];
                if !last {
                    pp += z * h[(i, k + 2)];
                    h[(i, k + 2)] -= pp * r;
                }
                h[(i, k + 1)] -= pp * q;
                h[(i, k)] -= pp;
            }
        }
    }
    Ok(out)
}
