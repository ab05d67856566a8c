/// Turns `x` into a Householder vector `v` in place.
///
/// Returns `(alpha, beta)` with `(I - beta·v·vᵀ)·x = alpha·e₁`. When the tail
/// of `x` is already zero the reflector is the identity and `beta = 0`.
pub(crate) fn reflector(x: &mut [f64]) -> (f64, f64) {
    let x0 = x[0];
    let tail: f64 = x[1..].iter().map(|t| t * t).sum();
    if tail == 0.0 {
        return (x0, 0.0);
    }
    let sigma = (x0 * x0 + tail).sqrt();
    let alpha = if x0 >= 0.0 { -sigma } else { sigma };
    x[0] = x0 - alpha;
    (alpha, 1.0 / (sigma * (sigma + x0.abs())))
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators so the loop vectorises.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// `y += alpha · x`
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
