//! Small descriptive and goodness-of-fit statistics used by the suites.

use serde::{Deserialize, Serialize};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn std_dev(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

pub fn standard_error(xs: &[f64]) -> f64 {
    std_dev(xs) / (xs.len() as f64).sqrt()
}

pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Linear-interpolation quantile (Hyndman–Fan type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        len => {
            let h = (len - 1) as f64 * q.clamp(0.0, 1.0);
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(len - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

pub fn quantile(xs: &[f64], q: f64) -> f64 {
    quantile_sorted(&sorted(xs), q)
}

/// One-sample Kolmogorov–Smirnov distance `sup |F̂ − F|`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let xs = sorted(samples);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d: f64, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (xa, xb) = (sorted(a), sorted(b));
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let slope_se = if n > 2.0 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    LineFit {
        slope,
        intercept,
        slope_se,
    }
}

/// Least squares `y ≈ c0 + c1·x + c2·x²`; returns `([c0, c1, c2], se(c2))`.
pub fn quadratic_fit(x: &[f64], y: &[f64]) -> ([f64; 3], f64) {
    let mut g = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (&a, &b) in x.iter().zip(y) {
        let basis = [1.0, a, a * a];
        for i in 0..3 {
            rhs[i] += basis[i] * b;
            for j in 0..3 {
                g[i][j] += basis[i] * basis[j];
            }
        }
    }
    let Some(inv) = invert3(&g) else {
        return ([f64::NAN; 3], f64::NAN);
    };
    let mut c = [0.0; 3];
    for i in 0..3 {
        c[i] = (0..3).map(|j| inv[i][j] * rhs[j]).sum();
    }
    let n = x.len() as f64;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - c[0] - c[1] * a - c[2] * a * a).powi(2))
        .sum();
    let se = if n > 3.0 {
        (rss / (n - 3.0) * inv[2][2]).sqrt()
    } else {
        f64::NAN
    };
    (c, se)
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    Some(inv)
}

/// Min / median / max / mean / std of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Summary {
        let s = sorted(xs);
        Summary {
            count: s.len(),
            min: s.first().copied().unwrap_or(f64::NAN),
            median: quantile_sorted(&s, 0.5),
            max: s.last().copied().unwrap_or(f64::NAN),
            mean: mean(&s),
            std: std_dev(&s),
        }
    }
}

/// A fitted constant with a 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: usize,
}

impl Estimate {
    /// Sample mean with normal-approximation interval.
    pub fn mean(xs: &[f64]) -> Estimate {
        let m = mean(xs);
        let half = 1.96 * standard_error(xs);
        Estimate {
            value: m,
            ci_low: m - half,
            ci_high: m + half,
            samples: xs.len(),
        }
    }

    /// Sample quantile with a distribution-free order-statistic interval.
    pub fn quantile(xs: &[f64], q: f64) -> Estimate {
        let s = sorted(xs);
        let n = s.len();
        if n == 0 {
            return Estimate {
                value: f64::NAN,
                ci_low: f64::NAN,
                ci_high: f64::NAN,
                samples: 0,
            };
        }
        let nf = n as f64;
        let half = 1.96 * (nf * q * (1.0 - q)).sqrt();
        let lo = ((nf * q - half).floor().max(0.0) as usize).min(n - 1);
        let hi = ((nf * q + half).ceil().max(0.0) as usize).min(n - 1);
        Estimate {
            value: quantile_sorted(&s, q),
            ci_low: s[lo],
            ci_high: s[hi],
            samples: n,
        }
    }

    /// Sample maximum; the interval spans the top two order statistics.
    pub fn maximum(xs: &[f64]) -> Estimate {
        let s = sorted(xs);
        let n = s.len();
        let max = s.last().copied().unwrap_or(f64::NAN);
        Estimate {
            value: max,
            ci_low: if n >= 2 { s[n - 2] } else { max },
            ci_high: max,
            samples: n,
        }
    }
}

/// Counts of `xs` in `edges.len()-1` half-open bins `[e_i, e_{i+1})`.
pub fn histogram(xs: &[f64], edges: &[f64]) -> Vec<usize> {
    let mut counts = vec![0usize; edges.len().saturating_sub(1)];
    for &x in xs {
        if let Some(i) = edges.windows(2).position(|w| x >= w[0] && x < w[1]) {
            counts[i] += 1;
        }
    }
    counts
}
