use rand::Rng;
use rand_distr::StandardNormal;

/// Gamma(shape, 1) by Marsaglia–Tsang squeeze/rejection. Shapes below one are
/// boosted: `G(a) = G(a + 1) · U^{1/a}`.
pub fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let g = marsaglia_tsang(rng, shape + 1.0);
        let u: f64 = rng.random();
        return g * u.powf(1.0 / shape);
    }
    marsaglia_tsang(rng, shape)
}

fn marsaglia_tsang<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u: f64 = rng.random();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn moments_match_shape() {
        for &shape in &[0.25, 0.5, 1.0, 2.5] {
            let mut rng = rng_from_seed(11);
            let n = 200_000;
            let xs: Vec<f64> = (0..n).map(|_| sample_gamma(&mut rng, shape)).collect();
            let m = crate::stats::mean(&xs);
            let v = crate::stats::variance(&xs);
            // mean = var = shape
            let se_m = (shape / n as f64).sqrt();
            assert!((m - shape).abs() < 5.0 * se_m, "shape {shape}: mean {m}");
            assert!((v - shape).abs() < 0.05 * shape, "shape {shape}: var {v}");
        }
    }
}
