use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, Relation};
use super::runner::run_trials;
use super::{ConfigSource, ExperimentConfig};
use crate::ensembles::MatrixSource;
use crate::error::{LabError, Result};
use crate::matrix::ComplexMatrix;
use crate::measures::{singular_measure, stieltjes};
use crate::metrics;
use crate::rng::{child_seed, rng_from_seed};
use crate::spectral::{complex_singular_values, shifted_singular_values, SingularSpectrum, SvdRoute};
use crate::stats::{mean, variance};

/// Evaluation point of the Stieltjes transform.
pub const STIELTJES_XI: Complex64 = Complex64::new(0.0, 2.0);

/// Across-trial spread of `m_{ν_{z,n}}(2i)` for each `n` of the size list.
pub fn run_stieltjes_concentration(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_stieltjes_concentration_with(config, &ConfigSource(config))
}

pub fn run_stieltjes_concentration_with(
    config: &ExperimentConfig,
    source: &dyn MatrixSource,
) -> Result<ExperimentReport> {
    config.validate()?;
    let mut sizes = config.sizes();
    sizes.sort_unstable();
    sizes.dedup();
    let shift = config.shift();
    let outcomes = run_trials(&sizes, config.trials, config.seed, |n, seed| {
        let a = source.sample(n, seed)?;
        let s = shifted_singular_values(&a, &shift)?;
        stieltjes(&singular_measure(&s)?, STIELTJES_XI)
    })?;
    let mut report = ExperimentReport::new("stieltjes_concentration", config, source.label());
    let mut stds = Vec::new();
    for &n in &sizes {
        let mut vals = Vec::new();
        for o in outcomes.iter().filter(|o| o.n == n) {
            let Some(&m) = report.accept(o) else { continue };
            report.record(n, o.trial, o.seed, metrics! { "m_re" => m.re, "m_im" => m.im });
            vals.push(m);
        }
        if vals.is_empty() {
            continue;
        }
        let re: Vec<f64> = vals.iter().map(|m| m.re).collect();
        let im: Vec<f64> = vals.iter().map(|m| m.im).collect();
        let std = if vals.len() > 1 {
            (variance(&re) + variance(&im)).sqrt()
        } else {
            0.0
        };
        stds.push((n, std));
        report.summarize(
            format!("n={n}"),
            serde_json::json!({
                "trials_used": vals.len(),
                "mean_re": mean(&re),
                "mean_im": mean(&im),
                "std": std,
            }),
        );
    }
    let ratios: Vec<f64> = stds
        .windows(2)
        .map(|w| if w[0].1 > 0.0 { w[1].1 / w[0].1 } else { f64::NAN })
        .collect();
    for (w, r) in stds.windows(2).zip(&ratios) {
        report.check(format!("std ratio n={}->{}", w[0].0, w[1].0), *r, Relation::AtMost, 0.8);
    }
    report.summarize("std_by_n", &stds);
    report.summarize("std_ratios", &ratios);
    report.summarize("xi", [STIELTJES_XI.re, STIELTJES_XI.im]);
    report.finish(stds.len() >= 2);
    Ok(report)
}

/// Outcome of the perturbation check `|Δm| ≤ ‖ΔC‖_HS / (√n (Im ξ)²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCheck {
    pub n: usize,
    pub pairs: usize,
    pub violations: usize,
    /// Largest `|Δm| / bound`.
    pub max_ratio: f64,
}

/// Random complex `C = G/√n − z` and perturbations `C' = C + t·E/√n` with
/// `t` spread over four decades.
pub fn stieltjes_lipschitz_check(n: usize, pairs: usize, xi: Complex64, seed: u64) -> Result<LipschitzCheck> {
    if n == 0 || pairs == 0 {
        return Err(LabError::invalid("n", "need n ≥ 1 and at least one pair"));
    }
    if !(xi.im > 0.0) {
        return Err(LabError::invalid("xi", "need Im ξ > 0"));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut violations = 0;
    let mut max_ratio: f64 = 0.0;
    for p in 0..pairs {
        let mut rng = rng_from_seed(child_seed(seed, p as u64));
        let z = Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let mut gauss = || -> f64 { rng.sample(StandardNormal) };
        let c = ComplexMatrix::from_fn(n, n, |i, j| {
            let v = Complex64::new(gauss() * scale, 0.0);
            if i == j {
                v - z
            } else {
                v
            }
        });
        let t = 10f64.powf(-3.0 + 4.0 * (p as f64 + 0.5) / pairs as f64);
        let c2 = ComplexMatrix::from_fn(n, n, |i, j| c[(i, j)] + Complex64::new(gauss(), gauss()) * (t * scale));
        let m = |mat: &ComplexMatrix| -> Result<Complex64> {
            let s = SingularSpectrum::from_values(complex_singular_values(mat, SvdRoute::Embedding)?, crate::spectral::ShiftSpec::zero())?;
            stieltjes(&singular_measure(&s)?, xi)
        };
        let lhs = (m(&c)? - m(&c2)?).norm();
        let bound = c.sub(&c2)?.frobenius_norm() / ((n as f64).sqrt() * xi.im * xi.im);
        if lhs > bound * (1.0 + 1e-10) {
            violations += 1;
        }
        max_ratio = max_ratio.max(lhs / bound);
    }
    Ok(LipschitzCheck {
        n,
        pairs,
        violations,
        max_ratio,
    })
}
