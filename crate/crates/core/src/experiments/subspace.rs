use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, Relation};
use super::runner::run_trials;
use super::{ConfigSource, ExperimentConfig, ShiftFn};
use crate::ensembles::{EnsembleFamily, MatrixSource};
use crate::error::{LabError, Result};
use crate::matrix::Matrix;
use crate::spectral::{shifted_matrix, vector_norm, OrthonormalBasis, ShiftSpec};
use crate::stats::{mean, standard_error, Estimate, Summary};

/// Diagnostics of a unit vector against the sparse vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Compressibility {
    /// Norm of all but the `⌊δn⌋` largest coordinates.
    pub dist_to_sparse: f64,
    pub is_compressible: bool,
    /// `#{i : |x_i| ≥ ρ/√(2n)}`
    pub spread_count: usize,
    pub spread_threshold: f64,
}

pub fn compressibility(x: &[Complex64], delta: f64, rho_comp: f64) -> Result<Compressibility> {
    let n = x.len();
    if n == 0 {
        return Err(LabError::invalid("x", "empty vector"));
    }
    if ((vector_norm(x)) - 1.0).abs() > 1e-8 {
        return Err(LabError::invalid("x", "vector must have unit norm"));
    }
    let keep = (delta * n as f64).floor() as usize;
    if keep < 1 {
        return Err(LabError::invalid("delta", "need δn ≥ 1"));
    }
    if !(rho_comp > 0.0) {
        return Err(LabError::invalid("rho_comp", "need ρ_comp > 0"));
    }
    let mut mags: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let dist = mags[keep.min(n)..].iter().map(|m| m * m).sum::<f64>().sqrt();
    let thr = rho_comp / (2.0 * n as f64).sqrt();
    Ok(Compressibility {
        dist_to_sparse: dist,
        is_compressible: dist <= rho_comp,
        spread_count: mags.iter().filter(|&&m| m >= thr).count(),
        spread_threshold: thr,
    })
}

/// Distance from row `k + 1` of `A + M` to the span of rows `1..=k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowDistance {
    pub k: usize,
    pub distance: f64,
    /// `distance / √(n − k)`
    pub ratio: f64,
    /// Rows among the first `k` found numerically dependent.
    pub dependent_rows: usize,
    /// Diagnostics of the unit normal direction `(Z_{k+1} − P_H Z_{k+1}) / d`.
    pub normal: Option<Compressibility>,
}

/// `DIST(Z_{k+1}, span(Z_1..Z_k))` for every `k` in `ks`, where `Z_j` are the
/// rows of `A + M = √n·(A/√n + M/√n − z)`.
pub fn row_distances(
    a: &Matrix,
    shift: &ShiftSpec,
    ks: &[usize],
    delta: f64,
    rho_comp: f64,
) -> Result<Vec<RowDistance>> {
    let n = a.rows();
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.last().is_some_and(|&k| k >= n) {
        return Err(LabError::invalid("k", "need k < n"));
    }
    let c = shifted_matrix(a, shift)?;
    let root = (n as f64).sqrt();
    let row = |j: usize| -> Vec<Complex64> { c.row(j).iter().map(|v| v * root).collect() };
    let mut basis = OrthonormalBasis::new(n);
    let mut pushed = 0;
    let mut out = Vec::with_capacity(ks.len());
    for k in ks {
        while pushed < k {
            basis.push(&row(pushed))?;
            pushed += 1;
        }
        let w = basis.residual(&row(k));
        let d = vector_norm(&w);
        let normal = (d > 0.0 && (delta * n as f64) >= 1.0)
            .then(|| {
                let u: Vec<Complex64> = w.iter().map(|x| x / d).collect();
                compressibility(&u, delta, rho_comp)
            })
            .transpose()?;
        out.push(RowDistance {
            k,
            distance: d,
            ratio: d / ((n - k) as f64).sqrt(),
            dependent_rows: basis.dependent_count(),
            normal,
        });
    }
    Ok(out)
}

#[derive(Serialize)]
struct KSummary {
    k: usize,
    ratio: Summary,
    ratio_p05: Estimate,
    d2_mean: f64,
    d2_se: f64,
    n_minus_k: usize,
    compressible: usize,
    spread_min: Option<usize>,
    dependent_events: usize,
}

/// Distance ratios `d_k/√(n − k)` over `k ∈ k_grid·n`, plus the
/// compressibility of the normal direction.
pub fn run_distance_subspace(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let shift = |_: usize| Ok(config.shift());
    run_distance_subspace_with(config, &ConfigSource(config), &shift)
}

pub fn run_distance_subspace_with(
    config: &ExperimentConfig,
    source: &dyn MatrixSource,
    shift: &ShiftFn,
) -> Result<ExperimentReport> {
    config.validate()?;
    let sizes = config.sizes();
    let ks_for = |n: usize| -> Vec<usize> {
        let mut ks: Vec<usize> = config
            .k_grid
            .iter()
            .map(|f| ((f * n as f64).round() as usize).min(n.saturating_sub(1)))
            .collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    };
    let outcomes = run_trials(&sizes, config.trials, config.seed, |n, seed| {
        let a = source.sample(n, seed)?;
        let s = shift(n)?;
        let gaussian_oracle = config.ensemble == EnsembleFamily::Ginibre && s.z.norm() == 0.0 && s.m.is_none();
        row_distances(&a, &s, &ks_for(n), config.delta, config.rho_comp).map(|d| (d, gaussian_oracle))
    })?;
    let mut report = ExperimentReport::new("distance_subspace", config, source.label());
    let mut oracle_applies = false;
    for &n in &sizes {
        let mut per_k: BTreeMap<usize, Vec<RowDistance>> = BTreeMap::new();
        for o in outcomes.iter().filter(|o| o.n == n) {
            let Some((dists, oracle)) = report.accept(o) else { continue };
            oracle_applies |= *oracle;
            let mut m = BTreeMap::new();
            let idx = report.records.len();
            for d in dists {
                m.insert(format!("ratio@k={}", d.k), d.ratio);
                report.dumps.distances.push((idx, d.k, d.distance));
                per_k.entry(d.k).or_default().push(*d);
            }
            report.record(n, o.trial, o.seed, m);
        }
        let mut ks_summary = Vec::new();
        for (k, list) in &per_k {
            let ratios: Vec<f64> = list.iter().map(|d| d.ratio).collect();
            let d2: Vec<f64> = list.iter().map(|d| d.distance * d.distance).collect();
            let p05 = Estimate::quantile(&ratios, 0.05);
            let nk = n - k;
            if nk >= 16 {
                report.check(format!("n={n},k={k}: ratio_p05"), p05.value, Relation::AtLeast, 0.1);
            }
            let (d2_mean, d2_se) = (mean(&d2), standard_error(&d2));
            if oracle_applies && list.len() >= 2 {
                let z = (d2_mean - nk as f64).abs() / d2_se;
                report.check(format!("n={n},k={k}: chi_square_mean_z"), z, Relation::AtMost, 5.0);
            }
            let dependent_events = list.iter().filter(|d| d.dependent_rows > 0).count();
            report.violations += ratios.iter().filter(|&&r| r < 0.1).count();
            ks_summary.push(KSummary {
                k: *k,
                ratio: Summary::of(&ratios),
                ratio_p05: p05,
                d2_mean,
                d2_se,
                n_minus_k: nk,
                compressible: list.iter().filter(|d| d.normal.is_some_and(|c| c.is_compressible)).count(),
                spread_min: list.iter().filter_map(|d| d.normal.map(|c| c.spread_count)).min(),
                dependent_events,
            });
        }
        report.summarize(format!("n={n}"), ks_summary);
    }
    report.finish(true);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn compressibility_examples() {
        let mut e1 = vec![c(0.0); 8];
        e1[0] = c(1.0);
        let r = compressibility(&e1, 0.25, 1e-3).unwrap();
        assert_eq!(r.dist_to_sparse, 0.0);
        assert!(r.is_compressible);
        let flat = vec![c(1.0 / 8f64.sqrt()); 8];
        let r = compressibility(&flat, 0.25, 0.1).unwrap();
        assert!((r.dist_to_sparse - (6.0f64 / 8.0).sqrt()).abs() < 1e-12);
        assert!(!r.is_compressible);
        assert_eq!(r.spread_count, 8);
        assert!(compressibility(&vec![c(1.0); 8], 0.25, 0.1).is_err());
        assert!(compressibility(&e1, 0.1, 0.1).is_err());
    }

    #[test]
    fn identity_rows_are_orthogonal() {
        let a = Matrix::identity(4).scaled(2.0);
        let d = row_distances(&a, &ShiftSpec::zero(), &[0, 1, 3], 0.25, 0.1).unwrap();
        for r in &d {
            assert!((r.distance - 2.0).abs() < 1e-12);
        }
        assert!(row_distances(&a, &ShiftSpec::zero(), &[4], 0.25, 0.1).is_err());
    }
}
