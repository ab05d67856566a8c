use num_complex::Complex64;
use serde::Serialize;

use super::report::{ExperimentReport, Relation};
use super::runner::run_trials;
use super::{z_key, ConfigSource, ExperimentConfig};
use crate::ensembles::MatrixSource;
use crate::error::Result;
use crate::measures::{
    default_r_grid, disc_uniformity, esd, EmpiricalMeasure, PotentialComparison, DEFAULT_SECTORS,
};
use crate::metrics;
use crate::spectral::{eigenvalues, shifted_singular_values, ShiftSpec};
use crate::stats::{mean, standard_error, Summary};

struct Trial {
    measure: EmpiricalMeasure,
    radial: f64,
    sector: f64,
    outside: f64,
    pairing: f64,
    potentials: Vec<PotentialComparison>,
}

#[derive(Serialize)]
struct PotentialSummary {
    z_re: f64,
    z_im: f64,
    #[serde(rename = "U_n_mean")]
    u_n_mean: f64,
    #[serde(rename = "U_n_se")]
    u_n_se: f64,
    #[serde(rename = "U_theory")]
    u_theory: f64,
    abs_error: f64,
    /// Mean of `∫ log s dν_{z,n}` (the opposite-sign expression).
    integral_log_s_mean: f64,
    degenerate: usize,
}

#[derive(Serialize)]
struct SizeSummary {
    trials_used: usize,
    pooled_radial_discrepancy: f64,
    pooled_sector_discrepancy: f64,
    pooled_mass_outside: f64,
    trial_radial: Summary,
    trial_sector: Summary,
    potentials: Vec<PotentialSummary>,
}

/// Eigenvalue cloud of `A/√n`, disc statistics and potentials at `z_points`.
pub fn run_circular_law(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_circular_law_with(config, &ConfigSource(config))
}

pub fn run_circular_law_with(
    config: &ExperimentConfig,
    source: &dyn MatrixSource,
) -> Result<ExperimentReport> {
    config.validate()?;
    let sizes = config.sizes();
    let r_grid = default_r_grid();
    let outcomes = run_trials(&sizes, config.trials, config.seed, |n, seed| {
        let a = source.sample(n, seed)?;
        let spectrum = eigenvalues(&a)?;
        let measure = esd(&spectrum, true)?;
        let disc = disc_uniformity(&measure, &r_grid, DEFAULT_SECTORS)?;
        let spec = config.spec(n).with_seed(seed);
        let potentials = config
            .z_points
            .iter()
            .map(|&z| {
                let s = shifted_singular_values(&a, &ShiftSpec::scalar(z))?;
                PotentialComparison::new(z, &s, spec)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Trial {
            pairing: spectrum.conjugate_pairing_error() / (n as f64).sqrt(),
            measure,
            radial: disc.radial_discrepancy,
            sector: disc.sector_discrepancy,
            outside: disc.mass_outside,
            potentials,
        })
    })?;

    let mut report = ExperimentReport::new("circular_law", config, source.label());
    let largest = config.largest_n();
    for &n in &sizes {
        let mut measures = Vec::new();
        let (mut radial, mut sector) = (Vec::new(), Vec::new());
        let mut pots: Vec<Vec<PotentialComparison>> = vec![Vec::new(); config.z_points.len()];
        for o in outcomes.iter().filter(|o| o.n == n) {
            let Some(t) = report.accept(o) else { continue };
            let mut m = metrics! {
                "radial_discrepancy" => t.radial,
                "sector_discrepancy" => t.sector,
                "mass_outside" => t.outside,
                "conjugate_pairing_error" => t.pairing,
            };
            for p in &t.potentials {
                m.insert(z_key("U_n", p.z()), p.u_n);
            }
            let idx = report.record(n, o.trial, o.seed, m);
            for (k, atom) in t.measure.atoms().iter().enumerate() {
                report.dumps.eigenvalues.push((idx, k, atom.position));
            }
            for (slot, p) in pots.iter_mut().zip(&t.potentials) {
                if p.degenerate {
                    report.violations += 1;
                }
                slot.push(p.clone());
                report.dumps.potentials.push(p.clone());
            }
            radial.push(t.radial);
            sector.push(t.sector);
            measures.push(t.measure.clone());
        }
        if measures.is_empty() {
            continue;
        }
        let pooled = disc_uniformity(&EmpiricalMeasure::pooled(&measures)?, &r_grid, DEFAULT_SECTORS)?;
        let potentials: Vec<PotentialSummary> = config
            .z_points
            .iter()
            .zip(&pots)
            .map(|(&z, list)| potential_summary(z, list))
            .collect();
        if n == largest {
            report.check("pooled_radial_discrepancy", pooled.radial_discrepancy, Relation::AtMost, config.radial_tol);
            report.check("pooled_sector_discrepancy", pooled.sector_discrepancy, Relation::AtMost, config.sector_tol);
            for p in &potentials {
                let z = Complex64::new(p.z_re, p.z_im);
                report.check(z_key("potential_error", z), p.abs_error, Relation::AtMost, config.potential_tol);
            }
        }
        report.summarize(
            format!("n={n}"),
            SizeSummary {
                trials_used: measures.len(),
                pooled_radial_discrepancy: pooled.radial_discrepancy,
                pooled_sector_discrepancy: pooled.sector_discrepancy,
                pooled_mass_outside: pooled.mass_outside,
                trial_radial: Summary::of(&radial),
                trial_sector: Summary::of(&sector),
                potentials,
            },
        );
    }
    report.summarize("potential_sign_convention", "U_n = -(1/n) sum log s_i; integral_log_s = -U_n");
    report.finish(largest >= 4);
    Ok(report)
}

fn potential_summary(z: Complex64, list: &[PotentialComparison]) -> PotentialSummary {
    let finite: Vec<f64> = list.iter().filter(|p| !p.degenerate).map(|p| p.u_n).collect();
    let degenerate = list.len() - finite.len();
    let u_theory = crate::measures::circular_potential(z);
    let u_n_mean = if degenerate > 0 { f64::INFINITY } else { mean(&finite) };
    PotentialSummary {
        z_re: z.re,
        z_im: z.im,
        u_n_mean,
        u_n_se: standard_error(&finite),
        u_theory,
        abs_error: (u_n_mean - u_theory).abs(),
        integral_log_s_mean: -u_n_mean,
        degenerate,
    }
}
