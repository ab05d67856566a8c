use serde::Serialize;

use super::report::{ExperimentReport, Relation};
use super::runner::run_trials;
use super::{ConfigSource, ExperimentConfig, ShiftFn};
use crate::ensembles::MatrixSource;
use crate::error::Result;
use crate::metrics;
use crate::spectral::{shifted_singular_values, SingularSpectrum};
use crate::stats::{histogram, quadratic_fit, quantile, Estimate, Summary};

/// ε grid for the empirical law of `√n·s_n(A + M)`.
pub const EPS_GRID: [f64; 9] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0];

/// Fewest positive exceedances for the tail-shape fit.
const MIN_TAIL_POINTS: usize = 5;

fn default_shift(config: &ExperimentConfig) -> impl Fn(usize) -> Result<crate::spectral::ShiftSpec> + Sync + '_ {
    move |_| Ok(config.shift())
}

fn shifted(
    source: &dyn MatrixSource,
    shift: &ShiftFn,
    n: usize,
    seed: u64,
) -> Result<SingularSpectrum> {
    let a = source.sample(n, seed)?;
    shifted_singular_values(&a, &shift(n)?)
}

#[derive(Serialize)]
struct NormSummary {
    ratio: Summary,
    spread: f64,
    c_hat: Estimate,
    r: f64,
    tail_points: usize,
    tail_quadratic: Option<[f64; 3]>,
    tail_quadratic_se: Option<f64>,
}

/// `‖A + M‖/√n` per trial, the constant `Ĉ = max(‖A+M‖/√n − R)` and the
/// shape of the exceedance tail over the median.
pub fn run_operator_norm(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_operator_norm_with(config, &ConfigSource(config), &default_shift(config))
}

pub fn run_operator_norm_with(
    config: &ExperimentConfig,
    source: &dyn MatrixSource,
    shift: &ShiftFn,
) -> Result<ExperimentReport> {
    config.validate()?;
    let sizes = config.sizes();
    let outcomes = run_trials(&sizes, config.trials, config.seed, |n, seed| {
        let s = shifted(source, shift, n, seed)?;
        Ok((s.largest(), s.shift.r))
    })?;
    let mut report = ExperimentReport::new("operator_norm", config, source.label());
    let largest = config.largest_n();
    for &n in &sizes {
        let mut ratios = Vec::new();
        let mut r_budget = 0.0f64;
        for o in outcomes.iter().filter(|o| o.n == n) {
            let Some(&(ratio, r)) = report.accept(o) else { continue };
            r_budget = r;
            report.record(n, o.trial, o.seed, metrics! { "norm_ratio" => ratio, "excess" => ratio - r });
            ratios.push(ratio);
        }
        if ratios.is_empty() {
            continue;
        }
        let excess: Vec<f64> = ratios.iter().map(|x| x - r_budget).collect();
        let c_hat = Estimate::maximum(&excess);
        let tail = tail_shape(&ratios);
        let summary = Summary::of(&ratios);
        if n == largest {
            report.check("c_hat", c_hat.value, Relation::AtMost, 6.0);
            if let Some((c, se)) = tail {
                // convex log-survival would mean a heavier-than-exponential tail
                report.check("tail_curvature_minus_2se", c[2] - 2.0 * se, Relation::AtMost, 0.0);
            }
        }
        report.summarize(
            format!("n={n}"),
            NormSummary {
                spread: summary.max - summary.min,
                ratio: summary,
                c_hat,
                r: r_budget,
                tail_points: tail_points(&ratios).0.len(),
                tail_quadratic: tail.map(|t| t.0),
                tail_quadratic_se: tail.map(|t| t.1),
            },
        );
    }
    report.finish(true);
    Ok(report)
}

/// Points `(t, log P̂(X − median ≥ t))` over the positive exceedances.
fn tail_points(xs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let med = quantile(xs, 0.5);
    let mut exc: Vec<f64> = xs.iter().map(|x| x - med).filter(|e| *e > 0.0).collect();
    exc.sort_by(f64::total_cmp);
    let total = xs.len() as f64;
    let m = exc.len();
    let ts = exc.clone();
    let ls = (0..m).map(|j| ((m - j) as f64 / total).ln()).collect();
    (ts, ls)
}

fn tail_shape(xs: &[f64]) -> Option<([f64; 3], f64)> {
    let (t, l) = tail_points(xs);
    if t.len() < MIN_TAIL_POINTS || t.first() == t.last() {
        return None;
    }
    let (c, se) = quadratic_fit(&t, &l);
    (c.iter().all(|v| v.is_finite()) && se.is_finite()).then_some((c, se))
}

#[derive(Serialize)]
struct SmallestSummary {
    threshold: f64,
    events: usize,
    frequency: f64,
    at_numerical_floor: usize,
    raw: Summary,
    eps_grid: Vec<f64>,
    /// `P̂(√n·s_n(A+M) ≤ ε)`
    eps_cdf: Vec<f64>,
    /// `max_{ε ∈ [0.05, 0.5]} P̂/ε`
    eps_slope_max: f64,
    histogram: Histogram,
}

/// Counts of `log10 s_n(A+M)`; values outside the edges land in the end counts.
#[derive(Serialize)]
struct Histogram {
    log10_edges: Vec<f64>,
    counts: Vec<usize>,
    below: usize,
    above: usize,
}

impl Histogram {
    fn of_log10(xs: &[f64]) -> Self {
        let log10_edges: Vec<f64> = (0..=20).map(|i| -8.0 + 0.5 * i as f64).collect();
        let lx: Vec<f64> = xs.iter().map(|x| x.log10()).collect();
        let lo = log10_edges[0];
        let hi = log10_edges[log10_edges.len() - 1];
        Histogram {
            counts: histogram(&lx, &log10_edges),
            below: lx.iter().filter(|&&v| v < lo).count(),
            above: lx.iter().filter(|&&v| v >= hi).count(),
            log10_edges,
        }
    }
}

/// `s_n(A + M)` per trial against `n^{−6.5}`, with the ε-scan of `√n·s_n`.
pub fn run_smallest_sv(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_smallest_sv_with(config, &ConfigSource(config), &default_shift(config))
}

pub fn run_smallest_sv_with(
    config: &ExperimentConfig,
    source: &dyn MatrixSource,
    shift: &ShiftFn,
) -> Result<ExperimentReport> {
    config.validate()?;
    let sizes = config.sizes();
    let outcomes = run_trials(&sizes, config.trials, config.seed, |n, seed| {
        let s = shifted(source, shift, n, seed)?;
        Ok((s.smallest(), s.at_numerical_floor()))
    })?;
    let mut report = ExperimentReport::new("smallest_sv", config, source.label());
    for &n in &sizes {
        let nf = n as f64;
        let threshold = nf.powf(-6.5);
        let mut raw = Vec::new();
        let mut floor = 0usize;
        for o in outcomes.iter().filter(|o| o.n == n) {
            let Some(&(s, at_floor)) = report.accept(o) else { continue };
            // s is s_n((A+M)/√n); the lemma is about s_n(A+M)
            let s_raw = s * nf.sqrt();
            floor += at_floor as usize;
            let idx = report.record(
                n,
                o.trial,
                o.seed,
                metrics! {
                    "s_n" => s_raw,
                    "sqrt_n_s_n" => s_raw * nf.sqrt(),
                    "at_numerical_floor" => at_floor as u8,
                },
            );
            report.dumps.singulars.push((idx, n - 1, s));
            raw.push(s_raw);
        }
        if raw.is_empty() {
            continue;
        }
        let events = raw.iter().filter(|&&s| s <= threshold).count();
        report.violations += events;
        let frequency = events as f64 / raw.len() as f64;
        let scaled: Vec<f64> = raw.iter().map(|s| s * nf.sqrt()).collect();
        let eps_cdf: Vec<f64> = EPS_GRID
            .iter()
            .map(|&e| scaled.iter().filter(|&&x| x <= e).count() as f64 / scaled.len() as f64)
            .collect();
        let eps_slope_max = EPS_GRID
            .iter()
            .zip(&eps_cdf)
            .filter(|(e, _)| (0.05..=0.5).contains(*e))
            .map(|(e, f)| f / e)
            .fold(0.0, f64::max);
        report.check(format!("n={n}: frequency(s_n <= n^-6.5)"), frequency, Relation::AtMost, 0.05);
        report.summarize(
            format!("n={n}"),
            SmallestSummary {
                threshold,
                events,
                frequency,
                at_numerical_floor: floor,
                raw: Summary::of(&raw),
                eps_grid: EPS_GRID.to_vec(),
                eps_cdf,
                eps_slope_max,
                histogram: Histogram::of_log10(&raw),
            },
        );
    }
    report.finish(true);
    Ok(report)
}

#[derive(Serialize)]
struct CountSummary {
    i_min: usize,
    min_ratio: f64,
    c_hat: Estimate,
    trial_min_ratio: Summary,
    integrability: Summary,
}

/// `s_{n−i}((A+M)/√n) / (i/n)` for `n^γ ≤ i ≤ n − 1`; `ĉ_R` is the pooled
/// 1st percentile.
pub fn run_small_sv_counts(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_small_sv_counts_with(config, &ConfigSource(config), &default_shift(config))
}

pub fn run_small_sv_counts_with(
    config: &ExperimentConfig,
    source: &dyn MatrixSource,
    shift: &ShiftFn,
) -> Result<ExperimentReport> {
    config.validate()?;
    let sizes = config.sizes();
    let outcomes = run_trials(&sizes, config.trials, config.seed, |n, seed| {
        shifted(source, shift, n, seed)
    })?;
    let mut report = ExperimentReport::new("small_sv_counts", config, source.label());
    let mut c_hats: Vec<(usize, f64)> = Vec::new();
    for &n in &sizes {
        let nf = n as f64;
        let i_min = (nf.powf(config.gamma).ceil() as usize).max(1);
        let mut pooled = Vec::new();
        let mut trial_min = Vec::new();
        let mut integ = Vec::new();
        for o in outcomes.iter().filter(|o| o.n == n) {
            let Some(s) = report.accept(o) else { continue };
            let ratios: Vec<f64> = (i_min..n)
                .map(|i| s.values[n - i - 1] / (i as f64 / nf))
                .collect();
            let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let ui = crate::measures::uniform_integrability_stat(s, config.alpha)?;
            let idx = report.record(
                n,
                o.trial,
                o.seed,
                metrics! { "min_ratio" => min, "integrability" => ui, "s_n" => s.smallest() },
            );
            for (k, v) in s.values.iter().enumerate() {
                report.dumps.singulars.push((idx, k, *v));
            }
            if min <= 0.0 {
                report.violations += 1;
            }
            trial_min.push(min);
            integ.push(ui);
            pooled.extend(ratios);
        }
        if pooled.is_empty() {
            continue;
        }
        let min_ratio = trial_min.iter().copied().fold(f64::INFINITY, f64::min);
        let c_hat = Estimate::quantile(&pooled, 0.01);
        c_hats.push((n, c_hat.value));
        report.check(format!("n={n}: min_ratio"), min_ratio, Relation::Above, 0.0);
        report.summarize(
            format!("n={n}"),
            CountSummary {
                i_min,
                min_ratio,
                c_hat,
                trial_min_ratio: Summary::of(&trial_min),
                integrability: Summary::of(&integ),
            },
        );
    }
    c_hats.sort_by_key(|&(n, _)| n);
    if let [.., (n1, c1), (n2, c2)] = c_hats.as_slice() {
        let ratio = c2 / c1;
        report.summarize("c_hat_ratio", serde_json::json!({ "from": n1, "to": n2, "ratio": ratio }));
        report.check("c_hat_ratio_lower", ratio, Relation::AtLeast, 0.5);
        report.check("c_hat_ratio_upper", ratio, Relation::AtMost, 2.0);
    }
    report.finish(true);
    Ok(report)
}
