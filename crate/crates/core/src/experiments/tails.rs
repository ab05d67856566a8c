use rand::Rng;
use serde::Serialize;

use super::report::{ExperimentReport, Relation};
use super::runner::run_trials;
use super::ExperimentConfig;
use crate::ensembles::{sample_matrix, tail_survival, EnsembleFamily, EnsembleSpec};
use crate::error::Result;
use crate::metrics;
use crate::rng::{child_seed, rng_from_seed};
use crate::stats::{ks_two_sample, linear_fit, mean, quantile, variance, LineFit};

pub const SMALL_BALL_EPS: [f64; 3] = [0.01, 0.05, 0.1];

/// Survival points with fewer hits are left out of the tail fit.
const MIN_TAIL_COUNT: f64 = 10.0;

/// Stream offset separating the comparison vector from the ensemble draws.
const COMPARISON_STREAM: u64 = 1 << 63;

struct Trial {
    entries: Vec<f64>,
    flipped: Vec<f64>,
    norms: [f64; 4],
}

#[derive(Serialize)]
struct TailSummary {
    entries: usize,
    mean: f64,
    variance: f64,
    variance_se: f64,
    survival: Vec<(f64, f64)>,
    fit: Option<LineFit>,
    small_ball: Vec<(f64, f64)>,
    small_ball_c: f64,
    sign_flip_ks: f64,
    q99_inf: [f64; 2],
    q99_two: [f64; 2],
    domination_inf: f64,
    domination_two: f64,
}

/// Entry tails, small-ball constants, isotropy and quantile domination by the
/// symmetric exponential vector, on `trials` matrices of the largest size.
pub fn run_tail_suite(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let n = config.largest_n();
    let spec = config.spec(n);
    let comparison = EnsembleSpec::new(EnsembleFamily::LaplaceIid, n, 0);
    let outcomes = run_trials(&[n], config.trials, config.seed, |_, seed| {
        let a = sample_matrix(&spec.with_seed(seed))?;
        let e = sample_matrix(&comparison.with_seed(child_seed(seed, COMPARISON_STREAM)))?;
        let mut rng = rng_from_seed(child_seed(seed, COMPARISON_STREAM + 1));
        let entries = a.into_vec();
        let flipped = entries
            .iter()
            .map(|&x| if rng.random::<bool>() { x } else { -x })
            .collect();
        let norms = [
            max_abs(&entries),
            euclid(&entries),
            max_abs(e.as_slice()),
            euclid(e.as_slice()),
        ];
        Ok(Trial { entries, flipped, norms })
    })?;

    let mut report = ExperimentReport::new("tails", config, spec.label());
    let (mut all, mut flipped) = (Vec::new(), Vec::new());
    let mut norms: [Vec<f64>; 4] = Default::default();
    for o in &outcomes {
        let Some(t) = report.accept(o) else { continue };
        report.record(
            n,
            o.trial,
            o.seed,
            metrics! {
                "norm_inf" => t.norms[0],
                "norm_2" => t.norms[1],
                "comparison_norm_inf" => t.norms[2],
                "comparison_norm_2" => t.norms[3],
            },
        );
        all.extend_from_slice(&t.entries);
        flipped.extend_from_slice(&t.flipped);
        for (dst, v) in norms.iter_mut().zip(t.norms) {
            dst.push(v);
        }
    }
    if all.is_empty() {
        report.finish(false);
        return Ok(report);
    }

    let count = all.len() as f64;
    let m = mean(&all);
    let squares: Vec<f64> = all.iter().map(|x| x * x).collect();
    let var = mean(&squares) - m * m;
    let var_se = (variance(&squares) / count).sqrt();
    report.check("isotropy: |mean|·sqrt(N)", m.abs() * count.sqrt(), Relation::AtMost, 3.0);
    report.check("isotropy: |variance - 1| / se", (var - 1.0).abs() / var_se, Relation::AtMost, 3.0);

    let t_grid: Vec<f64> = (0..=16).map(|i| 1.0 + 0.25 * i as f64).collect();
    let survival = if all.len() >= 1000 {
        tail_survival(&all, &t_grid)?
    } else {
        Vec::new()
    };
    let fit_pts: Vec<(f64, f64)> = survival
        .iter()
        .filter(|(_, s)| s * count >= MIN_TAIL_COUNT)
        .map(|&(t, s)| (t, -s.ln()))
        .collect();
    let fit = (fit_pts.len() >= 3).then(|| {
        let (x, y): (Vec<f64>, Vec<f64>) = fit_pts.into_iter().unzip();
        linear_fit(&x, &y)
    });
    if let Some(f) = fit {
        report.check("tail: fitted decay rate", f.slope, Relation::Above, 0.0);
        if config.ensemble == EnsembleFamily::LaplaceIid {
            report.check(
                "tail: |slope - sqrt(2)|",
                (f.slope - std::f64::consts::SQRT_2).abs(),
                Relation::AtMost,
                0.1,
            );
        }
    }

    let small_ball: Vec<(f64, f64)> = SMALL_BALL_EPS
        .iter()
        .map(|&e| (e, all.iter().filter(|x| x.abs() <= e).count() as f64 / count))
        .collect();
    let small_ball_c = small_ball.iter().map(|(e, p)| p / e).fold(0.0, f64::max);
    report.check("small_ball: max P(|X| <= eps)/eps", small_ball_c, Relation::AtMost, 2.0);

    let sign_flip_ks = ks_two_sample(&all, &flipped);
    // 0.02, or the two-sample KS critical value at level 0.001 when samples are few
    let ks_tol = (1.95 * (2.0 / all.len() as f64).sqrt()).max(0.02);
    report.check("unconditional: KS(A, sign-flipped A)", sign_flip_ks, Relation::AtMost, ks_tol);

    let q = |v: &[f64]| quantile(v, 0.99);
    let q99_inf = [q(&norms[0]), q(&norms[2])];
    let q99_two = [q(&norms[1]), q(&norms[3])];
    let domination_inf = q99_inf[0] / q99_inf[1];
    let domination_two = q99_two[0] / q99_two[1];
    report.check("domination: q99 ratio, sup norm", domination_inf, Relation::AtMost, 10.0);
    report.check("domination: q99 ratio, euclidean norm", domination_two, Relation::AtMost, 10.0);

    report.summarize(
        format!("n={n}"),
        TailSummary {
            entries: all.len(),
            mean: m,
            variance: var,
            variance_se: var_se,
            survival,
            fit,
            small_ball,
            small_ball_c,
            sign_flip_ks,
            q99_inf,
            q99_two,
            domination_inf,
            domination_two,
        },
    );
    report.finish(true);
    Ok(report)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
