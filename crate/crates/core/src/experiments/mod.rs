//! Monte Carlo suites.
//!
//! Each suite is a pure function of its [`ExperimentConfig`]: trial `t` at
//! size `n` draws its matrix from the seed [`trial_seed`]`(seed, n, t)`, so
//! reports are reproducible and adding trials only appends records. Trials run
//! in parallel (capped by `RMLAB_THREADS`); failed decompositions are recorded
//! as exclusions, and more than 1% of them fails the suite.
//!
//! The `_with` variants take any [`MatrixSource`] and, where relevant, a shift
//! per size, so deterministic stubs can be fed through the same pipeline.

mod circular;
mod concentration;
mod config;
mod report;
mod runner;
mod singular;
mod subspace;
mod tails;

use crate::ensembles::MatrixSource;
use crate::error::Result;
use crate::spectral::ShiftSpec;

pub use circular::{run_circular_law, run_circular_law_with};
pub use concentration::{
    run_stieltjes_concentration, run_stieltjes_concentration_with, stieltjes_lipschitz_check,
    LipschitzCheck, STIELTJES_XI,
};
pub use config::{parse_z, z_list_serde, z_serde, ExperimentConfig};
pub use report::{
    Check, Dumps, Exclusion, ExperimentReport, Provenance, Relation, TrialRecord, Verdict,
    MAX_EXCLUDED_FRACTION,
};
pub use runner::{thread_cap, trial_seed, with_thread_cap};
pub use singular::{
    run_operator_norm, run_operator_norm_with, run_small_sv_counts, run_small_sv_counts_with,
    run_smallest_sv, run_smallest_sv_with, EPS_GRID,
};
pub use subspace::{
    compressibility, row_distances, run_distance_subspace, run_distance_subspace_with,
    Compressibility, RowDistance,
};
pub use tails::{run_tail_suite, SMALL_BALL_EPS};

/// Shift used at each matrix size.
pub type ShiftFn<'a> = dyn Fn(usize) -> Result<ShiftSpec> + Sync + 'a;

/// The config's ensemble as a [`MatrixSource`].
struct ConfigSource<'a>(&'a ExperimentConfig);

impl MatrixSource for ConfigSource<'_> {
    fn label(&self) -> String {
        self.0.spec(self.0.largest_n()).label()
    }

    fn sample(&self, n: usize, seed: u64) -> Result<crate::Matrix> {
        crate::ensembles::sample_matrix(&self.0.spec(n).with_seed(seed))
    }
}

fn z_key(prefix: &str, z: num_complex::Complex64) -> String {
    format!("{prefix}@{},{}", z.re, z.im)
}
