//! Subcommands and their output files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rmlab_core::ensembles::{
    cached_calibrations, load_calibration_cache, sample_matrix, save_calibration_cache,
};
use rmlab_core::experiments::{
    run_circular_law, run_distance_subspace, run_operator_norm, run_small_sv_counts,
    run_smallest_sv, run_stieltjes_concentration, run_tail_suite, trial_seed, ExperimentConfig,
    ExperimentReport, Verdict,
};
use rmlab_core::measures::{esd, EmpiricalMeasure};
use rmlab_core::spectral::{eigenvalues, shifted_singular_values};
use rmlab_core::stats::{mean, Summary};
use rmlab_core::{io, Matrix};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{self, ConfigError};
use crate::manifest::RunManifest;
use crate::svg;

#[derive(Debug, Parser)]
#[command(name = "rmlab", version, about = "Random-matrix experiments for log-concave ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw matrices and dump their entries.
    Sample(RunArgs),
    /// Eigenvalues and shifted singular values of sampled matrices.
    Spectrum(RunArgs),
    /// Empirical spectral distribution against the uniform law on the disc.
    Circlaw(RunArgs),
    /// Smallest singular value, small singular value counts and operator norm.
    Singvals(RunArgs),
    /// Distances from rows to the span of other rows.
    Subspace(RunArgs),
    /// Across-trial fluctuation of the Stieltjes transform.
    Concentration(RunArgs),
    /// Marginal laws: isotropy, tails, small balls, sign symmetry.
    Tails(RunArgs),
    /// Collect report.json files under the given directories.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Plot {
    None,
    Svg,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub ensemble: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated sizes, e.g. 128,256,512.
    #[arg(long)]
    pub n_list: Option<String>,
    /// Exponent p >= 1, or "inf".
    #[arg(long)]
    pub p: Option<String>,
    /// Shift as "re,im".
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub rho_comp: Option<f64>,
    /// Comma-separated fractions of n.
    #[arg(long)]
    pub k_grid: Option<String>,
    #[arg(long, default_value = "rmlab-out")]
    pub out: PathBuf,
    /// Format of per-trial dumps.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = Plot::Svg)]
    pub plot: Plot,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directories searched recursively for report.json.
    #[arg(required = true)]
    pub dirs: Vec<PathBuf>,
    /// Where to write summary.json and manifest.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Fail = 1,
    Usage = 2,
    Error = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn of(verdict: Verdict) -> Self {
        if verdict == Verdict::Fail {
            ExitStatus::Fail
        } else {
            ExitStatus::Pass
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Usage(#[from] ConfigError),
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl From<rmlab_core::LabError> for AppError {
    fn from(e: rmlab_core::LabError) -> Self {
        AppError::Runtime(e.into())
    }
}

impl AppError {
    pub fn status(&self) -> ExitStatus {
        match self {
            AppError::Usage(_) => ExitStatus::Usage,
            AppError::Runtime(_) => ExitStatus::Error,
        }
    }
}

impl RunArgs {
    /// File values overlaid by flags, then validated.
    pub fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut map = match &self.config {
            Some(path) => config::read_config_map(path)?,
            None => Map::new(),
        };
        let mut set = |k: &str, v: Value| {
            map.insert(k.to_string(), v);
        };
        if let Some(e) = &self.ensemble {
            set("ensemble", Value::String(e.clone()));
        }
        if let Some(p) = &self.p {
            set("p", config::p_value(p)?);
        }
        if let Some(z) = &self.z {
            set("z", config::z_value(z)?);
        }
        if let Some(t) = self.trials {
            set("trials", t.into());
        }
        if let Some(s) = self.seed {
            set("seed", s.into());
        }
        for (k, v) in [
            ("gamma", self.gamma),
            ("alpha", self.alpha),
            ("delta", self.delta),
            ("rho_comp", self.rho_comp),
        ] {
            if let Some(v) = v {
                set(k, v.into());
            }
        }
        if let Some(k) = &self.k_grid {
            set("k_grid", config::f64_list("k_grid", k)?);
        }
        // a size flag replaces whichever size key the file had
        if let Some(list) = &self.n_list {
            set("n_list", config::usize_list("n_list", list)?);
            map.remove("n");
        }
        if let Some(n) = self.n {
            map.insert("n".into(), n.into());
            if self.n_list.is_none() {
                map.remove("n_list");
            }
        }
        config::config_from_map(map)
    }
}

/// Output directory that remembers what was written into it.
struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(dir: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
        io::write_bytes(&self.dir.join(name), bytes).with_context(|| format!("writing {name}"))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.write(name, text.as_bytes())
    }

    fn report(&mut self, report: &ExperimentReport) -> anyhow::Result<()> {
        self.write("report.json", (io::report_json(report)? + "\n").as_bytes())
    }
}

fn eigen_dump(out: &mut Output, format: Format, rows: &[(usize, usize, Complex64)]) -> anyhow::Result<()> {
    match format {
        Format::Csv => out.write("eigenvalues.csv", &io::eigenvalues_csv(rows)?),
        Format::Json => {
            let v: Vec<Value> = rows
                .iter()
                .map(|(t, i, z)| json!({"trial": t, "index": i, "re": z.re, "im": z.im}))
                .collect();
            out.json("eigenvalues.json", &v)
        }
    }
}

fn real_dump(
    out: &mut Output,
    format: Format,
    stem: &str,
    column: &str,
    rows: &[(usize, usize, f64)],
) -> anyhow::Result<()> {
    match format {
        Format::Csv => {
            let bytes = if stem == "distances" {
                io::distances_csv(rows)?
            } else {
                io::singulars_csv(rows)?
            };
            out.write(&format!("{stem}.csv"), &bytes)
        }
        Format::Json => {
            let v: Vec<Value> = rows
                .iter()
                .map(|(t, i, x)| {
                    let value_key = if stem == "distances" { "distance" } else { "value" };
                    json!({"trial": t, column: i, value_key: x})
                })
                .collect();
            out.json(&format!("{stem}.json"), &v)
        }
    }
}

fn plots(out: &mut Output, plot: Plot, points: &[Complex64]) -> anyhow::Result<()> {
    if plot == Plot::Svg && !points.is_empty() {
        out.write("scatter.svg", svg::scatter_svg(points)?.as_bytes())?;
        out.write("radial.svg", svg::radial_svg(points)?.as_bytes())?;
    }
    Ok(())
}

/// Eigenvalue atoms of the records at the largest size.
fn largest_size_atoms(report: &ExperimentReport) -> Vec<Complex64> {
    let n = report.config.largest_n();
    report
        .dumps
        .eigenvalues
        .iter()
        .filter(|(idx, _, _)| report.records[*idx].n == n)
        .map(|(_, _, z)| *z)
        .collect()
}

/// Matrices in record order: sizes, then trials.
fn sampled(cfg: &ExperimentConfig) -> anyhow::Result<Vec<(usize, usize, Matrix)>> {
    let mut out = Vec::new();
    for n in cfg.sizes() {
        for t in 0..cfg.trials {
            let spec = cfg.spec(n).with_seed(trial_seed(cfg.seed, n, t));
            out.push((n, t, sample_matrix(&spec)?));
        }
    }
    Ok(out)
}

fn cmd_sample(cfg: &ExperimentConfig, args: &RunArgs, out: &mut Output) -> anyhow::Result<Verdict> {
    let mats = sampled(cfg)?;
    let mut summary = BTreeMap::new();
    for n in cfg.sizes() {
        let entries: Vec<f64> = mats
            .iter()
            .filter(|(m, _, _)| *m == n)
            .flat_map(|(_, _, a)| a.as_slice().to_vec())
            .collect();
        let squares: Vec<f64> = entries.iter().map(|x| x * x).collect();
        summary.insert(
            format!("n={n}"),
            json!({
                "entries": entries.len(),
                "mean": mean(&entries),
                "second_moment": mean(&squares),
                "second_moment_se": rmlab_core::stats::standard_error(&squares),
            }),
        );
    }
    let matrices: Vec<Matrix> = mats.into_iter().map(|(_, _, a)| a).collect();
    match args.format {
        Format::Csv => out.write("samples.csv", &io::samples_csv(&matrices)?)?,
        Format::Json => {
            let v: Vec<Value> = matrices
                .iter()
                .enumerate()
                .map(|(t, a)| json!({"trial": t, "n": a.rows(), "entries": a.as_slice()}))
                .collect();
            out.json("samples.json", &v)?
        }
    }
    out.json("summary.json", &json!({"config": cfg, "summary": summary}))?;
    Ok(Verdict::NotApplicable)
}

fn cmd_spectrum(cfg: &ExperimentConfig, args: &RunArgs, out: &mut Output) -> anyhow::Result<Verdict> {
    let shift = cfg.shift();
    let mut eig_rows = Vec::new();
    let mut sv_rows = Vec::new();
    let mut parts = Vec::new();
    let mut per_size: BTreeMap<usize, (Vec<f64>, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (idx, (n, _, a)) in sampled(cfg)?.into_iter().enumerate() {
        let measure = esd(&eigenvalues(&a)?, true)?;
        let s = shifted_singular_values(&a, &shift)?;
        for (k, atom) in measure.atoms().iter().enumerate() {
            eig_rows.push((idx, k, atom.position));
        }
        for (k, v) in s.values.iter().enumerate() {
            sv_rows.push((idx, k, *v));
        }
        let entry = per_size.entry(n).or_default();
        entry.0.push(measure.positions().map(|z| z.norm()).fold(0.0, f64::max));
        entry.1.push(s.largest());
        entry.2.push(s.smallest());
        if n == cfg.largest_n() {
            parts.push(measure);
        }
    }
    eigen_dump(out, args.format, &eig_rows)?;
    real_dump(out, args.format, "singulars", "index", &sv_rows)?;
    let pooled = EmpiricalMeasure::pooled(&parts)?;
    if args.format == Format::Csv {
        out.write("measure.csv", &io::measure_csv(&pooled)?)?;
    }
    let points: Vec<Complex64> = pooled.positions().collect();
    plots(out, args.plot, &points)?;
    let summary: BTreeMap<String, Value> = per_size
        .iter()
        .map(|(n, (r, s1, sn))| {
            (
                format!("n={n}"),
                json!({
                    "spectral_radius": Summary::of(r),
                    "s_1": Summary::of(s1),
                    "s_n": Summary::of(sn),
                }),
            )
        })
        .collect();
    out.json("summary.json", &json!({"config": cfg, "summary": summary}))?;
    Ok(Verdict::NotApplicable)
}

fn cmd_circlaw(cfg: &ExperimentConfig, args: &RunArgs, out: &mut Output) -> anyhow::Result<Verdict> {
    let report = run_circular_law(cfg)?;
    out.report(&report)?;
    eigen_dump(out, args.format, &report.dumps.eigenvalues)?;
    out.write(
        "potentials.json",
        (io::potentials_json(&report.dumps.potentials)? + "\n").as_bytes(),
    )?;
    plots(out, args.plot, &largest_size_atoms(&report))?;
    Ok(report.verdict)
}

/// Several suites run under one command.
#[derive(Serialize)]
struct CombinedReport<'a> {
    name: &'a str,
    verdict: Verdict,
    reports: Vec<&'a ExperimentReport>,
}

fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut any_pass = false;
    for v in verdicts {
        match v {
            Verdict::Fail => return Verdict::Fail,
            Verdict::Pass => any_pass = true,
            Verdict::NotApplicable => {}
        }
    }
    if any_pass {
        Verdict::Pass
    } else {
        Verdict::NotApplicable
    }
}

fn cmd_singvals(cfg: &ExperimentConfig, args: &RunArgs, out: &mut Output) -> anyhow::Result<Verdict> {
    let smallest = run_smallest_sv(cfg)?;
    let counts = run_small_sv_counts(cfg)?;
    let norm = run_operator_norm(cfg)?;
    let verdict = combine([smallest.verdict, counts.verdict, norm.verdict]);
    out.json(
        "report.json",
        &CombinedReport {
            name: "singvals",
            verdict,
            reports: vec![&smallest, &counts, &norm],
        },
    )?;
    real_dump(out, args.format, "singulars", "index", &counts.dumps.singulars)?;
    Ok(verdict)
}

fn cmd_subspace(cfg: &ExperimentConfig, args: &RunArgs, out: &mut Output) -> anyhow::Result<Verdict> {
    let report = run_distance_subspace(cfg)?;
    out.report(&report)?;
    real_dump(out, args.format, "distances", "k", &report.dumps.distances)?;
    Ok(report.verdict)
}

fn cmd_single(
    cfg: &ExperimentConfig,
    out: &mut Output,
    suite: fn(&ExperimentConfig) -> rmlab_core::Result<ExperimentReport>,
) -> anyhow::Result<Verdict> {
    let report = suite(cfg)?;
    out.report(&report)?;
    Ok(report.verdict)
}

fn run_suite(name: &str, args: &RunArgs) -> Result<ExitStatus, AppError> {
    // everything that can be a usage error happens before the first write
    let cfg = args.resolve()?;
    let mut out = Output::new(&args.out)?;
    let cache = args.out.join("calibration.json");
    if cache.is_file() {
        load_calibration_cache(&cache)?;
    }
    let verdict = match name {
        "sample" => cmd_sample(&cfg, args, &mut out)?,
        "spectrum" => cmd_spectrum(&cfg, args, &mut out)?,
        "circlaw" => cmd_circlaw(&cfg, args, &mut out)?,
        "singvals" => cmd_singvals(&cfg, args, &mut out)?,
        "subspace" => cmd_subspace(&cfg, args, &mut out)?,
        "concentration" => cmd_single(&cfg, &mut out, run_stieltjes_concentration)?,
        "tails" => cmd_single(&cfg, &mut out, run_tail_suite)?,
        other => unreachable!("unknown suite {other}"),
    };
    if !cached_calibrations().is_empty() {
        save_calibration_cache(&cache)?;
        out.files.push("calibration.json".into());
    }
    let mut manifest = RunManifest::new(name, &args.out);
    manifest.config_path = args.config.clone();
    manifest.config = Some(cfg.clone());
    manifest.master_seed = Some(cfg.seed);
    manifest.files = out.files.clone();
    manifest.verdict = Some(verdict_name(verdict).into());
    out.json("manifest.json", &manifest)?;
    println!("{name}: {}", verdict_name(verdict));
    Ok(ExitStatus::of(verdict))
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::NotApplicable => "not_applicable",
    }
}

fn find_reports(dir: &Path, found: &mut Vec<PathBuf>) -> anyhow::Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let path = e.path();
        if path.is_dir() {
            find_reports(&path, found)?;
        } else if e.file_name() == "report.json" {
            found.push(path);
        }
    }
    Ok(())
}

/// Suite reports inside a report.json, flattening combined ones.
fn suite_rows(v: &Value, path: &Path, rows: &mut Vec<Value>) {
    if let Some(inner) = v.get("reports").and_then(Value::as_array) {
        for r in inner {
            suite_rows(r, path, rows);
        }
        return;
    }
    let failed: Vec<Value> = v
        .get("checks")
        .and_then(Value::as_array)
        .map(|cs| {
            cs.iter()
                .filter(|c| c.get("passed") == Some(&Value::Bool(false)))
                .filter_map(|c| c.get("name").cloned())
                .collect()
        })
        .unwrap_or_default();
    rows.push(json!({
        "path": path.display().to_string(),
        "name": v.get("name").cloned().unwrap_or(Value::Null),
        "ensemble": v.pointer("/provenance/ensemble").cloned().unwrap_or(Value::Null),
        "verdict": v.get("verdict").cloned().unwrap_or(Value::Null),
        "failed_checks": failed,
    }));
}

fn cmd_report(args: &ReportArgs) -> Result<ExitStatus, AppError> {
    for d in &args.dirs {
        if !d.is_dir() {
            return Err(ConfigError::Invalid {
                name: "dirs".into(),
                reason: format!("{} is not a directory", d.display()),
            }
            .into());
        }
    }
    let mut paths = Vec::new();
    for d in &args.dirs {
        find_reports(d, &mut paths)?;
    }
    if paths.is_empty() {
        return Err(anyhow::anyhow!("no report.json found").into());
    }
    let mut rows = Vec::new();
    for p in &paths {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
        suite_rows(&v, p, &mut rows);
    }
    let verdicts: Vec<Verdict> = rows
        .iter()
        .map(|r| match r["verdict"].as_str() {
            Some("pass") => Ok(Verdict::Pass),
            Some("fail") => Ok(Verdict::Fail),
            Some("not_applicable") => Ok(Verdict::NotApplicable),
            other => bail!("report {} has verdict {other:?}", r["path"]),
        })
        .collect::<anyhow::Result<_>>()?;
    let verdict = combine(verdicts.iter().copied());
    for (r, v) in rows.iter().zip(&verdicts) {
        println!(
            "{:<24} {:<26} {:<15} {}",
            r["name"].as_str().unwrap_or("?"),
            r["ensemble"].as_str().unwrap_or("?"),
            verdict_name(*v),
            r["path"].as_str().unwrap_or("?")
        );
    }
    println!("overall: {}", verdict_name(verdict));
    if let Some(dir) = &args.out {
        let mut out = Output::new(dir)?;
        out.json("summary.json", &json!({"verdict": verdict, "suites": rows}))?;
        let mut manifest = RunManifest::new("report", dir);
        manifest.files = out.files.clone();
        manifest.verdict = Some(verdict_name(verdict).into());
        out.json("manifest.json", &manifest)?;
    }
    Ok(ExitStatus::of(verdict))
}

pub fn run(cli: &Cli) -> Result<ExitStatus, AppError> {
    let (name, args) = match &cli.command {
        Command::Report(r) => return cmd_report(r),
        Command::Sample(a) => ("sample", a),
        Command::Spectrum(a) => ("spectrum", a),
        Command::Circlaw(a) => ("circlaw", a),
        Command::Singvals(a) => ("singvals", a),
        Command::Subspace(a) => ("subspace", a),
        Command::Concentration(a) => ("concentration", a),
        Command::Tails(a) => ("tails", a),
    };
    run_suite(name, args)
}
