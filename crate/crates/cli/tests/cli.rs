use std::fs;
use std::path::Path;
use std::process::Command;

use num_complex::Complex64;
use rmlab_cli::config::{emit_config, parse_config, ConfigError};
use rmlab_cli::{scatter_svg, RunManifest};
use rmlab_core::ensembles::{sample_matrix, EnsembleFamily, EnsembleSpec};
use rmlab_core::measures::{esd, EmpiricalMeasure};
use rmlab_core::spectral::eigenvalues;
use serde_json::Value;

fn rmlab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_rmlab")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("cfg.json");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn minimal_config_gets_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(&write_config(dir.path(), r#"{"ensemble": "ginibre", "n": 64}"#)).unwrap();
    assert_eq!(cfg.gamma, 0.5);
    assert_eq!(cfg.alpha, 0.05);
    assert_eq!(cfg.trials, 8);
    assert_eq!(cfg.sizes(), vec![64]);
}

#[test]
fn config_rejects_p_below_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), r#"{"ensemble": "lp_ball_rows", "n": 8, "p": 0.5}"#);
    match parse_config(&path) {
        Err(ConfigError::Invalid { name, reason }) => {
            assert_eq!(name, "p");
            assert!(reason.contains("log-concavity requires p ≥ 1"), "{reason}");
        }
        other => panic!("expected invalid p, got {other:?}"),
    }
}

#[test]
fn config_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"ensemble": "lp_ball_global", "p": "inf", "n_list": [32, 64], "z": "0.5,-1", "trials": 3}"#;
    let cfg = parse_config(&write_config(dir.path(), body)).unwrap();
    let again = parse_config(&write_config(dir.path(), &emit_config(&cfg))).unwrap();
    assert_eq!(cfg, again);
    assert!(again.p.is_infinite());
    assert_eq!(again.z, Complex64::new(0.5, -1.0));
}

#[test]
fn config_errors_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    match parse_config(&dir.path().join("absent.json")) {
        Err(ConfigError::Missing { .. }) => {}
        other => panic!("expected missing file, got {other:?}"),
    }
    let unknown = write_config(dir.path(), r#"{"n": 8, "tirals": 3}"#);
    let msg = parse_config(&unknown).unwrap_err().to_string();
    assert!(msg.contains("tirals"), "{msg}");
    let bad_type = write_config(dir.path(), r#"{"n": "eight"}"#);
    assert!(matches!(parse_config(&bad_type), Err(ConfigError::Schema(_))));
    let no_size = write_config(dir.path(), r#"{"ensemble": "ginibre"}"#);
    match parse_config(&no_size) {
        Err(ConfigError::Invalid { name, .. }) => assert_eq!(name, "n"),
        other => panic!("expected invalid n, got {other:?}"),
    }
}

fn count(hay: &str, needle: &str) -> usize {
    hay.matches(needle).count()
}

fn attr(element: &str, name: &str) -> f64 {
    let key = format!(" {name}=\"");
    let start = element.find(&key).unwrap() + key.len();
    let len = element[start..].find('"').unwrap();
    element[start..start + len].parse().unwrap()
}

#[test]
fn scatter_has_one_marker_per_atom_and_unit_circle() {
    let pts = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
    let text = scatter_svg(&pts).unwrap();
    assert_eq!(count(&text, "class=\"atom\""), 3);
    assert_eq!(count(&text, "<circle class=\"unit-circle\""), 1);
    let circle = text.lines().find(|l| l.contains("unit-circle")).unwrap();
    let markers: Vec<&str> = text.lines().filter(|l| l.contains("class=\"atom\"")).collect();
    // the atom at 1 sits on the circle, the atom at 0 at its centre
    let (cx, cy, r) = (attr(circle, "cx"), attr(circle, "cy"), attr(circle, "r"));
    assert!((attr(markers[0], "cx") - cx).abs() < 0.01 && (attr(markers[0], "cy") - cy).abs() < 0.01);
    assert!((attr(markers[1], "cx") - (cx + r)).abs() < 0.01);
    assert!((attr(markers[2], "cy") - (cy - r)).abs() < 0.01);
    assert_eq!(text, scatter_svg(&pts).unwrap());
}

#[test]
fn scatter_rejects_empty_measure() {
    assert!(scatter_svg(&[]).is_err());
    assert!(EmpiricalMeasure::uniform(Vec::<Complex64>::new(), rmlab_core::measures::Domain::ComplexPlane).is_err());
}

#[test]
fn scatter_of_ginibre_esd_is_small_and_in_frame() {
    let a = sample_matrix(&EnsembleSpec::new(EnsembleFamily::Ginibre, 1024, 3)).unwrap();
    let measure = esd(&eigenvalues(&a).unwrap(), true).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scatter.svg");
    rmlab_cli::emit_scatter_svg(&measure, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.len() < 2_000_000);
    let markers: Vec<&str> = text.lines().filter(|l| l.contains("class=\"atom\"")).collect();
    assert_eq!(markers.len(), 1024);
    let circle = text.lines().find(|l| l.contains("unit-circle")).unwrap();
    let (cx, cy, r) = (attr(circle, "cx"), attr(circle, "cy"), attr(circle, "r"));
    for m in markers {
        // inside the [-1.5, 1.5]² window
        assert!((attr(m, "cx") - cx).abs() <= 1.5 * r + 0.01);
        assert!((attr(m, "cy") - cy).abs() <= 1.5 * r + 0.01);
    }
}

#[test]
fn circlaw_smoke_run_writes_its_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let out_s = format!("{}/", out.display());
    let args = ["circlaw", "--ensemble", "ginibre", "--n", "256", "--trials", "4", "--seed", "7", "--out", &out_s];
    let (code, stdout, stderr) = rmlab(&args);
    assert_eq!(code, 0, "{stdout}{stderr}");
    for f in ["report.json", "eigenvalues.csv", "scatter.svg", "manifest.json"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let manifest: RunManifest = serde_json::from_value(read_json(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest.command, "circlaw");
    assert_eq!(manifest.master_seed, Some(7));
    assert!(manifest.missing_files().is_empty());
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["verdict"], "pass");
    let header = fs::read_to_string(out.join("eigenvalues.csv")).unwrap();
    assert!(header.starts_with("trial,index,re,im\n"));
    assert_eq!(header.lines().count(), 1 + 4 * 256);

    // same flags into a second directory: identical bytes apart from the manifest
    let out2 = dir.path().join("e");
    let out2_s = out2.display().to_string();
    let mut args2 = args;
    args2[10] = &out2_s;
    assert_eq!(rmlab(&args2).0, 0);
    for f in ["report.json", "eigenvalues.csv", "scatter.svg", "radial.svg", "potentials.json"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(out2.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn unknown_flag_is_a_usage_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let (code, _, stderr) = rmlab(&["circlaw", "--n", "8", "--bogus", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("--bogus"));
    assert!(!out.exists());
}

#[test]
fn invalid_parameters_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = out.to_str().unwrap();
    for args in [
        vec!["circlaw", "--ensemble", "lp_ball_rows", "--p", "0.5", "--n", "8", "--out", o],
        vec!["tails", "--ensemble", "cauchy", "--n", "8", "--out", o],
        vec!["subspace", "--n-list", "8,x", "--out", o],
        vec!["singvals", "--n", "8", "--z", "1,2,3", "--out", o],
        vec!["circlaw", "--trials", "3", "--out", o],
        vec!["circlaw", "--n", "8", "--config", "/nonexistent/cfg.json", "--out", o],
    ] {
        let (code, _, stderr) = rmlab(&args);
        assert_eq!(code, 2, "{args:?}: {stderr}");
        assert!(stderr.contains("Config file"), "schema help missing for {args:?}");
        assert!(!out.exists(), "{args:?} wrote files");
    }
    let (code, _, stderr) = rmlab(&["circlaw", "--ensemble", "lp_ball_rows", "--p", "0.5", "--n", "8", "--out", o]);
    assert_eq!(code, 2);
    assert!(stderr.contains("log-concavity requires p ≥ 1"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"ensemble": "laplace_iid", "n_list": [16, 32], "trials": 5, "seed": 1}"#);
    let out = dir.path().join("o");
    let (code, _, stderr) = rmlab(&[
        "subspace", "--config", cfg.to_str().unwrap(), "--n", "24", "--trials", "2", "--out", out.to_str().unwrap(),
    ]);
    assert!(code == 0 || code == 1, "{stderr}");
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["config"]["ensemble"], "laplace_iid");
    assert_eq!(report["config"]["n"], 24);
    assert!(report["config"].get("n_list").is_none());
    assert_eq!(report["config"]["trials"], 2);
    assert_eq!(report["config"]["seed"], 1);
    let distances = fs::read_to_string(out.join("distances.csv")).unwrap();
    assert!(distances.starts_with("trial,k,distance\n"));
}

#[test]
fn singvals_report_has_histogram_and_violation_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let (code, stdout, stderr) =
        rmlab(&["singvals", "--n", "128", "--z", "0.5,0", "--trials", "100", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let report = read_json(&out.join("report.json"));
    let suites = report["reports"].as_array().unwrap();
    let smallest = suites.iter().find(|r| r["name"] == "smallest_sv").unwrap();
    let summary = &smallest["summary"]["n=128"];
    assert_eq!(summary["events"], 0);
    assert_eq!(smallest["violations"], 0);
    let hist = &summary["histogram"];
    let total: u64 = hist["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum::<u64>()
        + hist["below"].as_u64().unwrap()
        + hist["above"].as_u64().unwrap();
    assert_eq!(total, 100);
    assert_eq!(hist["log10_edges"].as_array().unwrap().len(), hist["counts"].as_array().unwrap().len() + 1);
    assert!(suites.iter().any(|r| r["name"] == "operator_norm"));
    assert!(suites.iter().any(|r| r["name"] == "small_sv_counts"));
    let csv = fs::read_to_string(out.join("singulars.csv")).unwrap();
    assert!(csv.starts_with("trial,index,value\n"));
}

fn verdict_exit(dir: &Path) -> i32 {
    if read_json(&dir.join("report.json"))["verdict"] == "fail" {
        1
    } else {
        0
    }
}

#[test]
fn exit_code_follows_verdict_and_report_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [(&str, &[&str]); 4] = [
        ("c", &["circlaw", "--n", "12", "--trials", "1"]),
        ("t", &["tails", "--ensemble", "lp_ball_rows", "--p", "2", "--n", "16", "--trials", "2"]),
        ("k", &["concentration", "--n-list", "16,32", "--trials", "8"]),
        ("u", &["subspace", "--n", "32", "--trials", "4", "--format", "json"]),
    ];
    let mut saw_fail = false;
    for (sub, args) in runs {
        let out = dir.path().join("runs").join(sub);
        let mut full: Vec<&str> = args.to_vec();
        let o = out.display().to_string();
        full.extend(["--out", &o]);
        let (code, stdout, stderr) = rmlab(&full);
        assert_eq!(code, verdict_exit(&out), "{full:?}: {stdout}{stderr}");
        saw_fail |= code == 1;
    }
    // a 12x12 matrix is far from the disc law
    assert!(saw_fail);
    assert!(dir.path().join("runs/u/distances.json").is_file());
    let agg = dir.path().join("agg");
    let (code, stdout, _) = rmlab(&["report", dir.path().join("runs").to_str().unwrap(), "--out", agg.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stdout.contains("overall: fail"));
    let summary = read_json(&agg.join("summary.json"));
    assert_eq!(summary["suites"].as_array().unwrap().len(), 4);

    let (code, _, _) = rmlab(&["report", dir.path().join("runs/u").to_str().unwrap()]);
    assert_eq!(code, verdict_exit(&dir.path().join("runs/u")));
    let (code, _, _) = rmlab(&["report", dir.path().join("nowhere").to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn sample_and_spectrum_dumps_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["a", "b"] {
        let o = dir.path().join(sub).display().to_string();
        assert_eq!(rmlab(&["sample", "--ensemble", "lp_ball_rows", "--n", "6", "--trials", "3", "--seed", "9", "--out", &o]).0, 0);
        let so = format!("{o}/spectrum");
        assert_eq!(rmlab(&["spectrum", "--ensemble", "laplace_iid", "--n", "20", "--trials", "2", "--z", "-0.5,0.25", "--out", &so]).0, 0);
    }
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for f in ["samples.csv", "summary.json", "calibration.json", "spectrum/eigenvalues.csv", "spectrum/singulars.csv", "spectrum/measure.csv", "spectrum/scatter.svg"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let samples = fs::read_to_string(a.join("samples.csv")).unwrap();
    assert!(samples.starts_with("trial,i,j,value\n"));
    assert_eq!(samples.lines().count(), 1 + 3 * 36);
    let eig = fs::read_to_string(a.join("spectrum/eigenvalues.csv")).unwrap();
    assert_eq!(eig.lines().count(), 1 + 2 * 20);
}
