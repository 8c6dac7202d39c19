//! End-to-end tests of the command-line binary: every subcommand is driven
//! through a real process, and file outputs are parsed back with the library
//! types they were written from.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tailgauge::inference::FitResult;
use tailgauge::tailsim::FittedModel;
use tailgauge::Gauge;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tailgauge"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary must launch")
}

fn assert_ok(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed with status {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn gen_is_deterministic_with_truth_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let gen = |name: &str, seed: &str| {
        let out = run(
            dir.path(),
            &[
                "gen", "--scenario", "st.d.AD", "--structure", "logistic", "--n", "400", "--seed",
                seed, "--out", name,
            ],
        );
        assert_ok(&out, "gen");
        fs::read(dir.path().join(name)).unwrap()
    };
    let a = gen("a.csv", "9");
    let b = gen("b.csv", "9");
    let c = gen("c.csv", "10");
    assert_eq!(a, b, "same seed must reproduce the sample byte for byte");
    assert_ne!(a, c, "different seeds must give different samples");

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(meta["generator"], "logistic");
    assert_eq!(meta["truth"]["label"], "AD");
    let chi = meta["truth"]["chi"].as_f64().unwrap();
    assert!((chi - (2.0 - 2f64.powf(0.2))).abs() < 1e-12, "sidecar chi = {chi}");

    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next(), Some("x,y"));
    assert_eq!(text.lines().count(), 401, "header plus one row per point");
}

#[test]
fn gen_fit_classify_chiplot_prob_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "gen", "--scenario", "st.d.AD", "--structure", "logistic", "--n", "5000", "--seed",
            "7", "--out", "sample.csv",
        ],
    );
    assert_ok(&out, "gen");

    let out = run(
        dir.path(),
        &[
            "fit", "--input", "sample.csv", "--family", "mm", "--family", "expga", "--out", "fits",
        ],
    );
    assert_ok(&out, "fit");

    let fit_mm: FitResult =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fits/fit_mm.json")).unwrap())
            .unwrap();
    assert!(fit_mm.converged, "mm fit must converge on clean data");
    let theta = fit_mm.estimate("theta").expect("mm fit carries theta");
    assert!(
        theta < 1.0,
        "strong-dependence data must land on the pointy side, got theta = {theta}"
    );

    let ranking = fs::read_to_string(dir.path().join("fits/ranking.csv")).unwrap();
    let mut lines = ranking.lines();
    assert_eq!(lines.next(), Some("family,converged,n_params,nll,aic"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2, "one ranking row per requested family");
    for row in &rows {
        let family = row.split(',').next().unwrap();
        assert!(family == "mm" || family == "expga", "unexpected family {family}");
    }

    let model: FittedModel =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fits/model.json")).unwrap())
            .unwrap();
    assert!(
        (model.p_exceed - 0.05).abs() <= 0.01,
        "threshold should keep about 5 percent, kept {}",
        model.p_exceed
    );

    let out = run(
        dir.path(),
        &["classify", "--input", "fits/fit_mm.json", "--out", "verdict.json"],
    );
    assert_ok(&out, "classify");
    assert!(
        String::from_utf8_lossy(&out.stdout).contains("AD"),
        "classify must report asymptotic dependence on st.d.AD data"
    );
    let verdict: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verdict.json")).unwrap())
            .unwrap();
    assert_eq!(verdict["class"]["label"], "AD");
    assert_eq!(verdict["family"], "mm");

    let out = run(
        dir.path(),
        &[
            "chiplot", "--input", "fits/model.json", "--u-grid", "0.99,0.999", "--n-sim",
            "20000", "--seed", "3", "--out", "chiplot.csv",
        ],
    );
    assert_ok(&out, "chiplot");
    let chiplot = fs::read_to_string(dir.path().join("chiplot.csv")).unwrap();
    let rows: Vec<&str> = chiplot.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let chi: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&chi), "chi-m estimate out of range: {row}");
    }

    let out = run(
        dir.path(),
        &[
            "prob", "--input", "fits/model.json", "--x-lo", "5", "--y-lo", "5", "--n-sim",
            "20000", "--seed", "4", "--out", "prob.json",
        ],
    );
    assert_ok(&out, "prob");
    let est: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("prob.json")).unwrap()).unwrap();
    let p = est["prob"].as_f64().unwrap();
    assert!(p > 0.0 && p < 0.05, "joint exceedance probability implausible: {p}");
    assert!(est["k"].as_f64().unwrap() >= 1.0);
}

#[test]
fn benchmark_matches_golden_csv_and_is_thread_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let bench = |out_name: &str, threads: &str| -> String {
        let out = run(
            dir.path(),
            &[
                "benchmark", "--reps", "2", "--n", "800", "--seed", "5", "--family", "mm",
                "--threads", threads, "--out", out_name,
            ],
        );
        assert_ok(&out, "benchmark");
        fs::read_to_string(dir.path().join(format!("{out_name}.csv"))).unwrap()
    };

    // The timing column is the only machine-dependent field; everything else
    // must reproduce exactly, whatever the thread count.
    let strip_timing = |csv: &str| -> Vec<String> {
        csv.lines()
            .map(|line| {
                let mut cols: Vec<&str> = line.split(',').collect();
                cols.pop();
                cols.join(",")
            })
            .collect()
    };

    let two = bench("mini2", "2");
    let one = bench("mini1", "1");
    assert_eq!(strip_timing(&two), strip_timing(&one), "results must not depend on threads");

    let golden = include_str!("golden/mini_benchmark.csv");
    assert_eq!(
        strip_timing(&two),
        strip_timing(golden),
        "benchmark output drifted from the recorded run"
    );

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("mini2.json")).unwrap()).unwrap();
    assert_eq!(report["cells"].as_array().unwrap().len(), 10);
}

#[test]
fn levelset_rows_satisfy_unit_gauge() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "levelset", "--family", "mm", "--params", "0.5", "--grid", "201", "--out",
            "levelset.csv",
        ],
    );
    assert_ok(&out, "levelset");

    let gauge = Gauge::max_min(0.5).unwrap();
    let text = fs::read_to_string(dir.path().join("levelset.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("w,x,y"));
    let rows: Vec<(f64, f64, f64)> = lines
        .map(|line| {
            let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            (v[0], v[1], v[2])
        })
        .collect();
    assert_eq!(rows.len(), 201);
    for &(w, x, y) in &rows {
        assert!((gauge.eval(x, y) - 1.0).abs() < 1e-9, "row w = {w} is off the unit level set");
    }
    // Closed-form anchor points: this gauge doubles on the axes, so the set
    // ends at (0, 1/2) and (1/2, 0), and its pointy vertex reaches (1, 1).
    assert!((rows[0].1 - 0.0).abs() < 1e-9 && (rows[0].2 - 0.5).abs() < 1e-9);
    assert!((rows[200].1 - 0.5).abs() < 1e-9 && (rows[200].2 - 0.0).abs() < 1e-9);
    let mid = rows[100];
    assert!((mid.1 - 1.0).abs() < 1e-9 && (mid.2 - 1.0).abs() < 1e-9);
}

#[test]
fn invalid_inputs_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["gen", "--scenario", "no-such-scenario", "--structure", "logistic"],
    );
    assert_eq!(out.status.code(), Some(2), "unknown scenario is a validation error");
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("available"),
        "the error should list the available cells"
    );

    let out = run(dir.path(), &["fit", "--input", "does-not-exist.csv"]);
    assert_eq!(out.status.code(), Some(2), "missing input file is a validation error");

    let out = run(dir.path(), &["fit", "--input", "x.csv", "--family", "bogus"]);
    assert_eq!(out.status.code(), Some(2), "unknown family token is a usage error");
}
