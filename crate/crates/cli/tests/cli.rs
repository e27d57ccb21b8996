use std::fs;
use std::path::Path;
use std::process::Command;

use bayes_rmst::simulation::{generate_scenario, Scenario, ScenarioConfig};
use bayes_rmst_cli::ingest::{export_csv, ingest_csv, ColumnSpec};
use bayes_rmst_cli::CliError;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bayes-rmst"))
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn binary_covariate_design() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "d.csv", "time,event,group,smoker\n1.5,1,0,1\n2.0,0,1,0\n0.7,1,1,1\n");
    let d = ingest_csv(&p, &ColumnSpec::default()).unwrap();
    assert_eq!(d.n_coef(), 3);
    assert_eq!(d.covariate_names(), ["(Intercept)", "group", "smoker"]);
    assert_eq!(d.row(1), [1.0, 1.0, 0.0]);
    assert_eq!(d.cluster_labels(), ["all"]);
    assert_eq!(d.events(), [true, false, true]);
}

#[test]
fn categorical_reference_coding() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "d.csv",
        "time,event,arm,place,state\n1,1,control,urban,10\n2,0,treated,rural,9\n3,1,treated,town,10\n4,1,control,rural,2\n",
    );
    let spec = ColumnSpec {
        group: "arm".into(),
        covariates: Some(vec!["place".into()]),
        cluster: Some("state".into()),
        ..ColumnSpec::default()
    };
    let d = ingest_csv(&p, &spec).unwrap();
    assert_eq!(d.covariate_names(), ["(Intercept)", "arm[treated]", "place[town]", "place[urban]"]);
    assert_eq!(d.row(0), [1.0, 0.0, 0.0, 1.0]);
    assert_eq!(d.row(3), [1.0, 0.0, 0.0, 0.0]);
    assert_eq!(d.cluster_labels(), ["2", "9", "10"]);
    assert_eq!(d.clusters(), [2, 1, 2, 0]);
}

#[test]
fn round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate_scenario(&ScenarioConfig::new(Scenario::C, 512).with_seed(5), 0).unwrap();
    let p = dir.path().join("c.csv");
    export_csv(&data, &p).unwrap();
    assert_eq!(ingest_csv(&p, &ColumnSpec::default()).unwrap(), data);
}

#[test]
fn row_errors_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "d.csv", "time,event,group\n1,1,0\nabc,1,1\n2,2,0\n-1,0,NA\n3,0,1\n");
    match ingest_csv(&p, &ColumnSpec::default()) {
        Err(CliError::Rows { errors, .. }) => {
            let lines: Vec<usize> = errors.iter().map(|e| e.line).collect();
            assert_eq!(lines, [3, 4, 5, 5]);
        }
        other => panic!("{other:?}"),
    }
    let p = write(dir.path(), "e.csv", "time,status,group\n1,1,0\n");
    match ingest_csv(&p, &ColumnSpec::default()) {
        Err(CliError::MissingColumns { columns, .. }) => assert_eq!(columns, ["event"]),
        other => panic!("{other:?}"),
    }
    let p = write(dir.path(), "f.csv", "time,event,group\n1,1,0\n2,1,1\n3,1,2\n");
    assert!(matches!(ingest_csv(&p, &ColumnSpec::default()), Err(CliError::Usage(_))));
}

#[test]
fn rmst_subcommand() {
    let lambda = (-4.5f64).exp().to_string();
    let out = run_ok(&["rmst", "--family", "exponential", "--lambda", &lambda, "--tau", "100"]);
    let v: f64 = out.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!((v - 60.37).abs() < 0.01, "{out}");
    let w = run_ok(&["rmst", "--family", "weibull", "--lambda", "1", "--k", "1", "--tau", "5"]);
    let e = run_ok(&["rmst", "--family", "exponential", "--lambda", "1", "--tau", "5"]);
    assert_eq!(w, e);
    let alt = run_ok(&["rmst", "--family", "loglogistic", "--time-scale", "121.5", "--k", "2", "--tau", "100"]);
    let std = run_ok(&["rmst", "--family", "loglogistic", "--mu", &(-2.0 * 121.5f64.ln()).to_string(), "--k", "2", "--tau", "100"]);
    assert_eq!(alt, std);
    run_ok(&["rmst", "--family", "lognormal", "--mu", "3", "--sigma2", "1", "--effect", "frailty", "--v", "2", "--tau", "100", "--exact"]);
    run_ok(&["rmst", "--family", "weibull", "--lambda", "0.01", "--k", "1.5", "--effect", "random", "--u", "-0.3", "--tau", "50"]);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["rmst", "--family", "gompertz", "--lambda", "1", "--tau", "5"][..],
        &["rmst", "--family", "weibull", "--lambda", "1", "--tau", "5"],
        &["rmst", "--family", "exponential", "--lambda", "1", "--k", "2", "--tau", "5"],
        &["rmst", "--family", "exponential", "--lambda", "1", "--tau", "0"],
        &["fit", "--input", "x.csv", "--family", "weibull", "--effect", "mixed-up"],
        &["nonsense"],
    ] {
        let out = bin().args(args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = bin().args(["rmst", "--family", "exponential", "--lambda=-1", "--tau", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fit_writes_both_reports() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let out = dir.path().join("fit.json");
    let c = csv.to_str().unwrap();
    run_ok(&["generate", "--scenario", "C", "--n", "128", "--seed", "2", "--output", c]);
    let text = run_ok(&[
        "fit", "--input", c, "--family", "exponential", "--effect", "random", "--chains", "2", "--iter", "400",
        "--burnin", "200", "--threshold", "0", "--threshold", "-3", "--at", "x2=0.5", "--output", out.to_str().unwrap(),
    ]);
    assert!(text.contains("P(difference < -3)"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(fs::read_to_string(dir.path().join("fit.txt")).unwrap(), text);
    assert_eq!(json["config"]["sampler"]["iterations"], 400);
    assert_eq!(json["config"]["sampler"]["burn_in"], 200);
    assert_eq!(json["parameters"].as_array().unwrap().len(), 3 + 4 + 1);
    assert_eq!(json["rmst"].as_array().unwrap().len(), 3);
    assert_eq!(json["forest"].as_array().unwrap().len(), 5);
    assert_eq!(json["histogram"]["counts"].as_array().unwrap().len(), 30);
    assert_eq!(json["acceptance"].as_array().unwrap().len(), 2);
    assert!(json["waic"]["waic"].as_f64().unwrap().is_finite());
}

#[test]
fn chains_and_iterations_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let out = dir.path().join("fit.json");
    let c = csv.to_str().unwrap();
    run_ok(&["generate", "--scenario", "C", "--n", "64", "--output", c]);
    run_ok(&["fit", "--input", c, "--family", "exponential", "--chains", "2", "--iter", "2000", "--burnin", "1000", "--output", out.to_str().unwrap()]);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["rmst"][0]["n"], 2000);
}

#[test]
fn failure_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "time,event,group\n1,1,0\nx,1,1\n");
    let out = dir.path().join("fit.json");
    let status = bin()
        .args(["fit", "--input", bad.to_str().unwrap(), "--family", "weibull", "--output", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    assert!(!out.exists() && !dir.path().join("fit.txt").exists());
    let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 1, "{names:?}");
}

#[test]
fn waic_and_simulate_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("a.csv");
    let c = csv.to_str().unwrap();
    run_ok(&["generate", "--scenario", "A", "--n", "96", "--clusters", "3", "--output", c]);
    let out = dir.path().join("w.json");
    run_ok(&["waic", "--input", c, "--family", "exponential", "--family", "loglogistic", "--iter", "600", "--burnin", "300", "--output", out.to_str().unwrap()]);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let models = json["models"].as_array().unwrap();
    assert_eq!(models.len(), 2);
    assert!(models[0]["waic"].as_f64().unwrap() <= models[1]["waic"].as_f64().unwrap());

    let out = dir.path().join("s.json");
    run_ok(&["simulate", "--scenario", "C", "--n", "64", "--replications", "2", "--family", "exponential", "--iter", "400", "--burnin", "200", "--output", out.to_str().unwrap()]);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["records"].as_array().unwrap().len(), 2);
    assert_eq!(json["metrics"]["failures"], 0);
    assert!((json["truth"]["difference"].as_f64().unwrap() + 14.52).abs() < 0.01);
}
