use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_locc-trace"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn records(out: &Output) -> Vec<Value> {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn schema() -> jsonschema::Validator {
    let text =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/record.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(records: &[Value]) {
    let v = schema();
    for r in records {
        let errors: Vec<String> = v.iter_errors(r).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{errors:?}\n{r}");
    }
}

fn complex(v: &Value) -> (f64, f64) {
    (v["re"].as_f64().unwrap(), v["im"].as_f64().unwrap())
}

#[test]
fn trace_pure_state_within_eps() {
    let cfg = fixtures().join("trace_pure.toml");
    let recs = records(&run(&["trace", "--config", cfg.to_str().unwrap()]));
    assert_eq!(recs.len(), 1);
    let (re, im) = complex(&recs[0]["estimate"]);
    assert!(((re - 1.0).powi(2) + im * im).sqrt() <= 0.05, "{re} {im}");
    assert_eq!(recs[0]["seed"], 7);
    assert_valid(&recs);
}

#[test]
fn flags_override_the_config() {
    let cfg = fixtures().join("trace_pure.toml");
    let recs =
        records(&run(&["trace", "--config", cfg.to_str().unwrap(), "--seed", "9", "--eps", "0.1", "--N", "500"]));
    let r = &recs[0];
    assert_eq!(r["seed"], 9);
    assert_eq!(r["spec"]["params"]["eps"], 0.1);
    assert_eq!(r["meta"]["n_iterations"][0], 500);
}

#[test]
fn every_command_emits_schema_valid_records() {
    let f = fixtures();
    let cfg = |n: &str| f.join(n).to_str().unwrap().to_string();
    let runs: Vec<Vec<String>> = vec![
        vec!["trace".into(), "-p".into(), "f=square".into(), "--d".into(), "4".into()],
        vec!["rel-entropy".into(), "--config".into(), cfg("rel_entropy.toml")],
        vec!["renyi".into(), "--config".into(), cfg("renyi_half.toml")],
        vec!["linsolve".into(), "--config".into(), cfg("linsolve.json")],
        vec!["hamsim".into()],
        vec!["verify-polys".into(), "--eps".into(), "1e-2".into()],
        vec!["variance-sweep".into(), "-p".into(), "dims=[2]".into(), "-p".into(), "replays=20".into()],
    ];
    for args in runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let recs = records(&run(&args));
        assert!(!recs.is_empty(), "{args:?}");
        assert!(recs.iter().all(|r| r["command"] == args[0]));
        assert_valid(&recs);
    }
}

#[test]
fn divergence_and_solver_values() {
    let f = fixtures();
    let rel = records(&run(&["rel-entropy", "--config", f.join("rel_entropy.toml").to_str().unwrap()]));
    let exact = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
    assert!((rel[0]["oracle"].as_f64().unwrap() - exact).abs() < 1e-12);
    assert!((rel[0]["estimate"].as_f64().unwrap() - exact).abs() <= 0.1);

    let sol = records(&run(&["linsolve", "--config", f.join("linsolve.json").to_str().unwrap()]));
    let x = sol[0]["estimate"].as_array().unwrap();
    assert!((x[0][0].as_f64().unwrap() - 0.6).abs() <= 0.1);
    assert!((x[1][0].as_f64().unwrap() - 1.6).abs() <= 0.1);
    assert!(sol[0]["error"].as_f64().unwrap() <= 0.1);
    assert!(sol[0]["meta"]["residual"].as_f64().is_some());
}

#[test]
fn verify_polys_meets_eps() {
    let recs = records(&run(&["verify-polys", "--eps", "1e-3", "--delta", "0.1"]));
    let targets: Vec<&str> = recs.iter().map(|r| r["label"].as_str().unwrap()).collect();
    assert_eq!(targets, ["log", "rect", "negative_power", "positive_power", "inverse"]);
    for r in &recs {
        let achieved = r["meta"]["achieved_eps"].as_f64().unwrap();
        assert!(achieved <= 1e-3, "{}: {achieved}", r["label"]);
        assert_eq!(r["meta"]["holds"], true);
        assert!(r["meta"]["degree"].as_u64().unwrap() > 0);
    }
}

#[test]
fn variance_sweep_summary() {
    let recs = records(&run(&["variance-sweep", "--config", fixtures().join("variance_sweep.toml").to_str().unwrap()]));
    assert_eq!(recs.len(), 13);
    let summary = recs.last().unwrap();
    assert_eq!(summary["label"], "summary");
    assert!(summary["estimate"].as_f64().unwrap() <= 3.0, "{summary}");
    for r in &recs[..12] {
        assert!(r["meta"]["ratio"].as_f64().unwrap() > 0.0);
    }
}

fn strip_wall_time(text: &str) -> Vec<Value> {
    text.lines()
        .map(|l| {
            let mut v: Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("wall_time_s");
            v
        })
        .collect()
}

#[test]
fn identical_runs_are_byte_identical_apart_from_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}.jsonl"));
        for args in [
            vec!["trace", "--config", f.join("trace_pure.toml").to_str().unwrap()],
            vec!["renyi", "--config", f.join("renyi_half.toml").to_str().unwrap()],
        ] {
            let o = bin().args(&args).args(["--out", out.to_str().unwrap()]).output().unwrap();
            assert!(o.status.success(), "{}", stderr(&o));
            assert!(o.stdout.is_empty());
        }
        outputs.push(std::fs::read_to_string(&out).unwrap());
    }
    let (a, b) = (strip_wall_time(&outputs[0]), strip_wall_time(&outputs[1]));
    assert_eq!(a.len(), 2);
    let line = |v: &Vec<Value>| v.iter().map(|x| serde_json::to_string(x).unwrap()).collect::<Vec<_>>();
    assert_eq!(line(&a), line(&b));
}

#[test]
fn different_seeds_differ() {
    let a = records(&run(&["trace", "--seed", "1", "--N", "300"]));
    let b = records(&run(&["trace", "--seed", "2", "--N", "300"]));
    assert_ne!(a[0]["estimate"], b[0]["estimate"]);
    assert_ne!(a[0]["inputs_hash"], b[0]["inputs_hash"]);
}

#[test]
fn config_errors_exit_1_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<(Vec<String>, &str)> = vec![
        (vec!["trace".into(), "-p".into(), "colour=blue".into()], "colour"),
        (vec!["trace".into(), "--eps".into(), "1.5".into()], "eps"),
        (vec!["trace".into(), "-p".into(), "f=sine".into()], "'f'"),
        (vec!["trace".into(), "--d".into(), "3".into()], "'d'"),
        (
            vec![
                "renyi".into(),
                "-p".into(),
                "alpha=2".into(),
                "--delta".into(),
                "0.2".into(),
                "-p".into(),
                "rho=fixture:maximally-mixed".into(),
            ],
            "sigma",
        ),
        (vec!["renyi".into(), "-p".into(), "alpha=2".into()], "'delta'"),
        (vec!["hamsim".into(), "-p".into(), "t=5".into()], "'t'"),
        (vec!["trace".into(), "-p".into(), "a=fixture:nothing".into()], "'a'"),
    ];
    for (args, key) in cases {
        let o = bin().args(&args).output().unwrap();
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains(key), "{args:?}: {}", stderr(&o));
    }

    let bad_type = dir.path().join("bad.toml");
    std::fs::write(&bad_type, "seed = \"seven\"\n").unwrap();
    let o = run(&["trace", "--config", bad_type.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("'seed'"), "{}", stderr(&o));

    let wrong = dir.path().join("wrong.toml");
    std::fs::write(&wrong, "command = \"renyi\"\n").unwrap();
    let o = run(&["trace", "--config", wrong.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("'command'"), "{}", stderr(&o));

    let broken = dir.path().join("broken.toml");
    std::fs::write(&broken, "eps = = 1\n").unwrap();
    let o = run(&["trace", "--config", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("broken.toml"), "{}", stderr(&o));

    let o = run(&["trace", "-p", "a=missing.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.json"));
}

#[test]
fn ragged_matrix_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ragged.json");
    std::fs::write(&p, "[[1,0],[1]]").unwrap();
    let o = run(&["trace", "-p", &format!("a={}", p.display())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("row 1"), "{}", stderr(&o));
}

#[test]
fn precondition_violations_exit_2() {
    let o = run(&["trace", "-p", "a=[[2,0],[0,1]]", "-p", "mode=lipschitz"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = run(&[
        "renyi",
        "-p",
        "alpha=0.5",
        "-p",
        "rank=1",
        "-p",
        "rho=fixture:maximally-mixed",
        "-p",
        "sigma=fixture:maximally-mixed",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = run(&["rel-entropy", "-p", "rho=[[1,0],[0,0]]", "-p", "sigma=fixture:maximally-mixed"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("min eigenvalue"));
    let o = run(&["rel-entropy", "-p", "rho=[[1,0],[0,1]]", "-p", "sigma=fixture:maximally-mixed"]);
    assert_eq!(o.status.code(), Some(1), "a non-normalised state is an input error: {}", stderr(&o));
}

#[test]
fn approximation_failure_exits_3() {
    let o = run(&["verify-polys", "--eps", "1e-14"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("approximation"));
}

#[test]
fn relative_paths_resolve_against_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("command = \"trace\"\na = \"{}\"\nN = 200\n", "../fixtures/pure_state_2.json"))
        .unwrap();
    let o = run(&["trace", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "path must resolve next to the config, not the cwd");

    let nested = fixtures().join("trace_pure.toml");
    let o = bin().current_dir(dir.path()).args(["trace", "--config", nested.to_str().unwrap()]).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
}
