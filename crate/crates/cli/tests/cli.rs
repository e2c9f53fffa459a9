//! End-to-end runs of the `extremogram` binary.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use extremogram_cli::args::InputArgs;
use extremogram_cli::ingest::load_series;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_extremogram"));
    c.env_remove("EXTREMOGRAM_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn data_rows(csv: &[u8]) -> Vec<Vec<String>> {
    let text = std::str::from_utf8(csv).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    lines.next();
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn input_args(paths: &[&Path], returns_log: bool) -> InputArgs {
    use clap::Parser;
    let mut argv = vec!["extremogram".to_string(), "devol".to_string()];
    for p in paths {
        argv.push("-i".into());
        argv.push(p.to_str().unwrap().into());
    }
    if returns_log {
        argv.push("--returns".into());
        argv.push("log".into());
    }
    match extremogram_cli::Cli::parse_from(argv).command {
        extremogram_cli::args::Command::Devol(f) => f.input,
        _ => unreachable!(),
    }
}

#[test]
fn constant_series_exits_with_no_exceedances() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    std::fs::write(&path, "1\n".repeat(500)).unwrap();
    let out = run(&["extremogram", "-i", path.to_str().unwrap(), "--no-bootstrap"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn bad_input_exits_with_code_two() {
    let out = run_with_stdin(&["extremogram", "-i", "-"], b"x\n1\nnot-a-number\n");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let out = run(&["extremogram", "-i", "/nonexistent/file.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["extremogram"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulated_garch_piped_into_extremogram_clusters() {
    let sim = run(&["simulate", "--model", "garch", "--n", "100000", "--seed", "7"]);
    assert!(sim.status.success());
    let out = run_with_stdin(
        &[
            "extremogram", "-i", "-", "--q", "0.98", "--tail", "upper", "--lags", "40",
            "--permutations", "99", "--no-bootstrap",
        ],
        &sim.stdout,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&out.stdout);
    assert_eq!(rows.len(), 41);
    for row in &rows[1..=5] {
        let est: f64 = row[1].parse().unwrap();
        let perm_upper: f64 = row[7].parse().unwrap();
        assert!(est > perm_upper, "lag {}: {est} <= {perm_upper}", row[0]);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    let sim = run(&["simulate", "--model", "sv", "--n", "4000", "--seed", "3", "-o", data.to_str().unwrap()]);
    assert!(sim.status.success());
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let r = run(&[
            "extremogram", "-i", data.to_str().unwrap(), "--replicates", "300", "--lags", "8",
            "--seed", "11", "--format", "json", "-o", out.to_str().unwrap(),
        ]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        assert!(r.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn seed_comes_from_the_environment() {
    let sim = |env: Option<&str>, flag: Option<&str>| {
        let mut c = bin();
        c.args(["simulate", "--model", "garch", "--n", "50"]);
        if let Some(s) = env {
            c.env("EXTREMOGRAM_SEED", s);
        }
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        c.output().unwrap().stdout
    };
    assert_eq!(sim(Some("5"), None), sim(None, Some("5")));
    assert_ne!(sim(Some("5"), None), sim(None, None));
}

#[test]
fn price_file_gives_one_fewer_log_return() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("prices.csv");
    let mut text = String::from("date,close\n");
    let mut p = 1000.0f64;
    for i in 0..6444 {
        p *= 1.0 + 0.01 * ((i * 7919 % 13) as f64 - 6.0) / 6.0;
        text.push_str(&format!("day{i},{p}\n"));
    }
    std::fs::write(&path, text).unwrap();
    let series = load_series(&input_args(&[&path], true), 1).unwrap();
    assert_eq!(series[0].1.len(), 6443);
    assert_eq!(series[0].1.labels().unwrap()[0], "day1");
}

#[test]
fn two_files_join_on_dates_in_either_order() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    std::fs::write(&a, "date,v\nd1,1\nd2,2\nd3,3\n").unwrap();
    std::fs::write(&b, "date,v\nd2,20\nd3,30\nd4,40\n").unwrap();
    let ab = load_series(&input_args(&[&a, &b], false), 2).unwrap();
    let ba = load_series(&input_args(&[&b, &a], false), 2).unwrap();
    assert_eq!(ab[0].1.len(), 2);
    assert_eq!(ab[0].1.values(), ba[1].1.values());
    assert_eq!(ab[1].1.values(), ba[0].1.values());

    let c = dir.path().join("c.csv");
    std::fs::write(&c, "date,v\ne1,1\ne2,2\n").unwrap();
    let out = run(&["cross", "-i", a.to_str().unwrap(), "-i", c.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_and_json_outputs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    run(&["simulate", "--model", "garch", "--n", "3000", "--seed", "9", "-o", data.to_str().unwrap()]);
    let common = [
        "returntimes", "-i", data.to_str().unwrap(), "--q", "0.9", "--lags", "10", "--replicates", "200",
    ];
    let csv_out = run(&common);
    let json_out = run(&[&common[..], &["--format", "json"]].concat());
    assert!(csv_out.status.success() && json_out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&json_out.stdout).unwrap();
    let rows = data_rows(&csv_out.stdout);
    let jrows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), jrows.len());
    let header = ["lag", "estimate", "lower", "upper", "replicate_mean", "reference", "count"];
    for (row, j) in rows.iter().zip(jrows) {
        for (field, col) in row.iter().zip(header) {
            let a: f64 = field.parse().unwrap();
            let b = j[col].as_f64().unwrap();
            assert_eq!(format!("{a:.16e}"), format!("{b:.16e}"), "{col}");
        }
    }
}
