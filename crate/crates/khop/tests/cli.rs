//! End-to-end tests of the `khop` binary: golden output strings, JSON
//! round-trips, exit codes, and file emission.

use std::process::{Command, Output};

fn khop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_khop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = khop(args);
    assert!(
        out.status.success(),
        "{:?}: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn moments_symbolic_golden() {
    let got = stdout_of(&[
        "moments",
        "--k",
        "3",
        "--n",
        "2",
        "--tau-equal",
        "--lambda-equal",
        "1",
        "--symbolic",
    ]);
    assert_eq!(got.trim(), "1/2*tau^2 + 2/3*tau^3 + 1/4*tau^4");
    // without --tau-equal the chamber polynomial comes back
    let got = stdout_of(&["moments", "--k", "3", "--n", "2", "--symbolic"]);
    assert!(got.contains("lambda1"), "symbolic lambdas retained: {got}");
    assert!(got.contains("tau1"), "chamber variables retained: {got}");
}

#[test]
fn cumulants_symbolic_golden() {
    let got = stdout_of(&[
        "cumulants",
        "--k",
        "4",
        "--n",
        "3",
        "--tau-equal",
        "--lambda-equal",
        "1",
        "--symbolic",
    ]);
    assert_eq!(
        got.trim(),
        "1/6*tau^3 + 3/4*tau^4 + 5/4*tau^5 + 9/10*tau^6 + 69/280*tau^7"
    );
}

#[test]
fn variance_value_golden() {
    let got = stdout_of(&["variance", "--k", "5", "--lambda", "1", "--tau", "1"]);
    assert_eq!(got.trim(), "41/252");
    let got = stdout_of(&[
        "variance",
        "--k",
        "3",
        "--asymptotic",
        "--lambda",
        "1",
        "--tau",
        "1",
    ]);
    assert_eq!(got.trim(), "2/3");
    let got = stdout_of(&[
        "variance",
        "--k",
        "4",
        "--lambda-vec",
        "1,1,1",
        "--tau",
        "1",
    ]);
    assert_eq!(got.trim(), "11/20");
}

#[test]
fn moment_value_exact_decimal_parsing() {
    // tau decimals are exact: 0.5 means one half
    let got = stdout_of(&[
        "moments",
        "--k",
        "2",
        "--n",
        "2",
        "--tau",
        "0.5,1",
        "--lambda-equal",
        "1",
    ]);
    assert_eq!(got.trim(), "1");
}

#[test]
fn json_output_round_trips() {
    let got = stdout_of(&[
        "moments",
        "--k",
        "3",
        "--n",
        "3",
        "--tau",
        "1,1,1",
        "--lambda-equal",
        "1",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&got).unwrap();
    assert_eq!(v["value"], "49/8");
    assert_eq!(v["inputs_sorted"], true);
    assert_eq!(serde_json::to_string(&v).unwrap().len(), got.trim().len());

    let sim = stdout_of(&[
        "simulate",
        "--k",
        "2",
        "--r",
        "1",
        "--t",
        "1.5",
        "--lambda",
        "2",
        "--samples",
        "2000",
        "--seed",
        "7",
    ]);
    let v: serde_json::Value = serde_json::from_str(&sim).unwrap();
    assert_eq!(v["n"], 2000);
    assert_eq!(v["exact"]["mean"], "1");
    // floats survive a parse/emit cycle bit-exactly
    let reparsed: serde_json::Value =
        serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(v, reparsed);
}

#[test]
fn simulate_mean_near_poisson_mean() {
    let out = stdout_of(&[
        "simulate",
        "--k",
        "2",
        "--r",
        "1",
        "--t",
        "1.5",
        "--lambda",
        "2",
        "--samples",
        "20000",
        "--seed",
        "7",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let mean = v["mean"].as_f64().unwrap();
    assert!((mean - 1.0).abs() < 0.05, "mean {mean}");
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "simulate",
        "--k",
        "3",
        "--r",
        "1",
        "--t",
        "2.25",
        "--lambda",
        "3",
        "--samples",
        "5000",
        "--seed",
        "99",
    ];
    assert_eq!(stdout_of(&args), stdout_of(&args));
}

#[test]
fn emit_samples_writes_header_and_counts() {
    let dir = std::env::temp_dir().join(format!("khop-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("counts.txt");
    let _ = stdout_of(&[
        "simulate",
        "--k",
        "2",
        "--r",
        "1",
        "--t",
        "1.5",
        "--lambda",
        "1",
        "--samples",
        "50",
        "--seed",
        "3",
        "--emit-samples",
        path.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "# khop k=2 r=1 t=3/2 lambda=1 seed=3 n=50"
    );
    assert_eq!(lines.count(), 50);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn clt_synthetic_slope_and_csv() {
    let dir = std::env::temp_dir().join(format!("khop-clt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("rates.csv");
    let out = stdout_of(&[
        "clt",
        "--k",
        "3",
        "--r",
        "1",
        "--t",
        "2.5",
        "--lambdas",
        "25,50,100,200,400",
        "--samples",
        "0",
        "--seed",
        "1",
        "--synthetic",
        "c/sqrt",
        "--out",
        path.to_str().unwrap(),
    ]);
    let slope_line = out.lines().last().unwrap();
    let slope: f64 = slope_line
        .split('=')
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((slope + 0.5).abs() < 1e-12, "slope {slope}");
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("lambda,n_samples,ks,w1\n"));
    assert!(csv
        .trim_end()
        .lines()
        .last()
        .unwrap()
        .starts_with("# slope_ks="));
    assert_eq!(csv.lines().count(), 7);
    std::fs::remove_dir_all(&dir).ok();

    let out = stdout_of(&[
        "clt",
        "--k",
        "3",
        "--r",
        "1",
        "--t",
        "2.5",
        "--lambdas",
        "25,50,100",
        "--samples",
        "0",
        "--seed",
        "1",
        "--synthetic",
        "const",
    ]);
    assert!(out.contains("slope_ks=0 "), "{out}");
}

#[test]
fn exit_codes() {
    // unknown flag: usage error, exit 2, usage text on stderr
    let out = khop(&["moments", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    // t outside the lens regime: exit 2
    let out = khop(&[
        "simulate",
        "--k",
        "3",
        "--r",
        "1",
        "--t",
        "1.2",
        "--lambda",
        "1",
        "--samples",
        "10",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // desk-scale limit without --force: exit 2
    let out = khop(&["moments", "--k", "7", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    // help exits 0
    let out = khop(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    // passing check suite exits 0
    let out = khop(&["check", "--suite", "tables"]);
    assert_eq!(out.status.code(), Some(0));
    // unknown suite: exit 2
    let out = khop(&["check", "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn threads_env_var_is_honored() {
    let base = [
        "simulate",
        "--k",
        "3",
        "--r",
        "1",
        "--t",
        "2",
        "--lambda",
        "2",
        "--samples",
        "3000",
        "--seed",
        "11",
    ];
    let with_flag = stdout_of(&{
        let mut v = base.to_vec();
        v.extend(["--threads", "2"]);
        v
    });
    let with_env = {
        let out = Command::new(env!("CARGO_BIN_EXE_khop"))
            .args(base)
            .env("KHOP_THREADS", "2")
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    assert_eq!(with_flag, with_env);
}
