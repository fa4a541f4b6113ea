use std::process::{Command, Output};

fn momentlock(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momentlock")).args(args).output().expect("binary runs")
}

fn momentlock_with_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momentlock"))
        .args(args)
        .env("MOMENTLOCK_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn discretize_emits_schema() {
    let out = momentlock(&["discretize", "--density", "beta:1,3", "--rule", "trapezoid", "--M", "4", "--L", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["points", "q", "p", "lambda", "kl", "residual", "iterations"]);
    let p: Vec<f64> = v["p"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(p.len(), 9);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    assert!(v["residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["lambda"].as_array().unwrap().len(), 4);
    // 17 significant digits.
    assert!(text.contains("e-2") || text.contains("e-1"));
    let first = v["q"][0].to_string();
    assert_eq!(first.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let args = ["convergence", "--density", "uniform", "--rule", "simpson", "--g", "sin_pi_x", "--L", "2,4,6", "--M", "1..12"];
    let a = momentlock_with_threads(&args, "1");
    let b = momentlock_with_threads(&args, "4");
    let c = momentlock(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 1 + 3 * 12);
    assert!(text.starts_with("L,M,I_M,e_q,e_p,"));
}

#[test]
fn portfolio_sweep_reproduces_reference_cells() {
    let out = momentlock(&["portfolio", "--gamma", "3", "--mu", "0.07", "--sigma", "0.2", "--r", "0.01", "--M", "1,4,9,16,25", "--L", "0,2,4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let cell = |m: &str, l: &str| -> Vec<String> {
        text.lines()
            .map(|line| line.split(',').map(String::from).collect::<Vec<_>>())
            .find(|c| c[0] == m && c[2] == l)
            .unwrap()
    };
    let theta = |m, l| cell(m, l)[3].parse::<f64>().unwrap();
    assert!((theta("1", "0") - 1.5155).abs() <= 5e-4);
    assert!((theta("4", "2") - 0.6694).abs() <= 5e-4);
    assert!((theta("25", "4") - 0.6681).abs() <= 5e-4);
    assert_eq!(cell("1", "4")[5], "TooFewPoints");
}

#[test]
fn chebyshev_table() {
    let out = momentlock(&["chebyshev", "--degrees", "6", "--g", "log_1px"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "log_1px");
    assert!((row[3].parse::<f64>().unwrap() + 5.592).abs() <= 0.02);
}

#[test]
fn pinsker_check_is_seeded() {
    let a = momentlock(&["pinsker-check", "--seed", "11", "--pairs", "200"]);
    let b = momentlock(&["pinsker-check", "--seed", "11", "--pairs", "200"]);
    let c = momentlock(&["pinsker-check", "--seed", "12", "--pairs", "200"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["violations"], 0);
}

#[test]
fn exit_codes_name_the_error() {
    let config = momentlock(&["discretize", "--density", "gamma:2,1"]);
    assert_eq!(config.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&config.stderr).contains("ConfigError"));

    let bad_flag = momentlock(&["discretize", "--bogus"]);
    assert_eq!(bad_flag.status.code(), Some(2));

    let odd = momentlock(&["discretize", "--density", "std_normal", "--M", "1", "--L", "4"]);
    assert_eq!(odd.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&odd.stderr).contains("TooFewPoints"));

    let bad_kappa = momentlock(&["discretize", "--kappa", "-1"]);
    assert_eq!(bad_kappa.status.code(), Some(2));

    let unknown_g = momentlock(&["convergence", "--g", "cos_x", "--M", "4"]);
    assert_eq!(unknown_g.status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("out.json");
    std::fs::write(&cfg, "density = \"uniform\"\nrule = \"simpson\"\nM = 3\nL = 2\n").unwrap();

    let r = momentlock(&["discretize", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(r.status.success());
    assert!(r.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 7);

    let r = momentlock(&["discretize", "--config", cfg.to_str().unwrap(), "--M", "5"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&r)).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 11);

    std::fs::write(&cfg, "unknown_key = 1\n").unwrap();
    let r = momentlock(&["discretize", "--config", cfg.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
}
