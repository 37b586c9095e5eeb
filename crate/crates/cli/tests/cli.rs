use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use schurtwirl::io::{read_matrix, write_matrix};
use schurtwirl::linalg::{identity, max_abs, CMatrix};
use schurtwirl::montecarlo::{random_density_matrix, RngStream};
use serde_json::Value;

fn run(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schurtwirl"))
        .args(args)
        .env("SCHURTWIRL_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

/// `∫₁^∞ x^{-n} e^{1-x} dx` by the exponential-integral recurrence.
fn exp_moment(n: usize) -> f64 {
    let mut v = std::f64::consts::E * 0.219_383_934_395_520_27;
    for k in 1..n {
        v = (1.0 - v) / k as f64;
    }
    if n == 0 { 1.0 } else { v }
}

fn write_state(dir: &Path, name: &str, m: &CMatrix) -> String {
    let path = dir.join(name);
    write_matrix(&path, m).unwrap();
    path.display().to_string()
}

#[test]
fn decompose_small_cases() {
    let dir = tempfile::tempdir().unwrap();
    let one = stdout_json(&run(dir.path(), &["decompose", "-d", "2", "-t", "1", "--json"]));
    let blocks = one["blocks"].as_array().unwrap();
    assert_eq!(blocks.len(), 1);
    assert_eq!((blocks[0]["d_l"].as_u64(), blocks[0]["d_v"].as_u64(), blocks[0]["dimension"].as_u64()), (Some(2), Some(1), Some(2)));
    let four = run(dir.path(), &["decompose", "-t", "4"]);
    let text = String::from_utf8(four.stdout).unwrap();
    assert!(text.contains("[3,1]") && text.contains("[2,2]"));
}

#[test]
fn json_is_deterministic_and_key_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(dir.path(), &["decompose", "-d", "3", "-t", "2", "--json"]).stdout;
    let b = run(dir.path(), &["decompose", "-d", "3", "-t", "2", "--json", "--no-cache"]).stdout;
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let keys = ["\"d\"", "\"t\"", "\"dimension\"", "\"blocks\"", "\"orthonormality_defect\""];
    let positions: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
    let s1 = run(dir.path(), &["sample", "-t", "2", "-N", "2000", "--seed", "3"]).stdout;
    let s2 = run(dir.path(), &["sample", "-t", "2", "-N", "2000", "--seed", "3"]).stdout;
    assert_eq!(s1, s2);
}

#[test]
fn cache_directory_is_used_unless_disabled() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    run(&cache, &["decompose", "-t", "3", "--no-cache"]);
    assert!(!cache.exists());
    run(&cache, &["decompose", "-t", "3"]);
    let entries: Vec<_> = fs::read_dir(&cache).unwrap().collect();
    assert_eq!(entries.len(), 1);
    // a corrupt entry is rebuilt rather than trusted
    let path = entries[0].as_ref().unwrap().path();
    fs::write(&path, "{").unwrap();
    let out = run(&cache, &["decompose", "-t", "3", "--json"]);
    assert_eq!(stdout_json(&out)["blocks"].as_array().unwrap().len(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["decompose", "-d", "2", "-t", "11"]).status.code(), Some(2));
    assert_eq!(run(d, &["decompose", "-t"]).status.code(), Some(3));
    assert_eq!(run(d, &["beta", "-t", "2", "--measure", "uniform"]).status.code(), Some(3));

    let garbage = d.join("garbage.json");
    fs::write(&garbage, "not json").unwrap();
    assert_eq!(run(d, &["twirl", "--map", "unitary", garbage.to_str().unwrap()]).status.code(), Some(3));
    let ragged = d.join("ragged.json");
    fs::write(&ragged, r#"{"rows":2,"cols":2,"entries":[[[1,0]]]}"#).unwrap();
    assert_eq!(run(d, &["twirl", "--map", "unitary", ragged.to_str().unwrap()]).status.code(), Some(3));
    let three = write_state(d, "three.json", &identity(3).unscale(3.0));
    assert_eq!(run(d, &["twirl", "--map", "unitary", &three]).status.code(), Some(3));

    let mut bad = identity(4).unscale(4.0);
    bad[(0, 0)] = schurtwirl::linalg::c(-0.5, 0.0);
    bad[(1, 1)] = schurtwirl::linalg::c(1.0, 0.0);
    let negative = write_state(d, "negative.json", &bad);
    let out = run(d, &["twirl", "--map", "unitary", &negative]);
    assert_eq!(out.status.code(), Some(4));
    assert!(!out.stderr.is_empty());

    let half = write_state(d, "half.json", &identity(4).unscale(8.0));
    assert_eq!(run(d, &["twirl", "--map", "unitary", &half]).status.code(), Some(4));
    assert_eq!(run(d, &["twirl", "--map", "unitary", &half, "--allow-subnormalized"]).status.code(), Some(0));
    assert_eq!(run(d, &["twirl", "--map", "slocc", &half, "--iterate", "0", "--allow-subnormalized"]).status.code(), Some(3));
}

#[test]
fn unitary_twirl_of_maximally_mixed_state() {
    let dir = tempfile::tempdir().unwrap();
    let mixed = identity(16).unscale(16.0);
    let input = write_state(dir.path(), "mixed.json", &mixed);
    let out = dir.path().join("out.json");
    let report = stdout_json(&run(
        dir.path(),
        &["twirl", "--map", "unitary", &input, "--out", out.to_str().unwrap(), "--json"],
    ));
    assert!((report["trace_out"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(max_abs(&(read_matrix(&out).unwrap() - mixed)) < 1e-15);
}

#[test]
fn slocc_twirl_of_maximally_mixed_state() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_state(dir.path(), "mixed.json", &identity(16).unscale(16.0));
    let report = stdout_json(&run(dir.path(), &["twirl", "--map", "slocc", "--measure", "exp", &input, "--json"]));
    let m: Vec<f64> = (0..=4).map(|j| exp_moment(4 * j)).collect();
    let betas = [m.iter().sum::<f64>(), 3.0 * (m[1] + m[2] + m[3]), 2.0 * m[2]];
    let want = betas.iter().sum::<f64>() / 16.0;
    let trace = report["trace_out"].as_f64().unwrap();
    assert!((trace - want).abs() < 1e-9, "{trace} vs {want}");
    assert!((report["mean_success_probability"].as_f64().unwrap() - want).abs() < 1e-9);
    assert_eq!(report["beta"].as_array().unwrap().len(), 3);
    assert!(dir.path().join("mixed.slocc.json").exists());

    let human = run(dir.path(), &["twirl", "--map", "slocc", &input]);
    let text = String::from_utf8(human.stdout).unwrap();
    assert!(text.contains("mean success probability") && text.contains("0.191642"));
}

#[test]
fn dirac_one_slocc_equals_unitary_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = RngStream::new(5, 0);
    let input = write_state(dir.path(), "rho.json", &random_density_matrix(16, &mut rng));
    let u = dir.path().join("u.json");
    let s = dir.path().join("s.json");
    run(dir.path(), &["twirl", "--map", "unitary", &input, "--out", u.to_str().unwrap()]);
    let out = run(dir.path(), &["twirl", "--map", "slocc", "--measure", "dirac:1", &input, "--out", s.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read(&u).unwrap(), fs::read(&s).unwrap());
}

#[test]
fn iterate_flag_composes_the_channel() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = RngStream::new(6, 0);
    let input = write_state(dir.path(), "rho.json", &random_density_matrix(8, &mut rng));
    let once = dir.path().join("once.json");
    let twice = dir.path().join("twice.json");
    let iter2 = dir.path().join("iter2.json");
    run(dir.path(), &["twirl", "--map", "slocc", &input, "--out", once.to_str().unwrap()]);
    let o = once.to_str().unwrap().to_string();
    run(dir.path(), &["twirl", "--map", "slocc", &o, "--allow-subnormalized", "--out", twice.to_str().unwrap()]);
    run(dir.path(), &["twirl", "--map", "slocc", &input, "--iterate", "2", "--out", iter2.to_str().unwrap()]);
    let diff = read_matrix(&twice).unwrap() - read_matrix(&iter2).unwrap();
    assert!(max_abs(&diff) < 1e-12);
}

#[test]
fn beta_table_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = String::from_utf8(run(dir.path(), &["beta", "-d", "2", "-t", "2", "--measure", "exp"]).stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("block,partition,D_L,D_V,D,beta,ratio"));
    let betas: Vec<f64> = lines.map(|l| l.split(',').nth(5).unwrap().parse().unwrap()).collect();
    let m: Vec<f64> = (0..=2).map(|j| exp_moment(4 * j)).collect();
    assert!((betas[0] - (m[0] + m[1] + m[2])).abs() < 1e-8);
    assert!((betas[1] - m[1]).abs() < 1e-8);

    let v = stdout_json(&run(dir.path(), &["beta", "-t", "4", "--measure", "dirac:1", "--json"]));
    let b: Vec<f64> = v["rows"].as_array().unwrap().iter().map(|r| r["beta"].as_f64().unwrap()).collect();
    assert_eq!(b, vec![5.0, 9.0, 2.0]);

    let table = dir.path().join("measure.csv");
    fs::write(&table, "# x,weight\n1.0,1\n2.0,1\n").unwrap();
    let spec = format!("table:{}", table.display());
    let v = stdout_json(&run(dir.path(), &["beta", "-t", "2", "--measure", &spec, "--json"]));
    let anti = v["rows"][1]["beta"].as_f64().unwrap();
    assert!((anti - 0.5 * (1.0 + 2f64.powi(-4))).abs() < 1e-12);
}

#[test]
fn verify_reports_and_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "-d", "3", "-t", "2", "--json", "-N", "20000"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let dims: Vec<(u64, u64)> = v["blocks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| (b["d_l"].as_u64().unwrap(), b["d_v"].as_u64().unwrap()))
        .collect();
    assert_eq!(dims, vec![(6, 1), (3, 1)]);
    assert_eq!(v["passed"], Value::Bool(true));
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["status"] != "fail"));
}

#[test]
fn sample_report_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["sample", "--map", "symmetric", "-t", "3", "-N", "20000", "--seed", "9"]);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let v = stdout_json(&out);
    let keys = ["\"estimate\"", "\"closed_form\"", "\"residual_norm\"", "\"N\"", "\"seed\""];
    let positions: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(v["N"].as_u64(), Some(20000));
    assert!(v["residual_norm"].as_f64().unwrap() < 5e-2);
    assert_eq!(run(dir.path(), &["sample", "-N", "10"]).status.code(), Some(3));
}
