use std::path::Path;
use std::process::{Command, Output};

fn fgps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fgps"))
        .args(args)
        .output()
        .expect("run fgps")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn records(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn float(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn fd_row_count_and_trailer() {
    let o = fgps(&["fd", "--n", "4", "--ng", "64"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = records(&stdout(&o));
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4][1], "max");
    let worst = rows[..4].iter().map(|r| float(&r[4])).fold(0.0, f64::max);
    assert_eq!(float(&rows[4][4]), worst);
}

#[test]
fn fd_accuracy_at_half() {
    let o = fgps(&["fd", "--n", "20", "--memory-length", "30", "--ng", "1000", "--alpha", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = records(&stdout(&o));
    assert_eq!(rows.len(), 21);
    assert!(float(&rows[20][4]) <= 1e-6);
}

#[test]
fn fd_alpha_grid_gives_one_block_per_order() {
    let o = fgps(&["fd", "--n", "6", "--ng", "32", "--alpha-grid", "0.2,0.8"]);
    let rows = records(&stdout(&o));
    assert_eq!(rows.len(), 14);
    assert_eq!(rows.iter().filter(|r| r[1] == "max").count(), 2);
}

#[test]
fn output_is_deterministic() {
    let a = fgps(&["fd", "--n", "8", "--ng", "100", "--alpha", "0.3"]);
    let b = fgps(&["fd", "--n", "8", "--ng", "100", "--alpha", "0.3"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(!stdout(&a).contains('\r'));
}

#[test]
fn invalid_configs_exit_2_without_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let out = out.to_str().unwrap();
    for args in [
        vec!["fd", "--n", "5", "--out", out],
        vec!["fd", "--alpha", "1.2", "--out", out],
        vec!["fd", "--memory-length", "-1", "--out", out],
        vec!["fd", "--lambda", "-0.7", "--out", out],
        vec!["fd", "--period", "3", "--out", out],
        vec!["gamma", "--alpha-grid", "", "--out", out],
        vec!["gamma", "--alpha-grid", "0.5,abc", "--out", out],
        vec!["matrix", "--n", "0", "--out", out],
    ] {
        let o = fgps(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn gamma_is_two_at_half() {
    let o = fgps(&["gamma", "--alpha-grid", "0.3,0.5,0.7"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = records(&stdout(&o));
    assert_eq!(rows.len(), 6);
    for r in rows.iter().filter(|r| float(&r[1]) == 0.5) {
        assert_eq!(float(&r[2]), 2.0);
    }
    let sizes: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert!(sizes.contains(&"50") && sizes.contains(&"100"));
}

#[test]
fn matrix_toeplitz_matches_dense() {
    let dense = records(&stdout(&fgps(&["matrix", "--n", "6", "--ng", "40", "--alpha", "0.4"])));
    let pair = records(&stdout(&fgps(&[
        "matrix", "--n", "6", "--ng", "40", "--alpha", "0.4", "--toeplitz",
    ])));
    assert_eq!(dense.len(), 6);
    for k in 0..6 {
        assert_eq!(dense[0][1 + k], pair[k][1]);
        assert_eq!(dense[k][1], pair[k][2]);
    }
}

#[test]
fn exact_sin_with_quadrature_check() {
    let o = fgps(&[
        "exact-sin", "--alpha", "0.5", "--memory-length", "5", "--samples", "7", "--quadrature",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = records(&stdout(&o));
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| float(&r[4]) <= 1e-8));
}

#[test]
fn error_sweep_shapes() {
    let o = fgps(&[
        "error-sweep", "--n", "4", "--memory-grid", "2,4", "--ng-grid", "10,20", "--observed",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = records(&stdout(&o));
    assert_eq!(rows.len(), 4);
    // ln bound falls with N_G at fixed L
    assert!(float(&rows[2][4]) < float(&rows[0][4]));
    assert!(rows.iter().all(|r| float(&r[8]) >= 0.0));
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn benchmark_solve_writes_result_and_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.json");
    let o = fgps(&["solve-pfocp", "--samples", "50", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["converged"], true);
    assert_eq!(v["collapsed_to_static"], false);
    let j = v["objective"].as_f64().unwrap();
    assert!((j + 4.18881033e-6).abs() <= 5e-8);
    assert!(v["max_adfe"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["states"].as_array().unwrap().len(), 12);
    let traj = std::fs::read_to_string(dir.path().join("bench.trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,x1,x2,u1\n"));
    assert_eq!(records(&traj).len(), 50);
}

#[test]
fn alpha_sweep_writes_one_pair_per_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let o = fgps(&[
        "solve-pfocp", "--ng", "100", "--alpha-grid", "0.1,0.5", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    for a in ["0.1", "0.5"] {
        let v = read_json(&dir.path().join(format!("run_alpha{a}.json")));
        assert!(v["objective"].as_f64().unwrap().abs() <= 1e-10);
        assert!(dir.path().join(format!("run_alpha{a}.trajectory.csv")).exists());
    }
}

#[test]
fn iteration_cap_exits_3_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("capped.json");
    let o = fgps(&["solve-pfocp", "--max-iter", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let v = read_json(&out);
    assert_eq!(v["converged"], false);
    assert_eq!(v["stop_reason"], "max_iter");
}

#[test]
fn problem_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema_version": 1, "n_x": 1}"#).unwrap();
    let o = fgps(&["solve-pfocp", "--problem", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    // g = (x - 1)^2 + u^2, D^a x = u: the optimum is the constant x = 1
    let good = dir.path().join("good.json");
    std::fs::write(
        &good,
        r#"{
            "schema_version": 1, "n_x": 1, "n_u": 1, "period": 3.0,
            "running_cost": [
                {"coeff": 1.0, "x": [2]}, {"coeff": -2.0, "x": [1]},
                {"coeff": 1.0}, {"coeff": 1.0, "u": [2]}
            ],
            "dynamics": [[{"coeff": 1.0, "u": [1]}]]
        }"#,
    )
    .unwrap();
    let out = dir.path().join("good_result.json");
    let o = fgps(&[
        "solve-pfocp", "--problem", good.to_str().unwrap(), "--n", "6", "--ng", "20",
        "--alpha", "0.5", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out);
    assert!(v["objective"].as_f64().unwrap().abs() < 1e-10);
    for row in v["states"].as_array().unwrap() {
        assert!((row[0].as_f64().unwrap() - 1.0).abs() < 1e-6);
    }

    let constrained = dir.path().join("constrained.json");
    std::fs::write(
        &constrained,
        r#"{
            "schema_version": 1, "n_x": 1, "n_u": 1, "period": 3.0,
            "running_cost": [{"coeff": 1.0, "x": [2]}, {"coeff": 1.0, "u": [2]}],
            "dynamics": [[{"coeff": 1.0, "u": [1]}]],
            "inequalities": [[{"coeff": 1.0, "u": [1]}, {"coeff": -2.0}]]
        }"#,
    )
    .unwrap();
    let out = dir.path().join("constrained_result.json");
    let o = fgps(&[
        "solve-pfocp", "--problem", constrained.to_str().unwrap(), "--n", "8", "--ng", "30",
        "--alpha", "0.5", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_json(&out)["collapsed_to_static"], true);
}
