use std::path::Path;
use std::process::{Command, Output};

fn iwatsuka(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iwatsuka"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn accheck_on_step_prints_json_verdict() {
    let o = iwatsuka(&["accheck", "--builtin", "iwatsuka-step"]);
    assert!(o.status.success(), "{o:?}");
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], true);
    assert_eq!(v["matched_condition"], "cond_1_3");
}

#[test]
fn bands_run_writes_artifacts_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = iwatsuka(&[
            "bands",
            "--builtin",
            "iwatsuka-step",
            "--k",
            "2",
            "--xi-min",
            "-20",
            "--xi-max",
            "20",
            "--xi-count",
            "9",
            "--plot",
            "--out",
            path(&out),
        ]);
        assert!(o.status.success(), "{o:?}");
        (out, stdout(&o))
    };
    let (a, text) = run("a");
    let (b, _) = run("b");
    assert!(
        text.contains("band 1:") && text.contains("band 2:"),
        "{text}"
    );
    assert!(
        text.contains("ac: verdict=true condition=cond_1_3"),
        "{text}"
    );
    for f in ["bands.csv", "bands.gp"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let csv = std::fs::read_to_string(a.join("bands.csv")).unwrap();
    assert!(csv.starts_with("xi,lambda_1,lambda_2\n"));
    assert_eq!(csv.lines().count(), 10);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["options"]["tail_tol"], 5e-2);
    assert_eq!(meta["per_xi"].as_array().unwrap().len(), 9);
}

#[test]
fn bands_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"schema": 1, "workflow": "bands",
            "b": {"kind": "constant", "value": 1},
            "xi": {"min": -4, "max": 4, "count": 3},
            "output": "landau"}"#,
    )
    .unwrap();
    let o = iwatsuka(&[
        "bands",
        "--config",
        path(&cfg),
        "--out",
        path(&dir.path().join("o")),
    ]);
    assert!(o.status.success(), "{o:?}");
    let csv = std::fs::read_to_string(dir.path().join("o/bands.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        for n in 1..=3 {
            assert!((v[n] - (2 * n - 1) as f64).abs() < 1e-3, "{line}");
        }
    }
}

#[test]
fn comparison_writes_decreasing_error_column() {
    let dir = tempfile::tempdir().unwrap();
    let o = iwatsuka(&[
        "comparison",
        "--omega",
        "1",
        "--omega-tilde",
        "0.5",
        "--alphas",
        "2,4,8,16",
        "--k",
        "2",
        "--out",
        path(dir.path()),
    ]);
    assert!(o.status.success(), "{o:?}");
    let mut r = csv::Reader::from_path(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["alpha", "sigma_1", "sigma_2", "err_1", "err_2"]
    );
    let err1: Vec<f64> = r
        .records()
        .map(|rec| rec.unwrap()[3].parse().unwrap())
        .collect();
    assert_eq!(err1.len(), 4);
    // past alpha = 4 the column sits on the discretization floor
    assert!(err1.windows(2).all(|p| p[1] <= p[0] + 1e-12), "{err1:?}");
    assert!(err1[3] < err1[0] / 100.0);
}

#[test]
fn layer_bend_verdict_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let o = iwatsuka(&[
        "layer",
        "--radius",
        "2",
        "--angle-in",
        "0",
        "--angle-out",
        "60",
        "--b0",
        "1",
        "--skip-bands",
        "--half-width",
        "0.2",
        "--u",
        "0.5",
        "--out",
        path(dir.path()),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(
        stdout(&o).contains("verdict=true clause=curvature_gap"),
        "{}",
        stdout(&o)
    );
    let profile = std::fs::read_to_string(dir.path().join("effective_profile.csv")).unwrap();
    assert!(profile.starts_with("s,b_eff,w_eff,kappa\n"));
    assert!(dir.path().join("curve.csv").exists());
    assert!(dir.path().join("layer_potential.csv").exists());
}

#[test]
fn gauge_debug_prints_vector_potential() {
    let o = iwatsuka(&[
        "gauge-debug",
        "--builtin",
        "iwatsuka-step",
        "--x-min",
        "-2",
        "--x-max",
        "2",
        "--count",
        "5",
    ]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (x, a) = l.split_once(',').unwrap();
            (x.parse().unwrap(), a.parse().unwrap())
        })
        .collect();
    assert_eq!(
        rows,
        vec![
            (-2.0, -2.0),
            (-1.0, -1.0),
            (0.0, 0.0),
            (1.0, 2.0),
            (2.0, 4.0)
        ]
    );
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"schema": 1, "builtin": "landau", "xi": {"count": 0}}"#,
    )
    .unwrap();
    let o = iwatsuka(&["bands", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("xi.count"));

    std::fs::write(&cfg, r#"{"schema": 1, "b": {"kind": "zigzag"}}"#).unwrap();
    let o = iwatsuka(&["bands", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tanh_step"));

    assert_eq!(iwatsuka(&["bands", "--k", "x"]).status.code(), Some(2));
    assert_eq!(
        iwatsuka(&["bands", "--builtin", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(
        iwatsuka(&["bands", "--config", path(&dir.path().join("missing.json"))])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn numerical_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("flat.json");
    std::fs::write(
        &cfg,
        r#"{"schema": 1, "b": {"kind": "constant", "value": 0}}"#,
    )
    .unwrap();
    let o = iwatsuka(&["bands", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(1), "{o:?}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("confin"));
}
