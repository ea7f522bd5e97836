use std::path::Path;
use std::process::{Command, Output};

fn nhknot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhknot")).args(args).env_remove("NHKNOT_WORKERS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn boundaries_print_four_roots() {
    let o = nhknot(&["boundaries"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines, ["0.190983", "0.651388", "1.151388", "1.309017"]);
}

#[test]
fn symcheck_marks_inapplicable_relations() {
    let o = nhknot(&["symcheck"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("pass").count(), 3);

    let o = nhknot(&["symcheck", "--t3", "2", "--lambda", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("particle-hole") && l.ends_with("pass")));
    assert_eq!(out.matches("not applicable").count(), 2);
}

#[test]
fn malformed_config_is_a_usage_error_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# point c\nt2 = 2\nlambda 0.7\n").unwrap();
    let o = nhknot(&["braid", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    std::fs::write(&cfg, "t2 = 2\nfrobnicate = 1\n").unwrap();
    let o = nhknot(&["boundaries", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"));
}

#[test]
fn coarse_k_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = nhknot(&["spectrum", "--set", "n_k=32", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gapless_point_is_a_computation_error() {
    let root = format!("{}", (3.0 - 5f64.sqrt()) / 4.0);
    let o = nhknot(&["winding", "--lambda", &root]);
    assert_eq!(o.status.code(), Some(1));
    let o = nhknot(&["winding", "--lambda", "0.7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("w = -2"));
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn braid_writes_tokens_invariants_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = nhknot(&["braid", "--lambda", "0.7", "-o", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(dir.path().join("word.braid")).unwrap().trim(), "s2 s2");
    let inv: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("invariants.json")).unwrap()).unwrap();
    assert_eq!(inv["component_count"], 4);
    assert_eq!(inv["linking_matrix"][1][2], 1);
    let m = manifest(dir.path());
    assert_eq!(m["config"]["lambda"], "0.7");
    assert_eq!(m["config"]["n_k"], "512");
    assert_eq!(m["files"].as_array().unwrap().len(), 3);

    let dir0 = tempfile::tempdir().unwrap();
    let o = nhknot(&["braid", "--lambda", "0", "-o", dir0.path().to_str().unwrap()]);
    assert!(stdout(&o).contains("Unlink(4)"));
    assert_eq!(std::fs::read_to_string(dir0.path().join("word.braid")).unwrap(), "\n");
}

#[test]
fn phase_diagram_is_independent_of_worker_count() {
    let run = |workers: &str| {
        let dir = tempfile::tempdir().unwrap();
        let o = nhknot(&[
            "phase-diagram",
            "--set",
            "lambda_count=16",
            "--set",
            "t2_count=16",
            "--set",
            "n_k=256",
            "--set",
            "knots=true",
            "-w",
            workers,
            "-o",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let csv = std::fs::read(dir.path().join("phase_diagram.csv")).unwrap();
        let m = manifest(dir.path());
        assert!(dir.path().join("phase_diagram.svg").exists());
        assert_eq!(m["color_scale"]["kind"], "categorical");
        (csv, m)
    };
    let (a, ma) = run("1");
    let (b, mb) = run("3");
    assert_eq!(a, b);
    let sha = |m: &serde_json::Value| m["files"][0]["sha256"].clone();
    assert_eq!(sha(&ma), sha(&mb));
    let header = String::from_utf8_lossy(&a).lines().next().unwrap().to_string();
    assert_eq!(header, "lambda,t2,w,flag,knot_tag");
}

#[test]
fn cfit_refits_curve_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = nhknot(&["ee-cut", "--lambda", "0.25", "--set", "sites=160", "--set", "cut_step=4", "-o", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let sizes_dir = dir.path().join("sizes");
    let o = nhknot(&[
        "ee-size",
        "--lambda",
        "0.25",
        "--set",
        "sizes=40,56,80,112,160,224",
        "-o",
        sizes_dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let fit_dir = dir.path().join("fit");
    let cut_curve = format!("cut_curve={}", dir.path().join("entropy_cut.csv").display());
    let size_curve = format!("size_curve={}", sizes_dir.join("entropy_size.csv").display());
    let o = nhknot(&["cfit", "--set", &cut_curve, "--set", &size_curve, "--set", "sites=160", "-o", fit_dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let fits: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fit_dir.join("fits.json")).unwrap()).unwrap();
    let c = fits["cardy_calabrese"]["c"].as_f64().unwrap();
    assert!((c - 1.0).abs() < 0.15, "c = {c}");
}
