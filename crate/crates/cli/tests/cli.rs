use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const STATIONARY: &str = r#"
name = "stationary"
duration_s = 20.0

[[persons]]
pose = { x = 4.0, y = 0.0 }
"#;

fn pfollow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfollow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_writes_trace_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write(dir.path(), "s.toml", STATIONARY);
    let out_dir = dir.path().join("out");
    let out = pfollow(&["run", &scn, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let trace = fs::read_to_string(out_dir.join("stationary.trace.csv")).unwrap();
    assert!(trace.starts_with("t_s,robot_x,robot_y,robot_theta,person0_x,person0_y,"));
    assert_eq!(trace.lines().count(), 401);
    assert!(out_dir.join("stationary.metrics.json").is_file());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let noisy = format!("{STATIONARY}\n[detector]\nmiss_rate = 0.2\nbbox_jitter_px = 3.0\n");
    let scn = write(dir.path(), "s.toml", &noisy);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        assert_eq!(
            pfollow(&["run", &scn, "--out", d.to_str().unwrap()])
                .status
                .code(),
            Some(0)
        );
    }
    for f in ["stationary.trace.csv", "stationary.metrics.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn inverted_band_is_rejected_by_field_name() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{STATIONARY}\n[controller]\nlowlim_m = 1.9\nuplim_m = 1.9\n");
    let scn = write(dir.path(), "bad.toml", &text);
    let out = pfollow(&["run", &scn, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("lowlim_m"), "{}", stderr(&out));
    assert!(!dir.path().join("stationary.trace.csv").exists());
}

#[test]
fn unknown_keys_and_missing_files_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write(
        dir.path(),
        "typo.toml",
        &format!("{STATIONARY}\n[detector]\nmis_rate = 0.1\n"),
    );
    let out = pfollow(&["run", &typo]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("mis_rate"), "{}", stderr(&out));

    let missing = dir.path().join("absent.toml");
    let out = pfollow(&["run", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn curves_match_the_published_limits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ctl.toml", "");
    let out = pfollow(&["curves", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let angular = fs::read_to_string(dir.path().join("angular_velocity.csv")).unwrap();
    let lines: Vec<&str> = angular.lines().collect();
    assert_eq!(lines[0], "dx_px,angular_rad_s");
    assert_eq!(lines[1], "-320,-1.8");
    assert_eq!(lines[321], "0,0");
    assert_eq!(lines[641], "320,1.8");
    let linear = fs::read_to_string(dir.path().join("linear_velocity.csv")).unwrap();
    assert!(linear.lines().any(|l| l == "1.8,0"));
    assert!(linear.lines().any(|l| l == "3,0.26"));
    assert!(linear.lines().any(|l| l == "8,0.26"));

    let bad = write(dir.path(), "bad.toml", "max_angular = 1.0\n");
    let out = pfollow(&["curves", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("min_angular"), "{}", stderr(&out));
}

#[test]
fn sweep_prints_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write(dir.path(), "s.toml", STATIONARY);
    let out = pfollow(&[
        "sweep",
        &scn,
        "--param",
        "detector.miss_rate",
        "--values",
        "0,0.2,0.5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(values, ["0", "0.2", "0.5"]);
}

#[test]
fn empty_sweep_prints_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write(dir.path(), "s.toml", STATIONARY);
    let out = pfollow(&[
        "sweep",
        &scn,
        "--param",
        "persons.*.speed_mps",
        "--values",
        "",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write(dir.path(), "s.toml", STATIONARY);
    assert_eq!(pfollow(&[]).status.code(), Some(1));
    assert_eq!(pfollow(&["launch"]).status.code(), Some(1));
    assert_eq!(
        pfollow(&["sweep", &scn, "--param", "x.y", "--values", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        pfollow(&[
            "sweep",
            &scn,
            "--param",
            "detector.miss_rate",
            "--values",
            "0.1,abc"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(pfollow(&["--help"]).status.code(), Some(0));
}

#[test]
fn bundled_scenarios_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let out_dir = tempfile::tempdir().unwrap();
    let out_arg = out_dir.path().to_str().unwrap();
    let mut ran = 0;
    for entry in fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        let file = path.to_str().unwrap();
        let out = if path.file_stem().unwrap() == "controller" {
            pfollow(&["curves", file, "--out", out_arg])
        } else {
            pfollow(&["run", file, "--out", out_arg])
        };
        assert_eq!(out.status.code(), Some(0), "{file}: {}", stderr(&out));
        ran += 1;
    }
    assert_eq!(ran, 4);
}
