//! End-to-end checks of the command-line binary: argument handling, exit
//! codes, file layout, and byte-level determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn solitonlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solitonlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should spawn")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no exit code (killed by signal?)")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Quick collapse case used throughout: small f0 keeps the blow-up time and
/// hence the runtime down.
const QUICK: &[&str] = &[
    "--model",
    "sigma-charge2",
    "--f0",
    "0.25",
    "--v0",
    "-0.02",
];

#[test]
fn run_writes_the_documented_layout() {
    let dir = tempfile::tempdir().unwrap();
    let output = solitonlab(
        &[&["run"], QUICK, &["--out", "artifacts"]].concat(),
        dir.path(),
    );
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));

    let out = dir.path().join("artifacts");
    assert!(out.join("manifest.json").is_file());
    assert!(out.join("origin.csv").is_file());
    assert!(out.join("slices").join("t_0.csv").is_file());

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["model"], "sigma-charge2");
    assert_eq!(manifest["termination"], "reached-stop-fraction");
    assert!(manifest["rel_err_a"].as_f64().unwrap() < 0.05);
    assert!(manifest["tool"]["version"].is_string());

    let origin = fs::read_to_string(out.join("origin.csv")).unwrap();
    assert!(origin.starts_with("t,f0_t\n"));
    // First row is the initial state: t = 0, f(0,0) = f0, in full precision.
    assert_eq!(
        origin.lines().nth(1).unwrap(),
        "0.0000000000000000e0,2.5000000000000000e-1"
    );

    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("reached-stop-fraction"));
}

#[test]
fn exit_codes_follow_the_failure_taxonomy() {
    let dir = tempfile::tempdir().unwrap();

    // 1 — missing mandatory inputs.
    let output = solitonlab(&["run", "--f0", "1", "--v0", "-0.01", "--out", "x"], dir.path());
    assert_eq!(exit_code(&output), 1);
    assert!(stderr(&output).contains("--model"));

    // 1 — unknown configuration key, named in the message.
    fs::write(
        dir.path().join("bad.toml"),
        "model = \"sigma-charge2\"\nf0 = 1.0\nv0 = -0.01\nsnapshot_strde = 5\n",
    )
    .unwrap();
    let output = solitonlab(&["run", "--config", "bad.toml", "--out", "x"], dir.path());
    assert_eq!(exit_code(&output), 1);
    assert!(stderr(&output).contains("snapshot_strde"));

    // 1 — unreadable config file.
    let output = solitonlab(&["run", "--config", "nowhere.toml", "--out", "x"], dir.path());
    assert_eq!(exit_code(&output), 1);

    // 1 — usage error (unknown flag) is a configuration problem too.
    let output = solitonlab(&["run", "--nonsense"], dir.path());
    assert_eq!(exit_code(&output), 1);

    // 1 — no output directory from either flag or document.
    let output = solitonlab(&[&["run"], QUICK].concat(), dir.path());
    assert_eq!(exit_code(&output), 1);
    assert!(stderr(&output).contains("--out"));

    // 2 — a time step beyond the stability limit melts down; artifacts are
    // still written for the post-mortem.
    let output = solitonlab(
        &[
            "run", "--model", "sigma-charge2", "--f0", "1", "--v0", "-0.01", "--dt", "0.02",
            "--tmax", "50", "--out", "melt",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("unstable"));
    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("melt").join("manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["termination"], "numerical-instability");

    // 3 — output path blocked by a plain file.
    fs::write(dir.path().join("blocker"), b"").unwrap();
    let output = solitonlab(
        &[&["run"], QUICK, &["--out", "blocker/sub"]].concat(),
        dir.path(),
    );
    assert_eq!(exit_code(&output), 3);

    // 0 — --help and --version are successful displays.
    assert_eq!(exit_code(&solitonlab(&["--help"], dir.path())), 0);
    assert_eq!(exit_code(&solitonlab(&["--version"], dir.path())), 0);
}

#[test]
fn identical_invocations_write_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "model = \"yang-mills-4p1\"\nf0 = 0.25\nv0 = -0.02\nsnapshot_stride = 2000\n",
    )
    .unwrap();
    for out in ["a", "b"] {
        let output = solitonlab(
            &["run", "--config", "run.toml", "--out", out],
            dir.path(),
        );
        assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    }

    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(
        fs::read(a.join("origin.csv")).unwrap(),
        fs::read(b.join("origin.csv")).unwrap()
    );
    for entry in fs::read_dir(a.join("slices")).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(a.join("slices").join(&name)).unwrap(),
            fs::read(b.join("slices").join(&name)).unwrap(),
            "slice {name:?} differs"
        );
    }
    // Manifests agree on everything except the wall-clock field.
    let scrub = |path: &Path| -> serde_json::Value {
        let mut v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_seconds");
        v
    };
    assert_eq!(scrub(&a.join("manifest.json")), scrub(&b.join("manifest.json")));
}

#[test]
fn sweep_runs_cases_and_aggregates_the_table() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("sweep.toml"),
        r#"
model = "sigma-charge2"
snapshot_stride = 5000
output_dir = "family"

[[cases]]
f0 = 0.25
v0 = -0.04

[[cases]]
f0 = 0.25
v0 = -0.05
"#,
    )
    .unwrap();
    let output = solitonlab(
        &["sweep", "--config", "sweep.toml", "--workers", "2"],
        dir.path(),
    );
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));

    let family = dir.path().join("family");
    assert!(family.join("case-000").join("manifest.json").is_file());
    assert!(family.join("case-001").join("manifest.json").is_file());

    let table = fs::read_to_string(family.join("table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(
        lines[0],
        "f0,v0,a_fit,T_fit,a_pred,T_pred,rel_err_a,rel_err_T"
    );
    assert_eq!(lines.len(), 3);
    for line in &lines[1..] {
        let fields: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        // Written predictions satisfy a_pred·T_pred² = f0 to 1e-12.
        assert!((fields[4] * fields[5] * fields[5] - fields[0]).abs() < 1e-12);
        assert!(fields[6] < 0.05);
    }
}

#[test]
fn sweep_without_cases_exits_with_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.toml"), "model = \"sigma-charge2\"\n").unwrap();
    let output = solitonlab(
        &["sweep", "--config", "empty.toml", "--out", "x"],
        dir.path(),
    );
    assert_eq!(exit_code(&output), 1);
    assert!(stderr(&output).contains("cases"));
}

#[test]
fn slices_serve_requested_times_and_mark_the_unreachable_absent() {
    let dir = tempfile::tempdir().unwrap();
    // Stop fraction 0.05 ends this run around t ≈ 24.5, well before t_max,
    // so the t = 24.9 request exists in [0, t_max] but is never reached.
    let output = solitonlab(
        &[
            &["slices"],
            QUICK,
            &["--out", "cuts", "--overlay", "0", "10", "24.9"],
        ]
        .concat(),
        dir.path(),
    );
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));

    let slices = dir.path().join("cuts").join("slices");
    let index = fs::read_to_string(slices.join("index.csv")).unwrap();
    let lines: Vec<&str> = index.lines().collect();
    assert_eq!(lines[0], "t_requested,status,file");
    assert!(lines[1].ends_with(",written,t_0.csv"));
    assert!(lines[2].ends_with(",written,t_10.csv"));
    assert!(lines[3].ends_with(",absent,"));

    // The t = 0 slice is the initial line: f = f0 at every node, exactly.
    let t0 = fs::read_to_string(slices.join("t_0.csv")).unwrap();
    for line in t0.lines().skip(1) {
        let f: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(f, 0.25);
    }

    // Overlay columns are present on the evolved slice and the ellipse
    // overlay matches the field at the origin to fit accuracy.
    let t10 = fs::read_to_string(slices.join("t_10.csv")).unwrap();
    assert!(t10.starts_with("r,f,f_ellipse,f_parabola\n"));
    let first: Vec<f64> = t10
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    assert!((first[1] - first[2]).abs() < 0.01 * first[1]);
    assert!((first[1] - first[3]).abs() < 0.01 * first[1]);

    // Without --overlay the slice has plain columns.
    let output = solitonlab(
        &[&["slices"], QUICK, &["--out", "plain", "10"]].concat(),
        dir.path(),
    );
    assert_eq!(exit_code(&output), 0);
    let t10 = fs::read_to_string(
        dir.path()
            .join("plain")
            .join("slices")
            .join("t_10.csv"),
    )
    .unwrap();
    assert!(t10.starts_with("r,f\n"));
}

#[test]
fn slices_reject_times_outside_the_run_window() {
    let dir = tempfile::tempdir().unwrap();
    let output = solitonlab(
        &[&["slices"], QUICK, &["--out", "x", "999"]].concat(),
        dir.path(),
    );
    assert_eq!(exit_code(&output), 1);
    assert!(stderr(&output).contains("outside"));

    let output = solitonlab(
        &[&["slices"], QUICK, &["--out", "x", "--", "-1"]].concat(),
        dir.path(),
    );
    assert_eq!(exit_code(&output), 1);
}

#[test]
fn flag_overrides_beat_document_values() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "model = \"sigma-charge2\"\nf0 = 1.0\nv0 = -0.01\nsnapshot_stride = 5000\n",
    )
    .unwrap();
    // Override f0 and v0 to the quick case; the manifest echoes the
    // overridden values.
    let output = solitonlab(
        &[
            "run", "--config", "run.toml", "--f0", "0.25", "--v0", "-0.02", "--out", "o",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("o").join("manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["config"]["f0"], 0.25);
    assert_eq!(manifest["config"]["v0"], -0.02);
}

#[test]
fn stationary_config_runs_clean_with_no_fit() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("still.toml"),
        "model = \"yang-mills-4p1\"\nf0 = 1.0\nv0 = 0.0\nt_max = 0.05\n",
    )
    .unwrap();
    let output = solitonlab(
        &["run", "--config", "still.toml", "--out", "still"],
        dir.path(),
    );
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("still").join("manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["termination"], "reached-t-max");
    assert!(manifest.get("fit").is_none());
    assert!(manifest.get("predicted").is_none());
}
