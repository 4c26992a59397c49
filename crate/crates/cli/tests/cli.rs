use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use berrylab_cli::{Document, RunConfig};

fn berrylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_berrylab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let out = dir.join(name);
    let mut argv = args.to_vec();
    let out_str = out.to_str().unwrap().to_string();
    argv.extend(["--out", &out_str]);
    let res = berrylab(&argv);
    assert!(
        res.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    fs::read(out).unwrap()
}

#[test]
fn json_round_trips_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = run_to(
        dir.path(),
        "h.json",
        &[
            "holonomy",
            "--theta",
            "0.3,1.1",
            "--format",
            "json",
            "--points",
            "64",
            "--plot",
            "theta:max_dev",
        ],
    );
    let doc: Document = serde_json::from_slice(&bytes).unwrap();
    let again = serde_json::to_string(&doc.meta.config).unwrap();
    let back: RunConfig = serde_json::from_str(&again).unwrap();
    assert_eq!(back, doc.meta.config);
    assert_eq!(doc.meta.config.thetas, vec![0.3, 1.1]);
    assert_eq!(doc.meta.coupling, "xx-minus-yy");
    assert!(!doc.meta.disclaimer.is_empty());
    assert_eq!(doc.rows.len(), 2);
    assert_eq!(doc.columns.len(), 7);
}

#[test]
fn csv_has_meta_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let text = String::from_utf8(run_to(
        dir.path(),
        "e.csv",
        &[
            "evolve",
            "--theta",
            "1.5707963267948966",
            "--g",
            "0.25",
            "--omega",
            "0.05",
        ],
    ))
    .unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config: {"));
    assert!(text.contains("# disclaimer: "));
    assert!(text.contains("# coupling: xx-minus-yy"));
    let header = lines.iter().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        *header,
        "theta,g,omega,ratio,total,dynamical,geometric,final_fidelity,min_fidelity,loop_duration"
    );
}

#[test]
fn plot_files_are_named_by_columns() {
    let dir = tempfile::tempdir().unwrap();
    run_to(
        dir.path(),
        "b.csv",
        &[
            "breakdown",
            "--omega",
            "0.01",
            "--g",
            "0.05,0.5",
            "--plot",
            "ratio:final_fidelity",
        ],
    );
    let data =
        fs::read_to_string(dir.path().join("breakdown_final_fidelity_vs_ratio.dat")).unwrap();
    let rows: Vec<&str> = data.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.split_whitespace().count() == 2));
    // Largest coupling first.
    assert!(rows[0].starts_with("2.0000"));
}

#[test]
fn sweep_keeps_parameter_order() {
    let dir = tempfile::tempdir().unwrap();
    let text = String::from_utf8(run_to(
        dir.path(),
        "s.csv",
        &[
            "sweep",
            "--target",
            "holonomy",
            "--theta",
            "3,0.5,2,1",
            "--points",
            "64",
            "--jobs",
            "4",
        ],
    ))
    .unwrap();
    let thetas: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("theta"))
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(thetas, vec![3.0, 0.5, 2.0, 1.0]);
}

#[test]
fn exit_codes() {
    let bad = berrylab(&["berry", "--theta", "7"]);
    assert_eq!(bad.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&bad.stderr);
    assert_eq!(stderr.lines().count(), 1);
    assert!(stderr.contains("--theta"));

    assert_eq!(berrylab(&["berry", "--nope"]).status.code(), Some(2));
    assert_eq!(
        berrylab(&["holonomy", "--plot", "theta:gamma"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(berrylab(&["frobnicate"]).status.code(), Some(2));

    // Degenerate level at zero coupling: a numerical failure, not a usage one.
    let degenerate = berrylab(&["berry", "--g", "0"]);
    assert_eq!(degenerate.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&degenerate.stderr).contains("degenerate level"));

    assert_eq!(berrylab(&["--help"]).status.code(), Some(0));
}

#[test]
fn stdout_when_no_out_flag() {
    let res = berrylab(&["connection", "--theta", "1.0"]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.contains("theta,phi,a11_re"));
}
