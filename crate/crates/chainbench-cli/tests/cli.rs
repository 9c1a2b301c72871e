//! End-to-end runs of the chainbench binary over a temporary workspace.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chainbench"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "chainbench {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn pipeline_generate_embed_sample_decode_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).display().to_string();

    let stdout = run_ok(&[
        "generate", "--m", "2", "--count", "2", "--seed", "7", "--out", &path("suite"),
    ]);
    assert!(stdout.contains("wrote 2 problems"));
    for file in ["manifest.json", "j_values.csv", "problem_n8_i000.json", "problem_n8_i001.json"] {
        assert!(dir.path().join("suite").join(file).exists(), "missing {file}");
    }

    run_ok(&[
        "embed",
        "--problem", &path("suite/problem_n8_i000.json"),
        "--chimera", "4x4x4",
        "-k", "-1",
        "--layout-out", &path("embedding.json"),
        "--out", &path("embedded.json"),
    ]);

    run_ok(&[
        "sample",
        "--embedded", &path("embedded.json"),
        "-n", "40",
        "--sweeps", "1200",
        "--seed", "3",
        "--out", &path("samples.csv"),
    ]);
    assert!(dir.path().join("samples.meta.json").exists());

    run_ok(&[
        "decode",
        "--samples", &path("samples.csv"),
        "--embedding", &path("embedding.json"),
        "--strategy", "majority",
        "--out", &path("decoded.csv"),
    ]);
    let decoded = fs::read_to_string(dir.path().join("decoded.csv")).unwrap();
    assert!(decoded.starts_with("sample,s0,"));
    assert_eq!(decoded.lines().count(), 41); // header + one row per sample

    // weighted without a profile is an error, not a silent fallback
    let out = run(&[
        "decode",
        "--samples", &path("samples.csv"),
        "--embedding", &path("embedding.json"),
        "--strategy", "weighted",
        "--out", &path("decoded_w.csv"),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--profile"));

    // n=8 on a 4x4x4 grid embeds as 8 chains of length 3
    let mut profile = String::from("chain,position,p_hat,n_b\n");
    for chain in 0..8 {
        for pos in 0..3 {
            profile.push_str(&format!("{chain},{pos},0.5,4\n"));
        }
    }
    fs::write(dir.path().join("profile.csv"), profile).unwrap();
    run_ok(&[
        "decode",
        "--samples", &path("samples.csv"),
        "--embedding", &path("embedding.json"),
        "--strategy", "weighted",
        "--profile", &path("profile.csv"),
        "--out", &path("decoded_w.csv"),
    ]);

    let stdout = run_ok(&[
        "bench", "sweep",
        "--suite", &path("suite"),
        "--k", "0,-1",
        "--samples", "30",
        "--sweeps", "1200",
        "--seed", "11",
        "--chimera", "4x4x4",
        "--threads", "2",
        "--out", &path("sweep"),
    ]);
    assert!(stdout.contains("wrote 6 rows"));
    let rows = chainbench::io::read_sweep_csv(&dir.path().join("sweep/sweep.csv")).unwrap();
    assert_eq!(rows.len(), 6); // 2 strengths x 3 strategies
    assert!(rows.iter().all(|r| r.n == 8 && r.n_problems == 2 && r.n_samples == 60));
    assert!(dir.path().join("sweep/heatmap_n8_k0.csv").exists());
    assert!(dir.path().join("sweep/heatmap_n8_k-1.csv").exists());
    assert!(dir.path().join("sweep/manifest.json").exists());
}

#[test]
fn sweep_exits_nonzero_when_a_problem_cannot_be_scored() {
    let dir = tempfile::tempdir().unwrap();
    write_unsolvable_suite(dir.path());
    let out = run(&[
        "bench", "sweep",
        "--suite", &dir.path().display().to_string(),
        "--k", "0",
        "--samples", "5",
        "--sweeps", "100",
        "--out", &dir.path().join("sweep").display().to_string(),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("dropped problem"), "stderr: {stderr}");
}

/// A 30-spin problem with no stored ground state: too large to solve
/// exhaustively, so the sweep must drop it and report failure.
fn write_unsolvable_suite(dir: &Path) {
    let h: Vec<String> = (0..30).map(|_| "0.0".into()).collect();
    fs::write(
        dir.join("big.json"),
        format!(r#"{{"n":30,"h":[{}],"j":[[0,1,-1.0]],"beta":0.0}}"#, h.join(",")),
    )
    .unwrap();
    fs::write(
        dir.join("manifest.json"),
        r#"{"seed":0,"problems":[{"file":"big.json","n":30,"index":0}]}"#,
    )
    .unwrap();
}

#[test]
fn generate_requires_no_ground_above_solver_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("suite").display().to_string();
    let out = run(&["generate", "--m", "7", "--count", "1", "--out", &out_dir]);
    assert!(!out.status.success()); // n = 28 > exact-solver cap
    assert!(String::from_utf8_lossy(&out.stderr).contains("--no-ground"));

    run_ok(&["generate", "--m", "7", "--count", "1", "--no-ground", "--out", &out_dir]);
    let text = fs::read_to_string(dir.path().join("suite/problem_n28_i000.json")).unwrap();
    assert!(!text.contains("ground"));
}
