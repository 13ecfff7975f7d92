//! CLI acceptance: the pipeline-determinism criterion, exercised through
//! the installed binary exactly as a user would run it.

use std::path::Path;
use std::process::Command;

fn run(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fdesq"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

/// Byte-compare two directories recursively; returns the differing paths.
fn tree_diff(a: &Path, b: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(a)
        .unwrap()
        .chain(std::fs::read_dir(b).unwrap())
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names.dedup();
    let mut diffs = Vec::new();
    for name in names {
        let (pa, pb) = (a.join(&name), b.join(&name));
        if pa.is_dir() != pb.is_dir() {
            diffs.push(format!("{name}: present on one side only"));
        } else if pa.is_dir() {
            diffs.extend(tree_diff(&pa, &pb));
        } else {
            match (std::fs::read(&pa), std::fs::read(&pb)) {
                (Ok(ba), Ok(bb)) if ba == bb => {}
                _ => diffs.push(name),
            }
        }
    }
    diffs
}

#[test]
fn criterion_7_pipeline_determinism() {
    let start = std::time::Instant::now();
    let root = tempfile::tempdir().unwrap();
    let runs = [root.path().join("first"), root.path().join("second")];
    for dir in &runs {
        std::fs::create_dir_all(dir).unwrap();
        for step in ["simulate", "train", "backtest"] {
            let output = run(dir, &[step]);
            assert!(
                output.status.success(),
                "{step} failed in {}: {}",
                dir.display(),
                String::from_utf8_lossy(&output.stderr)
            );
        }
    }
    let diffs = tree_diff(&runs[0].join("out"), &runs[1].join("out"));
    let pass = diffs.is_empty();
    println!(
        "criterion 7: {} — simulate/train/backtest artifacts byte-identical across two runs ({} differing files), {:.1}s",
        if pass { "PASS" } else { "FAIL" },
        diffs.len(),
        start.elapsed().as_secs_f64()
    );
    assert!(pass, "artifacts differ: {diffs:?}");
}
