#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use groundcal_core::corpus::{parse_str, serialize_dataset};
use groundcal_core::Ensemble;
use serde_json::Value;

pub fn groundcal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_groundcal"))
        .args(args)
        .output()
        .expect("spawn groundcal")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

pub fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text
        .lines()
        .rev()
        .find(|l| l.starts_with('{'))
        .unwrap_or_else(|| panic!("no JSON error line in stderr: {text}"));
    serde_json::from_str(line).expect("stderr error line is JSON")
}

pub fn synth_file(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut args = vec!["synth", "--out", path_str(&path)];
    args.extend_from_slice(extra);
    let out = groundcal(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

pub fn read_dataset(path: &Path) -> Vec<Ensemble> {
    parse_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn write_dataset(path: &Path, data: &[Ensemble]) {
    std::fs::write(path, serialize_dataset(data)).unwrap();
}

/// Output files of one `evaluate` run under `prefix`.
pub struct Outputs {
    pub json: Vec<u8>,
    pub csv: Vec<u8>,
    pub svg: Vec<u8>,
}

pub fn read_outputs(prefix: &Path) -> Outputs {
    let read = |suffix: &str| {
        let mut p = prefix.as_os_str().to_os_string();
        p.push(suffix);
        std::fs::read(PathBuf::from(p)).unwrap_or_else(|e| panic!("{suffix}: {e}"))
    };
    Outputs {
        json: read(".summary.json"),
        csv: read(".summary.csv"),
        svg: read(".reliability.svg"),
    }
}

/// Deterministic stand-in for a grounding model's score.
pub fn mock_score(image_ref: &str, statement: &str) -> f64 {
    let h = image_ref
        .bytes()
        .chain(statement.bytes())
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
        });
    (h % 1001) as f64 / 1000.0
}

/// Verdict the mock gives for a pair, and its numeric mapping.
pub fn mock_verdict(image_ref: &str, statement: &str) -> (&'static str, f64) {
    match (mock_score(image_ref, statement) * 3.0) as u32 {
        0 => ("No", 0.0),
        1 => ("Not sure", 0.0),
        _ => ("Yes", 1.0),
    }
}
