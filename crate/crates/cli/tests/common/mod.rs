#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use sciq_cli::{run, PipelineConfig, StageSelection};

pub fn mini() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/mini")
}

/// The bundled mini config with outputs (and optionally the ratings store) moved under `out`.
pub fn config(out: &Path, ratings: Option<&Path>) -> PipelineConfig {
    let text = fs::read_to_string(mini().join("sciq.toml")).unwrap();
    let mut cfg = PipelineConfig::parse(&text, &mini()).unwrap();
    cfg.output_dir = out.to_path_buf();
    if let Some(r) = ratings {
        cfg.inputs.ratings = Some(r.to_path_buf());
    }
    cfg
}

/// Runs every stage on the mini corpus into `out`.
pub fn run_mini(out: &Path) -> PipelineConfig {
    let cfg = config(out, None);
    run(StageSelection::All, &cfg).unwrap();
    cfg
}

/// Relative path and contents of every file under `root`, sorted.
pub fn snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(dir: &Path, root: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(&p, root, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
