#![allow(dead_code)]

use std::path::{Path, PathBuf};

use mobimetrics::config::{KeyValues, PipelineConfig};
use mobimetrics::synth::{self, World, WorldConfig};

pub fn worlds_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../worlds")
}

pub fn world_config(name: &str) -> WorldConfig {
    let path = worlds_dir().join(name);
    WorldConfig::from_kv(&KeyValues::load(&path).unwrap()).unwrap()
}

/// Like `world_config`, with the `key = value` lines of `extra` replacing the file's.
pub fn world_config_with(name: &str, extra: &str) -> WorldConfig {
    WorldConfig::from_kv(&KeyValues::parse(&overridden(name, extra), &worlds_dir()).unwrap()).unwrap()
}

pub fn overridden(name: &str, extra: &str) -> String {
    let key = |l: &str| l.split_once('=').map(|(k, _)| k.trim().to_string());
    let replaced: Vec<String> = extra.lines().filter_map(key).collect();
    let base = std::fs::read_to_string(worlds_dir().join(name)).unwrap();
    let mut text: String = base
        .lines()
        .filter(|l| key(l).is_none_or(|k| !replaced.contains(&k)))
        .map(|l| format!("{l}\n"))
        .collect();
    text.push_str(extra);
    text.push('\n');
    text
}

/// Generates `cfg` into `dir` and loads the pipeline config written alongside.
pub fn materialize(cfg: &WorldConfig, dir: &Path) -> (World, PipelineConfig) {
    let world = synth::generate(cfg).unwrap();
    synth::write_world(&world, dir).unwrap();
    let pc = PipelineConfig::load(&dir.join("run.cfg")).unwrap();
    (world, pc)
}
