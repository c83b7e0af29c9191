//! Run configuration, corpus generation across splits, and corpus files.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dialogue::{generate_dialogue, Dialogue, DialogueConfig, Ledger};
use crate::scene::{simulate_scene, validate_scene, SceneConfig, SceneGraph};

pub const SCHEMA_VERSION: u32 = 1;
pub const SPLITS: [&str; 3] = ["train", "val", "test"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl Default for SplitSizes {
    fn default() -> Self {
        SplitSizes {
            train: 280,
            val: 70,
            test: 150,
        }
    }
}

impl SplitSizes {
    pub fn get(&self, split: &str) -> usize {
        match split {
            "train" => self.train,
            "val" => self.val,
            _ => self.test,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub scenes: SplitSizes,
    pub dialogues_per_scene: usize,
    pub scene: SceneConfig,
    pub dialogue: DialogueConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            scenes: SplitSizes::default(),
            dialogues_per_scene: 10,
            scene: SceneConfig::default(),
            dialogue: DialogueConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("data error in {path}: {detail}")]
    Data { path: PathBuf, detail: String },
}

impl CorpusError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn data(path: &Path, detail: impl ToString) -> Self {
        CorpusError::Data {
            path: path.to_path_buf(),
            detail: detail.to_string(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CorpusError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CorpusError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        self.scene.validate().map_err(|e| CorpusError::Config(e.to_string()))?;
        self.dialogue.validate().map_err(CorpusError::Config)?;
        if self.dialogues_per_scene == 0 {
            return Err(CorpusError::Config("dialogues_per_scene must be positive".into()));
        }
        Ok(())
    }
}

/// Mixes stream coordinates into one well-spread seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        h ^= p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(h << 6).wrapping_add(h >> 2);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Split {
    pub name: String,
    pub scenes: Vec<SceneGraph>,
    pub dialogues: Vec<Dialogue>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Corpus {
    pub splits: Vec<Split>,
}

impl Corpus {
    pub fn split(&self, name: &str) -> Option<&Split> {
        self.splits.iter().find(|s| s.name == name)
    }

    pub fn dialogues(&self) -> impl Iterator<Item = &Dialogue> {
        self.splits.iter().flat_map(|s| s.dialogues.iter())
    }

    pub fn scene(&self, video_id: &str) -> Option<&SceneGraph> {
        self.splits.iter().flat_map(|s| s.scenes.iter()).find(|s| s.video_id == video_id)
    }
}

/// Scenes dropped because a dialogue could not be completed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub skipped_scenes: Vec<String>,
}

fn generate_split(cfg: &RunConfig, split_idx: usize) -> Result<(Split, Vec<String>), CorpusError> {
    let name = SPLITS[split_idx];
    let mut ledger = Ledger::default();
    let mut out = Split {
        name: name.to_string(),
        ..Split::default()
    };
    let mut skipped = Vec::new();
    for i in 0..cfg.scenes.get(name) {
        let scene_seed = derive_seed(&[cfg.seed, split_idx as u64, i as u64]);
        let scene = simulate_scene(&cfg.scene, scene_seed).map_err(|e| CorpusError::Config(e.to_string()))?;
        let violations = validate_scene(&scene);
        if !violations.is_empty() {
            return Err(CorpusError::Config(format!("scene {} violates {:?}", scene.video_id, violations[0])));
        }
        let before = ledger.clone();
        let mut dialogues = Vec::with_capacity(cfg.dialogues_per_scene);
        for k in 0..cfg.dialogues_per_scene {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[cfg.seed, split_idx as u64, i as u64, k as u64 + 1]));
            let id = format!("{name}_{i:05}_{k}");
            match generate_dialogue(&scene, &cfg.dialogue, id, &mut ledger, &mut rng) {
                Ok(d) => dialogues.push(d),
                Err(_) => break,
            }
        }
        if dialogues.len() < cfg.dialogues_per_scene {
            ledger = before;
            skipped.push(scene.video_id.clone());
            continue;
        }
        out.dialogues.extend(dialogues);
        out.scenes.push(scene);
    }
    Ok((out, skipped))
}

/// Generates all splits; splits run in parallel, dialogues within a split in order.
pub fn generate_corpus(cfg: &RunConfig) -> Result<(Corpus, GenerationReport), CorpusError> {
    cfg.validate()?;
    let results: Vec<Result<(Split, Vec<String>), CorpusError>> =
        (0..SPLITS.len()).into_par_iter().map(|i| generate_split(cfg, i)).collect();
    let mut corpus = Corpus::default();
    let mut report = GenerationReport::default();
    for r in results {
        let (split, skipped) = r?;
        corpus.splits.push(split);
        report.skipped_scenes.extend(skipped);
    }
    Ok((corpus, report))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub schema_version: u32,
    pub seed: u64,
    pub config: RunConfig,
    pub config_sha256: String,
    pub files: Vec<ManifestFile>,
    pub skipped_scenes: Vec<String>,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CorpusError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CorpusError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CorpusError::io(path, e))
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    serde_json::to_vec(v).expect("corpus types serialize")
}

/// Writes `{split}/scenes.json`, `{split}/dialogues.json` and `manifest.json`.
pub fn write_corpus(dir: &Path, cfg: &RunConfig, corpus: &Corpus, report: &GenerationReport) -> Result<Manifest, CorpusError> {
    let mut files = Vec::new();
    for split in &corpus.splits {
        for (file, bytes) in [
            ("scenes.json", to_json(&split.scenes)),
            ("dialogues.json", to_json(&split.dialogues)),
        ] {
            let rel = format!("{}/{file}", split.name);
            write_file(&dir.join(&rel), &bytes)?;
            files.push(ManifestFile {
                path: rel,
                sha256: sha256_hex(&bytes),
                bytes: bytes.len(),
            });
        }
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        config: cfg.clone(),
        config_sha256: sha256_hex(&to_json(cfg)),
        files,
        skipped_scenes: report.skipped_scenes.clone(),
    };
    let bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    write_file(&dir.join("manifest.json"), &bytes)?;
    Ok(manifest)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CorpusError> {
    let bytes = fs::read(path).map_err(|e| CorpusError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| CorpusError::data(path, e))
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, CorpusError> {
    read_json(&dir.join("manifest.json"))
}

/// Snapshots store the previous question and program only once, in the previous turn.
fn restore_last_turns(d: &mut Dialogue) {
    for i in 1..d.turns.len() {
        let (prev, rest) = d.turns.split_at_mut(i);
        if let Some(last) = rest[0].state.last_turn.as_mut() {
            last.question = prev[i - 1].question.clone();
            last.program = prev[i - 1].program.clone();
        }
    }
}

/// Reads every split present under `dir`; missing splits are skipped.
pub fn read_corpus(dir: &Path) -> Result<Corpus, CorpusError> {
    if !dir.is_dir() {
        return Err(CorpusError::io(dir, std::io::Error::new(std::io::ErrorKind::NotFound, "no such corpus directory")));
    }
    let mut corpus = Corpus::default();
    for name in SPLITS {
        let sdir = dir.join(name);
        if !sdir.join("dialogues.json").exists() {
            continue;
        }
        let mut dialogues: Vec<Dialogue> = read_json(&sdir.join("dialogues.json"))?;
        dialogues.iter_mut().for_each(restore_last_turns);
        corpus.splits.push(Split {
            name: name.to_string(),
            scenes: read_json(&sdir.join("scenes.json"))?,
            dialogues,
        });
    }
    Ok(corpus)
}
