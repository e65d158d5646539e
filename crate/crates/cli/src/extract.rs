//! `extract`: one feature file per utterance plus a manifest.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spoofkit::features::{cqcc, lfcc, read_features, read_wav, write_features, FeatureMatrix};

use crate::config::RunConfig;
use crate::output::{check_file_stem, config_hash, parent_dir, read_text, resolve, sha256_hex, Outputs};

pub const MANIFEST_FILE: &str = "features.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Cqcc,
    Lfcc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureManifest {
    pub schema_version: u32,
    pub feature: FeatureKind,
    /// Front-end settings actually used.
    pub config: serde_json::Value,
    pub config_hash: String,
    pub entries: Vec<FeatureEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEntry {
    pub id: String,
    pub audio: String,
    /// Relative to the manifest.
    pub file: String,
    pub frames: usize,
    pub dims: usize,
    pub sha256: String,
}

/// Audio list lines hold `PATH` or `ID PATH`; the id defaults to the file
/// stem and relative paths are taken from the list's directory.
pub fn parse_audio_list(text: &str, base: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let (id, path) = match parts.as_slice() {
            [p] => {
                let stem = Path::new(p)
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .with_context(|| format!("audio list line {}: no file stem in '{p}'", i + 1))?;
                (stem.to_string(), *p)
            }
            [id, p] => (id.to_string(), *p),
            _ => bail!("audio list line {}: expected 'PATH' or 'ID PATH'", i + 1),
        };
        check_file_stem(&id).with_context(|| format!("audio list line {}", i + 1))?;
        if !seen.insert(id.clone()) {
            bail!("audio list line {}: duplicate utterance id '{id}'", i + 1);
        }
        out.push((id, resolve(base, path)));
    }
    Ok(out)
}

/// Front-end settings selected from the run configuration.
pub fn feature_settings(kind: FeatureKind, cfg: &RunConfig) -> serde_json::Value {
    match kind {
        FeatureKind::Cqcc => serde_json::to_value(&cfg.cqcc),
        FeatureKind::Lfcc => serde_json::to_value(&cfg.lfcc),
    }
    .expect("feature config serializes")
}

pub fn extract_one(path: &Path, kind: FeatureKind, cfg: &RunConfig) -> Result<FeatureMatrix> {
    let audio = read_wav(path).with_context(|| format!("reading audio {}", path.display()))?;
    let m = match kind {
        FeatureKind::Cqcc => cqcc(&audio, &cfg.cqcc),
        FeatureKind::Lfcc => lfcc(&audio, &cfg.lfcc),
    }
    .with_context(|| format!("extracting features from {}", path.display()))?;
    Ok(m)
}

pub fn run(audio_list: &Path, kind: FeatureKind, cfg: &RunConfig, out_dir: &Path) -> Result<Outputs> {
    let list = parse_audio_list(&read_text(audio_list)?, &parent_dir(audio_list))?;
    let settings = feature_settings(kind, cfg);
    let hash = config_hash(&(kind, &settings));
    let extracted: Vec<(FeatureEntry, Vec<u8>)> = list
        .par_iter()
        .map(|(id, path)| {
            let m = extract_one(path, kind, cfg)?;
            let mut bytes = Vec::new();
            write_features(&mut bytes, &m)?;
            let entry = FeatureEntry {
                id: id.clone(),
                audio: path.to_string_lossy().into_owned(),
                file: format!("{id}.feat"),
                frames: m.frames(),
                dims: m.dims(),
                sha256: sha256_hex(&bytes),
            };
            Ok((entry, bytes))
        })
        .collect::<Result<_>>()?;

    let mut outputs = Outputs::new();
    let mut entries = Vec::with_capacity(extracted.len());
    for (entry, bytes) in extracted {
        outputs.add(out_dir.join(&entry.file), bytes);
        entries.push(entry);
    }
    let manifest = FeatureManifest {
        schema_version: MANIFEST_VERSION,
        feature: kind,
        config: settings,
        config_hash: hash,
        entries,
    };
    outputs.add_json(out_dir.join(MANIFEST_FILE), &manifest);
    Ok(outputs)
}

/// Features listed in a manifest, loaded on demand.
pub struct FeatureStore {
    pub manifest: FeatureManifest,
    dir: PathBuf,
    index: HashMap<String, usize>,
}

impl FeatureStore {
    /// `path` may name the manifest or the directory holding it.
    pub fn open(path: &Path) -> Result<Self> {
        let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        let manifest: FeatureManifest = serde_json::from_str(&read_text(&file)?)
            .with_context(|| format!("parsing feature manifest {}", file.display()))?;
        if manifest.schema_version != MANIFEST_VERSION {
            bail!(
                "feature manifest {}: unsupported schema version {}",
                file.display(),
                manifest.schema_version
            );
        }
        let index = manifest
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), i))
            .collect();
        Ok(FeatureStore {
            manifest,
            dir: parent_dir(&file),
            index,
        })
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn load(&self, id: &str) -> Result<FeatureMatrix> {
        let i = *self
            .index
            .get(id)
            .with_context(|| format!("no features for trial '{id}'"))?;
        let path = self.dir.join(&self.manifest.entries[i].file);
        let f = File::open(&path)
            .with_context(|| format!("trial '{id}': opening {}", path.display()))?;
        read_features(BufReader::new(f)).with_context(|| format!("trial '{id}': reading {}", path.display()))
    }
}
