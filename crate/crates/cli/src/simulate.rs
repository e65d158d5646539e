//! `simulate-pa`: render a physical-access protocol.

use std::collections::HashMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spoofkit::features::{encode_wav, read_wav, AudioBuffer};
use spoofkit::pa_sim::{generate_dataset, PaConfig, SeedMode};
use spoofkit::protocol::{emit_protocol, parse_protocol};

use crate::config::RunConfig;
use crate::output::{check_file_stem, config_hash, read_text, sha256_hex, Outputs};

pub const MANIFEST_FILE: &str = "pa_manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaManifest {
    pub schema_version: u32,
    pub master_seed: u64,
    pub mode: SeedMode,
    /// Hash of the resolved category table.
    pub table_hash: String,
    pub trials: Vec<PaManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaManifestEntry {
    pub trial_id: String,
    pub file: String,
    pub category: String,
    pub config_hash: String,
    pub audio_sha256: String,
    pub config: PaConfig,
}

/// Source audio for every trial, read from `<sources>/<trial_id>.wav`.
pub fn load_sources(sources: &Path, ids: &[String]) -> Result<HashMap<String, AudioBuffer>> {
    ids.par_iter()
        .map(|id| {
            let path = sources.join(format!("{id}.wav"));
            if !path.exists() {
                bail!("no source audio for trial '{id}' (expected {})", path.display());
            }
            let audio = read_wav(&path).with_context(|| format!("trial '{id}': reading {}", path.display()))?;
            Ok((id.clone(), audio))
        })
        .collect()
}

pub fn run(
    protocol: &Path,
    sources: &Path,
    mode: Option<SeedMode>,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<(Outputs, PaManifest)> {
    let trials = parse_protocol(&read_text(protocol)?).with_context(|| format!("protocol {}", protocol.display()))?;
    for t in &trials {
        check_file_stem(&t.trial_id)?;
    }
    let table = cfg.pa.category_table()?;
    let mode = mode.unwrap_or(cfg.pa.mode);
    let ids: Vec<String> = trials.iter().map(|t| t.trial_id.clone()).collect();
    let audio = load_sources(sources, &ids)?;
    let rendered = generate_dataset(&trials, &audio, &table, cfg.pa.master_seed, mode)?;

    let encoded = rendered
        .par_iter()
        .map(|r| encode_wav(&r.audio).with_context(|| format!("trial '{}': encoding audio", r.record.trial_id)))
        .collect::<Result<Vec<_>>>()?;
    let mut outputs = Outputs::new();
    let mut entries = Vec::with_capacity(rendered.len());
    for (r, bytes) in rendered.into_iter().zip(encoded) {
        let file = format!("{}.wav", r.record.trial_id);
        entries.push(PaManifestEntry {
            trial_id: r.record.trial_id.clone(),
            file: file.clone(),
            category: r.config.category.to_string(),
            config_hash: r.config_hash,
            audio_sha256: sha256_hex(&bytes),
            config: r.config,
        });
        outputs.add(out_dir.join(file), bytes);
    }
    let manifest = PaManifest {
        schema_version: MANIFEST_VERSION,
        master_seed: cfg.pa.master_seed,
        mode,
        table_hash: config_hash(&table),
        trials: entries,
    };
    outputs.add_json(out_dir.join(MANIFEST_FILE), &manifest);
    outputs.add(out_dir.join("protocol.txt"), emit_protocol(&trials));
    Ok((outputs, manifest))
}
