//! Output directory bookkeeping and the run report.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lzeros::envelope::EnvelopeDiagnostics;
use lzeros::gaussian::GaussianSpec;
use lzeros::zeros::BoxStat;
use lzeros::SearchWindow;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ModelConfig;

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Writes files into one directory and remembers their checksums.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: hex(&Sha256::digest(bytes)),
        });
        Ok(())
    }

    pub fn into_files(self) -> Vec<FileEntry> {
        self.files
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub levels: usize,
    pub dropped_levels: usize,
    pub ipr: f64,
    pub mean_energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub esqpt_energy: Option<f64>,
    /// Absent for a single level.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_strip: Option<[f64; 2]>,
    pub envelope: EnvelopeDiagnostics,
    pub envelope_members: usize,
    pub envelope_chains: usize,
    pub envelope_monotone: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WidthTable {
    pub width: f64,
    pub height: f64,
    pub boxes: Vec<BoxStat>,
    /// Some box holds approximate zeros but no exact one.
    pub divergent: bool,
    /// The box-to-box change of `delta_eta` flips sign at least every other box.
    pub oscillatory: bool,
    /// Mean `delta_eta` of the last third of the boxes is below that of the
    /// first third.
    pub decreasing: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianSummary {
    pub spec: GaussianSpec,
    pub fitted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_population_rms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_rms: Option<f64>,
    /// Why the unbounded zeros or curves were skipped, if they were.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unbounded_note: Option<String>,
    pub trajectories: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoBandSummary {
    pub modes: usize,
    /// Largest distance from an exact zero to the nearest closed-form zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_deviation: Option<f64>,
    /// Closed-form and nested-envelope zeros coincide.
    pub envelope_exact: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    /// File name of the config, without directories.
    pub config: String,
    pub seed: u64,
    pub mirror_beta: bool,
    pub model: ModelConfig,
    pub window: SearchWindow,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
    /// The envelope has a single member, so it predicts no zeros.
    pub trivial_envelope: bool,
    pub zero_counts: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_eta: Option<Vec<WidthTable>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaussian: Option<GaussianSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twoband: Option<TwoBandSummary>,
    pub files: Vec<FileEntry>,
}
