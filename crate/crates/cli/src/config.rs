//! Run recipes: one model, one search window, output and comparison options.
//! TOML is the primary format; files ending in `.json` are read as JSON.

use std::fmt;
use std::path::{Path, PathBuf};

use lzeros::gaussian::GaussianSpec;
use lzeros::spin::Units;
use lzeros::SearchWindow;
use serde::{Deserialize, Serialize};

/// A malformed or inconsistent config. Maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub window: WindowConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// Exact diagonalization of the `1/r^alpha` chain; `alpha = 0` is the
    /// fully connected model.
    Ising {
        sites: usize,
        h_i: f64,
        h_f: f64,
        #[serde(default)]
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        units: Option<Units>,
    },
    /// Nearest-neighbour chain in the free-fermion form (critical field 1/4).
    IsingNn { sites: usize, h_i: f64, h_f: f64 },
    Xy {
        sites: usize,
        gamma_i: f64,
        h_i: f64,
        gamma_f: f64,
        h_f: f64,
    },
    Gaussian(GaussianSpec),
    /// `energy,population` CSV, relative to the config file.
    Distribution { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub beta_min: f64,
    pub beta_max: f64,
    #[serde(default)]
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_samples: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl WindowConfig {
    pub fn search_window(&self) -> SearchWindow {
        let mut w = SearchWindow::new(self.beta_min, self.beta_max, self.t_min, self.t_max)
            .with_seed(self.seed);
        if let Some(r) = self.resolution {
            w = w.with_resolution(r);
        }
        if let Some(k) = self.grid_k {
            w = w.with_grid(k);
        }
        if let Some(s) = self.boundary_samples {
            w.boundary_samples = s;
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub mirror_beta: bool,
    /// Heatmap raster size in cells.
    #[serde(default = "default_heatmap_size")]
    pub heatmap_size: [usize; 2],
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

fn default_heatmap_size() -> [usize; 2] {
    [240, 180]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            formats: default_formats(),
            mirror_beta: false,
            heatmap_size: default_heatmap_size(),
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeightMode {
    /// Largest period of the envelope chains next to the most populated level.
    LocalSpacing,
    Fixed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub height_mode: HeightMode,
    /// Box height for `height_mode = "fixed"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    /// Full box widths in `beta`, centered on `beta_center`.
    pub widths: Vec<f64>,
    #[serde(default)]
    pub beta_center: f64,
    #[serde(default = "default_boxes")]
    pub boxes: usize,
}

fn default_boxes() -> usize {
    12
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let cfg: Self = if path.extension().is_some_and(|x| x == "json") {
            serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
        };
        cfg.validate()
            .map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.window
            .search_window()
            .validate()
            .map_err(|e| ConfigError(format!("window: {e}")))?;
        if let ModelConfig::Ising { alpha, .. } = self.model {
            if !(alpha.is_finite() && alpha >= 0.0) {
                return Err(ConfigError(format!(
                    "model.alpha = {alpha} must be finite and non-negative; use kind = \"ising_nn\" for nearest neighbours"
                )));
            }
        }
        if self.outputs.formats.is_empty() {
            return Err(ConfigError("outputs.formats is empty".into()));
        }
        if self.outputs.heatmap_size.iter().any(|&n| n < 2) {
            return Err(ConfigError("outputs.heatmap_size needs at least 2 x 2 cells".into()));
        }
        if let Some(c) = &self.compare {
            if c.widths.is_empty() || c.widths.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                return Err(ConfigError("compare.widths must be positive and non-empty".into()));
            }
            if c.boxes == 0 {
                return Err(ConfigError("compare.boxes must be positive".into()));
            }
            match (c.height_mode, c.height) {
                (HeightMode::Fixed, None) => {
                    return Err(ConfigError("compare.height is required for height_mode = \"fixed\"".into()))
                }
                (_, Some(h)) if !(h.is_finite() && h > 0.0) => {
                    return Err(ConfigError("compare.height must be positive".into()))
                }
                _ => {}
            }
            if !c.beta_center.is_finite() {
                return Err(ConfigError("compare.beta_center is not finite".into()));
            }
        }
        Ok(())
    }
}
