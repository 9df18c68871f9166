//! Locating zeros of a survival amplitude in a rectangle of the complex-time
//! plane, plus the bookkeeping used to compare zero sets.

mod boxes;
mod finder;
mod strip;
mod winding;

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::amplitude::ComplexTime;
use crate::error::{Error, Result};

pub use boxes::{delta_eta, BoxGrid, BoxStat};
pub use finder::find_zeros;
pub use strip::edge_strip;
pub use winding::winding_number;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub beta_min: f64,
    pub beta_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Rect {
    pub const fn new(beta_min: f64, beta_max: f64, t_min: f64, t_max: f64) -> Self {
        Self {
            beta_min,
            beta_max,
            t_min,
            t_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.beta_max - self.beta_min
    }

    pub fn height(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> ComplexTime {
        ComplexTime::new(
            0.5 * (self.beta_min + self.beta_max),
            0.5 * (self.t_min + self.t_max),
        )
    }

    /// Closed containment.
    pub fn contains(&self, z: ComplexTime) -> bool {
        (self.beta_min..=self.beta_max).contains(&z.beta) && (self.t_min..=self.t_max).contains(&z.t)
    }

    /// Half-open containment `[min, max)` in both directions, so that a tiling
    /// assigns every point to exactly one rectangle.
    pub fn contains_half_open(&self, z: ComplexTime) -> bool {
        z.beta >= self.beta_min && z.beta < self.beta_max && z.t >= self.t_min && z.t < self.t_max
    }

    pub fn is_valid(&self) -> bool {
        [self.beta_min, self.beta_max, self.t_min, self.t_max]
            .iter()
            .all(|x| x.is_finite())
            && self.beta_min < self.beta_max
            && self.t_min < self.t_max
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}] x [{}, {}]",
            self.beta_min, self.beta_max, self.t_min, self.t_max
        )
    }
}

/// A rectangle to search together with the recursion parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchWindow {
    pub beta_min: f64,
    pub beta_max: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Each cell is split into `grid_k x grid_k` children.
    pub grid_k: usize,
    /// Maximum distance of a winding number from an integer.
    pub winding_threshold: f64,
    /// Recursion stops once a cell's diagonal is at most this. Non-positive
    /// means `1e-4` times the window diagonal.
    pub target_resolution: f64,
    /// Phase samples per cell edge before adaptive bisection.
    pub boundary_samples: usize,
    /// Bisection depth limit for a single phase step.
    pub max_depth: u32,
    pub seed: u64,
}

impl Default for SearchWindow {
    fn default() -> Self {
        Self {
            beta_min: -1.0,
            beta_max: 1.0,
            t_min: 0.0,
            t_max: 1.0,
            grid_k: 4,
            winding_threshold: 0.2,
            target_resolution: 0.0,
            boundary_samples: 64,
            max_depth: 20,
            seed: 0,
        }
    }
}

impl SearchWindow {
    pub fn new(beta_min: f64, beta_max: f64, t_min: f64, t_max: f64) -> Self {
        Self {
            beta_min,
            beta_max,
            t_min,
            t_max,
            ..Self::default()
        }
    }

    pub fn from_rect(rect: Rect) -> Self {
        Self::new(rect.beta_min, rect.beta_max, rect.t_min, rect.t_max)
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.target_resolution = resolution;
        self
    }

    pub fn with_grid(mut self, k: usize) -> Self {
        self.grid_k = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn rect(&self) -> Rect {
        Rect::new(self.beta_min, self.beta_max, self.t_min, self.t_max)
    }

    pub fn resolution(&self) -> f64 {
        if self.target_resolution > 0.0 {
            self.target_resolution
        } else {
            1e-4 * self.rect().diagonal()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rect().is_valid() {
            return Err(Error::InvalidWindow(format!("degenerate rectangle {}", self.rect())));
        }
        if self.grid_k < 2 {
            return Err(Error::InvalidWindow("grid_k must be at least 2".into()));
        }
        if !(self.winding_threshold > 0.0 && self.winding_threshold < 0.5) {
            return Err(Error::InvalidWindow(
                "winding_threshold must lie in (0, 0.5)".into(),
            ));
        }
        if self.boundary_samples < 4 {
            return Err(Error::InvalidWindow("boundary_samples must be at least 4".into()));
        }
        if !self.target_resolution.is_finite() {
            return Err(Error::InvalidWindow("target_resolution is not finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Located numerically on the full amplitude.
    Exact,
    /// Closed-form zeros of the envelope approximation.
    Approximate,
    /// Closed-form zeros of a solvable model.
    Analytic,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Approximate => "approximate",
            Self::Analytic => "analytic",
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(Self::Exact),
            "approximate" => Ok(Self::Approximate),
            "analytic" => Ok(Self::Analytic),
            other => Err(Error::Parse(format!("unknown provenance `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub z: ComplexTime,
    pub multiplicity: u32,
    pub provenance: Provenance,
    /// Envelope chain (or solvable-model branch) the zero belongs to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_id: Option<i64>,
    /// Set for approximate zeros coming from a non-equidistant multilevel
    /// group, where only the edge pair is used.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub multilevel: bool,
}

impl Zero {
    pub fn exact(z: ComplexTime, multiplicity: u32) -> Self {
        Self {
            z,
            multiplicity,
            provenance: Provenance::Exact,
            chain_id: None,
            multilevel: false,
        }
    }

    pub fn with_chain(z: ComplexTime, provenance: Provenance, chain_id: i64) -> Self {
        Self {
            z,
            multiplicity: 1,
            provenance,
            chain_id: Some(chain_id),
            multilevel: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub zeros: Vec<Zero>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    beta: f64,
    t: f64,
    multiplicity: u32,
    provenance: String,
    chain_id: Option<i64>,
}

impl ZeroSet {
    pub fn new(zeros: Vec<Zero>) -> Self {
        let mut s = Self { zeros };
        s.sort();
        s
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Zero> {
        self.zeros.iter()
    }

    /// Orders by `(t, beta)`.
    pub fn sort(&mut self) {
        self.zeros
            .sort_by(|a, b| a.z.t.total_cmp(&b.z.t).then(a.z.beta.total_cmp(&b.z.beta)));
    }

    pub fn total_multiplicity(&self) -> u32 {
        self.zeros.iter().map(|z| z.multiplicity).sum()
    }

    /// Zeros (with multiplicity) in `rect`, half-open.
    pub fn count_in(&self, rect: &Rect) -> u32 {
        self.zeros
            .iter()
            .filter(|z| rect.contains_half_open(z.z))
            .map(|z| z.multiplicity)
            .sum()
    }

    pub fn restricted_to(&self, rect: &Rect) -> Self {
        Self {
            zeros: self
                .zeros
                .iter()
                .filter(|z| rect.contains(z.z))
                .copied()
                .collect(),
        }
    }

    pub fn points(&self) -> Vec<ComplexTime> {
        self.zeros.iter().map(|z| z.z).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for z in &self.zeros {
            w.serialize(CsvRow {
                beta: z.z.beta,
                t: z.z.t,
                multiplicity: z.multiplicity,
                provenance: z.provenance.as_str().to_string(),
                chain_id: z.chain_id,
            })?;
        }
        if self.zeros.is_empty() {
            w.write_record(["beta", "t", "multiplicity", "provenance", "chain_id"])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut zeros = Vec::new();
        for row in r.deserialize::<CsvRow>() {
            let row = row?;
            zeros.push(Zero {
                z: ComplexTime::new(row.beta, row.t),
                multiplicity: row.multiplicity,
                provenance: row.provenance.parse()?,
                chain_id: row.chain_id,
                multilevel: false,
            });
        }
        Ok(Self { zeros })
    }

    /// JSON mirror of the CSV, carrying the window and seed that produced it
    /// and the multilevel flags.
    pub fn to_json(&self, window: Option<&SearchWindow>) -> Result<String> {
        let doc = ZeroSetDocument {
            window: window.copied(),
            seed: window.map(|w| w.seed),
            zeros: self.zeros.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ZeroSetDocument = serde_json::from_str(s)?;
        Ok(Self { zeros: doc.zeros })
    }
}

impl<'a> IntoIterator for &'a ZeroSet {
    type Item = &'a Zero;
    type IntoIter = std::slice::Iter<'a, Zero>;

    fn into_iter(self) -> Self::IntoIter {
        self.zeros.iter()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZeroSetDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<SearchWindow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub zeros: Vec<Zero>,
}
