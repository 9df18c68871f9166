//! Energy distributions and the complex-time survival amplitude
//! `L(z) = sum_j k_j exp(-E_j z)`, `z = beta + i t`.
//!
//! Everything is carried in the log domain: populations are stored as
//! `ln k_j` and amplitudes as `(ln |L|, arg L)`, so distributions spanning
//! hundreds of decades stay representable.

use std::io::{Read, Write};
use std::num::NonZeroUsize;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_POPULATION_FLOOR: f64 = 1e-14;
pub const DEFAULT_MERGE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexTime {
    pub beta: f64,
    pub t: f64,
}

impl ComplexTime {
    pub const fn new(beta: f64, t: f64) -> Self {
        Self { beta, t }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.beta, self.t)
    }

    pub fn conj(self) -> Self {
        Self::new(self.beta, -self.t)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self.beta - other.beta).hypot(self.t - other.t)
    }
}

impl From<Complex64> for ComplexTime {
    fn from(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }
}

/// A complex number held as `(ln |L|, arg L)`.
///
/// `phase` is whatever the producer accumulated; call [`Self::wrapped_phase`]
/// for a value in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeValue {
    pub log_modulus: f64,
    pub phase: f64,
}

impl AmplitudeValue {
    pub const ZERO: Self = Self {
        log_modulus: f64::NEG_INFINITY,
        phase: 0.0,
    };

    pub fn new(log_modulus: f64, phase: f64) -> Self {
        Self { log_modulus, phase }
    }

    /// Value of `exp(log_scale) * mantissa`.
    pub fn from_scaled(log_scale: f64, mantissa: Complex64) -> Self {
        let norm = mantissa.norm();
        if norm == 0.0 {
            return Self::ZERO;
        }
        Self {
            log_modulus: log_scale + norm.ln(),
            phase: mantissa.arg(),
        }
    }

    pub fn modulus(self) -> f64 {
        self.log_modulus.exp()
    }

    pub fn is_zero(self) -> bool {
        self.log_modulus == f64::NEG_INFINITY
    }

    pub fn is_finite(self) -> bool {
        self.log_modulus.is_finite() && self.phase.is_finite()
    }

    pub fn wrapped_phase(self) -> f64 {
        wrap_phase(self.phase)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.modulus(), self.phase)
    }

    pub fn mul(self, other: Self) -> Self {
        Self::new(self.log_modulus + other.log_modulus, self.phase + other.phase)
    }

    pub fn div(self, other: Self) -> Self {
        Self::new(self.log_modulus - other.log_modulus, self.phase - other.phase)
    }
}

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_phase(phase: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut p = phase.rem_euclid(TAU);
    if p > PI {
        p -= TAU;
    }
    p
}

/// `ln sum exp(x_i)`; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m.is_nan() {
        return m;
    }
    let s: f64 = xs.into_iter().map(|x| (x - m).exp()).sum();
    m + s.ln()
}

/// Anything that can be evaluated at a complex time. Implementors return the
/// unnormalized amplitude; zeros do not care about normalization.
pub trait SurvivalAmplitude {
    fn amplitude(&self, z: ComplexTime) -> AmplitudeValue;

    /// `L(z) / L(beta)`. Assumes `L(beta)` is real and positive, which holds
    /// for every amplitude built from non-negative populations.
    fn amplitude_normalized(&self, z: ComplexTime) -> AmplitudeValue {
        let num = self.amplitude(z);
        let den = self.amplitude(ComplexTime::new(z.beta, 0.0));
        AmplitudeValue::new(num.log_modulus - den.log_modulus, num.phase)
    }

    /// Bound on `|E|` over the terms of the sum, so that `arg` of every term
    /// turns at most this fast along a path. Lets the zero finder space its
    /// boundary samples on long edges; `None` when unknown.
    fn max_frequency(&self) -> Option<f64> {
        None
    }
}

impl<A: SurvivalAmplitude + ?Sized> SurvivalAmplitude for &A {
    fn amplitude(&self, z: ComplexTime) -> AmplitudeValue {
        (**self).amplitude(z)
    }

    fn max_frequency(&self) -> Option<f64> {
        (**self).max_frequency()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroppedLevel {
    pub energy: f64,
    pub population: f64,
}

/// Sorted, normalized set of `(E_j, k_j)` with `k_j > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyDistribution {
    energies: Vec<f64>,
    log_populations: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    dropped: Vec<DroppedLevel>,
    #[serde(default)]
    merged: usize,
}

#[derive(Debug, Clone)]
pub struct DistributionBuilder {
    levels: Vec<(f64, f64)>,
    floor: f64,
    merge_tolerance: f64,
    label: Option<String>,
}

impl Default for DistributionBuilder {
    fn default() -> Self {
        Self {
            levels: Vec::new(),
            floor: DEFAULT_POPULATION_FLOOR,
            merge_tolerance: DEFAULT_MERGE_TOLERANCE,
            label: None,
        }
    }
}

impl DistributionBuilder {
    /// Adds a level with a (not necessarily normalized) weight.
    pub fn level(mut self, energy: f64, weight: f64) -> Self {
        self.levels.push((energy, weight.ln()));
        self
    }

    /// Adds a level given `ln` of its weight.
    pub fn log_level(mut self, energy: f64, log_weight: f64) -> Self {
        self.levels.push((energy, log_weight));
        self
    }

    pub fn levels(mut self, levels: impl IntoIterator<Item = (f64, f64)>) -> Self {
        self.levels
            .extend(levels.into_iter().map(|(e, w)| (e, w.ln())));
        self
    }

    pub fn log_levels(mut self, levels: impl IntoIterator<Item = (f64, f64)>) -> Self {
        self.levels.extend(levels);
        self
    }

    /// Levels whose normalized population falls below `floor` are dropped.
    /// Zero disables dropping.
    pub fn population_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    /// Relative (to the spectral span) distance below which levels merge.
    pub fn merge_tolerance(mut self, tol: f64) -> Self {
        self.merge_tolerance = tol;
        self
    }

    pub fn label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn build(self) -> Result<EnergyDistribution> {
        if !(self.floor >= 0.0 && self.floor < 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "population floor {} not in [0, 1)",
                self.floor
            )));
        }
        let mut levels = Vec::with_capacity(self.levels.len());
        for &(e, lw) in &self.levels {
            if !e.is_finite() {
                return Err(Error::InvalidDistribution(format!("energy {e} is not finite")));
            }
            if lw.is_nan() || lw == f64::INFINITY {
                return Err(Error::InvalidDistribution(format!(
                    "weight at E = {e} is not a finite non-negative number"
                )));
            }
            if lw > f64::NEG_INFINITY {
                levels.push((e, lw));
            }
        }
        if levels.is_empty() {
            return Err(Error::InvalidDistribution("no level has positive weight".into()));
        }
        levels.sort_by(|a, b| a.0.total_cmp(&b.0));

        let span = levels[levels.len() - 1].0 - levels[0].0;
        let tol = self.merge_tolerance * span;
        let mut merged_levels: Vec<(f64, f64)> = Vec::with_capacity(levels.len());
        let mut cluster_start = f64::NAN;
        let mut merged = 0;
        for (e, lw) in levels {
            match merged_levels.last_mut() {
                Some(last) if e - cluster_start <= tol => {
                    // population-weighted mean energy
                    let total = log_sum_exp([last.1, lw]);
                    last.0 = last.0 * (last.1 - total).exp() + e * (lw - total).exp();
                    last.1 = total;
                    merged += 1;
                }
                _ => {
                    cluster_start = e;
                    merged_levels.push((e, lw));
                }
            }
        }

        let norm = log_sum_exp(merged_levels.iter().map(|l| l.1));
        let log_floor = self.floor.ln();
        let mut dropped = Vec::new();
        let mut kept = Vec::with_capacity(merged_levels.len());
        for (e, lw) in merged_levels {
            let lk = lw - norm;
            if lk < log_floor {
                dropped.push(DroppedLevel {
                    energy: e,
                    population: lk.exp(),
                });
            } else {
                kept.push((e, lk));
            }
        }
        let renorm = log_sum_exp(kept.iter().map(|l| l.1));
        Ok(EnergyDistribution {
            energies: kept.iter().map(|l| l.0).collect(),
            log_populations: kept.iter().map(|l| l.1 - renorm).collect(),
            label: self.label,
            dropped,
            merged,
        })
    }
}

impl EnergyDistribution {
    pub fn builder() -> DistributionBuilder {
        DistributionBuilder::default()
    }

    /// Builds from `(energy, weight)` pairs with the default floor and merge
    /// tolerance.
    pub fn new(levels: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::builder().levels(levels).build()
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn log_populations(&self) -> &[f64] {
        &self.log_populations
    }

    pub fn populations(&self) -> Vec<f64> {
        self.log_populations.iter().map(|l| l.exp()).collect()
    }

    pub fn energy(&self, j: usize) -> f64 {
        self.energies[j]
    }

    pub fn log_population(&self, j: usize) -> f64 {
        self.log_populations[j]
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = Some(label.into());
    }

    /// Levels removed by the population floor.
    pub fn dropped_levels(&self) -> &[DroppedLevel] {
        &self.dropped
    }

    /// Number of input levels absorbed into a neighbour by degeneracy merging.
    pub fn merged_count(&self) -> usize {
        self.merged
    }

    pub fn mean_energy(&self) -> f64 {
        self.energies
            .iter()
            .zip(&self.log_populations)
            .map(|(e, lk)| e * lk.exp())
            .sum()
    }

    /// `ln L(beta)` for real `beta`.
    pub fn log_partition(&self, beta: f64) -> f64 {
        log_sum_exp(
            self.energies
                .iter()
                .zip(&self.log_populations)
                .map(|(e, lk)| lk - e * beta),
        )
    }

    pub fn evaluate(&self, z: ComplexTime) -> AmplitudeValue {
        let m = self
            .energies
            .iter()
            .zip(&self.log_populations)
            .map(|(e, lk)| lk - e * z.beta)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, lk) in self.energies.iter().zip(&self.log_populations) {
            let w = (lk - e * z.beta - m).exp();
            let (s, c) = (e * z.t).sin_cos();
            acc += Complex64::new(w * c, -w * s);
        }
        AmplitudeValue::from_scaled(m, acc)
    }

    /// `L(z) / L(beta)`.
    pub fn evaluate_normalized(&self, z: ComplexTime) -> AmplitudeValue {
        let v = self.evaluate(z);
        AmplitudeValue::new(v.log_modulus - self.log_partition(z.beta), v.phase)
    }

    /// `-ln |L(it)| / sites` (or per unit system when `sites` is `None`).
    pub fn rate_function(&self, t: f64, sites: Option<NonZeroUsize>) -> f64 {
        let n = sites.map_or(1.0, |n| n.get() as f64);
        -self.evaluate(ComplexTime::new(0.0, t)).log_modulus / n
    }

    /// `sqrt(sum k_j^2)`, the late-time plateau of `|L(it)|`.
    pub fn ipr(&self) -> f64 {
        (0.5 * log_sum_exp(self.log_populations.iter().map(|l| 2.0 * l))).exp()
    }

    /// Fluctuation scale of the levels other than `a` and `b`.
    pub fn perturbation_scale(&self, a: usize, b: usize) -> Result<PerturbationScale> {
        for index in [a, b] {
            if index >= self.len() {
                return Err(Error::IndexOutOfRange {
                    index,
                    len: self.len(),
                });
            }
        }
        let s_ab: f64 = self
            .log_populations
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != a && *j != b)
            .map(|(_, lk)| (2.0 * lk).exp())
            .sum();
        Ok(PerturbationScale {
            s_ab,
            rayleigh_mode: (s_ab / 2.0).sqrt(),
        })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["energy", "population"])?;
        for (e, lk) in self.energies.iter().zip(&self.log_populations) {
            w.write_record([e.to_string(), lk.exp().to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `energy,population` rows. Populations are renormalized and the
    /// default floor applies.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::Parse(format!("missing column `{name}`")))
        };
        let (ie, ip) = (col("energy")?, col("population")?);
        let mut levels = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                let s = rec.get(i).unwrap_or("").trim();
                s.parse()
                    .map_err(|_| Error::Parse(format!("not a number: `{s}`")))
            };
            levels.push((field(ie)?, field(ip)?));
        }
        for &(e, p) in &levels {
            if p < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "negative population {p} at E = {e}"
                )));
            }
        }
        Self::new(levels)
    }
}

impl SurvivalAmplitude for EnergyDistribution {
    fn amplitude(&self, z: ComplexTime) -> AmplitudeValue {
        self.evaluate(z)
    }

    fn amplitude_normalized(&self, z: ComplexTime) -> AmplitudeValue {
        self.evaluate_normalized(z)
    }

    fn max_frequency(&self) -> Option<f64> {
        self.energies.iter().map(|e| e.abs()).reduce(f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationScale {
    /// `sum_{j != a, b} k_j^2`
    pub s_ab: f64,
    /// Mode of the Rayleigh distribution of `|L_P|` at late times.
    pub rayleigh_mode: f64,
}
