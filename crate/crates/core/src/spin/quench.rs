use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::eigen::{diagonalize, Spectrum};
use super::lipkin::{dicke_parts, dicke_sector_basis, project};
use super::long_range::{parity_parts, symmetric_parts};
use super::{esqpt_energy, IsingSpec, Sector};
use crate::amplitude::EnergyDistribution;
use crate::envelope::compute_envelope;
use crate::error::{Error, Result};

/// Basis the sector Hamiltonian was built in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Collective spin states of the fully connected model.
    Dicke,
    /// Spin-flip parity block of the computational basis.
    ParityBlock,
    /// Zero-momentum, flip-even combinations (even `N`, even sector).
    TranslationSymmetric,
    /// The whole computational basis.
    Computational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchResult {
    pub spec_initial: IsingSpec,
    pub spec_final: IsingSpec,
    /// Final-Hamiltonian spectrum in the sector, ascending.
    pub eigenvalues: Vec<f64>,
    /// `|<E_j|psi>|^2` for the initial ground state `psi`.
    pub populations: Vec<f64>,
    /// Ground energy of the initial Hamiltonian.
    pub initial_energy: f64,
    /// Gap above the initial ground state within the sector.
    pub initial_gap: f64,
    /// `sum_j k_j E_j`
    pub mean_energy: f64,
    /// `<H(h_i)> + (h_f - h_i) <V>` on the initial ground state.
    pub predicted_mean_energy: f64,
    pub esqpt_energy: Option<f64>,
    pub basis: Basis,
}

impl QuenchResult {
    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Distribution with the default population floor and degeneracy merging.
    pub fn distribution(&self) -> Result<EnergyDistribution> {
        self.distribution_with_floor(crate::amplitude::DEFAULT_POPULATION_FLOOR)
    }

    pub fn distribution_with_floor(&self, floor: f64) -> Result<EnergyDistribution> {
        EnergyDistribution::builder()
            .levels(self.eigenvalues.iter().copied().zip(self.populations.iter().copied()))
            .population_floor(floor)
            .build()
    }

    /// Index of the most populated eigenstate.
    pub fn max_population_index(&self) -> usize {
        self.populations
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(i, _)| i)
    }
}

/// `(predicted, actual)` mean energy after the quench; equal up to rounding
/// because `H` is linear in `h`.
pub fn mean_energy_shift(q: &QuenchResult) -> (f64, f64) {
    (q.predicted_mean_energy, q.mean_energy)
}

struct Parts {
    h0: DMatrix<f64>,
    v: DMatrix<f64>,
    basis: Basis,
}

/// Builds and diagonalizes sector Hamiltonians, memoizing both by spec.
#[derive(Default)]
pub struct Diagonalizer {
    parts: Mutex<HashMap<String, Arc<Parts>>>,
    spectra: Mutex<HashMap<String, Arc<Spectrum>>>,
}

fn key(spec: &IsingSpec, field: Option<f64>) -> String {
    format!(
        "{}|{:?}|{:?}|{:?}|{:?}",
        spec.sites,
        spec.alpha,
        spec.sector,
        spec.units(),
        field
    )
}

impl Diagonalizer {
    pub fn new() -> Self {
        Self::default()
    }

    fn parts(&self, spec: &IsingSpec) -> Result<Arc<Parts>> {
        let k = key(spec, None);
        if let Some(p) = self.parts.lock().expect("cache lock").get(&k) {
            return Ok(p.clone());
        }
        let parts = if spec.is_fully_connected() {
            let (h0, v) = dicke_parts(spec)?;
            let p = dicke_sector_basis(spec.sites, spec.sector);
            Parts {
                h0: project(&h0, &p),
                v: project(&v, &p),
                basis: Basis::Dicke,
            }
        } else if spec.sector == Sector::EvenParity && spec.sites % 2 == 0 {
            let (h0, v) = symmetric_parts(spec)?;
            Parts {
                h0,
                v,
                basis: Basis::TranslationSymmetric,
            }
        } else {
            let (h0, v) = parity_parts(spec)?;
            let basis = if spec.sector == Sector::Full {
                Basis::Computational
            } else {
                Basis::ParityBlock
            };
            Parts { h0, v, basis }
        };
        let parts = Arc::new(parts);
        self.parts.lock().expect("cache lock").insert(k, parts.clone());
        Ok(parts)
    }

    /// Sector spectrum of `spec`, eigenvectors in the sector basis.
    pub fn spectrum(&self, spec: &IsingSpec) -> Result<Arc<Spectrum>> {
        let k = key(spec, Some(spec.field));
        if let Some(s) = self.spectra.lock().expect("cache lock").get(&k) {
            return Ok(s.clone());
        }
        let p = self.parts(spec)?;
        let h = &p.h0 + &p.v * spec.field;
        let s = Arc::new(diagonalize(&h, Some(&p.v)));
        self.spectra.lock().expect("cache lock").insert(k, s.clone());
        Ok(s)
    }

    pub fn quench(&self, spec_i: &IsingSpec, spec_f: &IsingSpec) -> Result<QuenchResult> {
        spec_i.validate()?;
        spec_f.validate()?;
        let same_model = spec_i.sites == spec_f.sites
            && spec_i.alpha == spec_f.alpha
            && spec_i.sector == spec_f.sector
            && spec_i.units() == spec_f.units();
        if !same_model {
            return Err(Error::InvalidSpec(
                "initial and final specs may differ only in the field".into(),
            ));
        }
        let parts = self.parts(spec_i)?;
        let initial = self.spectrum(spec_i)?;
        let scale = initial.values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let initial_gap = if initial.dim() > 1 {
            initial.values[1] - initial.values[0]
        } else {
            f64::INFINITY
        };
        if initial_gap < 1e-10 * scale {
            return Err(Error::DegenerateGroundState { gap: initial_gap });
        }
        let psi: DVector<f64> = initial.vectors.column(0).into_owned();

        let fin = self.spectrum(spec_f)?;
        let overlaps = fin.vectors.transpose() * &psi;
        let populations: Vec<f64> = overlaps.iter().map(|c| c * c).collect();
        let mean_energy = fin.values.iter().zip(&populations).map(|(e, k)| e * k).sum();
        let v_mean = psi.dot(&(&parts.v * &psi));
        let initial_energy = initial.values[0];

        Ok(QuenchResult {
            spec_initial: *spec_i,
            spec_final: *spec_f,
            eigenvalues: fin.values.clone(),
            populations,
            initial_energy,
            initial_gap,
            mean_energy,
            predicted_mean_energy: initial_energy + (spec_f.field - spec_i.field) * v_mean,
            esqpt_energy: esqpt_energy(spec_f).ok(),
            basis: parts.basis,
        })
    }
}

/// Diagonalizes both Hamiltonians in `spec_i.sector` and returns the level
/// populations of the initial ground state.
pub fn quench(spec_i: &IsingSpec, spec_f: &IsingSpec) -> Result<QuenchResult> {
    Diagonalizer::new().quench(spec_i, spec_f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub sites: usize,
    pub delta_h: f64,
    pub r: f64,
}

/// Envelope ratio `R` of fully connected quenches `h_i -> h_i + delta_h`.
pub fn r_ratio_scan(h_i: f64, delta_h_grid: &[f64], n_grid: &[usize]) -> Result<Vec<RatioRow>> {
    let diag = Diagonalizer::new();
    let mut rows = Vec::with_capacity(delta_h_grid.len() * n_grid.len());
    for &n in n_grid {
        let spec = IsingSpec::fully_connected(n, h_i);
        for &dh in delta_h_grid {
            let q = diag.quench(&spec, &spec.with_field(h_i + dh))?;
            let env = compute_envelope(&q.distribution()?);
            rows.push(RatioRow {
                sites: n,
                delta_h: dh,
                r: env.diagnostics().ratio_r,
            });
        }
    }
    Ok(rows)
}

/// Smallest `delta_h` in `(0, delta_h_max]` at which the two most populated
/// envelope levels swap (`R = 1`), located by a scan with `step` and then
/// bisection on the population ratio of the swapping pair.
pub fn first_r_crossing(
    sites: usize,
    h_i: f64,
    delta_h_max: f64,
    step: f64,
) -> Result<Option<f64>> {
    let diag = Diagonalizer::new();
    let spec = IsingSpec::fully_connected(sites, h_i);
    let run = |dh: f64| diag.quench(&spec, &spec.with_field(h_i + dh));

    let mut prev_dh = 0.0;
    let mut prev_top = run(0.0)?.max_population_index();
    let steps = (delta_h_max / step).ceil() as usize;
    for i in 1..=steps {
        let dh = (i as f64 * step).min(delta_h_max);
        let top = run(dh)?.max_population_index();
        if top != prev_top {
            let (a, b) = (prev_top, top);
            let (mut lo, mut hi) = (prev_dh, dh);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let q = run(mid)?;
                if q.populations[a] >= q.populations[b] {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev_dh = dh;
        prev_top = top;
    }
    Ok(None)
}
