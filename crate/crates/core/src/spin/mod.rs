//! Ising chains with `1/r^alpha` interactions in a transverse field,
//!
//! `H = -(1/N_kac) sum_{i != j} S^z_i S^z_j / d(i,j)^alpha + h sum_i S^x_i`,
//!
//! on a periodic chain with minimal-image distance `d`. `alpha = 0` is the
//! fully connected (Lipkin) model, handled in the collective spin basis;
//! `alpha = inf` is the nearest-neighbour chain.

mod eigen;
mod lipkin;
mod long_range;
mod quench;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use eigen::{diagonalize, Spectrum};
pub use lipkin::build_fully_connected;
pub use long_range::{build_long_range, build_long_range_symmetric, LONG_RANGE_CAP};
pub use quench::{
    first_r_crossing, mean_energy_shift, quench, r_ratio_scan, Basis, Diagonalizer, QuenchResult,
    RatioRow,
};

/// Largest `N` accepted by the fully connected builder.
pub const FULLY_CONNECTED_CAP: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    /// Symmetric under the global spin flip `prod sigma^x`.
    EvenParity,
    OddParity,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    Extensive,
    /// `H / N`
    PerSite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingSpec {
    pub sites: usize,
    pub field: f64,
    #[serde(with = "alpha_serde")]
    pub alpha: f64,
    pub sector: Sector,
    /// Defaults to per-site for `alpha = 0` and extensive otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
}

impl IsingSpec {
    /// Fully connected model, even sector, per-site units.
    pub fn fully_connected(sites: usize, field: f64) -> Self {
        Self {
            sites,
            field,
            alpha: 0.0,
            sector: Sector::EvenParity,
            units: None,
        }
    }

    /// Even sector, extensive units.
    pub fn long_range(sites: usize, field: f64, alpha: f64) -> Self {
        Self {
            sites,
            field,
            alpha,
            sector: Sector::EvenParity,
            units: None,
        }
    }

    pub fn nearest_neighbour(sites: usize, field: f64) -> Self {
        Self::long_range(sites, field, f64::INFINITY)
    }

    pub fn with_field(mut self, field: f64) -> Self {
        self.field = field;
        self
    }

    pub fn with_sector(mut self, sector: Sector) -> Self {
        self.sector = sector;
        self
    }

    pub fn with_units(mut self, units: Units) -> Self {
        self.units = Some(units);
        self
    }

    pub fn units(&self) -> Units {
        self.units.unwrap_or(if self.alpha == 0.0 {
            Units::PerSite
        } else {
            Units::Extensive
        })
    }

    pub fn is_fully_connected(&self) -> bool {
        self.alpha == 0.0
    }

    /// Multiplier applied to the extensive Hamiltonian.
    pub fn unit_scale(&self) -> f64 {
        match self.units() {
            Units::Extensive => 1.0,
            Units::PerSite => 1.0 / self.sites as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::InvalidSpec(format!("N = {} < 2", self.sites)));
        }
        if !self.field.is_finite() {
            return Err(Error::InvalidSpec("field is not finite".into()));
        }
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(Error::InvalidSpec(format!("alpha = {} not in [0, inf]", self.alpha)));
        }
        Ok(())
    }
}

/// `(2 / (N - 1)) sum_{n=1}^{N-1} (N - n) / n^alpha`
pub fn kac_norm(sites: usize, alpha: f64) -> f64 {
    if alpha.is_infinite() {
        return 2.0;
    }
    let n = sites as f64;
    let s: f64 = (1..sites).map(|m| (n - m as f64) / (m as f64).powf(alpha)).sum();
    2.0 * s / (n - 1.0)
}

/// Per-site energy of the classical saddle of the fully connected model,
/// where the excited-state transition sits.
pub fn esqpt_energy(spec: &IsingSpec) -> Result<f64> {
    if !spec.is_fully_connected() {
        return Err(Error::InvalidSpec("ESQPT energy needs alpha = 0".into()));
    }
    if spec.field.abs() >= 1.0 {
        return Err(Error::OutOfPhase { h: spec.field });
    }
    let per_site = -spec.field.abs() / 2.0;
    Ok(match spec.units() {
        Units::PerSite => per_site,
        Units::Extensive => per_site * spec.sites as f64,
    })
}

/// Infinity is written as the string `"inf"` so that JSON can carry it.
mod alpha_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(alpha: &f64, s: S) -> Result<S::Ok, S::Error> {
        if alpha.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*alpha)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(x),
            Raw::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                other => other
                    .parse()
                    .map_err(|_| de::Error::custom(format!("invalid alpha `{s}`"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kac_values() {
        for n in [2, 5, 17] {
            assert!((kac_norm(n, 0.0) - n as f64).abs() < 1e-12);
            assert_eq!(kac_norm(n, f64::INFINITY), 2.0);
        }
        assert!((kac_norm(4, 1.0) - 26.0 / 9.0).abs() < 1e-14);
        // large finite alpha approaches the nearest-neighbour value
        assert!((kac_norm(8, 1e3) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn esqpt_values() {
        let e = |h| esqpt_energy(&IsingSpec::fully_connected(10, h));
        assert!((e(0.6).unwrap() + 0.3).abs() < 1e-15);
        assert_eq!(e(0.0).unwrap(), 0.0);
        assert!((e(0.5).unwrap() + 0.25).abs() < 1e-15);
        assert!(matches!(e(1.0), Err(Error::OutOfPhase { .. })));
        assert!(esqpt_energy(&IsingSpec::nearest_neighbour(10, 0.3)).is_err());
    }

    #[test]
    fn spec_json_round_trip_with_infinite_alpha() {
        let spec = IsingSpec::nearest_neighbour(8, 0.1);
        let s = serde_json::to_string(&spec).unwrap();
        assert!(s.contains("\"inf\""));
        let back: IsingSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn default_units() {
        assert_eq!(IsingSpec::fully_connected(4, 0.1).units(), Units::PerSite);
        assert_eq!(IsingSpec::long_range(4, 0.1, 1.5).units(), Units::Extensive);
    }
}
