//! Gaussian population model on a weakly non-uniform ladder,
//! `E_j = E_GS + j Delta + j^2 eps / 2`, `k_j ~ exp(-(j - mu)^2 / 2 sigma^2)`.
//!
//! Summed over all integers `j` the amplitude is a Jacobi theta function,
//! whose zeros are known in closed form; the physical (bounded) model is that
//! sum minus the levels outside `[j_min, j_max]`.

mod fit;
mod model;
mod theta;

use serde::{Deserialize, Serialize};

use crate::amplitude::EnergyDistribution;
use crate::error::{Error, Result};

pub use fit::{fit_gaussian, GaussianFit};
pub use model::{
    bounded_decomposition, k_factor, theta_decay, trajectory_seeds, unbounded_amplitude,
    unbounded_zeros, zero_curves, zero_trajectories, Decomposition, Polyline, Trajectory,
    UnboundedGaussian,
};
pub use theta::{theta3, theta3_log, ThetaArgs};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub delta: f64,
    #[serde(default)]
    pub epsilon: f64,
    pub sigma: f64,
    #[serde(default)]
    pub mu: f64,
    pub j_min: i64,
    pub j_max: i64,
    #[serde(default)]
    pub e_gs: f64,
}

impl GaussianSpec {
    pub fn new(delta: f64, epsilon: f64, sigma: f64, mu: f64, j_min: i64, j_max: i64) -> Self {
        Self {
            delta,
            epsilon,
            sigma,
            mu,
            j_min,
            j_max,
            e_gs: 0.0,
        }
    }

    pub fn energy(&self, j: i64) -> f64 {
        let j = j as f64;
        self.e_gs + j * self.delta + 0.5 * j * j * self.epsilon
    }

    /// `ln` of the unnormalized weight of level `j`.
    pub fn log_weight(&self, j: i64) -> f64 {
        let x = j as f64 - self.mu;
        -x * x / (2.0 * self.sigma * self.sigma)
    }

    /// `E_{j+1} - E_j = Delta + eps (j + 1/2)`
    pub fn spacing(&self, j: i64) -> f64 {
        self.delta + self.epsilon * (j as f64 + 0.5)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_range(mut self, j_min: i64, j_max: i64) -> Self {
        self.j_min = j_min;
        self.j_max = j_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidSpec(format!("Delta = {} must be positive", self.delta)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidSpec(format!("sigma = {} must be positive", self.sigma)));
        }
        if !(self.epsilon.is_finite() && self.mu.is_finite() && self.e_gs.is_finite()) {
            return Err(Error::InvalidSpec("non-finite parameter".into()));
        }
        if self.j_min > self.j_max {
            return Err(Error::InvalidSpec(format!(
                "empty level range [{}, {}]",
                self.j_min, self.j_max
            )));
        }
        if let Some(j) = (self.j_min..self.j_max).find(|&j| self.spacing(j) <= 0.0) {
            return Err(Error::InvalidSpacing { j });
        }
        Ok(())
    }

    /// Bounded model with the default population floor.
    pub fn distribution(&self) -> Result<EnergyDistribution> {
        self.distribution_with_floor(crate::amplitude::DEFAULT_POPULATION_FLOOR)
    }

    pub fn distribution_with_floor(&self, floor: f64) -> Result<EnergyDistribution> {
        self.validate()?;
        EnergyDistribution::builder()
            .log_levels((self.j_min..=self.j_max).map(|j| (self.energy(j), self.log_weight(j))))
            .population_floor(floor)
            .build()
    }
}

pub fn build_distribution(spec: &GaussianSpec) -> Result<EnergyDistribution> {
    spec.distribution()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_populations() {
        let spec = GaussianSpec::new(1.0, 0.0, 1.5, 0.0, -10, 10);
        let d = spec.distribution().unwrap();
        let k = d.populations();
        assert_eq!(k.len(), 21);
        for i in 0..21 {
            assert!((k[i] - k[20 - i]).abs() < 1e-15);
        }
        let gaps: Vec<f64> = d.energies().windows(2).map(|w| w[1] - w[0]).collect();
        assert!(gaps.iter().all(|g| (g - 1.0).abs() < 1e-14));
    }

    #[test]
    fn fitted_case_builds() {
        let spec = GaussianSpec::new(0.958, -0.022, 1.3, 0.5, 0, 15);
        let d = spec.distribution_with_floor(0.0).unwrap();
        assert_eq!(d.len(), 16);
        // the default floor drops the far tail
        assert!(spec.distribution().unwrap().len() < 16);
        assert!((d.energy(15) - (15.0 * 0.958 - 0.011 * 225.0)).abs() < 1e-12);
    }

    #[test]
    fn negative_spacing_rejected() {
        let spec = GaussianSpec::new(1.0, -0.2, 1.5, 0.0, 0, 10);
        assert!(matches!(spec.validate(), Err(Error::InvalidSpacing { j: 5 })));
    }
}
