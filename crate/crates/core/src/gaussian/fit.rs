use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::GaussianSpec;
use crate::amplitude::EnergyDistribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub spec: GaussianSpec,
    /// RMS of `ln k_j` minus the fitted parabola.
    pub log_population_rms: f64,
    /// RMS of `E_j` minus the fitted quadratic.
    pub energy_rms: f64,
}

/// Weighted polynomial least squares, coefficients in increasing degree.
fn weighted_polyfit(x: &[f64], y: &[f64], w: &[f64], degree: usize) -> Result<Vec<f64>> {
    let n = x.len();
    let a = DMatrix::from_fn(n, degree + 1, |i, p| w[i].sqrt() * x[i].powi(p as i32));
    let b = DVector::from_fn(n, |i, _| w[i].sqrt() * y[i]);
    let svd = a.svd(true, true);
    let s = &svd.singular_values;
    if s.min() <= 1e-12 * s.max() {
        return Err(Error::IllConditioned("rank deficient polynomial fit".into()));
    }
    let c = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::IllConditioned(e.to_string()))?;
    Ok(c.iter().copied().collect())
}

/// Refines `(ln A, mu, sigma)` of `k_j = A exp(-(j - mu)^2 / 2 sigma^2)` on
/// the linear populations with damped Gauss-Newton steps.
fn refine(j: &[f64], k: &[f64], start: Vector3<f64>) -> Vector3<f64> {
    let model = |p: &Vector3<f64>, x: f64| (p[0] - (x - p[1]).powi(2) / (2.0 * p[2] * p[2])).exp();
    let cost = |p: &Vector3<f64>| -> f64 {
        j.iter().zip(k).map(|(&x, &y)| (y - model(p, x)).powi(2)).sum()
    };
    let mut p = start;
    let mut lambda = 1e-3;
    let mut c = cost(&p);
    for _ in 0..200 {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (&x, &y) in j.iter().zip(k) {
            let m = model(&p, x);
            let g = Vector3::new(
                m,
                m * (x - p[1]) / (p[2] * p[2]),
                m * (x - p[1]).powi(2) / p[2].powi(3),
            );
            jtj += g * g.transpose();
            jtr += g * (y - m);
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut damped = jtj;
            for d in 0..3 {
                damped[(d, d)] *= 1.0 + lambda;
            }
            let Some(step) = damped.lu().solve(&jtr) else { break };
            let trial = p + step;
            let tc = cost(&trial);
            if trial[2] > 0.0 && tc < c {
                let done = (c - tc) <= 1e-15 * c.max(1e-300);
                p = trial;
                c = tc;
                lambda = (lambda * 0.3).max(1e-12);
                improved = !done;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    p
}

/// Fits the Gaussian model to a distribution, with `j` the level index
/// counted from the lowest level.
///
/// `sigma` and `mu` come from a parabola through `ln k_j` weighted by `k_j^2`
/// (the log residuals of weakly populated levels carry no weight in the
/// amplitude), refined by least squares on `k_j` itself. The ladder
/// `E_GS + j Delta + j^2 eps / 2` is fitted with weights `k_j`.
pub fn fit_gaussian(dist: &EnergyDistribution) -> Result<GaussianFit> {
    let n = dist.len();
    if n < 4 {
        return Err(Error::IllConditioned(format!(
            "{n} populated levels, need at least 4"
        )));
    }
    let j: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let ln_k = dist.log_populations();
    let k = dist.populations();

    let w2: Vec<f64> = k.iter().map(|x| x * x).collect();
    let c = weighted_polyfit(&j, ln_k, &w2, 2)?;
    if !(c[2] < 0.0) {
        return Err(Error::IllConditioned(
            "log populations are not concave".into(),
        ));
    }
    let sigma0 = (-1.0 / (2.0 * c[2])).sqrt();
    let mu0 = c[1] * sigma0 * sigma0;
    let ln_a0 = c[0] + mu0 * mu0 / (2.0 * sigma0 * sigma0);
    let p = refine(&j, &k, Vector3::new(ln_a0, mu0, sigma0));
    let (ln_a, mu, sigma) = (p[0], p[1], p[2]);

    let e = weighted_polyfit(&j, dist.energies(), &k, 2)?;
    let spec = GaussianSpec {
        delta: e[1],
        epsilon: 2.0 * e[2],
        sigma,
        mu,
        j_min: 0,
        j_max: n as i64 - 1,
        e_gs: e[0],
    };

    let rms = |r: &mut dyn Iterator<Item = f64>| -> f64 {
        let v: Vec<f64> = r.collect();
        (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
    };
    let log_population_rms = rms(&mut j
        .iter()
        .zip(ln_k)
        .map(|(&x, &y)| y - (ln_a - (x - mu).powi(2) / (2.0 * sigma * sigma))));
    let energy_rms = rms(&mut j
        .iter()
        .zip(dist.energies())
        .map(|(&x, &y)| y - (e[0] + e[1] * x + e[2] * x * x)));

    Ok(GaussianFit {
        spec,
        log_population_rms,
        energy_rms,
    })
}
