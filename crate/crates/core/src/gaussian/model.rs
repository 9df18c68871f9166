use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::theta::{theta3_log, ThetaArgs};
use super::GaussianSpec;
use crate::amplitude::{AmplitudeValue, ComplexTime, SurvivalAmplitude};
use crate::error::{Error, Result};
use crate::zeros::{find_zeros, Provenance, Rect, SearchWindow, Zero, ZeroSet};

/// The Gaussian model summed over all integers `j`, a theta function.
///
/// Only defined where the quadratic part of the exponent still decays,
/// `1 / (2 sigma^2) + beta eps / 2 > 0`; outside that half-plane the
/// amplitude evaluates to NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnboundedGaussian {
    pub spec: GaussianSpec,
}

impl UnboundedGaussian {
    pub fn new(spec: GaussianSpec) -> Self {
        Self { spec }
    }

    pub fn theta_args(&self, z: ComplexTime) -> ThetaArgs {
        let s = &self.spec;
        let zc = z.to_complex();
        let s2 = s.sigma * s.sigma;
        let u = Complex64::i() * (zc * s.delta - s.mu / s2) * 0.5;
        let tau = Complex64::i() / PI * (1.0 / (2.0 * s2) + zc * s.epsilon * 0.5);
        ThetaArgs::new(u, tau)
    }

    pub fn is_valid_at(&self, beta: f64) -> bool {
        let s = &self.spec;
        1.0 / (2.0 * s.sigma * s.sigma) + 0.5 * beta * s.epsilon > 0.0
    }

    /// Unnormalized `sum_j w_j exp(-z E_j)` with `w_j = exp(-(j - mu)^2 / 2 sigma^2)`.
    pub fn try_amplitude(&self, z: ComplexTime) -> Result<AmplitudeValue> {
        let s = &self.spec;
        if !self.is_valid_at(z.beta) {
            return Err(Error::OutOfValidity(format!(
                "beta = {} outside the half-plane 1/sigma^2 + beta eps > 0",
                z.beta
            )));
        }
        let th = theta3_log(self.theta_args(z))?;
        let prefactor = AmplitudeValue::new(
            -s.mu * s.mu / (2.0 * s.sigma * s.sigma) - z.beta * s.e_gs,
            -z.t * s.e_gs,
        );
        Ok(th.mul(prefactor))
    }
}

impl SurvivalAmplitude for UnboundedGaussian {
    fn amplitude(&self, z: ComplexTime) -> AmplitudeValue {
        self.try_amplitude(z)
            .unwrap_or(AmplitudeValue::new(f64::NAN, f64::NAN))
    }
}

/// `L_U(z) / L_U(beta)`.
pub fn unbounded_amplitude(spec: &GaussianSpec, z: ComplexTime) -> Result<AmplitudeValue> {
    let model = UnboundedGaussian::new(*spec);
    let num = model.try_amplitude(z)?;
    let den = model.try_amplitude(ComplexTime::new(z.beta, 0.0))?;
    Ok(AmplitudeValue::new(
        num.log_modulus - den.log_modulus,
        num.phase - den.phase,
    ))
}

fn check_unbounded(spec: &GaussianSpec) -> Result<()> {
    if !(spec.delta > 0.0 && spec.sigma > 0.0) {
        return Err(Error::InvalidSpec("Delta and sigma must be positive".into()));
    }
    if !(spec.epsilon.is_finite() && spec.mu.is_finite()) {
        return Err(Error::InvalidSpec("non-finite parameter".into()));
    }
    Ok(())
}

/// Every zero of the unbounded model inside `window`.
///
/// Zeros of `theta_3` sit at `u = pi (m + 1/2) + pi tau (k + 1/2)`, which in
/// complex time reads
/// `z = [-(2j - 1 - 2 mu) / (2 sigma^2) + 2 pi i (n + 1/2)] / (Delta + eps (j - 1/2))`,
/// one column per pair of neighbouring levels `(j - 1, j)`. The chain id is `j`.
pub fn unbounded_zeros(spec: &GaussianSpec, window: &Rect) -> Result<ZeroSet> {
    check_unbounded(spec)?;
    if !window.is_valid() {
        return Err(Error::InvalidWindow(format!("{window}")));
    }
    let model = UnboundedGaussian::new(*spec);
    if !(model.is_valid_at(window.beta_min) && model.is_valid_at(window.beta_max)) {
        return Err(Error::OutOfValidity(format!(
            "window {window} crosses beta = {}",
            -1.0 / (spec.epsilon * spec.sigma * spec.sigma)
        )));
    }
    let s2 = spec.sigma * spec.sigma;
    // beta(x) = -(x - mu) / (sigma^2 (Delta + eps x)) with x = j - 1/2 is a
    // Moebius map whose inverse has no pole inside the valid window.
    let x_of = |b: f64| (spec.mu - b * s2 * spec.delta) / (1.0 + b * s2 * spec.epsilon);
    let (xa, xb) = (x_of(window.beta_min), x_of(window.beta_max));
    let j_lo = (xa.min(xb) + 0.5).ceil() - 1.0;
    let j_hi = (xa.max(xb) + 0.5).floor() + 1.0;

    let mut zeros = Vec::new();
    let mut j = j_lo;
    while j <= j_hi {
        let d = spec.delta + spec.epsilon * (j - 0.5);
        if d != 0.0 {
            let beta = -(2.0 * j - 1.0 - 2.0 * spec.mu) / (2.0 * s2 * d);
            let (na, nb) = (window.t_min * d / (2.0 * PI), window.t_max * d / (2.0 * PI));
            let n_lo = (na.min(nb) - 0.5).floor() as i64;
            let n_hi = (na.max(nb) - 0.5).ceil() as i64;
            if (n_hi - n_lo) as usize + zeros.len() > 10_000_000 {
                return Err(Error::InvalidWindow("window holds too many zeros".into()));
            }
            for n in n_lo..=n_hi {
                let z = ComplexTime::new(beta, 2.0 * PI * (n as f64 + 0.5) / d);
                if window.contains(z) {
                    zeros.push(Zero::with_chain(z, Provenance::Analytic, j as i64));
                }
            }
        }
        j += 1.0;
    }
    Ok(ZeroSet::new(zeros))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub id: i64,
    pub points: Vec<ComplexTime>,
}

/// Smooth curves through the unbounded zeros: the zero formula with `j`
/// replaced by a continuous `x`, one curve per period index `n`.
pub fn zero_curves(
    spec: &GaussianSpec,
    n_range: std::ops::RangeInclusive<i64>,
    x_range: (f64, f64),
    samples: usize,
) -> Result<Vec<Polyline>> {
    check_unbounded(spec)?;
    let samples = samples.max(2);
    let s2 = spec.sigma * spec.sigma;
    let model = UnboundedGaussian::new(*spec);
    Ok(n_range
        .map(|n| {
            let points = (0..samples)
                .filter_map(|i| {
                    let x = x_range.0 + (x_range.1 - x_range.0) * i as f64 / (samples - 1) as f64;
                    let d = spec.delta + spec.epsilon * (x - 0.5);
                    if d <= 0.0 {
                        return None;
                    }
                    let beta = -(2.0 * x - 1.0 - 2.0 * spec.mu) / (2.0 * s2 * d);
                    model
                        .is_valid_at(beta)
                        .then(|| ComplexTime::new(beta, 2.0 * PI * (n as f64 + 0.5) / d))
                })
                .collect();
            Polyline { id: n, points }
        })
        .collect())
}

/// Envelope of the dephasing peaks of `|L_U|`,
/// `|theta_3(pi Delta / (2 Delta_c), tau(z))| / theta_3(0, tau(beta))` with
/// `Delta_c = Delta + eps beta Delta sigma^2 / (1 + beta Delta sigma^2)`.
pub fn theta_decay(spec: &GaussianSpec, z: ComplexTime) -> Result<f64> {
    check_unbounded(spec)?;
    let model = UnboundedGaussian::new(*spec);
    if !model.is_valid_at(z.beta) {
        return Err(Error::OutOfValidity(format!("beta = {}", z.beta)));
    }
    let s2 = spec.sigma * spec.sigma;
    let g = z.beta * spec.delta * s2;
    if (1.0 + g).abs() < 1e-12 {
        return Err(Error::OutOfValidity(format!(
            "Delta_center singular at beta = {}",
            z.beta
        )));
    }
    let center = spec.delta + spec.epsilon * g / (1.0 + g);
    let u = Complex64::new(0.5 * PI * spec.delta / center, 0.0);
    let num = theta3_log(ThetaArgs::new(u, model.theta_args(z).tau))?;
    let den = theta3_log(ThetaArgs::new(
        Complex64::new(0.0, 0.0),
        model.theta_args(ComplexTime::new(z.beta, 0.0)).tau,
    ))?;
    Ok((num.log_modulus - den.log_modulus).exp())
}

/// `L_G = L_U - C` evaluated term by term, all unnormalized and sharing the
/// weights `exp(-(j - mu)^2 / 2 sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub bounded: AmplitudeValue,
    pub unbounded: AmplitudeValue,
    pub cutoff: AmplitudeValue,
    /// `|L_U - C - L_G|` relative to the largest of the three.
    pub residual: f64,
}

const DECOMPOSITION_TOLERANCE: f64 = 1e-10;
const MAX_TAIL_TERMS: usize = 1_000_000;

fn term(spec: &GaussianSpec, j: i64, z: ComplexTime) -> (f64, f64) {
    let e = spec.energy(j);
    (spec.log_weight(j) - z.beta * e, -z.t * e)
}

fn sum_terms(terms: &[(f64, f64)]) -> AmplitudeValue {
    let m = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return AmplitudeValue::ZERO;
    }
    let acc: Complex64 = terms
        .iter()
        .map(|&(l, p)| Complex64::from_polar((l - m).exp(), p))
        .sum();
    AmplitudeValue::from_scaled(m, acc)
}

/// Terms `j = start, start + step, ...` until they are negligible and falling.
fn tail_terms(spec: &GaussianSpec, start: i64, step: i64, z: ComplexTime) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut prev = f64::INFINITY;
    let mut j = start;
    loop {
        let t = term(spec, j, z);
        best = best.max(t.0);
        out.push(t);
        if t.0 < prev && t.0 < best - 50.0 {
            return Ok(out);
        }
        if out.len() > MAX_TAIL_TERMS {
            return Err(Error::IllConditioned(format!(
                "cutoff sum does not converge at beta = {}",
                z.beta
            )));
        }
        prev = t.0;
        j += step;
    }
}

pub fn bounded_decomposition(spec: &GaussianSpec, z: ComplexTime) -> Result<Decomposition> {
    spec.validate()?;
    let unbounded = UnboundedGaussian::new(*spec).try_amplitude(z)?;
    let inner: Vec<_> = (spec.j_min..=spec.j_max).map(|j| term(spec, j, z)).collect();
    let bounded = sum_terms(&inner);
    let mut outer = tail_terms(spec, spec.j_min - 1, -1, z)?;
    outer.extend(tail_terms(spec, spec.j_max + 1, 1, z)?);
    let cutoff = sum_terms(&outer);

    let m = [bounded, unbounded, cutoff]
        .iter()
        .map(|v| v.log_modulus)
        .fold(f64::NEG_INFINITY, f64::max);
    let scaled = |v: AmplitudeValue| Complex64::from_polar((v.log_modulus - m).exp(), v.phase);
    let residual = (scaled(unbounded) - scaled(cutoff) - scaled(bounded)).norm();
    if !(residual <= DECOMPOSITION_TOLERANCE) {
        return Err(Error::IllConditioned(format!(
            "L_G = L_U - C violated by {residual:e} at {z:?}"
        )));
    }
    Ok(Decomposition {
        bounded,
        unbounded,
        cutoff,
        residual,
    })
}

/// `K(z) = sum k_j j^2 e^{-z j Delta} / sum k_j j e^{-z j Delta}` over the
/// bounded levels.
pub fn k_factor(spec: &GaussianSpec, z: ComplexTime) -> Result<Complex64> {
    let mut lin = Vec::new();
    let mut quad = Vec::new();
    for j in spec.j_min..=spec.j_max {
        if j == 0 {
            continue;
        }
        let jf = j as f64;
        let base = spec.log_weight(j) - z.beta * jf * spec.delta;
        let phase = -z.t * jf * spec.delta;
        lin.push((base + jf.abs().ln(), phase + if j < 0 { PI } else { 0.0 }));
        quad.push((base + 2.0 * jf.abs().ln(), phase));
    }
    let m = lin
        .iter()
        .chain(&quad)
        .map(|t| t.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let sum = |ts: &[(f64, f64)]| -> (Complex64, f64) {
        ts.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(s, a), &(l, p)| {
            let r = (l - m).exp();
            (s + Complex64::from_polar(r, p), a + r)
        })
    };
    let (s1, a1) = sum(&lin);
    let (s2, _) = sum(&quad);
    if !(s1.norm() >= 1e-14 * a1.max(f64::MIN_POSITIVE)) {
        return Err(Error::SingularK {
            beta: z.beta,
            t: z.t,
        });
    }
    Ok(s2 / s1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: ComplexTime,
    pub k: Complex64,
    /// `|eps| sigma^2 max |z|` over the trajectory; first order needs it small.
    pub expansion_parameter: f64,
    pub points: Vec<(i64, ComplexTime)>,
}

/// First-order displacement of the periodic images `z0 + 2 pi i n / Delta` of
/// each seed zero of the equidistant model, `z0(n) (1 - eps K(z0) / (2 Delta))`.
pub fn zero_trajectories(
    spec: &GaussianSpec,
    seeds: &[ComplexTime],
    n_range: std::ops::RangeInclusive<i64>,
) -> Result<Vec<Trajectory>> {
    spec.validate()?;
    let period = 2.0 * PI / spec.delta;
    seeds
        .par_iter()
        .map(|&seed| {
            // K is periodic in t with the period of the equidistant model
            let k = k_factor(spec, seed)?;
            let factor = Complex64::new(1.0, 0.0) - k * (spec.epsilon / (2.0 * spec.delta));
            let mut reach = 0.0f64;
            let points = n_range
                .clone()
                .map(|n| {
                    let z0 = ComplexTime::new(seed.beta, seed.t + n as f64 * period).to_complex();
                    reach = reach.max(z0.norm());
                    (n, ComplexTime::from(z0 * factor))
                })
                .collect();
            Ok(Trajectory {
                seed,
                k,
                expansion_parameter: spec.epsilon.abs() * spec.sigma * spec.sigma * reach,
                points,
            })
        })
        .collect()
}

/// Zeros of the equidistant (`eps = 0`) bounded model in the first period
/// `0 < t < 2 pi / Delta`, found numerically.
pub fn trajectory_seeds(spec: &GaussianSpec, beta_min: f64, beta_max: f64) -> Result<ZeroSet> {
    let flat = spec.with_epsilon(0.0);
    let dist = flat.distribution_with_floor(0.0)?;
    let window = SearchWindow::new(beta_min, beta_max, 0.0, 2.0 * PI / spec.delta);
    find_zeros(&dist, &window)
}
