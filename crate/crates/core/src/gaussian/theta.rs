use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitude::AmplitudeValue;
use crate::error::{Error, Result};

/// Arguments of `theta_3(u, tau) = sum_j exp(2 j i u + pi i tau j^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaArgs {
    pub u: Complex64,
    pub tau: Complex64,
}

impl ThetaArgs {
    pub fn new(u: Complex64, tau: Complex64) -> Self {
        Self { u, tau }
    }
}

const TAIL_TOLERANCE: f64 = 1e-17;
const MIN_IM_TAU: f64 = 1e-12;

/// `theta_3` in log form, summed around the largest term.
///
/// With `a = Im tau` the terms relative to the central one are bounded by
/// `exp(-pi a (k^2 - |k|))`, so `k` runs over `|k| <= K` with `K` the first
/// value whose geometric tail estimate drops below `1e-17`.
pub fn theta3_log(args: ThetaArgs) -> Result<AmplitudeValue> {
    let a = args.tau.im;
    if !(a > MIN_IM_TAU) {
        return Err(Error::ThetaNonConvergent { im_tau: a });
    }
    let (ur, ui) = (args.u.re, args.u.im);
    let center = (-ui / (PI * a)).round();
    if !center.is_finite() || center.abs() > 1e15 {
        return Err(Error::ThetaNonConvergent { im_tau: a });
    }
    let mut k_max = 1.0f64;
    loop {
        let tail = 2.0 * (-PI * a * k_max * (k_max + 1.0)).exp()
            / (1.0 - (-2.0 * PI * a * (k_max + 1.0)).exp());
        if tail < TAIL_TOLERANCE {
            break;
        }
        k_max += 1.0;
    }

    let re = |j: f64| -2.0 * j * ui - PI * a * j * j;
    let im = |j: f64| 2.0 * j * ur + PI * args.tau.re * j * j;
    let scale = re(center);
    let mut acc = Complex64::new(0.0, 0.0);
    let k = k_max as i64;
    for dk in -k..=k {
        let j = center + dk as f64;
        acc += Complex64::from_polar((re(j) - scale).exp(), im(j));
    }
    Ok(AmplitudeValue::from_scaled(scale, acc))
}

pub fn theta3(args: ThetaArgs) -> Result<Complex64> {
    theta3_log(args).map(AmplitudeValue::to_complex)
}
