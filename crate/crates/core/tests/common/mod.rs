//! Checks shared by the property suite and the acceptance run. Each returns
//! `Err` with a description of the first violation.
#![allow(dead_code)]

use std::f64::consts::TAU;

use lzeros::spin::{quench, IsingSpec};
use lzeros::twoband::{bogoliubov, xy_bogoliubov, TwoBandQuench};
use lzeros::zeros::{edge_strip, winding_number};
use lzeros::{compute_envelope, find_zeros, ComplexTime, EnergyDistribution, Rect, SearchWindow};

pub type Check = Result<(), String>;

/// Levels at cumulative `gaps` (first energy 0) with the given log weights.
pub fn distribution(gaps: &[f64], log_weights: &[f64]) -> EnergyDistribution {
    let mut e = 0.0;
    let levels = log_weights.iter().enumerate().map(|(i, &w)| {
        if i > 0 {
            e += gaps[i - 1];
        }
        (e, w)
    });
    EnergyDistribution::builder()
        .log_levels(levels.collect::<Vec<_>>())
        .population_floor(0.0)
        .build()
        .expect("valid random distribution")
}

/// All zeros of `dist` fall inside the edge strip.
pub fn strip_confinement(dist: &EnergyDistribution, seed: u64) -> Check {
    let (lo, hi) = edge_strip(dist).map_err(|e| e.to_string())?;
    let span = dist.energies()[dist.len() - 1] - dist.energies()[0];
    let margin = 1.0 + 0.5 * (hi - lo);
    let w = SearchWindow::new(lo - margin, hi + margin, 0.0, 3.0 * TAU / span * dist.len() as f64)
        .with_seed(seed);
    let zs = find_zeros(dist, &w).map_err(|e| e.to_string())?;
    let tol = w.resolution();
    match zs.iter().find(|z| z.z.beta < lo - tol || z.z.beta > hi + tol) {
        Some(z) => Err(format!("zero {:?} outside strip [{lo}, {hi}]", z.z)),
        None => Ok(()),
    }
}

/// Winding numbers of the four quadrants add up to that of the rectangle,
/// which equals the zero count of the finder.
pub fn winding_conservation(dist: &EnergyDistribution, rect: Rect, seed: u64) -> Check {
    let w = SearchWindow::from_rect(rect).with_seed(seed);
    let c = rect.center();
    let quads = [
        Rect::new(rect.beta_min, c.beta, rect.t_min, c.t),
        Rect::new(c.beta, rect.beta_max, rect.t_min, c.t),
        Rect::new(rect.beta_min, c.beta, c.t, rect.t_max),
        Rect::new(c.beta, rect.beta_max, c.t, rect.t_max),
    ];
    let whole = winding_number(dist, &rect, &w);
    let parts: Result<Vec<f64>, _> = quads.iter().map(|q| winding_number(dist, q, &w)).collect();
    let (whole, parts) = match (whole, parts) {
        (Ok(a), Ok(b)) => (a, b),
        // a zero on one of the cuts; the finder's jitter exists for this case
        _ => return Ok(()),
    };
    let sum: f64 = parts.iter().sum();
    if (whole - sum).abs() > 1e-6 {
        return Err(format!("winding {whole} vs quadrant sum {sum} on {rect}"));
    }
    let count = find_zeros(dist, &w).map_err(|e| e.to_string())?.total_multiplicity();
    if (whole - count as f64).abs() > 1e-6 {
        return Err(format!("winding {whole} vs {count} zeros found on {rect}"));
    }
    Ok(())
}

/// The product form of a two-band amplitude equals the sum over pair
/// configurations, relative to `L(beta)`.
pub fn factorization(sites: usize, h_i: f64, h_f: f64, z: ComplexTime) -> Check {
    let tb = TwoBandQuench::ising(sites, h_i, h_f).map_err(|e| e.to_string())?;
    let dist = tb.bcs_populations().map_err(|e| e.to_string())?;
    let product = tb.factorized_amplitude(z).to_complex();
    let sum = dist.evaluate(z).to_complex();
    let scale = dist.evaluate(ComplexTime::new(z.beta, 0.0)).modulus();
    if (product - sum).norm() > 1e-10 * scale {
        return Err(format!("N={sites} {h_i}->{h_f} at {z:?}: {product} vs {sum}"));
    }
    Ok(())
}

pub fn bogoliubov_unitarity(q: f64, gamma: f64, h: f64) -> Check {
    for (u, v) in [
        bogoliubov(q, h).map_err(|e| e.to_string())?,
        xy_bogoliubov(q, gamma, h).map_err(|e| e.to_string())?,
    ] {
        let n = u.norm_sqr() + v.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(format!("|u|^2 + |v|^2 = {n} at q={q} gamma={gamma} h={h}"));
        }
    }
    Ok(())
}

/// `<H_f> = E_0(h_i) + (h_f - h_i) <V>` on the initial ground state.
pub fn mean_energy_identity(spec_i: &IsingSpec, h_f: f64) -> Check {
    let q = quench(spec_i, &spec_i.with_field(h_f)).map_err(|e| e.to_string())?;
    let scale = 1.0 + q.mean_energy.abs();
    if (q.mean_energy - q.predicted_mean_energy).abs() > 1e-10 * scale {
        return Err(format!(
            "{spec_i:?} -> {h_f}: mean {} vs predicted {}",
            q.mean_energy, q.predicted_mean_energy
        ));
    }
    Ok(())
}

/// Over `T` the full strip holds `T |E_d - E_0| / 2 pi` zeros up to the
/// number of envelope chains, for both the exact and the approximate set.
pub fn zero_density(dist: &EnergyDistribution, periods: f64, seed: u64) -> Check {
    let (lo, hi) = edge_strip(dist).map_err(|e| e.to_string())?;
    let e = dist.energies();
    let span = e[e.len() - 1] - e[0];
    let duration = periods * TAU / span * (dist.len() - 1).max(1) as f64;
    let rect = Rect::new(lo - 1.0, hi + 1.0, 0.0, duration);
    let expected = duration * span / TAU;
    let env = compute_envelope(dist);
    let chains = env.chains.len() as f64;

    let exact = find_zeros(dist, &SearchWindow::from_rect(rect).with_seed(seed))
        .map_err(|e| e.to_string())?
        .total_multiplicity() as f64;
    if (exact - expected).abs() > chains + 1e-9 {
        return Err(format!("{exact} exact zeros, expected {expected} +- {chains}"));
    }
    let approx = env.approximate_zeros(&rect).len() as f64;
    if (approx - expected.floor()).abs() > chains + 1e-9 {
        return Err(format!("{approx} approximate zeros, expected {expected} +- {chains}"));
    }
    Ok(())
}
