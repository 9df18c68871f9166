use crate::amplitude::{log_sum_exp, EnergyDistribution};
use crate::error::{Error, Result};

/// Bounds `(beta_low, beta_high)` of the strip outside which the amplitude is
/// dominated by a single edge level and cannot vanish.
///
/// `beta_high` is where the lowest level balances the rest,
/// `k_0 e^{-beta E_0} = sum_{j>0} k_j e^{-beta E_j}`, and `beta_low` is the
/// same balance for the highest level.
pub fn edge_strip(dist: &EnergyDistribution) -> Result<(f64, f64)> {
    let d = dist.len();
    if d < 2 {
        return Err(Error::InvalidDistribution(
            "edge strip needs at least two levels".into(),
        ));
    }
    let e = dist.energies();
    let lk = dist.log_populations();
    let term = |j: usize, beta: f64| lk[j] - beta * e[j];

    // increasing in beta
    let low_edge = |beta: f64| term(0, beta) - log_sum_exp((1..d).map(|j| term(j, beta)));
    // decreasing in beta, negated to be increasing
    let high_edge = |beta: f64| log_sum_exp((0..d - 1).map(|j| term(j, beta))) - term(d - 1, beta);

    Ok((increasing_root(high_edge), increasing_root(low_edge)))
}

fn increasing_root(f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (-1.0, 1.0);
    while f(lo) > 0.0 {
        hi = lo;
        lo *= 2.0;
    }
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::ComplexTime;
    use crate::zeros::{find_zeros, SearchWindow};

    #[test]
    fn two_levels_collapse_to_line() {
        let d = EnergyDistribution::new([(0.0, 0.8), (2.0, 0.2)]).unwrap();
        let (lo, hi) = edge_strip(&d).unwrap();
        let beta = -4f64.ln() / 2.0;
        assert!((lo - beta).abs() < 1e-12 && (hi - beta).abs() < 1e-12);
    }

    #[test]
    fn contains_all_zeros() {
        let d = EnergyDistribution::new([(0.0, 0.1), (0.9, 0.4), (1.7, 0.2), (3.1, 0.3)]).unwrap();
        let (lo, hi) = edge_strip(&d).unwrap();
        assert!(lo < hi);
        let zs = find_zeros(&d, &SearchWindow::new(lo - 3.0, hi + 3.0, 0.0, 40.0)).unwrap();
        assert!(!zs.is_empty());
        for z in &zs {
            assert!(z.z.beta >= lo - 1e-3 && z.z.beta <= hi + 1e-3, "{:?}", z.z);
        }
        // balance equation holds at the bound
        let v = d.evaluate(ComplexTime::new(hi, 0.0));
        let k0 = d.log_population(0) - hi * d.energy(0);
        assert!((v.log_modulus - (k0 + 2f64.ln())).abs() < 1e-9);
    }
}
