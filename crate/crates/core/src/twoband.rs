//! Free-fermion quenches of the nearest-neighbour Ising and XY chains.
//!
//! After Jordan-Wigner and Bogoliubov transformations each momentum pair
//! `(q, -q)` is an independent two-level system, so the quenched ground state
//! is a BCS product over pairs and the survival amplitude factorizes.
//!
//! Conventions: the Ising chain carries the `1/8` prefactor, so a pair of
//! quasiparticles costs `eps_q / 4` with `eps_q = sqrt((4h - cos q)^2 + sin^2 q)`
//! and the critical field is `h = 1/4`. For the XY chain the pair energy is
//! `2 eps_q` with `eps_q = 2 sqrt((h - cos q)^2 + gamma^2 sin^2 q)`.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitude::{AmplitudeValue, ComplexTime, EnergyDistribution, SurvivalAmplitude};
use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::zeros::{Provenance, Rect, Zero, ZeroSet};

/// Largest number of momentum pairs for subset enumeration.
pub const PAIR_CAP: usize = 24;

const GAP_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum TwoBandModel {
    IsingNn {
        h_i: f64,
        h_f: f64,
    },
    Xy {
        gamma_i: f64,
        h_i: f64,
        gamma_f: f64,
        h_f: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeData {
    pub q: f64,
    pub eps_i: f64,
    pub eps_f: f64,
    pub u_i: Complex64,
    pub v_i: Complex64,
    pub u_f: Complex64,
    pub v_f: Complex64,
    /// Pair excitation amplitude `Z_{-q,q}`.
    pub z: Complex64,
    /// `ln |Z| / eps_f`
    pub w: f64,
    /// Energy of one quasiparticle pair in the final Hamiltonian.
    pub pair_energy: f64,
}

impl ModeData {
    pub fn abs_z(&self) -> f64 {
        self.z.norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoBandQuench {
    pub sites: usize,
    pub model: TwoBandModel,
    pub modes: Vec<ModeData>,
}

/// `sqrt((4h - cos q)^2 + sin^2 q)`
pub fn ising_dispersion(q: f64, h: f64) -> f64 {
    (4.0 * h - q.cos()).hypot(q.sin())
}

/// `2 sqrt((h - cos q)^2 + gamma^2 sin^2 q)`
pub fn xy_dispersion(q: f64, gamma: f64, h: f64) -> f64 {
    2.0 * (h - q.cos()).hypot(gamma * q.sin())
}

/// Odd multiples of `pi / N` in `(0, pi)`.
pub fn allowed_momenta(sites: usize) -> Vec<f64> {
    (0..sites / 2)
        .map(|m| (2 * m + 1) as f64 * PI / sites as f64)
        .collect()
}

/// Bogoliubov pair for a mode with diagonal part `s` and pairing part `b`:
/// `u = sqrt((eps + s) / 2 eps)`, `v = i b / sqrt(2 eps (eps + s))`.
fn coefficients(q: f64, s: f64, b: f64) -> Result<(Complex64, Complex64)> {
    let eps = s.hypot(b);
    if eps < GAP_TOLERANCE {
        return Err(Error::GaplessMode { q });
    }
    // eps + s without cancellation when s < 0
    let eps_plus_s = if s >= 0.0 { eps + s } else { b * b / (eps - s) };
    let (u, v) = if eps_plus_s > 0.0 {
        ((eps_plus_s / (2.0 * eps)).sqrt(), b / (2.0 * eps * eps_plus_s).sqrt())
    } else {
        // b = 0, s < 0: fully inverted mode
        (0.0, 1.0)
    };
    Ok((Complex64::new(u, 0.0), Complex64::new(0.0, v)))
}

/// Ising `(u_q, v_q)` at field `h`.
pub fn bogoliubov(q: f64, h: f64) -> Result<(Complex64, Complex64)> {
    coefficients(q, 4.0 * h - q.cos(), q.sin())
}

pub fn xy_bogoliubov(q: f64, gamma: f64, h: f64) -> Result<(Complex64, Complex64)> {
    coefficients(q, h - q.cos(), gamma * q.sin())
}

/// `Z = (u_{-q}^f v_q^i + u_q^i v_{-q}^f) / (conj(u_{-q}^i) u_{-q}^f + conj(v_{-q}^i) v_{-q}^f)`
fn pair_amplitude(
    q: f64,
    coeffs: impl Fn(f64, bool) -> Result<(Complex64, Complex64)>,
) -> Result<Complex64> {
    let (ui, vi) = coeffs(q, true)?;
    let (ui_m, vi_m) = coeffs(-q, true)?;
    let (uf_m, vf_m) = coeffs(-q, false)?;
    let num = uf_m * vi + ui * vf_m;
    let den = ui_m.conj() * uf_m + vi_m.conj() * vf_m;
    if den.norm() < 1e-14 {
        return Err(Error::OrthogonalMode { q });
    }
    Ok(num / den)
}

/// Ising pair excitation amplitude for the quench `h_i -> h_f`.
pub fn excitation_amplitude(q: f64, h_i: f64, h_f: f64) -> Result<Complex64> {
    pair_amplitude(q, |k, initial| bogoliubov(k, if initial { h_i } else { h_f }))
}

pub fn xy_excitation_amplitude(q: f64, gamma_i: f64, h_i: f64, gamma_f: f64, h_f: f64) -> Result<Complex64> {
    pair_amplitude(q, |k, initial| {
        if initial {
            xy_bogoliubov(k, gamma_i, h_i)
        } else {
            xy_bogoliubov(k, gamma_f, h_f)
        }
    })
}

/// Momenta in `(0, pi)` where `|Z(q)| = 1` for an XY quench, found by a scan
/// over `samples` points followed by bisection.
pub fn xy_unit_modulus_momenta(
    gamma_i: f64,
    h_i: f64,
    gamma_f: f64,
    h_f: f64,
    samples: usize,
) -> Result<Vec<f64>> {
    let f = |q: f64| -> Result<f64> {
        match xy_excitation_amplitude(q, gamma_i, h_i, gamma_f, h_f) {
            Ok(z) => Ok(z.norm().ln()),
            // orthogonal modes have |Z| = infinity
            Err(Error::OrthogonalMode { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let grid: Vec<f64> = (1..samples).map(|i| PI * i as f64 / samples as f64).collect();
    let mut out = Vec::new();
    let mut prev = (grid[0], f(grid[0])?);
    for &q in &grid[1..] {
        let cur = (q, f(q)?);
        if prev.1.signum() != cur.1.signum() {
            let (mut lo, mut hi) = (prev.0, cur.0);
            let lo_sign = prev.1.signum();
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if f(mid)?.signum() == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        prev = cur;
    }
    Ok(out)
}

impl TwoBandQuench {
    /// Nearest-neighbour Ising quench `h_i -> h_f` on `sites` sites.
    pub fn ising(sites: usize, h_i: f64, h_f: f64) -> Result<Self> {
        Self::build(sites, TwoBandModel::IsingNn { h_i, h_f })
    }

    pub fn xy(sites: usize, gamma_i: f64, h_i: f64, gamma_f: f64, h_f: f64) -> Result<Self> {
        Self::build(
            sites,
            TwoBandModel::Xy {
                gamma_i,
                h_i,
                gamma_f,
                h_f,
            },
        )
    }

    pub fn build(sites: usize, model: TwoBandModel) -> Result<Self> {
        if sites < 2 || sites % 2 != 0 {
            return Err(Error::InvalidSpec(format!("N = {sites} must be even and positive")));
        }
        let modes = allowed_momenta(sites)
            .into_iter()
            .map(|q| mode(q, &model))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sites,
            model,
            modes,
        })
    }

    /// All `2^(N/2)` pair configurations with energies relative to the final
    /// ground state and populations `prod |Z|^2`, normalized. No population
    /// floor is applied: the distribution is exact.
    pub fn bcs_populations(&self) -> Result<EnergyDistribution> {
        let m = self.modes.len();
        if m > PAIR_CAP {
            return Err(Error::SizeCap { n: m, cap: PAIR_CAP });
        }
        let logs: Vec<f64> = self.modes.iter().map(|md| 2.0 * md.abs_z().ln()).collect();
        let levels = (0..1usize << m).map(|mask| {
            let mut e = 0.0;
            let mut lw = 0.0;
            for (k, md) in self.modes.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    e += md.pair_energy;
                    lw += logs[k];
                }
            }
            (e, lw)
        });
        EnergyDistribution::builder()
            .log_levels(levels)
            .population_floor(0.0)
            .build()
    }

    /// Modes with `Z != 0`, by decreasing `W` (ties by increasing `q`).
    pub fn w_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.modes.len())
            .filter(|&k| self.modes[k].abs_z() > 0.0)
            .collect();
        order.sort_by(|&a, &b| {
            self.modes[b]
                .w
                .total_cmp(&self.modes[a].w)
                .then(self.modes[a].q.total_cmp(&self.modes[b].q))
        });
        order
    }

    /// Envelope of `dist` (which must be [`Self::bcs_populations`]) built from
    /// nested pair configurations, adding pairs in decreasing `W`.
    pub fn bcs_envelope(&self, dist: &EnergyDistribution) -> Envelope {
        let energies = dist.energies();
        let nearest = |e: f64| {
            let i = energies.partition_point(|&x| x < e);
            [i.saturating_sub(1), i.min(energies.len() - 1)]
                .into_iter()
                .min_by(|&a, &b| (energies[a] - e).abs().total_cmp(&(energies[b] - e).abs()))
                .expect("non-empty")
        };
        let mut members = vec![nearest(0.0)];
        let mut e = 0.0;
        for k in self.w_order() {
            e += self.modes[k].pair_energy;
            members.push(nearest(e));
        }
        Envelope::from_members(dist, &members)
    }

    /// Closed-form zeros `z = (2 ln|Z| + 2 pi i (n + 1/2)) / E_pair` of every
    /// mode with `Z != 0`; the chain id is the mode index.
    pub fn bcs_zeros(&self, n_range: RangeInclusive<i64>) -> ZeroSet {
        let mut zeros = Vec::new();
        for (k, md) in self.modes.iter().enumerate() {
            if md.abs_z() == 0.0 {
                continue;
            }
            for n in n_range.clone() {
                zeros.push(Zero::with_chain(mode_zero(md, n), Provenance::Analytic, k as i64));
            }
        }
        ZeroSet::new(zeros)
    }

    /// [`Self::bcs_zeros`] restricted to `rect`.
    pub fn bcs_zeros_in(&self, rect: &Rect) -> ZeroSet {
        let mut zeros = Vec::new();
        for (k, md) in self.modes.iter().enumerate() {
            if md.abs_z() == 0.0 {
                continue;
            }
            let period = TAU / md.pair_energy;
            let n_lo = (rect.t_min / period - 0.5).ceil() as i64;
            let n_hi = (rect.t_max / period - 0.5).floor() as i64;
            for n in n_lo..=n_hi {
                let z = mode_zero(md, n);
                if rect.contains(z) {
                    zeros.push(Zero::with_chain(z, Provenance::Analytic, k as i64));
                }
            }
        }
        ZeroSet::new(zeros)
    }

    /// Product over modes of `(1 + |Z|^2 e^{-E_pair z}) / (1 + |Z|^2)`.
    pub fn factorized_amplitude(&self, z: ComplexTime) -> AmplitudeValue {
        let mut log_modulus = 0.0;
        let mut phase = 0.0;
        for md in &self.modes {
            let a = md.abs_z();
            if a == 0.0 {
                continue;
            }
            let lz2 = 2.0 * a.ln();
            let b = lz2 - md.pair_energy * z.beta;
            let m = b.max(0.0);
            let term = Complex64::from_polar((b - m).exp(), -md.pair_energy * z.t);
            let s = Complex64::new((-m).exp(), 0.0) + term;
            let norm = if lz2 > 0.0 {
                lz2 + (-lz2).exp().ln_1p()
            } else {
                lz2.exp().ln_1p()
            };
            log_modulus += m + s.norm().ln() - norm;
            phase += s.arg();
        }
        AmplitudeValue::new(log_modulus, phase)
    }

    /// Modes whose `|Z|` is within `tol` of one.
    pub fn unit_modulus_modes(&self, tol: f64) -> Vec<usize> {
        (0..self.modes.len())
            .filter(|&k| (self.modes[k].abs_z() - 1.0).abs() <= tol)
            .collect()
    }

    pub fn write_modes_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["q", "eps_i", "eps_f", "abs_z", "w"])?;
        for md in &self.modes {
            w.write_record([
                md.q.to_string(),
                md.eps_i.to_string(),
                md.eps_f.to_string(),
                md.abs_z().to_string(),
                md.w.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl SurvivalAmplitude for TwoBandQuench {
    fn amplitude(&self, z: ComplexTime) -> AmplitudeValue {
        self.factorized_amplitude(z)
    }

    fn max_frequency(&self) -> Option<f64> {
        Some(self.modes.iter().map(|m| m.pair_energy.abs()).sum())
    }
}

fn mode_zero(md: &ModeData, n: i64) -> ComplexTime {
    ComplexTime::new(
        2.0 * md.abs_z().ln() / md.pair_energy,
        TAU * (n as f64 + 0.5) / md.pair_energy,
    )
}

fn mode(q: f64, model: &TwoBandModel) -> Result<ModeData> {
    let (eps_i, eps_f, (u_i, v_i), (u_f, v_f), z, pair_energy) = match *model {
        TwoBandModel::IsingNn { h_i, h_f } => {
            let eps_f = ising_dispersion(q, h_f);
            (
                ising_dispersion(q, h_i),
                eps_f,
                bogoliubov(q, h_i)?,
                bogoliubov(q, h_f)?,
                excitation_amplitude(q, h_i, h_f)?,
                eps_f / 4.0,
            )
        }
        TwoBandModel::Xy {
            gamma_i,
            h_i,
            gamma_f,
            h_f,
        } => {
            let eps_f = xy_dispersion(q, gamma_f, h_f);
            (
                xy_dispersion(q, gamma_i, h_i),
                eps_f,
                xy_bogoliubov(q, gamma_i, h_i)?,
                xy_bogoliubov(q, gamma_f, h_f)?,
                xy_excitation_amplitude(q, gamma_i, h_i, gamma_f, h_f)?,
                2.0 * eps_f,
            )
        }
    };
    Ok(ModeData {
        q,
        eps_i,
        eps_f,
        u_i,
        v_i,
        u_f,
        v_f,
        z,
        w: z.norm().ln() / eps_f,
        pair_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::compute_envelope;
    use proptest::prelude::*;

    #[test]
    fn dispersion_values() {
        assert!(ising_dispersion(0.0, 0.25) < 1e-15);
        let h = 0.3f64;
        assert!((ising_dispersion(PI / 2.0, h) - (16.0 * h * h + 1.0).sqrt()).abs() < 1e-14);
        assert!((ising_dispersion(PI, 0.5) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn coefficient_limits() {
        let (u, v) = bogoliubov(PI, 0.3).unwrap();
        assert!((u.re - 1.0).abs() < 1e-15 && v.norm() < 1e-15);
        let (u, v) = bogoliubov(1.0, 1e8).unwrap();
        assert!((u.re - 1.0).abs() < 1e-8 && v.norm() < 1e-8);
        assert!(matches!(bogoliubov(0.0, 0.25), Err(Error::GaplessMode { .. })));
    }

    #[test]
    fn coefficients_match_angle_form() {
        for &(q, h) in &[(0.3, 0.1), (2.0, 0.7), (1.2, -0.4), (3.0, 0.05)] {
            let (u, v) = bogoliubov(q, h).unwrap();
            let theta = 0.5 * q.sin().atan2(4.0 * h - q.cos());
            assert!((u.re - theta.cos()).abs() < 1e-14);
            assert!((v.im - theta.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_quench_has_no_pairs() {
        let tb = TwoBandQuench::ising(10, 0.3, 0.3).unwrap();
        assert!(tb.modes.iter().all(|m| m.abs_z() < 1e-15));
        for t in [0.5, 3.0, 40.0] {
            let v = tb.factorized_amplitude(ComplexTime::new(0.0, t));
            assert!(v.log_modulus.abs() < 1e-14);
        }
    }

    #[test]
    fn short_and_long_quench_amplitudes() {
        let short = TwoBandQuench::ising(10, 0.1, 0.2).unwrap();
        assert!(short.modes.iter().all(|m| m.abs_z() < 1.0));
        let long = TwoBandQuench::ising(10, 0.1, 0.5).unwrap();
        let above: Vec<bool> = long.modes.iter().map(|m| m.abs_z() > 1.0).collect();
        assert!(above.windows(2).any(|w| w[0] != w[1]), "{above:?}");
    }

    #[test]
    fn populations_of_small_chain() {
        let tb = TwoBandQuench::ising(10, 0.1, 0.5).unwrap();
        let d = tb.bcs_populations().unwrap();
        assert_eq!(d.len(), 32);
        assert_eq!(d.energy(0), 0.0);
        let total: f64 = d.populations().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);

        let short = TwoBandQuench::ising(10, 0.1, 0.2).unwrap();
        let d = short.bcs_populations().unwrap();
        let top = d
            .populations()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(top, 0);
    }

    #[test]
    fn envelope_theorem_small_chains() {
        for &(n, hi, hf) in &[(10, 0.1, 0.5), (10, 0.1, 0.2), (12, 0.4, 0.05), (8, 0.2, 1.0)] {
            let tb = TwoBandQuench::ising(n, hi, hf).unwrap();
            let d = tb.bcs_populations().unwrap();
            let nested = tb.bcs_envelope(&d);
            let hull = compute_envelope(&d);
            assert_eq!(nested.member_indices(), hull.member_indices(), "N={n} {hi}->{hf}");
        }
    }

    #[test]
    fn short_quench_zeros_in_left_half_plane() {
        let tb = TwoBandQuench::ising(10, 0.1, 0.2).unwrap();
        let d = tb.bcs_populations().unwrap();
        let env = tb.bcs_envelope(&d);
        assert!(env.chains.iter().all(|c| c.beta() < 0.0));
        let long = TwoBandQuench::ising(10, 0.1, 0.5).unwrap();
        let env = long.bcs_envelope(&long.bcs_populations().unwrap());
        assert!(env.chains.iter().any(|c| c.beta() > 0.0));
    }

    #[test]
    fn unit_modulus_mode_zeros_on_axis() {
        let md = ModeData {
            q: 1.0,
            eps_i: 1.0,
            eps_f: 2.0,
            u_i: Complex64::new(1.0, 0.0),
            v_i: Complex64::new(0.0, 0.0),
            u_f: Complex64::new(1.0, 0.0),
            v_f: Complex64::new(0.0, 0.0),
            z: Complex64::new(0.0, 1.0),
            w: 0.0,
            pair_energy: 4.0,
        };
        let z = mode_zero(&md, 2);
        assert_eq!(z.beta, 0.0);
        assert!((z.t - PI * 2.5 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn xy_two_unit_crossings() {
        let qs = xy_unit_modulus_momenta(1.5, 0.5, -1.5, -0.5, 4000).unwrap();
        assert_eq!(qs.len(), 2, "{qs:?}");
        // |Z| = 1 where s_i s_f + b_i b_f = 0, i.e. cos^2 q = 2.5 / 3.25
        let c = (2.5f64 / 3.25).sqrt();
        assert!((qs[0].cos() - c).abs() < 1e-9);
        assert!((qs[1].cos() + c).abs() < 1e-9);
    }

    #[test]
    fn xy_reduces_to_ising() {
        for q in [0.2, 1.1, 2.9] {
            let h = 0.17;
            assert!((xy_dispersion(q, 1.0, 4.0 * h) - 2.0 * ising_dispersion(q, h)).abs() < 1e-14);
            let zi = excitation_amplitude(q, 0.1, 0.5).unwrap();
            let zx = xy_excitation_amplitude(q, 1.0, 0.4, 1.0, 2.0).unwrap();
            assert!((zi - zx).norm() < 1e-13);
        }
    }

    #[test]
    fn modes_csv_header() {
        let tb = TwoBandQuench::ising(4, 0.1, 0.3).unwrap();
        let mut buf = Vec::new();
        tb.write_modes_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("q,eps_i,eps_f,abs_z,w\n"));
        assert_eq!(s.lines().count(), 3);
    }

    proptest! {
        #[test]
        fn normalization(q in -PI..PI, h in -2.0f64..2.0, gamma in -2.0f64..2.0) {
            if let Ok((u, v)) = bogoliubov(q, h) {
                prop_assert!((u.norm_sqr() + v.norm_sqr() - 1.0).abs() < 1e-14);
            }
            if let Ok((u, v)) = xy_bogoliubov(q, gamma, h) {
                prop_assert!((u.norm_sqr() + v.norm_sqr() - 1.0).abs() < 1e-14);
            }
        }

        #[test]
        fn factorization_identity(
            half in 1usize..7,
            hi in 0.0f64..1.0,
            hf in 0.0f64..1.0,
            beta in -3.0f64..3.0,
            t in 0.0f64..60.0,
        ) {
            let tb = match TwoBandQuench::ising(2 * half, hi, hf) {
                Ok(tb) => tb,
                Err(_) => return Ok(()),
            };
            let d = tb.bcs_populations().unwrap();
            let z = ComplexTime::new(beta, t);
            let a = tb.factorized_amplitude(z);
            let b = d.evaluate(z);
            // compare relative to the scale L(beta)
            let scale = d.log_partition(beta);
            let diff = (a.to_complex() * (-scale).exp() - b.to_complex() * (-scale).exp()).norm();
            prop_assert!(diff < 1e-10, "{diff}");
        }

        #[test]
        fn w_ordering_gives_hull(half in 2usize..7, hi in 0.0f64..1.0, hf in 0.0f64..1.0) {
            let tb = match TwoBandQuench::ising(2 * half, hi, hf) {
                Ok(tb) => tb,
                Err(_) => return Ok(()),
            };
            prop_assume!(tb.modes.iter().all(|m| m.abs_z() > 1e-6));
            let d = tb.bcs_populations().unwrap();
            prop_assume!(d.len() == 1 << half);
            let ws: Vec<f64> = tb.w_order().iter().map(|&k| tb.modes[k].w).collect();
            prop_assume!(ws.windows(2).all(|w| w[0] - w[1] > 1e-6));
            let nested = tb.bcs_envelope(&d);
            prop_assert_eq!(nested.member_indices(), compute_envelope(&d).member_indices());
        }
    }
}
