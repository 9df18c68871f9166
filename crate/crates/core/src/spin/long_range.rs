use nalgebra::DMatrix;

use super::{kac_norm, IsingSpec, Sector};
use crate::error::{Error, Result};

/// Largest chain accepted by the computational-basis builders.
pub const LONG_RANGE_CAP: usize = 14;

/// Diagonal coupling energies and field strength per flip, extensive units
/// before `unit_scale`.
struct Chain {
    sites: usize,
    diag: Vec<f64>,
    scale: f64,
}

impl Chain {
    fn new(spec: &IsingSpec) -> Result<Self> {
        spec.validate()?;
        if spec.sites > LONG_RANGE_CAP {
            return Err(Error::SizeCap {
                n: spec.sites,
                cap: LONG_RANGE_CAP,
            });
        }
        let n = spec.sites;
        let kac = kac_norm(n, spec.alpha);
        let mut coupling = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = i.abs_diff(j).min(n - i.abs_diff(j)) as f64;
                    coupling[i * n + j] = if spec.alpha == 0.0 {
                        1.0
                    } else {
                        1.0 / d.powf(spec.alpha)
                    };
                }
            }
        }
        let diag = (0..1usize << n)
            .map(|s| {
                let sz = |i: usize| if s >> i & 1 == 1 { 0.5 } else { -0.5 };
                let mut e = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        e += coupling[i * n + j] * sz(i) * sz(j);
                    }
                }
                -e / kac
            })
            .collect();
        Ok(Self {
            sites: n,
            diag,
            scale: spec.unit_scale(),
        })
    }
}

/// A sector basis: each column is `sum_k c_k |s_k>` over computational states.
pub(crate) struct StateBasis {
    pub columns: Vec<Vec<(usize, f64)>>,
    /// Column index of every computational state, if it appears in one.
    pub column_of: Vec<Option<usize>>,
}

impl StateBasis {
    fn parity(sites: usize, sector: Sector) -> Self {
        let dim = 1usize << sites;
        let mask = dim - 1;
        let mut column_of = vec![None; dim];
        let columns: Vec<Vec<(usize, f64)>> = match sector {
            Sector::Full => (0..dim).map(|s| vec![(s, 1.0)]).collect(),
            _ => {
                let sign = if sector == Sector::EvenParity { 1.0 } else { -1.0 };
                let r = std::f64::consts::FRAC_1_SQRT_2;
                (0..dim / 2).map(|s| vec![(s, r), (s ^ mask, sign * r)]).collect()
            }
        };
        for (c, col) in columns.iter().enumerate() {
            for &(s, _) in col {
                column_of[s] = Some(c);
            }
        }
        Self { columns, column_of }
    }

    /// Uniform superpositions over orbits of translations and the global flip:
    /// the zero-momentum, flip-even subspace.
    fn symmetric(sites: usize) -> Self {
        let dim = 1usize << sites;
        let mask = dim - 1;
        let rotate = |s: usize| ((s << 1) | (s >> (sites - 1))) & mask;
        let mut column_of = vec![None; dim];
        let mut columns = Vec::new();
        for s in 0..dim {
            if column_of[s].is_some() {
                continue;
            }
            let c = columns.len();
            let mut orbit = Vec::new();
            let mut x = s;
            for _ in 0..sites {
                for y in [x, x ^ mask] {
                    if column_of[y].is_none() {
                        column_of[y] = Some(c);
                        orbit.push(y);
                    }
                }
                x = rotate(x);
            }
            let w = 1.0 / (orbit.len() as f64).sqrt();
            columns.push(orbit.into_iter().map(|y| (y, w)).collect());
        }
        Self { columns, column_of }
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// `B^T A B` for an operator given by its action on a computational state.
    fn project(&self, apply: impl Fn(usize, &mut Vec<(usize, f64)>)) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        let mut out = Vec::new();
        for (b, col) in self.columns.iter().enumerate() {
            for &(s, cb) in col {
                out.clear();
                apply(s, &mut out);
                for &(s2, x) in &out {
                    if let Some(a) = self.column_of[s2] {
                        let ca = self.columns[a]
                            .iter()
                            .find(|e| e.0 == s2)
                            .map_or(0.0, |e| e.1);
                        m[(a, b)] += ca * x * cb;
                    }
                }
            }
        }
        (&m + m.transpose()) * 0.5
    }
}

/// Coupling part and field operator of the chain in the given basis.
fn parts(spec: &IsingSpec, basis: &StateBasis) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let chain = Chain::new(spec)?;
    let u = chain.scale;
    let h0 = basis.project(|s, out| out.push((s, chain.diag[s] * u)));
    let v = basis.project(|s, out| {
        for i in 0..chain.sites {
            out.push((s ^ (1 << i), 0.5 * u));
        }
    });
    Ok((h0, v))
}

pub(crate) fn parity_parts(spec: &IsingSpec) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    parts(spec, &StateBasis::parity(spec.sites, spec.sector))
}

pub(crate) fn symmetric_parts(spec: &IsingSpec) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    parts(spec, &StateBasis::symmetric(spec.sites))
}

/// Computational-basis Hamiltonian restricted to `spec.sector`: a spin-flip
/// parity block of dimension `2^(N-1)`, or the whole `2^N` space for
/// [`Sector::Full`].
pub fn build_long_range(spec: &IsingSpec) -> Result<DMatrix<f64>> {
    let (h0, v) = parity_parts(spec)?;
    Ok(h0 + v * spec.field)
}

/// Hamiltonian on the translation-invariant, flip-even subspace, which holds
/// the ground state for even `N`.
pub fn build_long_range_symmetric(spec: &IsingSpec) -> Result<DMatrix<f64>> {
    let (h0, v) = symmetric_parts(spec)?;
    Ok(h0 + v * spec.field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{build_fully_connected, diagonalize, Units};

    fn eigs(m: &DMatrix<f64>) -> Vec<f64> {
        diagonalize(m, None).values
    }

    #[test]
    fn two_sites_by_hand() {
        // -S^z_0 S^z_1 + h (S^x_0 + S^x_1): singlet 1/4, odd triplet -1/4,
        // even triplet +-sqrt(1/16 + h^2)
        let h = 0.7f64;
        for alpha in [0.5, 3.0, f64::INFINITY] {
            let spec = IsingSpec::long_range(2, h, alpha).with_sector(Sector::Full);
            let e = eigs(&build_long_range(&spec).unwrap());
            let r = (1.0 / 16.0 + h * h).sqrt();
            let expect = [-r, -0.25, 0.25, r];
            for (a, b) in e.iter().zip(expect) {
                assert!((a - b).abs() < 1e-14, "{e:?}");
            }
        }
    }

    #[test]
    fn zero_field_gives_classical_energies() {
        let spec = IsingSpec::nearest_neighbour(6, 0.0).with_sector(Sector::Full);
        let h = build_long_range(&spec).unwrap();
        assert_eq!(&h - DMatrix::from_diagonal(&h.diagonal()), DMatrix::zeros(h.nrows(), h.ncols()));
        // all up: -(1/2) * 2 * 6 bonds * 1/4
        assert!((h[(63, 63)] + 1.5).abs() < 1e-15);
        // Neel: every bond antialigned
        assert!((h[(0b010101, 0b010101)] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn parity_blocks_partition_spectrum() {
        let spec = IsingSpec::long_range(6, 0.45, 1.3);
        let full = eigs(&build_long_range(&spec.with_sector(Sector::Full)).unwrap());
        let mut parts = eigs(&build_long_range(&spec).unwrap());
        parts.extend(eigs(&build_long_range(&spec.with_sector(Sector::OddParity)).unwrap()));
        parts.sort_by(f64::total_cmp);
        for (a, b) in full.iter().zip(&parts) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn even_odd_decoupled() {
        let spec = IsingSpec::long_range(5, 0.9, 2.0).with_sector(Sector::Full);
        let h = build_long_range(&spec).unwrap();
        assert_eq!(h, h.transpose());
        let mask = 31;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for a in 0..16usize {
            for b in 0..16usize {
                let x = r * r
                    * (h[(a, b)] - h[(a, b ^ mask)] + h[(a ^ mask, b)] - h[(a ^ mask, b ^ mask)]);
                assert!(x.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn symmetric_subspace_holds_ground_state() {
        for alpha in [0.0, 1.5, f64::INFINITY] {
            let spec = IsingSpec::long_range(8, 0.3, alpha).with_units(Units::Extensive);
            let block = eigs(&build_long_range(&spec).unwrap());
            let sym = eigs(&build_long_range_symmetric(&spec).unwrap());
            assert!((block[0] - sym[0]).abs() < 1e-12);
            // every symmetric level is a level of the block
            for e in &sym {
                assert!(block.iter().any(|b| (b - e).abs() < 1e-9));
            }
        }
    }

    #[test]
    fn alpha_zero_matches_collective_basis() {
        // the fully symmetric multiplet carries the whole low-energy spectrum
        let n = 6;
        let spec = IsingSpec::long_range(n, 0.6, 0.0).with_units(Units::Extensive);
        let fc = eigs(&build_fully_connected(&spec).unwrap());
        let lr = eigs(&build_long_range(&spec).unwrap());
        assert!((fc[0] - lr[0]).abs() < 1e-12);
    }

    #[test]
    fn size_cap() {
        let spec = IsingSpec::long_range(15, 0.3, 1.0);
        assert!(matches!(build_long_range(&spec), Err(Error::SizeCap { .. })));
    }
}
