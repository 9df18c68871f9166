use nalgebra::DMatrix;

use super::{IsingSpec, Sector, FULLY_CONNECTED_CAP};
use crate::error::{Error, Result};

/// Coupling part `H0` and field operator `V` (so `H = H0 + h V`) of the fully
/// connected model in the Dicke basis `|S = N/2, M>`, `M = -S..S`, in the
/// units of `spec`.
pub(crate) fn dicke_parts(spec: &IsingSpec) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    spec.validate()?;
    if !spec.is_fully_connected() {
        return Err(Error::InvalidSpec("fully connected builder needs alpha = 0".into()));
    }
    if spec.sites > FULLY_CONNECTED_CAP {
        return Err(Error::SizeCap {
            n: spec.sites,
            cap: FULLY_CONNECTED_CAP,
        });
    }
    let n = spec.sites as f64;
    let dim = spec.sites + 1;
    let s = n / 2.0;
    let u = spec.unit_scale();
    let mut h0 = DMatrix::zeros(dim, dim);
    let mut v = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let m = i as f64 - s;
        // sum_{i != j} S^z_i S^z_j = M^2 - N/4, Kac normalization N
        h0[(i, i)] = -(m * m - n / 4.0) / n * u;
        if i + 1 < dim {
            let x = 0.5 * (s * (s + 1.0) - m * (m + 1.0)).sqrt() * u;
            v[(i, i + 1)] = x;
            v[(i + 1, i)] = x;
        }
    }
    Ok((h0, v))
}

/// Isometry from the spin-flip sector to the Dicke basis. The flip maps
/// `|M>` to `|-M>`, so the even sector is spanned by `|M> + |-M>`.
pub(crate) fn dicke_sector_basis(sites: usize, sector: Sector) -> DMatrix<f64> {
    let dim = sites + 1;
    if sector == Sector::Full {
        return DMatrix::identity(dim, dim);
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if sector == Sector::EvenParity { 1.0 } else { -1.0 };
    let mut cols: Vec<Vec<(usize, f64)>> = (0..dim / 2)
        .map(|i| vec![(i, r), (dim - 1 - i, sign * r)])
        .collect();
    if dim % 2 == 1 && sector == Sector::EvenParity {
        cols.push(vec![(dim / 2, 1.0)]);
    }
    let mut p = DMatrix::zeros(dim, cols.len());
    for (c, entries) in cols.iter().enumerate() {
        for &(row, x) in entries {
            p[(row, c)] = x;
        }
    }
    p
}

/// The fully connected Hamiltonian restricted to `spec.sector`.
pub fn build_fully_connected(spec: &IsingSpec) -> Result<DMatrix<f64>> {
    let (h0, v) = dicke_parts(spec)?;
    let h = h0 + v * spec.field;
    let p = dicke_sector_basis(spec.sites, spec.sector);
    Ok(project(&h, &p))
}

pub(crate) fn project(h: &DMatrix<f64>, p: &DMatrix<f64>) -> DMatrix<f64> {
    let m = p.transpose() * h * p;
    // exact symmetry despite rounding in the products
    (&m + m.transpose()) * 0.5
}
