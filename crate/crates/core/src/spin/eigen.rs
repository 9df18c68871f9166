use nalgebra::{DMatrix, SymmetricEigen};

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending, eigenvectors
/// in the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.values));
        &self.vectors * d * self.vectors.transpose()
    }
}

/// Dense symmetric eigendecomposition.
///
/// Within clusters of eigenvalues closer than `1e-10` (relative to the
/// spectral scale) the basis is not unique; when `tie_breaker` is given the
/// cluster is rotated to diagonalize it and ordered by its expectation value,
/// so results do not depend on solver internals.
pub fn diagonalize(h: &DMatrix<f64>, tie_breaker: Option<&DMatrix<f64>>) -> Spectrum {
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(h.nrows(), h.ncols());
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }

    if let Some(v) = tie_breaker {
        let scale = values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let mut start = 0;
        while start < values.len() {
            let mut end = start + 1;
            while end < values.len() && values[end] - values[end - 1] < 1e-10 * scale {
                end += 1;
            }
            if end - start > 1 {
                let block = vectors.columns(start, end - start).into_owned();
                let projected = block.transpose() * v * &block;
                let sub = SymmetricEigen::new(projected);
                let mut sub_order: Vec<usize> = (0..end - start).collect();
                sub_order.sort_by(|&a, &b| sub.eigenvalues[a].total_cmp(&sub.eigenvalues[b]));
                let rotated = &block * &sub.eigenvectors;
                for (k, &i) in sub_order.iter().enumerate() {
                    vectors.set_column(start + k, &rotated.column(i));
                }
            }
            start = end;
        }
    }
    Spectrum { values, vectors }
}
