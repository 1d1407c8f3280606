use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use super::CsrMatrix;
use crate::{Error, Result};

/// Dense solution of `K phi = lambda M phi` with `M` SPD.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Columns are `M`-orthonormal eigenvectors matching `values`.
    pub vectors: DMatrix<f64>,
}

/// Reduce to the standard problem with the Cholesky factor of `M` and call
/// the symmetric QR eigensolver.
pub fn generalized_symmetric_eigen(k: &CsrMatrix, m: &CsrMatrix) -> Result<GeneralizedEigen> {
    let n = k.nrows();
    let kd = k.to_dense();
    let md = m.to_dense();
    let chol = Cholesky::new(md).ok_or_else(|| Error::Solver("mass matrix not SPD".into()))?;
    let l = chol.l();
    // C = L^{-1} K L^{-T}
    let linv_k = l
        .solve_lower_triangular(&kd)
        .ok_or_else(|| Error::Solver("triangular solve failed".into()))?;
    let c = l
        .solve_lower_triangular(&linv_k.transpose())
        .ok_or_else(|| Error::Solver("triangular solve failed".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut v = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        v.set_column(col, &eig.eigenvectors.column(i));
    }
    let vectors = l
        .transpose()
        .solve_upper_triangular(&v)
        .ok_or_else(|| Error::Solver("triangular solve failed".into()))?;
    Ok(GeneralizedEigen { values, vectors })
}
