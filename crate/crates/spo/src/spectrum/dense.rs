//! Direct full-spectrum routes: QL on the tridiagonal matrix for d = 1 and
//! a dense symmetric eigensolver for d ≥ 2 (node count ≤ 2000). These back
//! the brute-force oracle and the small-problem fallback of the iterative
//! path.

use crate::domain::DiscreteHamiltonian;
use crate::error::{Error, Result};
use crate::spectrum::tridiag;

/// Largest node count accepted by the dense routines.
pub const DENSE_LIMIT: usize = 2000;

/// Materialize H as a dense matrix (small problems only).
pub fn dense_matrix(h: &DiscreteHamiltonian) -> Result<nalgebra::DMatrix<f64>> {
    let n = h.size();
    if n > DENSE_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "dense route limited to {DENSE_LIMIT} nodes, got {n}"
        )));
    }
    let dom = h.domain();
    let npa = dom.points_per_axis();
    let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = h.diag()[i];
        let ai = dom.axis_indices(i);
        let mut stride = 1usize;
        for axis in 0..dom.dimension() {
            if ai[axis] + 1 < npa {
                m[(i, i + stride)] = h.off_diagonal();
                m[(i + stride, i)] = h.off_diagonal();
            }
            stride *= npa;
        }
    }
    Ok(m)
}

/// All eigenvalues, ascending. d = 1 uses the implicit-shift QL route on
/// the tridiagonal data (any size); d ≥ 2 uses the dense solver.
pub fn all_eigenvalues(h: &DiscreteHamiltonian) -> Result<Vec<f64>> {
    if h.domain().dimension() == 1 {
        let off = vec![h.off_diagonal(); h.size() - 1];
        return tridiag::ql_eigenvalues(h.diag(), &off);
    }
    let m = dense_matrix(h)?;
    let mut eigs: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(eigs)
}

/// Eigenvalues below `tau`, ascending (direct route).
pub fn negative_eigenvalues(h: &DiscreteHamiltonian, tau: f64) -> Result<Vec<f64>> {
    Ok(all_eigenvalues(h)?
        .into_iter()
        .filter(|&l| l < tau)
        .collect())
}

/// Eigenpairs below `tau` with coefficient-normalized vectors, via the
/// dense symmetric eigendecomposition.
pub fn negative_eigenpairs(
    h: &DiscreteHamiltonian,
    tau: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let m = dense_matrix(h)?;
    let eig = nalgebra::SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..h.size()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let mut vals = Vec::new();
    let mut vecs = Vec::new();
    for &i in &order {
        let lam = eig.eigenvalues[i];
        if lam < tau {
            vals.push(lam);
            vecs.push(eig.eigenvectors.column(i).iter().copied().collect());
        }
    }
    Ok((vals, vecs))
}
