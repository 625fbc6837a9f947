//! Symmetric banded factorizations for the d ≥ 2 stencil operators:
//! LDLᵀ inertia counts (spectrum slicing) and Cholesky solves backing the
//! shift-invert iteration.

use crate::domain::DiscreteHamiltonian;
use crate::error::{Error, Result};

/// Cap on factor storage, (bandwidth+1) × n entries.
const MAX_FACTOR_ENTRIES: usize = 64_000_000;

/// Lower-triangle banded storage: `cols[j * (bw + 1) + r]` holds A[j+r, j]
/// for r = 0..=bw.
pub struct BandedSym {
    n: usize,
    bw: usize,
    cols: Vec<f64>,
}

impl BandedSym {
    /// A = H − shift·I in banded form. The bandwidth is the largest axis
    /// stride n^(d−1).
    pub fn from_hamiltonian(h: &DiscreteHamiltonian, shift: f64) -> Result<Self> {
        let dom = h.domain();
        let n = h.size();
        let bw = dom.stride(dom.dimension() - 1);
        let entries = n
            .checked_mul(bw + 1)
            .filter(|&e| e <= MAX_FACTOR_ENTRIES)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "banded factorization of size {n} bandwidth {bw} exceeds memory budget"
                ))
            })?;
        let mut cols = vec![0.0; entries];
        let npa = dom.points_per_axis();
        for j in 0..n {
            cols[j * (bw + 1)] = h.diag()[j] - shift;
            let ai = dom.axis_indices(j);
            let mut stride = 1usize;
            for axis in 0..dom.dimension() {
                if ai[axis] + 1 < npa {
                    cols[j * (bw + 1) + stride] = h.off_diagonal();
                }
                stride *= npa;
            }
        }
        Ok(Self { n, bw, cols })
    }
}

/// Inertia of H − θI via in-place banded LDLᵀ without pivoting: returns the
/// number of negative pivots, i.e. the number of eigenvalues strictly below
/// θ. A vanishing pivot signals that θ (or a leading-submatrix eigenvalue)
/// was hit; callers retry with relative jitter.
pub fn ldlt_inertia(a: &BandedSym, shift_for_error: f64) -> Result<usize> {
    let n = a.n;
    let bw = a.bw;
    let w = bw + 1;
    let mut f = a.cols.clone();
    // scale for breakdown detection
    let scale = (0..n)
        .map(|j| f[j * w].abs())
        .fold(1.0f64, f64::max);
    let mut negatives = 0usize;
    for j in 0..n {
        let start = j.saturating_sub(bw);
        let mut dj = f[j * w];
        for k in start..j {
            let l_jk = f[k * w + (j - k)];
            dj -= l_jk * l_jk * f[k * w];
        }
        if dj.abs() <= 1e-300 * scale.max(1.0) || dj == 0.0 {
            return Err(Error::ShiftHitsSpectrum {
                shift: shift_for_error,
            });
        }
        f[j * w] = dj;
        if dj < 0.0 {
            negatives += 1;
        }
        let imax = (j + bw).min(n - 1);
        for i in (j + 1)..=imax {
            let mut aij = f[j * w + (i - j)];
            let kstart = start.max(i.saturating_sub(bw));
            for k in kstart..j {
                aij -= f[k * w + (i - k)] * f[k * w + (j - k)] * f[k * w];
            }
            f[j * w + (i - j)] = aij / dj;
        }
    }
    Ok(negatives)
}

/// Banded Cholesky factor of a symmetric positive definite matrix.
pub struct BandedChol {
    n: usize,
    bw: usize,
    cols: Vec<f64>,
}

impl BandedChol {
    pub fn factor(a: &BandedSym) -> Result<Self> {
        let n = a.n;
        let bw = a.bw;
        let w = bw + 1;
        let mut f = a.cols.clone();
        for j in 0..n {
            let start = j.saturating_sub(bw);
            let mut dj = f[j * w];
            for k in start..j {
                let l_jk = f[k * w + (j - k)];
                dj -= l_jk * l_jk;
            }
            if dj <= 0.0 {
                return Err(Error::NoConvergence(format!(
                    "matrix not positive definite at column {j} (pivot {dj})"
                )));
            }
            let root = dj.sqrt();
            f[j * w] = root;
            let imax = (j + bw).min(n - 1);
            for i in (j + 1)..=imax {
                let mut aij = f[j * w + (i - j)];
                let kstart = start.max(i.saturating_sub(bw));
                for k in kstart..j {
                    aij -= f[k * w + (i - k)] * f[k * w + (j - k)];
                }
                f[j * w + (i - j)] = aij / root;
            }
        }
        Ok(Self { n, bw, cols: f })
    }

    /// Solve L Lᵀ x = b in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let bw = self.bw;
        let w = bw + 1;
        // forward: L y = b
        for j in 0..n {
            let yj = b[j] / self.cols[j * w];
            b[j] = yj;
            let imax = (j + bw).min(n - 1);
            for i in (j + 1)..=imax {
                b[i] -= self.cols[j * w + (i - j)] * yj;
            }
        }
        // backward: Lᵀ x = y
        for j in (0..n).rev() {
            let imax = (j + bw).min(n - 1);
            let mut xj = b[j];
            for i in (j + 1)..=imax {
                xj -= self.cols[j * w + (i - j)] * b[i];
            }
            b[j] = xj / self.cols[j * w];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, build_hamiltonian, PotentialField, SupportRegion};
    use std::sync::Arc;

    fn well_2d(n: usize) -> DiscreteHamiltonian {
        let dom = build_domain(2, 3.0, n).unwrap();
        let sup = Arc::new(SupportRegion::new(&dom, &[(-1.0, 1.0), (-1.0, 1.0)]).unwrap());
        let v = PotentialField::constant_on_support(sup, -5.0).unwrap();
        build_hamiltonian(&v, &dom).unwrap()
    }

    #[test]
    fn inertia_matches_dense_counts() {
        let h = well_2d(12);
        let m = nalgebra::DMatrix::<f64>::from_fn(h.size(), h.size(), |i, j| {
            let mut col = vec![0.0; h.size()];
            col[j] = 1.0;
            let mut out = vec![0.0; h.size()];
            h.matvec(&col, &mut out);
            out[i]
        });
        let eigs = m.symmetric_eigenvalues();
        for theta in [-4.0, -1.0, -0.1, 0.5, 3.0] {
            let expected = eigs.iter().filter(|&&l| l < theta).count();
            let a = BandedSym::from_hamiltonian(&h, theta).unwrap();
            let got = ldlt_inertia(&a, theta).unwrap();
            assert_eq!(got, expected, "inertia mismatch at θ={theta}");
        }
    }

    #[test]
    fn cholesky_solves_shifted_system() {
        let h = well_2d(10);
        let sigma = h.gershgorin_bounds().0 - 1.0;
        let a = BandedSym::from_hamiltonian(&h, sigma).unwrap();
        let chol = BandedChol::factor(&a).unwrap();
        let n = h.size();
        let x_true: Vec<f64> = (0..n).map(|i| ((i * 31 + 3) % 17) as f64 / 17.0).collect();
        // b = (H − σI) x
        let mut b = vec![0.0; n];
        h.matvec(&x_true, &mut b);
        for (bi, xi) in b.iter_mut().zip(&x_true) {
            *bi -= sigma * xi;
        }
        chol.solve(&mut b);
        let err = b
            .iter()
            .zip(&x_true)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        assert!(err < 1e-9, "solve error {err}");
    }
}
