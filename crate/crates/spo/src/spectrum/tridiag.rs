//! Symmetric tridiagonal kernels: Sturm sign counts, bisection,
//! implicit-shift QL eigenvalues, and a pivoting LU solve used by inverse
//! iteration.

use crate::error::{Error, Result};

/// Count eigenvalues strictly below `shift` via the Sturm/LDLᵀ sign
/// recurrence. IEEE ±inf propagation keeps the count correct for tiny
/// pivots; an exact zero pivot means the shift hits the spectrum of a
/// leading principal submatrix and is signalled so the caller can jitter.
pub fn sturm_count(diag: &[f64], off: &[f64], shift: f64) -> Result<usize> {
    let n = diag.len();
    if n == 0 {
        return Ok(0);
    }
    debug_assert_eq!(off.len(), n - 1);
    let mut count = 0usize;
    let mut q = diag[0] - shift;
    if q == 0.0 {
        return Err(Error::ShiftHitsSpectrum { shift });
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        q = (diag[i] - shift) - off[i - 1] * off[i - 1] / q;
        if q == 0.0 {
            return Err(Error::ShiftHitsSpectrum { shift });
        }
        if q < 0.0 {
            count += 1;
        }
    }
    Ok(count)
}

/// Sturm count with automatic ±relative jitter when the shift hits the
/// spectrum exactly.
pub fn sturm_count_jittered(diag: &[f64], off: &[f64], shift: f64) -> Result<usize> {
    let scale = shift.abs().max(1.0);
    let mut last = Error::ShiftHitsSpectrum { shift };
    for step in [0.0, 1.0, -1.0, 2.0, -2.0] {
        match sturm_count(diag, off, shift + scale * 1e-10 * step) {
            Ok(c) => return Ok(c),
            Err(e @ Error::ShiftHitsSpectrum { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Gershgorin bounds of a symmetric tridiagonal matrix.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo, hi)
}

/// k-th smallest eigenvalue (0-based) via Sturm bisection, exact to machine
/// precision relative to the matrix scale.
pub fn bisect_kth(diag: &[f64], off: &[f64], k: usize) -> Result<f64> {
    let (glo, ghi) = gershgorin(diag, off);
    let mut a = glo - 1.0;
    let mut b = ghi + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a) <= 4.0 * f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
        if sturm_count_jittered(diag, off, mid)? <= k {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// All eigenvalues of a symmetric tridiagonal matrix by the implicit-shift
/// QL algorithm (eigenvalues only), ascending. Used as the direct full-
/// spectrum route, independent of the bisection path.
pub fn ql_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(off);

    for l in 0..n {
        let mut iter = 0;
        loop {
            // find a split point
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence(format!(
                    "QL iteration stalled at index {l}"
                )));
            }
            // Wilkinson-style shift
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut early = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(d)
}

/// LU factorization with partial pivoting of a general tridiagonal matrix
/// (sub `dl`, diag `d`, super `du`), LAPACK gttrf-style.
pub struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    pub fn factor(dl: &[f64], d: &[f64], du: &[f64]) -> Self {
        let n = d.len();
        let mut dl = dl.to_vec();
        let mut d = d.to_vec();
        let mut du = du.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                // no row swap
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                } else {
                    dl[i] = 0.0;
                }
                if i + 2 < n {
                    du2[i] = 0.0;
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    /// Solve A x = b in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        // forward sweep
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            let t = self.dl[i] * b[i];
            b[i + 1] -= t;
        }
        // back substitution
        if n > 0 {
            let dn = safe_div(b[n - 1], self.d[n - 1]);
            b[n - 1] = dn;
        }
        if n > 1 {
            b[n - 2] = safe_div(b[n - 2] - self.du[n - 2] * b[n - 1], self.d[n - 2]);
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = safe_div(
                b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2],
                self.d[i],
            );
        }
    }
}

fn safe_div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        // exactly singular pivot: substitute a tiny value; inverse iteration
        // renormalizes, so the direction survives
        num / f64::MIN_POSITIVE.sqrt()
    } else {
        num / den
    }
}

/// Inverse iteration for the eigenvector of a symmetric tridiagonal matrix
/// at an accurate eigenvalue approximation. Orthogonalizes against
/// previously found vectors to keep near-degenerate pairs independent.
pub fn inverse_iteration(
    diag: &[f64],
    off: &[f64],
    lambda: f64,
    previous: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let n = diag.len();
    let shifted: Vec<f64> = diag.iter().map(|&d| d - lambda).collect();
    let lu = TridiagLu::factor(off, &shifted, off);
    // deterministic pseudo-random start
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let t = (i as f64 * 0.754_877_666 + 0.1).fract();
            2.0 * t - 1.0
        })
        .collect();
    normalize(&mut v);
    let scale = gershgorin(diag, off).1.abs().max(1.0);
    for _ in 0..8 {
        lu.solve(&mut v);
        for p in previous {
            let dot: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum();
            for (vi, pi) in v.iter_mut().zip(p) {
                *vi -= dot * pi;
            }
        }
        let norm = normalize(&mut v);
        if norm.recip() <= 1e-14 * scale {
            break;
        }
    }
    Ok(v)
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sturm_counts_2x2() {
        // [[1, -1], [-1, 3]] → eigenvalues 2 ± √2
        let d = [1.0, 3.0];
        let e = [-1.0];
        assert_eq!(sturm_count(&d, &e, 0.0).unwrap(), 0);
        assert_eq!(sturm_count(&d, &e, 1.5).unwrap(), 1);
        assert_eq!(sturm_count(&d, &e, 4.0).unwrap(), 2);
    }

    #[test]
    fn sturm_signals_exact_hit() {
        // [[0, -1], [-1, 0]] has eigenvalues ±1; shift −1 produces a zero
        // pivot. The jittered count lands on either side of the hit.
        let d = [0.0, 0.0];
        let e = [-1.0];
        assert!(matches!(
            sturm_count(&d, &e, -1.0),
            Err(Error::ShiftHitsSpectrum { .. })
        ));
        let c = sturm_count_jittered(&d, &e, -1.0).unwrap();
        assert!(c <= 1, "jittered count {c}");
    }

    #[test]
    fn bisection_matches_chain_formula() {
        // Tight-binding chain d=0, e=−1: eigenvalues 2cos(jπ/(N+1)),
        // j = 1..N; the k-th smallest corresponds to j = N − k.
        let n = 40;
        let d = vec![0.0; n];
        let e = vec![-1.0; n - 1];
        for k in [0usize, 1, 7, 39] {
            let exact = 2.0 * ((n - k) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            let lam = bisect_kth(&d, &e, k).unwrap();
            assert_relative_eq!(lam, exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn ql_matches_bisection() {
        let n = 60;
        let d: Vec<f64> = (0..n).map(|i| ((i * 23 + 7) % 13) as f64 / 3.0 - 2.0).collect();
        let e: Vec<f64> = (0..n - 1).map(|i| -1.0 - ((i % 5) as f64) / 7.0).collect();
        let ql = ql_eigenvalues(&d, &e).unwrap();
        assert_eq!(ql.len(), n);
        for k in [0usize, 1, 2, 29, 58, 59] {
            let bis = bisect_kth(&d, &e, k).unwrap();
            assert_relative_eq!(ql[k], bis, epsilon = 1e-9, max_relative = 1e-10);
        }
    }

    #[test]
    fn inverse_iteration_small_residual() {
        let n = 120;
        let d: Vec<f64> = (0..n).map(|i| 2.0 - ((i % 11) as f64) / 5.0).collect();
        let e = vec![-1.0; n - 1];
        let lam = bisect_kth(&d, &e, 0).unwrap();
        let v = inverse_iteration(&d, &e, lam, &[]).unwrap();
        // residual ‖Tv − λv‖
        let mut res = 0.0f64;
        for i in 0..n {
            let mut t = d[i] * v[i];
            if i > 0 {
                t += e[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                t += e[i] * v[i + 1];
            }
            res = res.max((t - lam * v[i]).abs());
        }
        assert!(res < 1e-10, "residual {res}");
    }
}
