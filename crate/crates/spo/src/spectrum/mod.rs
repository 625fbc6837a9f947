//! Negative discrete spectrum of the grid operator: exact counting,
//! eigenpair computation, multiplicity clustering and the truncated
//! zero-padded sequence map.

pub mod banded;
pub mod dense;
pub mod lanczos;
pub mod tridiag;

use crate::domain::{DiscreteHamiltonian, GridDomain};
use crate::error::{Error, Result};

/// Default relative clustering tolerance: discretization splits symmetric
/// degeneracies by O(Δx²), so exact-equality clustering would always report
/// multiplicity one.
pub const DEFAULT_EPS_MULT: f64 = 1e-6;

/// Relative residual/orthogonality budget, scaled by the operator norm.
const EIGEN_TOL: f64 = 1e-8;

/// Eigenvalues below the negative cutoff, ascending (ground state first),
/// with eigenvectors normalized in the discrete L² inner product
/// (Σ u² Δx^d = 1).
#[derive(Debug, Clone)]
pub struct NegativeSpectrum {
    domain: GridDomain,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    tau_neg: f64,
    eps_mult: f64,
    total_below: usize,
}

impl NegativeSpectrum {
    pub fn empty(domain: GridDomain, tau_neg: f64) -> Self {
        Self {
            domain,
            eigenvalues: Vec::new(),
            eigenvectors: Vec::new(),
            residuals: Vec::new(),
            tau_neg,
            eps_mult: DEFAULT_EPS_MULT,
            total_below: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.eigenvalues[i]
    }

    /// Discrete-L²-normalized eigenvector of the i-th eigenvalue.
    pub fn eigenvector(&self, i: usize) -> &[f64] {
        &self.eigenvectors[i]
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn tau_neg(&self) -> f64 {
        self.tau_neg
    }

    pub fn eps_mult(&self) -> f64 {
        self.eps_mult
    }

    pub fn with_eps_mult(mut self, eps_mult: f64) -> Self {
        self.eps_mult = eps_mult;
        self
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    /// Total count below the cutoff reported by the exact counting route;
    /// exceeds `len()` when the eigenpair budget truncated the list.
    pub fn total_below(&self) -> usize {
        self.total_below
    }

    pub fn truncated(&self) -> bool {
        self.total_below > self.eigenvalues.len()
    }

    /// Ground-state eigenvalue, if any.
    pub fn lambda1(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }
}

/// Atom of the spectral counting measure: location t < 0 with integer
/// weight m ≥ 1 (the cluster size).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureAtom {
    pub location: f64,
    pub weight: usize,
}

/// Finite nonnegative measure Σ m·δ_t carried by the negative eigenvalues.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EigenvalueMeasure {
    atoms: Vec<MeasureAtom>,
}

impl EigenvalueMeasure {
    pub fn atoms(&self) -> &[MeasureAtom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> usize {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Moment Σ m·|t|^e of the measure.
    pub fn abs_moment(&self, e: f64) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight as f64 * a.location.abs().powf(e))
            .sum()
    }
}

/// Fixed-length non-decreasing sequence of the negative eigenvalues padded
/// with exact zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiSequence {
    entries: Vec<f64>,
}

impl PhiSequence {
    pub fn from_eigenvalues(eigenvalues: &[f64], len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidArgument(
                "sequence length must be at least 1".into(),
            ));
        }
        let mut entries = vec![0.0; len];
        for (slot, &lam) in entries.iter_mut().zip(eigenvalues.iter()) {
            *slot = lam.min(0.0);
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// 1-based component λ_j (zero once past the eigenvalue count).
    pub fn component(&self, j: usize) -> f64 {
        self.entries[j - 1]
    }
}

/// Exact number of eigenvalues of H strictly below `theta`: Sturm sign
/// counts for d = 1, symmetric-indefinite banded inertia for d ≥ 2. A shift
/// that hits the spectrum is signalled as [`Error::ShiftHitsSpectrum`].
pub fn count_below(h: &DiscreteHamiltonian, theta: f64) -> Result<usize> {
    if h.domain().dimension() == 1 {
        let off = vec![h.off_diagonal(); h.size() - 1];
        tridiag::sturm_count(h.diag(), &off, theta)
    } else {
        let a = banded::BandedSym::from_hamiltonian(h, theta)?;
        banded::ldlt_inertia(&a, theta)
    }
}

/// [`count_below`] with automatic ±1e-10 relative jitter retries when the
/// shift hits the spectrum.
pub fn count_below_jittered(h: &DiscreteHamiltonian, theta: f64) -> Result<usize> {
    let scale = theta.abs().max(1.0);
    let mut last = Error::ShiftHitsSpectrum { shift: theta };
    for step in [0.0, 1.0, -1.0, 2.0, -2.0] {
        match count_below(h, theta + scale * 1e-10 * step) {
            Ok(c) => return Ok(c),
            Err(e @ Error::ShiftHitsSpectrum { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// All eigenpairs of H below `tau_neg`, up to `k_max`, ascending, with the
/// count cross-checked against the exact counting route.
///
/// d = 1 uses Sturm bisection plus inverse iteration; d ≥ 2 uses the
/// shift-invert Lanczos path with a dense fallback for small problems.
pub fn negative_eigenpairs(
    h: &DiscreteHamiltonian,
    tau_neg: f64,
    k_max: usize,
) -> Result<NegativeSpectrum> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    if !tau_neg.is_finite() || tau_neg > 0.0 {
        return Err(Error::InvalidArgument(format!(
            "negative cutoff must satisfy τ ≤ 0, got {tau_neg}"
        )));
    }
    let total = count_below_jittered(h, tau_neg)?;
    let domain = *h.domain();
    if total == 0 {
        return Ok(NegativeSpectrum::empty(domain, tau_neg));
    }
    let want = total.min(k_max);

    let (vals, vecs) = if domain.dimension() == 1 {
        tridiag_eigenpairs(h, want)?
    } else {
        match lanczos::shift_invert_lowest(h, want, tau_neg, 0.5 * EIGEN_TOL * h.scale()) {
            Ok(out) => (out.eigenvalues, out.eigenvectors),
            Err(iterative_err) => {
                if h.size() <= dense::DENSE_LIMIT {
                    let (vals, vecs) = dense::negative_eigenpairs(h, tau_neg)?;
                    (vals[..want.min(vals.len())].to_vec(), vecs[..want.min(vecs.len())].to_vec())
                } else {
                    return Err(iterative_err);
                }
            }
        }
    };

    if vals.len() != want {
        return Err(Error::CountMismatch(format!(
            "eigensolver produced {} eigenvalues below {tau_neg} but the sign-count route reports {total} (budget {k_max})",
            vals.len()
        )));
    }

    finalize_spectrum(h, domain, vals, vecs, tau_neg, total)
}

fn tridiag_eigenpairs(
    h: &DiscreteHamiltonian,
    want: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let off = vec![h.off_diagonal(); h.size() - 1];
    let mut vals = Vec::with_capacity(want);
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(want);
    for k in 0..want {
        let lam = tridiag::bisect_kth(h.diag(), &off, k)?;
        // orthogonalize against earlier vectors of near-degenerate pairs
        let close: Vec<Vec<f64>> = vals
            .iter()
            .zip(&vecs)
            .filter(|(l, _): &(&f64, &Vec<f64>)| (lam - **l).abs() <= 1e-6 * lam.abs().max(1.0))
            .map(|(_, v)| v.clone())
            .collect();
        let v = tridiag::inverse_iteration(h.diag(), &off, lam, &close)?;
        // Rayleigh refinement
        let mut hv = vec![0.0; v.len()];
        h.matvec(&v, &mut hv);
        let num: f64 = v.iter().zip(&hv).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|a| a * a).sum();
        vals.push(num / den);
        vecs.push(v);
    }
    Ok((vals, vecs))
}

fn finalize_spectrum(
    h: &DiscreteHamiltonian,
    domain: GridDomain,
    mut vals: Vec<f64>,
    mut vecs: Vec<Vec<f64>>,
    tau_neg: f64,
    total: usize,
) -> Result<NegativeSpectrum> {
    // ascending order
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
    vals = order.iter().map(|&i| vals[i]).collect();
    vecs = order.iter().map(|&i| std::mem::take(&mut vecs[i])).collect();

    // normalize to the discrete L² inner product
    let w = domain.cell_volume();
    for v in &mut vecs {
        let norm = (v.iter().map(|x| x * x).sum::<f64>() * w).sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
    }

    let scale = h.scale();
    let mut residuals = Vec::with_capacity(vals.len());
    for (lam, v) in vals.iter().zip(&vecs) {
        let r = h.residual(*lam, v);
        if r > EIGEN_TOL * scale {
            return Err(Error::NoConvergence(format!(
                "residual {r:.3e} exceeds {:.3e} at eigenvalue {lam}",
                EIGEN_TOL * scale
            )));
        }
        residuals.push(r);
    }
    // orthonormality check in the discrete inner product
    for i in 0..vecs.len() {
        for j in 0..=i {
            let dot: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum::<f64>() * w;
            let expected = if i == j { 1.0 } else { 0.0 };
            if (dot - expected).abs() > 1e-8 {
                return Err(Error::NoConvergence(format!(
                    "eigenvectors {i},{j} deviate from orthonormality by {:.3e}",
                    (dot - expected).abs()
                )));
            }
        }
    }
    for lam in &vals {
        if *lam >= tau_neg {
            return Err(Error::CountMismatch(format!(
                "eigenvalue {lam} crossed the cutoff {tau_neg} after refinement"
            )));
        }
    }

    Ok(NegativeSpectrum {
        domain,
        eigenvalues: vals,
        eigenvectors: vecs,
        residuals,
        tau_neg,
        eps_mult: DEFAULT_EPS_MULT,
        total_below: total,
    })
}

/// Index ranges of multiplicity clusters in a sorted eigenvalue list:
/// consecutive gaps at most eps_mult·max(1, |λ|) belong to one cluster.
pub fn cluster_ranges(eigenvalues: &[f64], eps_mult: f64) -> Vec<std::ops::Range<usize>> {
    let mut ranges = Vec::new();
    let mut i = 0;
    while i < eigenvalues.len() {
        let mut j = i + 1;
        while j < eigenvalues.len()
            && eigenvalues[j] - eigenvalues[j - 1] <= eps_mult * eigenvalues[j].abs().max(1.0)
        {
            j += 1;
        }
        ranges.push(i..j);
        i = j;
    }
    ranges
}

/// Cluster a sorted eigenvalue list into a measure: each cluster becomes
/// one atom located at the cluster mean, weighted by the cluster size.
pub fn cluster_eigenvalues(eigenvalues: &[f64], eps_mult: f64) -> EigenvalueMeasure {
    let atoms = cluster_ranges(eigenvalues, eps_mult)
        .into_iter()
        .map(|r| {
            let cluster = &eigenvalues[r];
            MeasureAtom {
                location: cluster.iter().sum::<f64>() / cluster.len() as f64,
                weight: cluster.len(),
            }
        })
        .collect();
    EigenvalueMeasure { atoms }
}

/// Multiplicity-clustered measure of a computed spectrum.
pub fn cluster_multiplicities(s: &NegativeSpectrum) -> EigenvalueMeasure {
    cluster_eigenvalues(s.eigenvalues(), s.eps_mult())
}

/// Truncated zero-padded sequence of the negative eigenvalues: the first
/// min(N, m) entries ascending, exact zeros beyond.
pub fn phi_map(s: &NegativeSpectrum, len: usize) -> Result<PhiSequence> {
    PhiSequence::from_eigenvalues(s.eigenvalues(), len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, build_hamiltonian, PotentialField, SupportRegion};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn well_1d(n: usize, r: f64, a: f64, depth: f64) -> DiscreteHamiltonian {
        let dom = build_domain(1, r, n).unwrap();
        let sup = Arc::new(SupportRegion::new(&dom, &[(-a, a)]).unwrap());
        let v = PotentialField::constant_on_support(sup, -depth).unwrap();
        build_hamiltonian(&v, &dom).unwrap()
    }

    #[test]
    fn free_laplacian_is_positive() {
        let dom = build_domain(1, 8.0, 255).unwrap();
        let sup = Arc::new(SupportRegion::new(&dom, &[(-1.0, 1.0)]).unwrap());
        let v = PotentialField::zero(sup);
        let h = build_hamiltonian(&v, &dom).unwrap();
        assert_eq!(count_below(&h, 0.0).unwrap(), 0);
        let s = negative_eigenpairs(&h, -1e-3, 8).unwrap();
        assert!(s.is_empty());
        // smallest eigenvalue of the free operator matches the closed form
        let off = vec![h.off_diagonal(); h.size() - 1];
        let lam0 = tridiag::bisect_kth(h.diag(), &off, 0).unwrap();
        assert_relative_eq!(lam0, dom.free_ground_energy(), max_relative = 1e-10);
    }

    #[test]
    fn square_well_counts() {
        // [−1,1] well of depth 1: exactly one bound state (odd states need
        // well parameter > π/2); [−4,4]: floor(8/π)+1 = 3 states.
        let h1 = well_1d(1023, 8.0, 1.0, 1.0);
        assert_eq!(count_below_jittered(&h1, 0.0).unwrap(), 1);
        let h4 = well_1d(1023, 8.0, 4.0, 1.0);
        assert_eq!(count_below_jittered(&h4, -1e-3).unwrap(), 3);
    }

    #[test]
    fn eigenpairs_match_dense_small() {
        let h = well_1d(160, 6.0, 2.0, 2.0);
        let s = negative_eigenpairs(&h, -1e-6, 8).unwrap();
        assert!(!s.is_empty());
        let (dvals, _) = dense::negative_eigenpairs(&h, -1e-6).unwrap();
        assert_eq!(s.len(), dvals.len());
        for (a, b) in s.eigenvalues().iter().zip(&dvals) {
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn clustering_and_phi() {
        let m = cluster_eigenvalues(&[], 1e-6);
        assert!(m.is_empty());
        assert_eq!(m.total_mass(), 0);

        let m = cluster_eigenvalues(&[-2.0, -0.5], 1e-6);
        assert_eq!(m.atoms().len(), 2);
        assert!(m.atoms().iter().all(|a| a.weight == 1));

        let m = cluster_eigenvalues(&[-2.0, -0.5 - 1e-9, -0.5], 1e-6);
        assert_eq!(m.atoms().len(), 2);
        assert_eq!(m.atoms()[1].weight, 2);
        assert_eq!(m.total_mass(), 3);

        let phi = PhiSequence::from_eigenvalues(&[], 4).unwrap();
        assert_eq!(phi.entries(), &[0.0, 0.0, 0.0, 0.0]);
        let phi = PhiSequence::from_eigenvalues(&[-0.45], 3).unwrap();
        assert_eq!(phi.entries(), &[-0.45, 0.0, 0.0]);
        let phi = PhiSequence::from_eigenvalues(&[-2.0, -0.5, -0.5], 2).unwrap();
        assert_eq!(phi.entries(), &[-2.0, -0.5]);
        assert!(PhiSequence::from_eigenvalues(&[], 0).is_err());
    }

    #[test]
    fn count_consistency_on_random_wells() {
        for seed in 0..6u64 {
            let dom = build_domain(1, 8.0, 511).unwrap();
            let sup = Arc::new(SupportRegion::new(&dom, &[(-2.0, 2.0)]).unwrap());
            let v = PotentialField::from_fn(Arc::clone(&sup), |x| {
                let t = x[0] + seed as f64 * 0.37;
                -(1.5 + (3.1 * t).sin())
            })
            .unwrap();
            let h = build_hamiltonian(&v, &dom).unwrap();
            let s = negative_eigenpairs(&h, -1e-3, 32).unwrap();
            assert_eq!(s.len(), count_below_jittered(&h, -1e-3).unwrap());
            assert!(!s.truncated());
        }
    }

    #[test]
    fn degenerate_pair_in_2d_square_well() {
        // 90°-rotation symmetry of the discrete problem forces an exactly
        // degenerate first excited pair.
        let dom = build_domain(2, 4.0, 40).unwrap();
        let v = crate::families::square_well(&dom, 10.0, 1.0).unwrap();
        let h = build_hamiltonian(&v, &dom).unwrap();
        let s = negative_eigenpairs(&h, -1e-3, 8).unwrap();
        assert_eq!(s.len(), 3, "expected ground state plus degenerate pair");
        let m = cluster_multiplicities(&s);
        assert_eq!(m.atoms().len(), 2);
        assert_eq!(m.atoms()[1].weight, 2, "first excited level must be a weight-2 atom");
        // cross-check against the dense solver
        let (dvals, _) = dense::negative_eigenpairs(&h, -1e-3).unwrap();
        assert_eq!(dvals.len(), 3);
        for (a, b) in s.eigenvalues().iter().zip(&dvals) {
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
    }
}
