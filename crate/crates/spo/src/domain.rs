//! Computational box, compact support regions, grid-sampled potentials and
//! the discrete Schrödinger operator −Δ+V with Dirichlet walls.
//!
//! The box (−R, R)^d is a finite surrogate for the whole space: bound states
//! of compactly supported potentials decay exponentially, so box eigenvalues
//! below a negative threshold converge to the true ones as R grows. All
//! quadrature is the node-wise Riemann sum with weight Δx^d, consistent with
//! the diagonal sampling of V in the operator.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the number of grid nodes of a single field.
pub const MAX_NODES: usize = 16_777_216;

/// Relative slack used when testing whether a node lies inside a closed
/// interval, to absorb float noise in coordinate generation.
const NODE_EDGE_TOL: f64 = 1e-12;

/// Uniform Dirichlet grid on (−R, R)^d.
///
/// Nodes along each axis sit at −R + (i+1)Δx for i = 0..n with
/// Δx = 2R/(n+1); the walls ±R carry the (eliminated) boundary values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    dimension: usize,
    half_width: f64,
    points_per_axis: usize,
    spacing: f64,
}

impl GridDomain {
    pub fn new(dimension: usize, half_width: f64, points_per_axis: usize) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(Error::InvalidDomain(format!(
                "dimension must be 1, 2 or 3, got {dimension}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "half-width must be positive and finite, got {half_width}"
            )));
        }
        if points_per_axis < 8 {
            return Err(Error::InvalidDomain(format!(
                "need at least 8 points per axis, got {points_per_axis}"
            )));
        }
        let count = points_per_axis
            .checked_pow(dimension as u32)
            .filter(|&c| c <= MAX_NODES)
            .ok_or_else(|| {
                Error::InvalidDomain(format!(
                    "{points_per_axis}^{dimension} nodes exceed the budget of {MAX_NODES}"
                ))
            })?;
        let _ = count;
        let spacing = 2.0 * half_width / (points_per_axis as f64 + 1.0);
        Ok(Self {
            dimension,
            half_width,
            points_per_axis,
            spacing,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Grid spacing Δx = 2R/(n+1).
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of nodes n^d.
    pub fn node_count(&self) -> usize {
        self.points_per_axis.pow(self.dimension as u32)
    }

    /// Quadrature weight Δx^d of a single node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dimension as i32)
    }

    /// Coordinate of node `i` along one axis.
    pub fn axis_coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 1.0) * self.spacing
    }

    /// Per-axis indices of the flat node index (row-major, axis 0 fastest).
    pub fn axis_indices(&self, mut index: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for item in out.iter_mut().take(self.dimension) {
            *item = index % self.points_per_axis;
            index /= self.points_per_axis;
        }
        out
    }

    /// Coordinates of the flat node index; entries past `dimension` are 0.
    pub fn node_coords(&self, index: usize) -> [f64; 3] {
        let idx = self.axis_indices(index);
        let mut out = [0.0f64; 3];
        for a in 0..self.dimension {
            out[a] = self.axis_coord(idx[a]);
        }
        out
    }

    /// Stride of axis `a` in the flat node ordering.
    pub fn stride(&self, axis: usize) -> usize {
        self.points_per_axis.pow(axis as u32)
    }

    /// Smallest eigenvalue of the free discrete Dirichlet Laplacian on the
    /// box: d · (2/Δx²)(1 − cos(π/(n+1))).
    pub fn free_ground_energy(&self) -> f64 {
        let n1 = self.points_per_axis as f64 + 1.0;
        self.dimension as f64 * (2.0 / (self.spacing * self.spacing))
            * (1.0 - (std::f64::consts::PI / n1).cos())
    }

    /// Default negative cutoff: −10 × the free-box ground energy. Eigenvalues
    /// between this and 0 are indistinguishable from box-truncated continuum
    /// states at the current resolution. Always user-overridable.
    pub fn default_tau_neg(&self) -> f64 {
        -10.0 * self.free_ground_energy()
    }
}

/// Build a grid domain (alias of [`GridDomain::new`]).
pub fn build_domain(dimension: usize, half_width: f64, points_per_axis: usize) -> Result<GridDomain> {
    GridDomain::new(dimension, half_width, points_per_axis)
}

/// Rectangular compact support set K = Π [aᵢ, bᵢ] strictly inside the box,
/// together with its node mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportRegion {
    domain: GridDomain,
    intervals: Vec<(f64, f64)>,
    mask: Vec<bool>,
}

impl SupportRegion {
    pub fn new(domain: &GridDomain, intervals: &[(f64, f64)]) -> Result<Self> {
        if intervals.len() != domain.dimension() {
            return Err(Error::InvalidSupport(format!(
                "expected {} intervals, got {}",
                domain.dimension(),
                intervals.len()
            )));
        }
        let r = domain.half_width();
        for &(a, b) in intervals {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidSupport(format!(
                    "interval [{a}, {b}] is empty or not finite"
                )));
            }
            if a <= -r || b >= r {
                return Err(Error::InvalidSupport(format!(
                    "interval [{a}, {b}] is not compactly contained in (−{r}, {r})"
                )));
            }
        }
        let mask = compute_mask(domain, intervals);
        if !mask.iter().any(|&m| m) {
            return Err(Error::InvalidSupport(
                "support region contains no grid nodes".into(),
            ));
        }
        Ok(Self {
            domain: *domain,
            intervals: intervals.to_vec(),
            mask,
        })
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains_node(&self, index: usize) -> bool {
        self.mask[index]
    }

    pub fn node_count_inside(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Number of axis nodes covered by the interval of `axis`.
    pub fn axis_node_count(&self, axis: usize) -> usize {
        let (a, b) = self.intervals[axis];
        (0..self.domain.points_per_axis())
            .filter(|&i| {
                let x = self.domain.axis_coord(i);
                inside_interval(x, a, b)
            })
            .count()
    }
}

fn inside_interval(x: f64, a: f64, b: f64) -> bool {
    let tol = NODE_EDGE_TOL * a.abs().max(b.abs()).max(1.0);
    x >= a - tol && x <= b + tol
}

fn compute_mask(domain: &GridDomain, intervals: &[(f64, f64)]) -> Vec<bool> {
    let n = domain.points_per_axis();
    let per_axis: Vec<Vec<bool>> = intervals
        .iter()
        .map(|&(a, b)| {
            (0..n)
                .map(|i| inside_interval(domain.axis_coord(i), a, b))
                .collect()
        })
        .collect();
    (0..domain.node_count())
        .map(|idx| {
            let ai = domain.axis_indices(idx);
            (0..domain.dimension()).all(|axis| per_axis[axis][ai[axis]])
        })
        .collect()
}

/// Grid-sampled potential with an enforced compact support mask.
///
/// Values are exactly zero at every node outside the mask and finite
/// everywhere; fields are immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    support: Arc<SupportRegion>,
    values: Vec<f64>,
}

impl PotentialField {
    /// Wrap explicit node values; rejects values that violate the support
    /// or are not finite.
    pub fn new(support: Arc<SupportRegion>, values: Vec<f64>) -> Result<Self> {
        let dom = support.domain();
        if values.len() != dom.node_count() {
            return Err(Error::InvalidPotential(format!(
                "expected {} node values, got {}",
                dom.node_count(),
                values.len()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidPotential(format!(
                    "non-finite value {v} at node {i}"
                )));
            }
            if !support.contains_node(i) && v != 0.0 {
                return Err(Error::InvalidPotential(format!(
                    "nonzero value {v} outside the support mask at node {i}"
                )));
            }
        }
        Ok(Self { support, values })
    }

    /// Sample `f` at every node and zero it outside the support mask.
    pub fn from_fn(support: Arc<SupportRegion>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let dom = *support.domain();
        let mut values = vec![0.0; dom.node_count()];
        for (i, value) in values.iter_mut().enumerate() {
            if support.contains_node(i) {
                let xs = dom.node_coords(i);
                let v = f(&xs[..dom.dimension()]);
                if !v.is_finite() {
                    return Err(Error::InvalidPotential(format!(
                        "sampled non-finite value at node {i}"
                    )));
                }
                *value = v;
            }
        }
        Ok(Self { support, values })
    }

    /// Constant value on every support node, zero outside.
    pub fn constant_on_support(support: Arc<SupportRegion>, value: f64) -> Result<Self> {
        Self::from_fn(support, |_| value)
    }

    pub fn zero(support: Arc<SupportRegion>) -> Self {
        let n = support.domain().node_count();
        Self {
            support,
            values: vec![0.0; n],
        }
    }

    pub fn domain(&self) -> &GridDomain {
        self.support.domain()
    }

    pub fn support(&self) -> &Arc<SupportRegion> {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Apply a node-wise map on support nodes (off-mask nodes stay zero).
    pub(crate) fn map_on_support(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        let mut values = self.values.clone();
        for (i, v) in values.iter_mut().enumerate() {
            if self.support.contains_node(i) {
                *v = f(i, *v);
            }
        }
        Self {
            support: Arc::clone(&self.support),
            values,
        }
    }

    /// Maximum absolute difference to another field on the same grid.
    pub fn sup_distance(&self, other: &PotentialField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// Discrete Hamiltonian −Δ_h + V: (2d)-point central Laplacian scaled by
/// 1/Δx² plus the diagonal potential. Off-diagonal entries between grid
/// neighbors equal −1/Δx² exactly; the structure is implied by the grid, so
/// only the diagonal is stored (tridiagonal for d=1, 5/7-point stencil for
/// d≥2).
#[derive(Debug, Clone)]
pub struct DiscreteHamiltonian {
    domain: GridDomain,
    diag: Vec<f64>,
    off: f64,
}

impl DiscreteHamiltonian {
    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// The common off-diagonal entry −1/Δx².
    pub fn off_diagonal(&self) -> f64 {
        self.off
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// y = H x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.domain.points_per_axis();
        let d = self.domain.dimension();
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = self.diag[i] * x[i];
            let ai = self.domain.axis_indices(i);
            let mut stride = 1usize;
            for axis in 0..d {
                if ai[axis] > 0 {
                    acc += self.off * x[i - stride];
                }
                if ai[axis] + 1 < n {
                    acc += self.off * x[i + stride];
                }
                stride *= n;
            }
            *yi = acc;
        }
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let n = self.domain.points_per_axis();
        let d = self.domain.dimension();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, &di) in self.diag.iter().enumerate() {
            let ai = self.domain.axis_indices(i);
            let mut neighbors = 0usize;
            for axis in 0..d {
                if ai[axis] > 0 {
                    neighbors += 1;
                }
                if ai[axis] + 1 < n {
                    neighbors += 1;
                }
            }
            let radius = neighbors as f64 * self.off.abs();
            lo = lo.min(di - radius);
            hi = hi.max(di + radius);
        }
        (lo, hi)
    }

    /// Magnitude scale of the operator, used for residual tolerances.
    pub fn scale(&self) -> f64 {
        let (lo, hi) = self.gershgorin_bounds();
        lo.abs().max(hi.abs()).max(1.0)
    }

    /// Residual ‖Hu − λu‖₂ / ‖u‖₂ in the plain coefficient norm (the Δx^d
    /// weight cancels in the ratio).
    pub fn residual(&self, lambda: f64, u: &[f64]) -> f64 {
        let mut hu = vec![0.0; u.len()];
        self.matvec(u, &mut hu);
        let mut num = 0.0;
        let mut den = 0.0;
        for (hi, ui) in hu.iter().zip(u) {
            num += (hi - lambda * ui) * (hi - lambda * ui);
            den += ui * ui;
        }
        (num / den).sqrt()
    }
}

/// Assemble −Δ_h + V for a potential sampled on `domain`.
pub fn build_hamiltonian(v: &PotentialField, domain: &GridDomain) -> Result<DiscreteHamiltonian> {
    if v.domain() != domain {
        return Err(Error::InvalidArgument(
            "potential is not sampled on the given domain".into(),
        ));
    }
    let dx2 = domain.spacing() * domain.spacing();
    let shift = 2.0 * domain.dimension() as f64 / dx2;
    let diag = v.values().iter().map(|&vi| shift + vi).collect();
    Ok(DiscreteHamiltonian {
        domain: *domain,
        diag,
        off: -1.0 / dx2,
    })
}

/// Riemann-sum integral Σ |V(node)|^p Δx^d of |V|^p; requires p > d/2, the
/// validity range of the inequality and cost machinery.
pub fn lp_norm_p(v: &PotentialField, p: f64) -> Result<f64> {
    let d = v.domain().dimension() as f64;
    if !(p.is_finite() && p > d / 2.0) {
        return Err(Error::InvalidArgument(format!(
            "exponent p = {p} must satisfy p > d/2 = {}",
            d / 2.0
        )));
    }
    let w = v.domain().cell_volume();
    Ok(v.values().iter().map(|&vi| vi.abs().powf(p) * w).sum())
}

/// Zero the field outside the mask of `region` and re-home it there.
pub fn project_support(v: &PotentialField, region: &Arc<SupportRegion>) -> Result<PotentialField> {
    if region.domain() != v.domain() {
        return Err(Error::InvalidArgument(
            "support region lives on a different grid".into(),
        ));
    }
    let values = v
        .values()
        .iter()
        .enumerate()
        .map(|(i, &vi)| if region.contains_node(i) { vi } else { 0.0 })
        .collect();
    PotentialField::new(Arc::clone(region), values)
}

/// Clamp support-node values into [lo, hi]; off-mask nodes stay zero.
pub fn project_box(v: &PotentialField, lo: f64, hi: f64) -> Result<PotentialField> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidArgument(format!(
            "invalid box bounds [{lo}, {hi}]"
        )));
    }
    Ok(v.map_on_support(|_, vi| vi.clamp(lo, hi)))
}

/// Radial retraction onto the set { lp_norm_p(V, p) ≤ ρ }: multiplies V by
/// min(1, (ρ/lp_norm_p(V,p))^{1/p}). This is an exact scaling onto the ball,
/// not the metric projection (which has no closed form for p ≠ 2).
pub fn retract_lp_ball(v: &PotentialField, p: f64, rho: f64) -> Result<PotentialField> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ball radius must be positive, got {rho}"
        )));
    }
    let mass = lp_norm_p(v, p)?;
    if mass <= rho {
        return Ok(v.clone());
    }
    let factor = (rho / mass).powf(1.0 / p);
    Ok(v.map_on_support(|_, vi| vi * factor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line_support(dom: &GridDomain, a: f64, b: f64) -> Arc<SupportRegion> {
        Arc::new(SupportRegion::new(dom, &[(a, b)]).unwrap())
    }

    #[test]
    fn domain_spacing_and_nodes() {
        // Δx = 2R/(n+1), node i at −R + (i+1)Δx
        let dom = GridDomain::new(1, 4.5, 8).unwrap();
        assert_relative_eq!(dom.spacing(), 1.0);
        let xs: Vec<f64> = (0..8).map(|i| dom.axis_coord(i)).collect();
        assert_relative_eq!(xs[0], -3.5);
        assert_relative_eq!(xs[7], 3.5);

        let dom = GridDomain::new(1, 8.0, 1023).unwrap();
        assert_relative_eq!(dom.spacing(), 1.0 / 64.0);

        let dom = GridDomain::new(2, 4.0, 63).unwrap();
        assert_relative_eq!(dom.spacing(), 0.125);
        assert_eq!(dom.node_count(), 63 * 63);
    }

    #[test]
    fn domain_rejects_bad_input() {
        assert!(GridDomain::new(0, 4.0, 16).is_err());
        assert!(GridDomain::new(4, 4.0, 16).is_err());
        assert!(GridDomain::new(1, -1.0, 16).is_err());
        assert!(GridDomain::new(1, 4.0, 7).is_err());
        // node budget
        assert!(GridDomain::new(3, 1.0, 300).is_err());
    }

    #[test]
    fn support_must_be_compactly_contained() {
        let dom = GridDomain::new(1, 2.0, 15).unwrap();
        assert!(SupportRegion::new(&dom, &[(-1.0, 1.0)]).is_ok());
        assert!(SupportRegion::new(&dom, &[(-2.0, 1.0)]).is_err());
        assert!(SupportRegion::new(&dom, &[(1.0, 1.0)]).is_err());
        assert!(SupportRegion::new(&dom, &[(-1.0, 1.0), (-1.0, 1.0)]).is_err());
    }

    #[test]
    fn potential_rejects_values_off_mask() {
        let dom = GridDomain::new(1, 4.0, 15).unwrap();
        let sup = line_support(&dom, -1.0, 1.0);
        let mut values = vec![0.0; 15];
        values[0] = 1.0; // node at −3.5, outside [−1, 1]
        assert!(PotentialField::new(Arc::clone(&sup), values).is_err());
        let bad = vec![f64::NAN; 15];
        assert!(PotentialField::new(sup, bad).is_err());
    }

    #[test]
    fn free_hamiltonian_stencil() {
        // V ≡ 0, d=1, Δx=1 → tridiagonal with diagonal 2, off-diagonal −1.
        let dom = GridDomain::new(1, 5.0, 9).unwrap();
        assert_relative_eq!(dom.spacing(), 1.0);
        let sup = line_support(&dom, -1.0, 1.0);
        let v = PotentialField::zero(sup);
        let h = build_hamiltonian(&v, &dom).unwrap();
        assert!(h.diag().iter().all(|&d| (d - 2.0).abs() < 1e-15));
        assert_relative_eq!(h.off_diagonal(), -1.0);
    }

    #[test]
    fn constant_well_shifts_diagonal_on_mask_only() {
        let dom = GridDomain::new(1, 4.0, 31).unwrap();
        let sup = line_support(&dom, -1.0, 1.0);
        let v = PotentialField::constant_on_support(Arc::clone(&sup), -1.0).unwrap();
        let h = build_hamiltonian(&v, &dom).unwrap();
        let shift = 2.0 / (dom.spacing() * dom.spacing());
        for i in 0..dom.node_count() {
            let expected = if sup.contains_node(i) { shift - 1.0 } else { shift };
            assert_relative_eq!(h.diag()[i], expected);
        }
    }

    #[test]
    fn matvec_matches_dense_symmetric_stencil() {
        // Stencil symmetry: H equals its transpose exactly. Checked via
        // ⟨Hx, y⟩ = ⟨x, Hy⟩ for a few vectors on a 2-d grid.
        let dom = GridDomain::new(2, 2.0, 9).unwrap();
        let sup = Arc::new(SupportRegion::new(&dom, &[(-1.0, 1.0), (-1.0, 1.0)]).unwrap());
        let v = PotentialField::from_fn(sup, |x| -(x[0] * x[0] + 0.3 * x[1]).abs()).unwrap();
        let h = build_hamiltonian(&v, &dom).unwrap();
        let n = dom.node_count();
        let x: Vec<f64> = (0..n).map(|i| ((i * 37 + 11) % 101) as f64 / 101.0).collect();
        let y: Vec<f64> = (0..n).map(|i| ((i * 53 + 29) % 97) as f64 / 97.0).collect();
        let mut hx = vec![0.0; n];
        let mut hy = vec![0.0; n];
        h.matvec(&x, &mut hx);
        h.matvec(&y, &mut hy);
        let lhs: f64 = hx.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&hy).map(|(a, b)| a * b).sum();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
    }

    #[test]
    fn lp_norm_examples() {
        let dom = GridDomain::new(1, 8.0, 1023).unwrap();
        let sup = line_support(&dom, -1.0, 1.0);

        let zero = PotentialField::zero(Arc::clone(&sup));
        assert_eq!(lp_norm_p(&zero, 1.5).unwrap(), 0.0);

        // ∫ 1 dx over [−1,1] = 2, up to the O(Δx) closed-edge bias.
        let v = PotentialField::constant_on_support(Arc::clone(&sup), -1.0).unwrap();
        let m = lp_norm_p(&v, 1.5).unwrap();
        assert!((m - 2.0).abs() <= 2.0 * dom.spacing(), "m = {m}");

        // ∫ |−2|^{3/2} over [−1,1] = 2^{3/2}·2 ≈ 5.657 (hand integral).
        let v2 = PotentialField::constant_on_support(Arc::clone(&sup), -2.0).unwrap();
        let m2 = lp_norm_p(&v2, 1.5).unwrap();
        assert!((m2 - 5.657).abs() < 8.0_f64.sqrt() * 2.5 * dom.spacing(), "m2 = {m2}");

        // p ≤ d/2 rejected.
        assert!(lp_norm_p(&v, 0.5).is_err());
        assert!(lp_norm_p(&v, 0.4).is_err());
    }

    #[test]
    fn project_box_clamps_on_mask() {
        let dom = GridDomain::new(1, 4.0, 31).unwrap();
        let sup = line_support(&dom, -1.0, 1.0);
        let v = PotentialField::constant_on_support(Arc::clone(&sup), -3.0).unwrap();
        let clamped = project_box(&v, -1.0, 0.0).unwrap();
        for i in 0..dom.node_count() {
            let expected = if sup.contains_node(i) { -1.0 } else { 0.0 };
            assert_eq!(clamped.value(i), expected);
        }
        assert!(project_box(&v, 1.0, -1.0).is_err());
    }

    #[test]
    fn project_support_idempotent_and_zeroing() {
        let dom = GridDomain::new(1, 4.0, 63).unwrap();
        let wide = line_support(&dom, -2.0, 2.0);
        let narrow = line_support(&dom, -1.0, 1.0);
        let v = PotentialField::constant_on_support(wide, -1.0).unwrap();
        let p1 = project_support(&v, &narrow).unwrap();
        let p2 = project_support(&p1, &narrow).unwrap();
        assert_eq!(p1, p2);
        for i in 0..dom.node_count() {
            assert!(narrow.contains_node(i) || p1.value(i) == 0.0);
        }
    }

    #[test]
    fn retraction_scales_onto_ball() {
        let dom = GridDomain::new(1, 8.0, 2047).unwrap();
        let sup = line_support(&dom, -1.0, 1.0);
        let v = PotentialField::constant_on_support(sup, -2.0).unwrap();
        let mass = lp_norm_p(&v, 1.5).unwrap();
        let retracted = retract_lp_ball(&v, 1.5, 1.0).unwrap();
        let post = lp_norm_p(&retracted, 1.5).unwrap();
        assert!(post <= 1.0 * (1.0 + 1e-12), "post-retraction mass {post}");
        assert_relative_eq!(post, 1.0, max_relative = 1e-12);
        // scaling factor (1/m)^{1/p}, ≈ (1/5.657)^{2/3} ≈ 0.3150 at Δx→0
        let factor = retracted.value(dom.node_count() / 2) / v.value(dom.node_count() / 2);
        assert_relative_eq!(factor, (1.0 / mass).powf(2.0 / 3.0), max_relative = 1e-12);
        assert!((factor - 0.3150).abs() < 5e-3, "factor = {factor}");

        // identity on feasible points
        let feasible = retract_lp_ball(&retracted, 1.5, 1.0).unwrap();
        assert_eq!(feasible, retracted);

        assert!(retract_lp_ball(&v, 1.5, -1.0).is_err());
    }

    #[test]
    fn quadrature_error_first_order_or_better() {
        // Smooth compactly supported bump: error decreases at least first
        // order in Δx.
        let exact = {
            // ∫_{-1}^{1} (cos(πx/2)^2)^{3/2} dx via fine midpoint rule
            let m = 400_000;
            let h = 2.0 / m as f64;
            (0..m)
                .map(|i| {
                    let x: f64 = -1.0 + (i as f64 + 0.5) * h;
                    let c = (std::f64::consts::PI * x / 2.0).cos();
                    (c * c).powf(1.5) * h
                })
                .sum::<f64>()
        };
        let mut errs = Vec::new();
        for n in [255usize, 511, 1023] {
            let dom = GridDomain::new(1, 4.0, n).unwrap();
            let sup = line_support(&dom, -1.0, 1.0);
            let v = PotentialField::from_fn(sup, |x| {
                let c = (std::f64::consts::PI * x[0] / 2.0).cos();
                -c * c
            })
            .unwrap();
            errs.push((lp_norm_p(&v, 1.5).unwrap() - exact).abs());
        }
        assert!(
            errs[1] <= errs[0] / 1.8 && errs[2] <= errs[1] / 1.8,
            "quadrature errors not decaying at first order: {errs:?}"
        );
    }
}
