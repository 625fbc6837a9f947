//! Named potential families used by the command-line front end, the test
//! batteries and the randomized ratio sweeps.
//!
//! Discontinuous box profiles (square well, delta approximant) are sampled
//! by cell averaging: each node carries the mean of the profile over its
//! grid cell. Pointwise sampling of a jump sitting on a node costs an O(Δx)
//! eigenvalue bias; the cell average keeps the stencil at second order and
//! makes ∫|V| exact for interior wells.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{GridDomain, PotentialField, SupportRegion};
use crate::error::{Error, Result};

/// Cell-averaged box profile −depth·1_core. The support mask is the core
/// widened by half a cell per side so the straddling edge cells keep their
/// partial mass.
pub fn cell_averaged_box(
    dom: &GridDomain,
    depth: f64,
    core: &[(f64, f64)],
) -> Result<PotentialField> {
    if !(depth.is_finite() && depth > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "box depth must be positive, got {depth}"
        )));
    }
    let dx = dom.spacing();
    let widened: Vec<(f64, f64)> = core
        .iter()
        .map(|&(a, b)| (a - dx / 2.0, b + dx / 2.0))
        .collect();
    let support = Arc::new(SupportRegion::new(dom, &widened)?);
    let core = core.to_vec();
    PotentialField::from_fn(support, move |x| {
        let mut frac = 1.0;
        for (axis, &(lo, hi)) in core.iter().enumerate() {
            let cell_lo = x[axis] - dx / 2.0;
            let cell_hi = x[axis] + dx / 2.0;
            let overlap = (cell_hi.min(hi) - cell_lo.max(lo)).max(0.0) / dx;
            frac *= overlap;
        }
        -depth * frac
    })
}

/// Square well −depth·1_{[−a,a]^d}, cell averaged.
pub fn square_well(dom: &GridDomain, depth: f64, half_width: f64) -> Result<PotentialField> {
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "well half-width must be positive, got {half_width}"
        )));
    }
    let core = vec![(-half_width, half_width); dom.dimension()];
    cell_averaged_box(dom, depth, &core)
}

/// Delta approximant −(1/ε)·1_{[−ε/2,ε/2]^d}, cell averaged; ∫|V| is exact
/// for interior wells, which keeps the thin-well limit clean.
pub fn delta_family(dom: &GridDomain, eps: f64) -> Result<PotentialField> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "delta width must be positive, got {eps}"
        )));
    }
    let core = vec![(-eps / 2.0, eps / 2.0); dom.dimension()];
    cell_averaged_box(dom, 1.0 / eps, &core)
}

/// Parameters of the random bump family. The defaults keep the sweep
/// potentials in the weak-to-moderate coupling range.
#[derive(Debug, Clone, Copy)]
pub struct BumpParams {
    pub min_bumps: usize,
    pub max_bumps: usize,
    pub min_depth: f64,
    pub max_depth: f64,
    /// Bump widths as fractions of the axis half-width.
    pub min_width_frac: f64,
    pub max_width_frac: f64,
    /// Centers stay within this fraction of the axis half-width.
    pub center_span_frac: f64,
    /// Pointwise clamp applied after summing bumps.
    pub clamp_min: f64,
}

impl Default for BumpParams {
    fn default() -> Self {
        Self {
            min_bumps: 1,
            max_bumps: 3,
            min_depth: 0.2,
            max_depth: 0.85,
            min_width_frac: 0.08,
            max_width_frac: 0.25,
            center_span_frac: 0.7,
            clamp_min: -1.0,
        }
    }
}

impl BumpParams {
    /// Deeper and wider bumps for gradient and spectral stress tests.
    pub fn deep() -> Self {
        Self {
            min_bumps: 2,
            max_bumps: 3,
            min_depth: 0.8,
            max_depth: 6.0,
            min_width_frac: 0.15,
            max_width_frac: 0.5,
            center_span_frac: 0.6,
            clamp_min: -8.0,
        }
    }
}

/// Seeded random sum of Gaussian bumps supported on `support`, clamped into
/// [clamp_min, 0]. Identical seeds reproduce identical fields.
pub fn random_bump(
    support: &Arc<SupportRegion>,
    seed: u64,
    params: &BumpParams,
) -> Result<PotentialField> {
    if params.min_bumps == 0 || params.max_bumps < params.min_bumps {
        return Err(Error::InvalidArgument("invalid bump count range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = support.domain().dimension();
    let n_bumps = rng.random_range(params.min_bumps..=params.max_bumps);
    let mut bumps: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::with_capacity(n_bumps);
    for _ in 0..n_bumps {
        let depth = rng.random_range(params.min_depth..=params.max_depth);
        let mut centers = Vec::with_capacity(d);
        let mut widths = Vec::with_capacity(d);
        for &(a, b) in support.intervals() {
            let mid = 0.5 * (a + b);
            let hw = 0.5 * (b - a);
            centers.push(mid + rng.random_range(-1.0..=1.0) * params.center_span_frac * hw);
            widths.push(rng.random_range(params.min_width_frac..=params.max_width_frac) * hw);
        }
        bumps.push((depth, centers, widths));
    }
    let clamp_min = params.clamp_min;
    PotentialField::from_fn(Arc::clone(support), move |x| {
        let mut v = 0.0;
        for (depth, centers, widths) in &bumps {
            let mut q = 0.0;
            for axis in 0..x.len() {
                let t = (x[axis] - centers[axis]) / widths[axis];
                q += t * t;
            }
            v -= depth * (-q).exp();
        }
        v.clamp(clamp_min, 0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, lp_norm_p};

    #[test]
    fn delta_mass_is_exact() {
        let dom = build_domain(1, 8.0, 4095).unwrap();
        for eps in [0.4, 0.2, 0.1, 0.05] {
            let v = delta_family(&dom, eps).unwrap();
            let mass = lp_norm_p(&v, 1.0).unwrap();
            assert!(
                (mass - 1.0).abs() < 1e-12,
                "eps={eps}: cell-averaged delta mass {mass} should be exactly 1"
            );
        }
    }

    #[test]
    fn square_well_mass_approaches_width() {
        let dom = build_domain(1, 8.0, 1023).unwrap();
        let v = square_well(&dom, 1.0, 1.0).unwrap();
        let mass = lp_norm_p(&v, 1.0).unwrap();
        assert!((mass - 2.0).abs() < 1e-12, "mass {mass}");
    }

    #[test]
    fn random_bump_is_reproducible_and_feasible() {
        let dom = build_domain(1, 8.0, 511).unwrap();
        let sup = Arc::new(SupportRegion::new(&dom, &[(-1.0, 1.0)]).unwrap());
        let a = random_bump(&sup, 7, &BumpParams::default()).unwrap();
        let b = random_bump(&sup, 7, &BumpParams::default()).unwrap();
        assert_eq!(a, b);
        let c = random_bump(&sup, 8, &BumpParams::default()).unwrap();
        assert_ne!(a, c);
        assert!(a.values().iter().all(|&v| (-1.0..=0.0).contains(&v)));
    }
}
