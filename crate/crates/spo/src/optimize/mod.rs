//! Constrained potential optimization: projected eigenvalue-gradient
//! descent for differentiable costs, bang-bang simulated annealing for
//! counting costs, an exhaustive brute-force oracle at tiny scale, and the
//! weak-convergence probe.

mod anneal;
mod brute;
mod descent;
mod probe;

pub use anneal::{anneal_bang_bang, CellPartition};
pub use brute::brute_force;
pub use descent::{cost_gradient, eigen_gradient, projected_descent};
pub use probe::{weak_convergence_probe, ProbeRow, ProbeTable};

use std::sync::Arc;

use serde::Serialize;

use crate::costs::{
    eval_cost_g_detailed, eval_cost_h_detailed, CostSpec, CostValue,
};
use crate::domain::{
    build_hamiltonian, lp_norm_p, GridDomain, PotentialField, SupportRegion,
};
use crate::error::{Error, Result};
use crate::spectrum::{
    cluster_eigenvalues, dense, negative_eigenpairs, NegativeSpectrum, PhiSequence,
};

/// Constraint set: support plus optional pointwise bounds, sign constraint
/// and ∫|V|^p ball.
#[derive(Debug, Clone)]
pub struct AdmissibleSet {
    support: Arc<SupportRegion>,
    bounds: Option<(f64, f64)>,
    lp_ball: Option<(f64, f64)>,
    nonpositive: bool,
}

impl AdmissibleSet {
    pub fn new(support: Arc<SupportRegion>) -> Self {
        Self {
            support,
            bounds: None,
            lp_ball: None,
            nonpositive: false,
        }
    }

    /// Pointwise bounds lo ≤ V ≤ hi. The bounds must straddle 0 so the
    /// zero tail outside the support stays feasible and the ball retraction
    /// preserves them.
    pub fn with_bounds(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= 0.0 && 0.0 <= hi) {
            return Err(Error::InvalidArgument(format!(
                "bounds [{lo}, {hi}] must be finite with lo ≤ 0 ≤ hi"
            )));
        }
        self.bounds = Some((lo, hi));
        Ok(self)
    }

    /// Ball constraint ∫|V|^p ≤ radius.
    pub fn with_lp_ball(mut self, p: f64, radius: f64) -> Result<Self> {
        let d = self.support.domain().dimension() as f64;
        if !(p.is_finite() && p > d / 2.0) {
            return Err(Error::InvalidArgument(format!(
                "ball exponent p = {p} must exceed d/2"
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        self.lp_ball = Some((p, radius));
        Ok(self)
    }

    /// Sign constraint V ≤ 0.
    pub fn with_nonpositive(mut self) -> Self {
        self.nonpositive = true;
        self
    }

    pub fn support(&self) -> &Arc<SupportRegion> {
        &self.support
    }

    pub fn domain(&self) -> &GridDomain {
        self.support.domain()
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }

    pub fn lp_ball(&self) -> Option<(f64, f64)> {
        self.lp_ball
    }

    pub fn nonpositive(&self) -> bool {
        self.nonpositive
    }

    /// Feasibility map applied in a fixed order: support zeroing, box
    /// clamp, sign clamp, ball retraction. Later steps preserve the earlier
    /// constraints (the retraction scales toward zero, which stays inside
    /// the box and sign sets because the bounds straddle 0).
    pub fn project_values(&self, mut values: Vec<f64>) -> Result<PotentialField> {
        let dom = self.support.domain();
        if values.len() != dom.node_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} node values, got {}",
                dom.node_count(),
                values.len()
            )));
        }
        for (i, v) in values.iter_mut().enumerate() {
            if !self.support.contains_node(i) {
                *v = 0.0;
                continue;
            }
            if let Some((lo, hi)) = self.bounds {
                *v = v.clamp(lo, hi);
            }
            if self.nonpositive {
                *v = v.min(0.0);
            }
        }
        let field = PotentialField::new(Arc::clone(&self.support), values)?;
        match self.lp_ball {
            Some((p, radius)) => crate::domain::retract_lp_ball(&field, p, radius),
            None => Ok(field),
        }
    }

    pub fn project(&self, v: &PotentialField) -> Result<PotentialField> {
        self.project_values(v.values().to_vec())
    }

    /// Worst constraint violation: absolute for support/box/sign, relative
    /// for the ball.
    pub fn feasibility_residual(&self, v: &PotentialField) -> Result<f64> {
        let mut worst = 0.0f64;
        for (i, &vi) in v.values().iter().enumerate() {
            if !self.support.contains_node(i) {
                worst = worst.max(vi.abs());
                continue;
            }
            if let Some((lo, hi)) = self.bounds {
                worst = worst.max((lo - vi).max(0.0)).max((vi - hi).max(0.0));
            }
            if self.nonpositive {
                worst = worst.max(vi.max(0.0));
            }
        }
        if let Some((p, radius)) = self.lp_ball {
            let mass = lp_norm_p(v, p)?;
            worst = worst.max((mass - radius).max(0.0) / radius.max(1.0));
        }
        Ok(worst)
    }

    pub fn is_feasible(&self, v: &PotentialField, tol: f64) -> Result<bool> {
        Ok(self.feasibility_residual(v)? <= tol)
    }
}

/// Search method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    ProjectedDescent,
    Annealing,
    BruteForce,
}

/// Knobs shared by the search methods. Seeds and all resolved values are
/// persisted with every run.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizerConfig {
    pub method: Method,
    pub max_iters: usize,
    /// Base step of the descent; derived from the start point when absent.
    pub step0: Option<f64>,
    pub restarts: usize,
    pub seed: u64,
    pub t_start: f64,
    pub t_end: f64,
    pub cells_per_axis: usize,
    pub k_max: usize,
    pub tau_neg: f64,
    pub eps_mult: f64,
}

impl OptimizerConfig {
    pub fn new(method: Method, tau_neg: f64) -> Self {
        Self {
            method,
            max_iters: 200,
            step0: None,
            restarts: 1,
            seed: 0,
            t_start: 1.0,
            t_end: 1e-3,
            cells_per_axis: 8,
            k_max: 64,
            tau_neg,
            eps_mult: crate::spectrum::DEFAULT_EPS_MULT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.restarts == 0 || self.k_max == 0 {
            return Err(Error::InvalidArgument(
                "iteration, restart and eigenpair budgets must be at least 1".into(),
            ));
        }
        if self.cells_per_axis == 0 {
            return Err(Error::InvalidArgument("cell partition must be nonempty".into()));
        }
        if !(self.t_start > 0.0 && self.t_end > 0.0 && self.t_end <= self.t_start) {
            return Err(Error::InvalidArgument(format!(
                "temperature schedule needs 0 < t_end ≤ t_start, got [{}, {}]",
                self.t_end, self.t_start
            )));
        }
        if !self.tau_neg.is_finite() || self.tau_neg > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "negative cutoff must satisfy τ ≤ 0, got {}",
                self.tau_neg
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RunStatus {
    /// Backtracking could not improve further (includes stationary starts
    /// and nonsmooth iterates after cluster handling).
    Stalled,
    BudgetExhausted,
    /// Every configuration of the family was evaluated.
    Exhaustive,
}

/// One row of the optimization trace.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub objective: f64,
    pub spectral: f64,
    pub feasibility: f64,
    pub lambda_min: Option<f64>,
    pub negative_count: usize,
    /// Step size (descent), temperature (annealing) or pattern id (brute
    /// force).
    pub control: f64,
}

/// Persisted outcome of one optimization run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub method: Method,
    pub seed: u64,
    pub status: RunStatus,
    pub iterations: Vec<IterationRecord>,
    pub best_objective: f64,
    pub best_spectral: f64,
    pub best_potential: PotentialField,
    /// Tied optimal patterns (brute force only).
    pub ties: Vec<u64>,
    pub wall_secs: f64,
}

impl RunRecord {
    /// Lowest objective seen along the trace.
    pub fn trace_minimum(&self) -> f64 {
        self.iterations
            .iter()
            .map(|r| r.objective)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Cost evaluation bound to a solver configuration. `evaluate` runs the
/// production eigensolver path; `evaluate_direct` runs the full-spectrum
/// direct route and is what the brute-force oracle uses.
pub struct CostEvaluator<'a> {
    spec: &'a CostSpec,
    tau_neg: f64,
    k_max: usize,
    eps_mult: f64,
}

impl<'a> CostEvaluator<'a> {
    pub fn new(spec: &'a CostSpec, tau_neg: f64, k_max: usize, eps_mult: f64) -> Self {
        Self {
            spec,
            tau_neg,
            k_max,
            eps_mult,
        }
    }

    pub fn from_config(spec: &'a CostSpec, cfg: &OptimizerConfig) -> Self {
        Self::new(spec, cfg.tau_neg, cfg.k_max, cfg.eps_mult)
    }

    pub fn tau_neg(&self) -> f64 {
        self.tau_neg
    }

    pub fn spec(&self) -> &CostSpec {
        self.spec
    }

    pub fn solve(&self, v: &PotentialField) -> Result<NegativeSpectrum> {
        let h = build_hamiltonian(v, v.domain())?;
        Ok(negative_eigenpairs(&h, self.tau_neg, self.k_max)?.with_eps_mult(self.eps_mult))
    }

    pub fn evaluate(&self, v: &PotentialField) -> Result<(NegativeSpectrum, CostValue)> {
        let s = self.solve(v)?;
        let value = self.value_from_eigenvalues(v, s.eigenvalues())?;
        Ok((s, value))
    }

    /// Objective via the direct (QL / dense) eigenvalue route.
    pub fn evaluate_direct(&self, v: &PotentialField) -> Result<CostValue> {
        let h = build_hamiltonian(v, v.domain())?;
        let evals = dense::negative_eigenvalues(&h, self.tau_neg)?;
        self.value_from_eigenvalues(v, &evals)
    }

    pub fn value_from_eigenvalues(&self, v: &PotentialField, evals: &[f64]) -> Result<CostValue> {
        match self.spec {
            CostSpec::H(spec) => {
                let mu = cluster_eigenvalues(evals, self.eps_mult);
                eval_cost_h_detailed(spec, v, &mu)
            }
            CostSpec::G(spec) => {
                let phi = PhiSequence::from_eigenvalues(evals, spec.len())?;
                eval_cost_g_detailed(spec, v, &phi)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_domain;

    fn set_1d() -> AdmissibleSet {
        let dom = build_domain(1, 8.0, 255).unwrap();
        let sup = Arc::new(SupportRegion::new(&dom, &[(-1.0, 1.0)]).unwrap());
        AdmissibleSet::new(sup)
    }

    #[test]
    fn projection_lands_feasible() {
        let set = set_1d()
            .with_bounds(-1.0, 0.5)
            .unwrap()
            .with_lp_ball(1.5, 1.0)
            .unwrap()
            .with_nonpositive();
        let dom = *set.domain();
        let values: Vec<f64> = (0..dom.node_count())
            .map(|i| ((i * 29 + 5) % 13) as f64 - 6.0)
            .collect();
        let v = set.project_values(values).unwrap();
        assert!(set.is_feasible(&v, 1e-12).unwrap());
        // idempotent up to float noise
        let again = set.project(&v).unwrap();
        assert!(v.sup_distance(&again) <= 1e-12);
    }

    #[test]
    fn bounds_must_straddle_zero() {
        assert!(set_1d().with_bounds(0.5, 1.0).is_err());
        assert!(set_1d().with_bounds(-1.0, -0.5).is_err());
        assert!(set_1d().with_bounds(-1.0, 0.0).is_ok());
    }

    #[test]
    fn config_validation() {
        let mut cfg = OptimizerConfig::new(Method::ProjectedDescent, -1e-3);
        assert!(cfg.validate().is_ok());
        cfg.max_iters = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = OptimizerConfig::new(Method::Annealing, -1e-3);
        cfg.t_end = 2.0;
        assert!(cfg.validate().is_err());
        let cfg = OptimizerConfig::new(Method::Annealing, 0.5);
        assert!(cfg.validate().is_err());
    }
}
