//! First-order eigenvalue sensitivities and projected gradient descent.

use crate::costs::{CostSpec, FormG, FormH};
use crate::domain::PotentialField;
use crate::error::{Error, Result};
use crate::spectrum::{cluster_ranges, NegativeSpectrum};

use super::{
    AdmissibleSet, CostEvaluator, IterationRecord, Method, OptimizerConfig, RunRecord, RunStatus,
};

/// Sensitivity field of a simple eigenvalue: g(node) = u(node)²·Δx^d, so
/// that λ(V + δW) = λ(V) + Σ g·δW + o(‖δW‖) for node-wise perturbations.
/// Eigenvalues inside a multiplicity cluster are nonsmooth points and are
/// rejected.
pub fn eigen_gradient(s: &NegativeSpectrum, index: usize) -> Result<Vec<f64>> {
    if index >= s.len() {
        return Err(Error::InvalidArgument(format!(
            "eigenpair index {index} out of range 0..{}",
            s.len()
        )));
    }
    let ranges = cluster_ranges(s.eigenvalues(), s.eps_mult());
    let cluster = ranges
        .iter()
        .find(|r| r.contains(&index))
        .cloned()
        .unwrap_or(index..index + 1);
    if cluster.len() > 1 {
        return Err(Error::NonsmoothPoint(format!(
            "eigenvalue {index} sits in a multiplicity cluster of size {}",
            cluster.len()
        )));
    }
    Ok(density_field(s, index))
}

fn density_field(s: &NegativeSpectrum, index: usize) -> Vec<f64> {
    let w = s.domain().cell_volume();
    s.eigenvector(index).iter().map(|&u| u * u * w).collect()
}

/// Cluster-averaged density: the subgradient contribution of an eigenvalue
/// that participates in a symmetric function through a cluster.
fn cluster_density(s: &NegativeSpectrum, cluster: std::ops::Range<usize>) -> Vec<f64> {
    let n = s.eigenvector(0).len();
    let w = s.domain().cell_volume();
    let mut g = vec![0.0; n];
    for j in cluster.clone() {
        for (gi, &u) in g.iter_mut().zip(s.eigenvector(j)) {
            *gi += u * u * w;
        }
    }
    let size = cluster.len() as f64;
    for gi in &mut g {
        *gi /= size;
    }
    g
}

/// Gradient of the differentiable cost forms (power-form h, j-th and gap
/// g). Indicator and tabulated forms are rejected: they are not
/// differentiable, use annealing. The integral part contributes
/// k·p·|V|^{p−1}·sign(V)·Δx^d at every node.
pub fn cost_gradient(
    spec: &CostSpec,
    v: &PotentialField,
    s: &NegativeSpectrum,
) -> Result<Vec<f64>> {
    let n = v.values().len();
    let w = v.domain().cell_volume();
    let (k, p) = (spec.k(), spec.p());

    let mut grad = vec![0.0; n];
    match spec {
        CostSpec::H(h_spec) => match h_spec.form() {
            FormH::Power => {
                let exp = h_spec.power_exponent();
                for (j, &lam) in s.eigenvalues().iter().enumerate() {
                    // h(t) = −(−t)^s ⇒ h'(t) = s(−t)^{s−1} for t < 0
                    let hp = exp * (-lam).powf(exp - 1.0);
                    for (gi, &u) in grad.iter_mut().zip(s.eigenvector(j)) {
                        *gi += hp * u * u * w;
                    }
                }
            }
            FormH::Indicator { .. } | FormH::Table { .. } => {
                return Err(Error::InvalidCostSpec(
                    "indicator and tabulated forms are not differentiable; use annealing".into(),
                ));
            }
        },
        CostSpec::G(g_spec) => {
            let ranges = cluster_ranges(s.eigenvalues(), s.eps_mult());
            let cluster_of = |idx: usize| {
                ranges
                    .iter()
                    .find(|r| r.contains(&idx))
                    .cloned()
                    .unwrap_or(idx..idx + 1)
            };
            match g_spec.form() {
                FormG::Jth { j } => {
                    let idx = j - 1;
                    if idx < s.len() {
                        let g = cluster_density(s, cluster_of(idx));
                        for (gi, gj) in grad.iter_mut().zip(&g) {
                            *gi += gj;
                        }
                    }
                    // past the spectrum the component is clamped at 0 and
                    // insensitive to V
                }
                FormG::Gap => {
                    if !s.is_empty() {
                        let c1 = cluster_of(0);
                        if s.len() > 1 {
                            let c2 = cluster_of(1);
                            if c1 == c2 {
                                return Err(Error::NonsmoothPoint(
                                    "gap endpoints share a multiplicity cluster".into(),
                                ));
                            }
                            let g2 = cluster_density(s, c2);
                            for (gi, gj) in grad.iter_mut().zip(&g2) {
                                *gi -= gj;
                            }
                        }
                        let g1 = cluster_density(s, c1);
                        for (gi, gj) in grad.iter_mut().zip(&g1) {
                            *gi += gj;
                        }
                    }
                }
                FormG::Table { .. } => {
                    return Err(Error::InvalidCostSpec(
                        "tabulated sequence forms are not differentiable; use annealing".into(),
                    ));
                }
            }
        }
    }

    // ∂/∂V_i of k Σ|V|^p Δx^d
    for (gi, &vi) in grad.iter_mut().zip(v.values()) {
        if vi != 0.0 {
            *gi += k * p * vi.abs().powf(p - 1.0) * vi.signum() * w;
        }
    }
    Ok(grad)
}

/// Projected gradient descent with backtracking: iterates
/// V ← project(V − α·∇F) with the step halved up to 30 times until the
/// objective strictly decreases; a failed line search stalls the run and
/// returns the best iterate found.
pub fn projected_descent(
    spec: &CostSpec,
    set: &AdmissibleSet,
    v0: &PotentialField,
    cfg: &OptimizerConfig,
) -> Result<RunRecord> {
    cfg.validate()?;
    let started = std::time::Instant::now();
    if !set.is_feasible(v0, 1e-9)? {
        return Err(Error::Infeasible(format!(
            "start point violates the admissible set by {:.3e}",
            set.feasibility_residual(v0)?
        )));
    }
    let eval = CostEvaluator::from_config(spec, cfg);
    let (mut spectrum, mut value) = eval.evaluate(v0)?;
    let mut current = v0.clone();

    let mut iterations = Vec::with_capacity(cfg.max_iters + 1);
    let push_record = |iters: &mut Vec<IterationRecord>,
                           iter: usize,
                           v: &PotentialField,
                           s: &NegativeSpectrum,
                           total: f64,
                           spectral: f64,
                           control: f64|
     -> Result<()> {
        iters.push(IterationRecord {
            iter,
            objective: total,
            spectral,
            feasibility: set.feasibility_residual(v)?,
            lambda_min: s.lambda1(),
            negative_count: s.len(),
            control,
        });
        Ok(())
    };

    let mut best = current.clone();
    let mut best_value = value;
    let mut status = RunStatus::BudgetExhausted;

    // base step: 0.1 of the start scale against the initial gradient
    let base_step = match cfg.step0 {
        Some(s) => s,
        None => {
            let g0 = cost_gradient(spec, &current, &spectrum)?;
            let gmax = g0.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            0.1 * current.max_abs().max(1.0) / gmax.max(1e-12)
        }
    };
    push_record(
        &mut iterations,
        0,
        &current,
        &spectrum,
        value.total,
        value.spectral,
        base_step,
    )?;

    // trace holds the start point plus accepted iterates, at most max_iters
    for iter in 1..cfg.max_iters {
        let grad = match cost_gradient(spec, &current, &spectrum) {
            Ok(g) => g,
            Err(Error::NonsmoothPoint(_)) => {
                status = RunStatus::Stalled;
                break;
            }
            Err(e) => return Err(e),
        };

        let mut step = base_step;
        let mut accepted = None;
        for _ in 0..=30 {
            let candidate_values: Vec<f64> = current
                .values()
                .iter()
                .zip(&grad)
                .map(|(&vi, &gi)| vi - step * gi)
                .collect();
            let candidate = set.project_values(candidate_values)?;
            if candidate.sup_distance(&current) <= 1e-15 * current.max_abs().max(1.0) {
                // projection returned the same point; the iterate is
                // stationary for this direction
                break;
            }
            let (s_cand, v_cand) = eval.evaluate(&candidate)?;
            if v_cand.total < value.total {
                accepted = Some((candidate, s_cand, v_cand, step));
                break;
            }
            step *= 0.5;
        }

        match accepted {
            Some((candidate, s_cand, v_cand, used_step)) => {
                current = candidate;
                spectrum = s_cand;
                value = v_cand;
                push_record(
                    &mut iterations,
                    iter,
                    &current,
                    &spectrum,
                    value.total,
                    value.spectral,
                    used_step,
                )?;
                if value.total < best_value.total {
                    best = current.clone();
                    best_value = value;
                }
            }
            None => {
                status = RunStatus::Stalled;
                break;
            }
        }
    }

    Ok(RunRecord {
        method: Method::ProjectedDescent,
        seed: cfg.seed,
        status,
        iterations,
        best_objective: best_value.total,
        best_spectral: best_value.spectral,
        best_potential: best,
        ties: Vec::new(),
        wall_secs: started.elapsed().as_secs_f64(),
    })
}
