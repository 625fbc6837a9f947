//! Exhaustive enumeration of bang-bang configurations: the ground-truth
//! oracle for the annealing search at tiny scale. Objectives are evaluated
//! through the direct full-spectrum eigenvalue route, independent of the
//! production counting/bisection path.

use rayon::prelude::*;

use crate::costs::CostSpec;
use crate::error::{Error, Result};

use super::anneal::CellPartition;
use super::{AdmissibleSet, CostEvaluator, IterationRecord, Method, OptimizerConfig, RunRecord, RunStatus};

/// Largest enumerable family.
pub const MAX_PATTERNS: u64 = 65_536;

/// Evaluate every cell pattern over the two admissible levels and return
/// the exact optimum; tied optima are all reported.
pub fn brute_force(
    spec: &CostSpec,
    set: &AdmissibleSet,
    partition: &CellPartition,
    cfg: &OptimizerConfig,
) -> Result<RunRecord> {
    cfg.validate()?;
    let started = std::time::Instant::now();
    let n_cells = partition.n_cells();
    if n_cells >= 64 || (1u64 << n_cells) > MAX_PATTERNS {
        return Err(Error::InvalidArgument(format!(
            "2^{n_cells} bang-bang configurations exceed the enumeration cap of {MAX_PATTERNS}"
        )));
    }
    let (lo, hi) = match set.bounds() {
        Some((lo, hi)) => (lo, if set.nonpositive() { hi.min(0.0) } else { hi }),
        None => {
            return Err(Error::InvalidArgument(
                "brute-force search needs pointwise bounds on the set".into(),
            ))
        }
    };
    let eval = CostEvaluator::from_config(spec, cfg);
    let n_patterns = 1u64 << n_cells;

    let evaluated: Vec<Result<(u64, f64, f64)>> = (0..n_patterns)
        .into_par_iter()
        .map(|pattern| {
            let cell_values: Vec<f64> = (0..n_cells)
                .map(|c| if (pattern >> c) & 1 == 1 { hi } else { lo })
                .collect();
            let field = partition.field(set.support(), &cell_values)?;
            let field = set.project(&field)?;
            let value = eval.evaluate_direct(&field)?;
            Ok((pattern, value.total, value.spectral))
        })
        .collect();

    let mut rows = Vec::with_capacity(n_patterns as usize);
    for r in evaluated {
        rows.push(r?);
    }

    let (best_pattern, best_total, best_spectral) = rows
        .iter()
        .copied()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
        .expect("at least one pattern");
    let tie_tol = 1e-12 * best_total.abs().max(1.0);
    let ties: Vec<u64> = rows
        .iter()
        .filter(|&&(_, total, _)| (total - best_total).abs() <= tie_tol)
        .map(|&(pattern, _, _)| pattern)
        .collect();

    // trace of running improvements in enumeration order
    let mut iterations = Vec::new();
    let mut running = f64::INFINITY;
    for &(pattern, total, spectral) in &rows {
        if total < running {
            running = total;
            iterations.push(IterationRecord {
                iter: pattern as usize,
                objective: total,
                spectral,
                feasibility: 0.0,
                lambda_min: None,
                negative_count: 0,
                control: pattern as f64,
            });
        }
    }

    let cell_values: Vec<f64> = (0..n_cells)
        .map(|c| if (best_pattern >> c) & 1 == 1 { hi } else { lo })
        .collect();
    let field = partition.field(set.support(), &cell_values)?;
    let best_potential = set.project(&field)?;

    Ok(RunRecord {
        method: Method::BruteForce,
        seed: cfg.seed,
        status: RunStatus::Exhaustive,
        iterations,
        best_objective: best_total,
        best_spectral,
        best_potential,
        ties,
        wall_secs: started.elapsed().as_secs_f64(),
    })
}
