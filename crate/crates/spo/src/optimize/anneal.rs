//! Simulated annealing over bang-bang potentials: fields constant on each
//! cell of a partition of the support, taking only the extreme admissible
//! values. Suited to integer-valued counting objectives where gradients do
//! not exist.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::costs::CostSpec;
use crate::domain::{PotentialField, SupportRegion};
use crate::error::{Error, Result};

use super::{AdmissibleSet, CostEvaluator, IterationRecord, Method, OptimizerConfig, RunRecord, RunStatus};

/// Equal-width partition of the support box into cells_per_axis^d cells;
/// every grid node inside the support is assigned to exactly one cell.
#[derive(Debug, Clone)]
pub struct CellPartition {
    cells_per_axis: usize,
    n_cells: usize,
    /// Cell id per node, None outside the support.
    assignment: Vec<Option<usize>>,
}

impl CellPartition {
    pub fn new(support: &SupportRegion, cells_per_axis: usize) -> Result<Self> {
        if cells_per_axis == 0 {
            return Err(Error::InvalidArgument("need at least one cell".into()));
        }
        let dom = support.domain();
        let d = dom.dimension();
        for axis in 0..d {
            let nodes = support.axis_node_count(axis);
            if cells_per_axis > nodes {
                return Err(Error::InvalidArgument(format!(
                    "{cells_per_axis} cells on axis {axis} exceed the {nodes} grid nodes across the support (partition finer than grid)"
                )));
            }
        }
        let n_cells = cells_per_axis.pow(d as u32);
        let mut assignment = vec![None; dom.node_count()];
        let mut seen = vec![false; n_cells];
        for (idx, slot) in assignment.iter_mut().enumerate() {
            if !support.contains_node(idx) {
                continue;
            }
            let coords = dom.node_coords(idx);
            let mut cell = 0usize;
            for axis in (0..d).rev() {
                let (a, b) = support.intervals()[axis];
                let w = (b - a) / cells_per_axis as f64;
                let k = (((coords[axis] - a) / w).floor() as usize).min(cells_per_axis - 1);
                cell = cell * cells_per_axis + k;
            }
            seen[cell] = true;
            *slot = Some(cell);
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidArgument(
                "cell partition has cells without grid nodes (partition finer than grid)".into(),
            ));
        }
        Ok(Self {
            cells_per_axis,
            n_cells,
            assignment,
        })
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Bang-bang field for a cell-value table.
    pub fn field(
        &self,
        support: &std::sync::Arc<SupportRegion>,
        cell_values: &[f64],
    ) -> Result<PotentialField> {
        if cell_values.len() != self.n_cells {
            return Err(Error::InvalidArgument(format!(
                "expected {} cell values, got {}",
                self.n_cells,
                cell_values.len()
            )));
        }
        let values = self
            .assignment
            .iter()
            .map(|slot| slot.map(|c| cell_values[c]).unwrap_or(0.0))
            .collect();
        PotentialField::new(std::sync::Arc::clone(support), values)
    }
}

/// The two admissible cell levels: the lower bound and the upper bound
/// (clipped to 0 under a sign constraint).
fn bang_bang_levels(set: &AdmissibleSet) -> Result<(f64, f64)> {
    let (lo, hi) = set.bounds().ok_or_else(|| {
        Error::InvalidArgument("bang-bang search needs pointwise bounds on the set".into())
    })?;
    let hi_eff = if set.nonpositive() { hi.min(0.0) } else { hi };
    Ok((lo, hi_eff))
}

struct Chain {
    best_state: Vec<bool>,
    best_value: f64,
    best_spectral: f64,
    trace: Vec<IterationRecord>,
}

/// Metropolis search over bang-bang cell patterns: proposal flips one
/// uniformly random cell, the temperature cools geometrically from t_start
/// to t_end over the iteration budget. Restart chains run independently
/// with per-worker seed streams and merge deterministically.
pub fn anneal_bang_bang(
    spec: &CostSpec,
    set: &AdmissibleSet,
    cfg: &OptimizerConfig,
) -> Result<RunRecord> {
    cfg.validate()?;
    let started = std::time::Instant::now();
    let (lo, hi) = bang_bang_levels(set)?;
    let partition = CellPartition::new(set.support(), cfg.cells_per_axis)?;
    let eval = CostEvaluator::from_config(spec, cfg);

    let chains: Vec<Result<Chain>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|worker| {
            run_chain(
                &eval,
                set,
                &partition,
                lo,
                hi,
                cfg,
                cfg.seed.wrapping_add(worker as u64),
            )
        })
        .collect();

    let mut best: Option<Chain> = None;
    for chain in chains {
        let chain = chain?;
        let better = match &best {
            None => true,
            Some(b) => chain.best_value < b.best_value,
        };
        if better {
            best = Some(chain);
        }
    }
    let best = best.expect("at least one restart");

    let cell_values: Vec<f64> = best
        .best_state
        .iter()
        .map(|&up| if up { hi } else { lo })
        .collect();
    let field = partition.field(set.support(), &cell_values)?;
    let best_potential = set.project(&field)?;

    Ok(RunRecord {
        method: Method::Annealing,
        seed: cfg.seed,
        status: RunStatus::BudgetExhausted,
        iterations: best.trace,
        best_objective: best.best_value,
        best_spectral: best.best_spectral,
        best_potential,
        ties: Vec::new(),
        wall_secs: started.elapsed().as_secs_f64(),
    })
}

fn run_chain(
    eval: &CostEvaluator<'_>,
    set: &AdmissibleSet,
    partition: &CellPartition,
    lo: f64,
    hi: f64,
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<Chain> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_cells = partition.n_cells();
    let mut state: Vec<bool> = (0..n_cells).map(|_| rng.random_bool(0.5)).collect();

    struct Point {
        total: f64,
        spectral: f64,
        lambda_min: Option<f64>,
        count: usize,
        feasibility: f64,
    }
    let evaluate_state = |state: &[bool]| -> Result<Point> {
        let cell_values: Vec<f64> = state.iter().map(|&up| if up { hi } else { lo }).collect();
        let field = partition.field(set.support(), &cell_values)?;
        let field = set.project(&field)?;
        let (s, value) = eval.evaluate(&field)?;
        Ok(Point {
            total: value.total,
            spectral: value.spectral,
            lambda_min: s.lambda1(),
            count: s.len(),
            feasibility: set.feasibility_residual(&field)?,
        })
    };

    let mut current = evaluate_state(&state)?;
    let mut best_state = state.clone();
    let mut best_value = current.total;
    let mut best_spectral = current.spectral;

    let cooling = (cfg.t_end / cfg.t_start).powf(1.0 / cfg.max_iters.max(1) as f64);
    let mut temperature = cfg.t_start;
    let mut trace = Vec::with_capacity(cfg.max_iters);
    let record = |iter: usize, p: &Point, temp: f64, trace: &mut Vec<IterationRecord>| {
        trace.push(IterationRecord {
            iter,
            objective: p.total,
            spectral: p.spectral,
            feasibility: p.feasibility,
            lambda_min: p.lambda_min,
            negative_count: p.count,
            control: temp,
        });
    };
    record(0, &current, temperature, &mut trace);

    // trace holds the initial state plus one row per proposal, max_iters
    // rows in total
    for iter in 1..cfg.max_iters {
        let flip = rng.random_range(0..n_cells);
        state[flip] = !state[flip];
        let cand = evaluate_state(&state)?;
        let delta = cand.total - current.total;
        let accept = delta < 0.0 || rng.random::<f64>() < (-delta / temperature).exp();
        if accept {
            current = cand;
            if current.total < best_value {
                best_value = current.total;
                best_spectral = current.spectral;
                best_state = state.clone();
            }
        } else {
            state[flip] = !state[flip];
        }
        record(iter, &current, temperature, &mut trace);
        temperature *= cooling;
    }

    Ok(Chain {
        best_state,
        best_value,
        best_spectral,
        trace,
    })
}
