//! Run configuration: human-editable TOML in, fully resolved and persisted
//! JSON out. Unknown keys are errors; every default that resolution fills
//! in appears in the persisted document, so a run can always be reproduced
//! from its config.json alone.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::costs::{CostSpec, CostSpecG, CostSpecH, FormG, FormH};
use crate::domain::{GridDomain, PotentialField, SupportRegion};
use crate::error::{Error, Result};
use crate::families;
use crate::optimize::{AdmissibleSet, Method, OptimizerConfig};

/// Command-line overrides folded into the resolved configuration.
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub force: bool,
    pub strict: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBlock {
    pub d: usize,
    pub r: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportBlock {
    pub intervals: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialBlock {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostBlock {
    pub family: String,
    pub form: String,
    pub k: f64,
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<(f64, f64)>>,
    #[serde(rename = "m", skip_serializing_if = "Option::is_none")]
    pub m_const: Option<f64>,
    #[serde(rename = "c", skip_serializing_if = "Option::is_none")]
    pub c_const: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpBallBlock {
    pub p: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibleBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_ball: Option<LpBallBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerBlock {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_neg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_mult: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_neg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_mult: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lt_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keller_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clr_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub write_eigenvectors: Option<bool>,
}

impl Default for SolverBlock {
    fn default() -> Self {
        Self {
            tau_neg: None,
            k_max: None,
            eps_mult: None,
            phi_length: None,
            lt_p: None,
            keller_p: None,
            clr_q: None,
            write_eigenvectors: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lt_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keller_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clr_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_ns: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_rs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: PathBuf,
}

/// On-disk configuration schema. After resolution every optional block the
/// run touches is filled in and the struct is persisted as config.json.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub domain: DomainBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support: Option<SupportBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admissible: Option<AdmissibleBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputBlock>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse failure: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

/// Fully resolved solver settings.
#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    pub tau_neg: f64,
    pub k_max: usize,
    pub eps_mult: f64,
    pub phi_length: usize,
    pub lt_p: f64,
    pub keller_p: f64,
    pub clr_q: f64,
    pub write_eigenvectors: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifySettings {
    pub count: usize,
    pub seed: u64,
    pub lt_p: f64,
    pub keller_p: f64,
    pub clr_q: f64,
    pub slack: f64,
    pub tau_neg: f64,
    pub k_max: usize,
    pub eps_mult: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergeSettings {
    pub grid_ns: Vec<usize>,
    pub box_rs: Vec<f64>,
    pub frequencies: Vec<u32>,
    pub amplitude: f64,
    pub tau_neg: Option<f64>,
    pub k_max: usize,
}

/// A run configuration with every default filled in and all typed objects
/// constructed.
pub struct Resolved {
    pub domain: GridDomain,
    pub support: Option<Arc<SupportRegion>>,
    pub cost: Option<CostSpec>,
    pub admissible: Option<AdmissibleSet>,
    pub optimizer: Option<OptimizerConfig>,
    pub solver: SolverSettings,
    pub verify: VerifySettings,
    pub converge: ConvergeSettings,
    pub out_dir: PathBuf,
    pub force: bool,
    pub strict: bool,
    /// The filled configuration persisted as config.json.
    pub document: RunConfig,
}

impl Resolved {
    pub fn document_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.document)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| Error::Config(format!("serialization failure: {e}")))
    }

    /// Build the potential of the [potential] block on a given domain
    /// (converge re-samples families across grids).
    pub fn build_potential_on(&self, dom: &GridDomain) -> Result<PotentialField> {
        let block = self
            .document
            .potential
            .as_ref()
            .ok_or_else(|| Error::Config("a [potential] block is required".into()))?;
        build_potential(block, dom, &self.support_on(dom)?)
    }

    pub fn build_potential(&self) -> Result<PotentialField> {
        self.build_potential_on(&self.domain)
    }

    /// Support region re-homed onto another grid of the same box.
    fn support_on(&self, dom: &GridDomain) -> Result<Option<Arc<SupportRegion>>> {
        match &self.document.support {
            None => Ok(None),
            Some(block) => Ok(Some(Arc::new(SupportRegion::new(dom, &block.intervals)?))),
        }
    }

    pub fn require_support(&self) -> Result<&Arc<SupportRegion>> {
        self.support
            .as_ref()
            .ok_or_else(|| Error::Config("a [support] block is required for this command".into()))
    }
}

fn preset_blocks(name: &str) -> Result<(CostBlock, AdmissibleBlock, OptimizerBlock)> {
    let descent = |max_iters: usize| OptimizerBlock {
        method: "projected-descent".into(),
        max_iters: Some(max_iters),
        step0: None,
        restarts: Some(1),
        seed: None,
        t_start: None,
        t_end: None,
        cells: None,
        k_max: None,
        tau_neg: None,
        eps_mult: None,
    };
    match name {
        "example-E-count" => Ok((
            CostBlock {
                family: "h".into(),
                form: "indicator".into(),
                k: 1e-3,
                p: 1.5,
                e: Some((-0.6, -0.2)),
                j: None,
                sequence_length: None,
                knots: None,
                m_const: None,
                c_const: None,
            },
            AdmissibleBlock {
                bounds: Some((-1.0, 1.0)),
                sign: None,
                lp_ball: None,
            },
            OptimizerBlock {
                method: "annealing".into(),
                max_iters: Some(2000),
                step0: None,
                restarts: Some(1),
                seed: None,
                t_start: Some(1.0),
                t_end: Some(1e-2),
                cells: Some(8),
                k_max: None,
                tau_neg: None,
                eps_mult: None,
            },
        )),
        "example-LT" => Ok((
            CostBlock {
                family: "h".into(),
                form: "power".into(),
                k: 1e-3,
                p: 1.5,
                e: None,
                j: None,
                sequence_length: None,
                knots: None,
                m_const: None,
                c_const: None,
            },
            AdmissibleBlock {
                bounds: None,
                sign: Some("nonpositive".into()),
                lp_ball: Some(LpBallBlock {
                    p: 1.5,
                    radius: 1.0,
                }),
            },
            descent(150),
        )),
        "example-jth" => Ok((
            CostBlock {
                family: "g".into(),
                form: "jth".into(),
                k: 1e-3,
                p: 1.5,
                e: None,
                j: Some(1),
                sequence_length: Some(4),
                knots: None,
                m_const: None,
                c_const: None,
            },
            AdmissibleBlock {
                bounds: Some((-1.0, 0.0)),
                sign: Some("nonpositive".into()),
                lp_ball: None,
            },
            descent(150),
        )),
        "example-gap" => Ok((
            CostBlock {
                family: "g".into(),
                form: "gap".into(),
                k: 1e-3,
                p: 1.5,
                e: None,
                j: None,
                sequence_length: Some(4),
                knots: None,
                m_const: None,
                c_const: None,
            },
            AdmissibleBlock {
                bounds: Some((-1.0, 0.0)),
                sign: Some("nonpositive".into()),
                lp_ball: None,
            },
            descent(150),
        )),
        other => Err(Error::Config(format!(
            "unknown preset {other:?}; available: example-E-count, example-LT, example-jth, example-gap"
        ))),
    }
}

fn build_potential(
    block: &PotentialBlock,
    dom: &GridDomain,
    support: &Option<Arc<SupportRegion>>,
) -> Result<PotentialField> {
    let need_support = || {
        support
            .clone()
            .ok_or_else(|| Error::Config("this potential family needs a [support] block".into()))
    };
    match block.family.as_str() {
        "square-well" => {
            let depth = block
                .depth
                .ok_or_else(|| Error::Config("square-well needs depth".into()))?;
            let a = block
                .half_width
                .ok_or_else(|| Error::Config("square-well needs half_width".into()))?;
            families::square_well(dom, depth, a)
        }
        "delta" => {
            let eps = block
                .epsilon
                .ok_or_else(|| Error::Config("delta needs epsilon".into()))?;
            families::delta_family(dom, eps)
        }
        "random-bump" => {
            let seed = block
                .seed
                .ok_or_else(|| Error::Config("random-bump needs seed".into()))?;
            families::random_bump(&need_support()?, seed, &families::BumpParams::default())
        }
        "constant" => {
            let value = block
                .value
                .ok_or_else(|| Error::Config("constant needs value".into()))?;
            PotentialField::constant_on_support(need_support()?, value)
        }
        "inline" => {
            let values = block
                .values
                .clone()
                .ok_or_else(|| Error::Config("inline needs values".into()))?;
            PotentialField::new(need_support()?, values)
        }
        "file" => {
            let csv = block
                .csv
                .as_ref()
                .ok_or_else(|| Error::Config("file needs csv".into()))?;
            let meta = block
                .meta
                .as_ref()
                .ok_or_else(|| Error::Config("file needs meta".into()))?;
            let v = crate::io::read_potential(csv, meta)?;
            if v.domain() != dom {
                return Err(Error::Config(
                    "potential file was sampled on a different grid".into(),
                ));
            }
            Ok(v)
        }
        other => Err(Error::Config(format!(
            "unknown potential family {other:?}; available: square-well, delta, random-bump, constant, inline, file"
        ))),
    }
}

fn build_cost(block: &CostBlock, d: usize) -> Result<CostSpec> {
    let spec = match block.family.as_str() {
        "h" => {
            let form = match block.form.as_str() {
                "indicator" => {
                    let (e_min, e_max) = block
                        .e
                        .ok_or_else(|| Error::Config("indicator form needs e = [min, max]".into()))?;
                    FormH::Indicator { e_min, e_max }
                }
                "power" => FormH::Power,
                "table" => FormH::Table {
                    knots: block
                        .knots
                        .clone()
                        .ok_or_else(|| Error::Config("table form needs knots".into()))?,
                },
                other => {
                    return Err(Error::Config(format!(
                        "unknown h form {other:?}; available: indicator, power, table"
                    )))
                }
            };
            let mut spec = CostSpecH::new(form, block.k, block.p, d)
                .map_err(|e| Error::Config(e.to_string()))?;
            if let (Some(m), Some(c)) = (block.m_const, block.c_const) {
                spec = spec.with_constants(m, c);
            }
            CostSpec::H(spec)
        }
        "g" => {
            let len = block
                .sequence_length
                .ok_or_else(|| Error::Config("g family needs sequence_length".into()))?;
            let form = match block.form.as_str() {
                "jth" => FormG::Jth {
                    j: block
                        .j
                        .ok_or_else(|| Error::Config("jth form needs j".into()))?,
                },
                "gap" => FormG::Gap,
                "table" => FormG::Table {
                    j: block
                        .j
                        .ok_or_else(|| Error::Config("table form needs j".into()))?,
                    knots: block
                        .knots
                        .clone()
                        .ok_or_else(|| Error::Config("table form needs knots".into()))?,
                },
                other => {
                    return Err(Error::Config(format!(
                        "unknown g form {other:?}; available: jth, gap, table"
                    )))
                }
            };
            let mut spec = CostSpecG::new(form, len, block.k, block.p, d)
                .map_err(|e| Error::Config(e.to_string()))?;
            if let (Some(m), Some(c)) = (block.m_const, block.c_const) {
                spec = spec.with_constants(m, c);
            }
            CostSpec::G(spec)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown cost family {other:?}; available: h, g"
            )))
        }
    };
    Ok(spec)
}

fn build_admissible(
    block: &AdmissibleBlock,
    support: &Arc<SupportRegion>,
) -> Result<AdmissibleSet> {
    let mut set = AdmissibleSet::new(Arc::clone(support));
    if let Some((lo, hi)) = block.bounds {
        set = set.with_bounds(lo, hi).map_err(|e| Error::Config(e.to_string()))?;
    }
    match block.sign.as_deref() {
        None => {}
        Some("nonpositive") => set = set.with_nonpositive(),
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown sign constraint {other:?}; only \"nonpositive\" is supported"
            )))
        }
    }
    if let Some(ball) = &block.lp_ball {
        set = set
            .with_lp_ball(ball.p, ball.radius)
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(set)
}

fn build_optimizer(block: &OptimizerBlock, default_tau: f64) -> Result<OptimizerConfig> {
    let method = match block.method.as_str() {
        "projected-descent" => Method::ProjectedDescent,
        "annealing" => Method::Annealing,
        "brute-force" => Method::BruteForce,
        other => {
            return Err(Error::Config(format!(
                "unknown method {other:?}; available: projected-descent, annealing, brute-force"
            )))
        }
    };
    let mut cfg = OptimizerConfig::new(method, block.tau_neg.unwrap_or(default_tau));
    if let Some(v) = block.max_iters {
        cfg.max_iters = v;
    }
    cfg.step0 = block.step0;
    if let Some(v) = block.restarts {
        cfg.restarts = v;
    }
    if let Some(v) = block.seed {
        cfg.seed = v;
    }
    if let Some(v) = block.t_start {
        cfg.t_start = v;
    }
    if let Some(v) = block.t_end {
        cfg.t_end = v;
    }
    if let Some(v) = block.cells {
        cfg.cells_per_axis = v;
    }
    if let Some(v) = block.k_max {
        cfg.k_max = v;
    }
    if let Some(v) = block.eps_mult {
        cfg.eps_mult = v;
    }
    cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(cfg)
}

/// Resolve a parsed config: expand the preset, fill every default, apply
/// command-line overrides, and construct the typed objects.
pub fn resolve(mut config: RunConfig, cli: &CliOverrides) -> Result<Resolved> {
    // preset expansion fills only the blocks the user left out
    if let Some(name) = config.preset.clone() {
        let (cost, admissible, optimizer) = preset_blocks(&name)?;
        config.cost.get_or_insert(cost);
        config.admissible.get_or_insert(admissible);
        config.optimizer.get_or_insert(optimizer);
    }

    let domain = GridDomain::new(config.domain.d, config.domain.r, config.domain.n)
        .map_err(|e| Error::Config(e.to_string()))?;
    let d = domain.dimension();
    let default_tau = domain.default_tau_neg();

    let support = match &config.support {
        None => None,
        Some(block) => Some(Arc::new(
            SupportRegion::new(&domain, &block.intervals)
                .map_err(|e| Error::Config(e.to_string()))?,
        )),
    };

    // fill solver defaults
    let mut solver_block = config.solver.take().unwrap_or_default();
    let lt_p = solver_block.lt_p.unwrap_or(d as f64 / 2.0 + 1.0);
    solver_block.lt_p = Some(lt_p);
    solver_block.keller_p = Some(solver_block.keller_p.unwrap_or(lt_p));
    solver_block.clr_q = Some(solver_block.clr_q.unwrap_or((d as f64 / 2.0).max(1.5)));
    solver_block.tau_neg = Some(solver_block.tau_neg.unwrap_or(default_tau));
    solver_block.k_max = Some(solver_block.k_max.unwrap_or(64));
    solver_block.eps_mult = Some(
        solver_block
            .eps_mult
            .unwrap_or(crate::spectrum::DEFAULT_EPS_MULT),
    );
    solver_block.phi_length = Some(solver_block.phi_length.unwrap_or(8));
    solver_block.write_eigenvectors = Some(solver_block.write_eigenvectors.unwrap_or(false));
    let solver = SolverSettings {
        tau_neg: solver_block.tau_neg.unwrap(),
        k_max: solver_block.k_max.unwrap(),
        eps_mult: solver_block.eps_mult.unwrap(),
        phi_length: solver_block.phi_length.unwrap(),
        lt_p: solver_block.lt_p.unwrap(),
        keller_p: solver_block.keller_p.unwrap(),
        clr_q: solver_block.clr_q.unwrap(),
        write_eigenvectors: solver_block.write_eigenvectors.unwrap(),
    };
    if !(solver.tau_neg <= 0.0) {
        return Err(Error::Config(format!(
            "solver cutoff must satisfy τ ≤ 0, got {}",
            solver.tau_neg
        )));
    }
    config.solver = Some(solver_block);

    // optimizer
    let optimizer = match &mut config.optimizer {
        None => None,
        Some(block) => {
            if let Some(seed) = cli.seed {
                block.seed = Some(seed);
            }
            let cfg = build_optimizer(block, default_tau)?;
            // write the resolved values back into the document
            block.max_iters = Some(cfg.max_iters);
            block.restarts = Some(cfg.restarts);
            block.seed = Some(cfg.seed);
            block.t_start = Some(cfg.t_start);
            block.t_end = Some(cfg.t_end);
            block.cells = Some(cfg.cells_per_axis);
            block.k_max = Some(cfg.k_max);
            block.tau_neg = Some(cfg.tau_neg);
            block.eps_mult = Some(cfg.eps_mult);
            Some(cfg)
        }
    };

    // cost and admissible set
    let cost = match &config.cost {
        None => None,
        Some(block) => Some(build_cost(block, d)?),
    };
    let admissible = match &config.admissible {
        None => None,
        Some(block) => {
            let sup = support.as_ref().ok_or_else(|| {
                Error::Config("an [admissible] block needs a [support] block".into())
            })?;
            Some(build_admissible(block, sup)?)
        }
    };

    // verify defaults
    let mut verify_block = config.verify.take().unwrap_or(VerifyBlock {
        count: None,
        seed: None,
        lt_p: None,
        keller_p: None,
        clr_q: None,
        slack: None,
    });
    if let Some(seed) = cli.seed {
        verify_block.seed = Some(seed);
    }
    verify_block.count = Some(verify_block.count.unwrap_or(50));
    verify_block.seed = Some(verify_block.seed.unwrap_or(0));
    verify_block.lt_p = Some(verify_block.lt_p.unwrap_or(solver.lt_p));
    verify_block.keller_p = Some(verify_block.keller_p.unwrap_or(solver.keller_p));
    verify_block.clr_q = Some(verify_block.clr_q.unwrap_or(solver.clr_q));
    verify_block.slack = Some(verify_block.slack.unwrap_or(0.05));
    let verify = VerifySettings {
        count: verify_block.count.unwrap(),
        seed: verify_block.seed.unwrap(),
        lt_p: verify_block.lt_p.unwrap(),
        keller_p: verify_block.keller_p.unwrap(),
        clr_q: verify_block.clr_q.unwrap(),
        slack: verify_block.slack.unwrap(),
        tau_neg: solver.tau_neg,
        k_max: solver.k_max,
        eps_mult: solver.eps_mult,
    };
    config.verify = Some(verify_block);

    // converge defaults
    let mut converge_block = config.converge.take().unwrap_or(ConvergeBlock {
        grid_ns: None,
        box_rs: None,
        frequencies: None,
        amplitude: None,
    });
    converge_block.grid_ns = Some(
        converge_block
            .grid_ns
            .unwrap_or_else(|| vec![255, 511, 1023, 2047]),
    );
    converge_block.box_rs = Some(converge_block.box_rs.unwrap_or_else(|| vec![4.0, 8.0, 16.0]));
    converge_block.frequencies = Some(
        converge_block
            .frequencies
            .unwrap_or_else(|| vec![2, 4, 8, 16, 32]),
    );
    converge_block.amplitude = Some(converge_block.amplitude.unwrap_or(1.0));
    let converge = ConvergeSettings {
        grid_ns: converge_block.grid_ns.clone().unwrap(),
        box_rs: converge_block.box_rs.clone().unwrap(),
        frequencies: converge_block.frequencies.clone().unwrap(),
        amplitude: converge_block.amplitude.unwrap(),
        tau_neg: solver_block_tau(&config),
        k_max: solver.k_max,
    };
    config.converge = Some(converge_block);

    // output directory
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| config.output.as_ref().map(|o| o.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    config.output = Some(OutputBlock {
        dir: out_dir.clone(),
    });

    Ok(Resolved {
        domain,
        support,
        cost,
        admissible,
        optimizer,
        solver,
        verify,
        converge,
        out_dir,
        force: cli.force,
        strict: cli.strict,
        document: config,
    })
}

fn solver_block_tau(config: &RunConfig) -> Option<f64> {
    config.solver.as_ref().and_then(|s| s.tau_neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [domain]
        d = 1
        r = 8.0
        n = 255

        [support]
        intervals = [[-1.0, 1.0]]

        [potential]
        family = "square-well"
        depth = 1.0
        half_width = 1.0
    "#;

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let cfg = RunConfig::from_toml_str(MINIMAL).unwrap();
        let r = resolve(cfg, &CliOverrides::default()).unwrap();
        assert_eq!(r.solver.k_max, 64);
        assert_eq!(r.solver.phi_length, 8);
        assert!(r.solver.tau_neg < 0.0);
        // every resolved default lands in the persisted document
        let doc = r.document_json().unwrap();
        assert!(doc.contains("\"k_max\": 64"), "{doc}");
        assert!(doc.contains("\"phi_length\": 8"));
        assert!(doc.contains("\"dir\""));
    }

    #[test]
    fn unknown_keys_are_errors() {
        let bad = format!("{MINIMAL}\nnot_a_key = 1\n");
        assert!(RunConfig::from_toml_str(&bad).is_err());
        let bad2 = MINIMAL.replace("[potential]", "[potential]\nwobble = 2");
        assert!(RunConfig::from_toml_str(&bad2).is_err());
    }

    #[test]
    fn preset_expands_and_user_blocks_win() {
        let text = format!("preset = \"example-gap\"\n{MINIMAL}");
        let cfg = RunConfig::from_toml_str(&text).unwrap();
        let r = resolve(cfg, &CliOverrides::default()).unwrap();
        assert!(matches!(r.cost, Some(CostSpec::G(_))));
        assert!(r.admissible.is_some());
        let opt = r.optimizer.unwrap();
        assert_eq!(opt.method, Method::ProjectedDescent);

        // explicit optimizer block overrides the preset's
        let text2 = format!(
            "preset = \"example-gap\"\n{MINIMAL}\n[optimizer]\nmethod = \"annealing\"\nseed = 3\n"
        );
        let cfg2 = RunConfig::from_toml_str(&text2).unwrap();
        let r2 = resolve(cfg2, &CliOverrides::default()).unwrap();
        assert_eq!(r2.optimizer.unwrap().method, Method::Annealing);
    }

    #[test]
    fn cli_seed_override_lands_in_document() {
        let text = format!("preset = \"example-gap\"\n{MINIMAL}");
        let cfg = RunConfig::from_toml_str(&text).unwrap();
        let cli = CliOverrides {
            seed: Some(99),
            ..Default::default()
        };
        let r = resolve(cfg, &cli).unwrap();
        assert_eq!(r.optimizer.as_ref().unwrap().seed, 99);
        assert!(r.document_json().unwrap().contains("\"seed\": 99"));
    }

    #[test]
    fn malformed_cost_block_is_config_error() {
        let text = format!(
            "{MINIMAL}\n[cost]\nfamily = \"h\"\nform = \"power\"\nk = -1.0\np = 1.5\n"
        );
        let cfg = RunConfig::from_toml_str(&text).unwrap();
        assert!(matches!(
            resolve(cfg, &CliOverrides::default()),
            Err(Error::Config(_))
        ));
    }
}
