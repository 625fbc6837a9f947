//! Command implementations behind the `spo` binary: solve, optimize,
//! verify, converge. Each takes a fully resolved configuration, writes its
//! artifacts under the output directory and returns a printable summary.
//! The binary maps error classes onto the stable exit-code contract
//! (0 ok, 2 configuration, 3 solver non-convergence, 4 hypothesis gate).

use std::path::PathBuf;

use serde::Serialize;

use crate::config::Resolved;
use crate::costs::check_hypotheses;
use crate::domain::{build_hamiltonian, PotentialField};
use crate::error::{Error, Result};
use crate::families::{self, BumpParams};
use crate::inequalities::{
    clr_ratio, keller_ratio, lt_ratio, ConstantsRegistry, InequalityKind,
};
use crate::io::{self, ConvergenceRow, RatioOutcome};
use crate::optimize::{
    anneal_bang_bang, brute_force, projected_descent, weak_convergence_probe, CellPartition,
    CostEvaluator, Method, RunRecord,
};
use crate::spectrum::{cluster_multiplicities, negative_eigenpairs, phi_map, NegativeSpectrum};

/// Map an error onto the exit-code contract.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidDomain(_)
        | Error::InvalidSupport(_)
        | Error::InvalidPotential(_)
        | Error::InvalidArgument(_)
        | Error::InvalidCostSpec(_)
        | Error::Registry(_)
        | Error::NotApplicable(_) => 2,
        Error::NoConvergence(_)
        | Error::CountMismatch(_)
        | Error::ShiftHitsSpectrum { .. }
        | Error::NoBoundState(_) => 3,
        Error::HypothesisRejected(_) => 4,
        Error::NonsmoothPoint(_) | Error::Infeasible(_) | Error::Io(_) => 1,
    }
}

#[derive(Debug, Serialize)]
pub struct SolveSummary {
    pub negative_count: usize,
    pub lambda_min: Option<f64>,
    pub out_dir: PathBuf,
}

/// Solve the spectrum of the configured potential and export spectrum.csv,
/// ratios.json and the zero-padded sequence.
pub fn cmd_solve(resolved: &Resolved) -> Result<SolveSummary> {
    let v = resolved.build_potential()?;
    let h = build_hamiltonian(&v, &resolved.domain)?;
    let s = negative_eigenpairs(&h, resolved.solver.tau_neg, resolved.solver.k_max)?
        .with_eps_mult(resolved.solver.eps_mult);
    let mu = cluster_multiplicities(&s);
    let phi = phi_map(&s, resolved.solver.phi_length)?;
    let registry = ConstantsRegistry::from_env_or_default()?;

    let out = &resolved.out_dir;
    std::fs::create_dir_all(out)?;
    io::atomic_write(
        &out.join("config.json"),
        resolved.document_json()?.as_bytes(),
    )?;
    io::write_spectrum_csv(&out.join("spectrum.csv"), &s)?;
    io::write_phi_json(&out.join("phi.json"), &phi)?;
    if resolved.solver.write_eigenvectors {
        io::write_eigenvectors(&out.join("vectors.bin"), &out.join("vectors.json"), &s)?;
    }

    let mut outcomes = Vec::new();
    match lt_ratio(&v, &mu, resolved.solver.lt_p, Some(&registry)) {
        Ok(rep) => outcomes.push(RatioOutcome {
            name: "lieb-thirring".into(),
            status: "ok".into(),
            report: Some(rep),
        }),
        Err(e) => outcomes.push(RatioOutcome {
            name: "lieb-thirring".into(),
            status: e.to_string(),
            report: None,
        }),
    }
    match keller_ratio(&v, &s, resolved.solver.keller_p, Some(&registry)) {
        Ok(rep) => outcomes.push(RatioOutcome {
            name: "keller".into(),
            status: "ok".into(),
            report: Some(rep),
        }),
        Err(Error::NoBoundState(_)) => outcomes.push(RatioOutcome {
            name: "keller".into(),
            status: "no bound state".into(),
            report: None,
        }),
        Err(e) => return Err(e),
    }
    if resolved.domain.dimension() >= 3 {
        match clr_ratio(&v, &s, resolved.solver.clr_q, Some(&registry)) {
            Ok(rep) => outcomes.push(RatioOutcome {
                name: "clr".into(),
                status: "ok".into(),
                report: Some(rep),
            }),
            Err(e) => outcomes.push(RatioOutcome {
                name: "clr".into(),
                status: e.to_string(),
                report: None,
            }),
        }
    } else {
        outcomes.push(RatioOutcome {
            name: "clr".into(),
            status: format!("not applicable, d<3 (d = {})", resolved.domain.dimension()),
            report: None,
        });
    }
    io::write_ratios_json(&out.join("ratios.json"), &outcomes)?;

    Ok(SolveSummary {
        negative_count: s.len(),
        lambda_min: s.lambda1(),
        out_dir: out.clone(),
    })
}

#[derive(Debug, Serialize)]
pub struct OptimizeSummary {
    pub method: Method,
    pub best_objective: f64,
    pub best_spectral: f64,
    pub status: crate::optimize::RunStatus,
    pub iterations: usize,
    pub ties: usize,
    pub out_dir: PathBuf,
    pub hypothesis_waived: bool,
}

/// Run the configured optimization after the hypothesis gate and persist
/// the run record.
pub fn cmd_optimize(resolved: &Resolved) -> Result<OptimizeSummary> {
    let cost = resolved
        .cost
        .as_ref()
        .ok_or_else(|| Error::Config("a [cost] block (or preset) is required".into()))?;
    let set = resolved
        .admissible
        .as_ref()
        .ok_or_else(|| Error::Config("an [admissible] block (or preset) is required".into()))?;
    let opt_cfg = resolved
        .optimizer
        .as_ref()
        .ok_or_else(|| Error::Config("an [optimizer] block (or preset) is required".into()))?;

    let registry = ConstantsRegistry::from_env_or_default()?;
    let report = check_hypotheses(cost, resolved.domain.dimension(), &registry)?;
    // A set with pointwise bounds or an explicit ball keeps minimizing
    // sequences bounded in L^p on its own, so the growth-based coercivity
    // check is waived for constrained problems.
    let lp_bounded = set.bounds().is_some() || set.lp_ball().is_some();
    let hypothesis_waived = !report.passed() && lp_bounded;
    if !report.passed() && !lp_bounded && !resolved.force {
        return Err(Error::HypothesisRejected(report.to_string()));
    }

    let start = match &resolved.document.potential {
        Some(_) => resolved.build_potential()?,
        None => {
            let level = match set.bounds() {
                Some((lo, _)) => lo / 2.0,
                None => -1.0,
            };
            PotentialField::constant_on_support(std::sync::Arc::clone(set.support()), level)?
        }
    };
    let start = set.project(&start)?;

    let record: RunRecord = match opt_cfg.method {
        Method::ProjectedDescent => projected_descent(cost, set, &start, opt_cfg)?,
        Method::Annealing => anneal_bang_bang(cost, set, opt_cfg)?,
        Method::BruteForce => {
            let partition = CellPartition::new(set.support(), opt_cfg.cells_per_axis)?;
            brute_force(cost, set, &partition, opt_cfg)?
        }
    };

    // spectrum of the best potential through the production path
    let best_h = build_hamiltonian(&record.best_potential, &resolved.domain)?;
    let best_spectrum =
        negative_eigenpairs(&best_h, opt_cfg.tau_neg, opt_cfg.k_max)?.with_eps_mult(opt_cfg.eps_mult);

    io::persist_run(
        &resolved.out_dir,
        &record,
        &resolved.document_json()?,
        Some(&best_spectrum),
    )?;

    Ok(OptimizeSummary {
        method: record.method,
        best_objective: record.best_objective,
        best_spectral: record.best_spectral,
        status: record.status,
        iterations: record.iterations.len(),
        ties: record.ties.len(),
        out_dir: resolved.out_dir.clone(),
        hypothesis_waived,
    })
}

#[derive(Debug, Serialize)]
pub struct Finding {
    pub seed: u64,
    pub kind: String,
    pub exponent: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    pub exceeded: bool,
    pub note: String,
}

#[derive(Debug, Serialize)]
pub struct VerifySummary {
    pub cases: usize,
    pub findings: usize,
    pub exceeded: usize,
    pub out_dir: PathBuf,
}

/// Randomized-potential ratio sweep plus hypothesis checks; ratio
/// violations are findings (data), not failures.
pub fn cmd_verify(resolved: &Resolved) -> Result<VerifySummary> {
    let support = resolved.require_support()?;
    let registry = ConstantsRegistry::from_env_or_default()?;
    let vs = resolved.verify;
    let mut findings: Vec<Finding> = Vec::new();

    let ratio_finding =
        |seed: u64, kind: InequalityKind, name: &str, rep: crate::inequalities::RatioReport| {
            let exceeded = rep
                .constant
                .map(|c| rep.ratio > c * (1.0 + vs.slack))
                .unwrap_or(false);
            Finding {
                seed,
                kind: name.into(),
                exponent: rep.exponent,
                ratio: Some(rep.ratio),
                constant: rep.constant,
                exceeded,
                note: if rep.constant.is_none() {
                    format!("no registry constant configured for {kind:?}")
                } else {
                    String::new()
                },
            }
        };

    for i in 0..vs.count {
        let seed = vs.seed.wrapping_add(i as u64);
        let v = families::random_bump(support, seed, &BumpParams::default())?;
        let h = build_hamiltonian(&v, &resolved.domain)?;
        let s = negative_eigenpairs(&h, vs.tau_neg, vs.k_max)?.with_eps_mult(vs.eps_mult);
        let mu = cluster_multiplicities(&s);

        if crate::inequalities::negative_part_norm(&v, vs.lt_p)? == 0.0 {
            findings.push(Finding {
                seed,
                kind: "skipped".into(),
                exponent: vs.lt_p,
                ratio: None,
                constant: None,
                exceeded: false,
                note: "potential has no negative part".into(),
            });
            continue;
        }

        let lt = lt_ratio(&v, &mu, vs.lt_p, Some(&registry))?;
        findings.push(ratio_finding(seed, InequalityKind::LiebThirring, "lieb-thirring", lt));
        match keller_ratio(&v, &s, vs.keller_p, Some(&registry)) {
            Ok(rep) => findings.push(ratio_finding(seed, InequalityKind::Keller, "keller", rep)),
            Err(Error::NoBoundState(_)) => findings.push(Finding {
                seed,
                kind: "keller".into(),
                exponent: vs.keller_p,
                ratio: None,
                constant: None,
                exceeded: false,
                note: "no bound state".into(),
            }),
            Err(e) => return Err(e),
        }
        if resolved.domain.dimension() >= 3 {
            let rep = clr_ratio(&v, &s, vs.clr_q, Some(&registry))?;
            findings.push(ratio_finding(seed, InequalityKind::Clr, "clr", rep));
        }
    }

    if let Some(cost) = &resolved.cost {
        let report = check_hypotheses(cost, resolved.domain.dimension(), &registry)?;
        findings.push(Finding {
            seed: 0,
            kind: "hypotheses".into(),
            exponent: cost.p(),
            ratio: None,
            constant: None,
            exceeded: !report.passed(),
            note: report.to_string(),
        });
    }

    let out = &resolved.out_dir;
    std::fs::create_dir_all(out)?;
    io::atomic_write(
        &out.join("config.json"),
        resolved.document_json()?.as_bytes(),
    )?;
    io::write_json(&out.join("findings.json"), &findings)?;

    let exceeded = findings.iter().filter(|f| f.exceeded).count();
    Ok(VerifySummary {
        cases: vs.count,
        findings: findings.len(),
        exceeded,
        out_dir: out.clone(),
    })
}

#[derive(Debug, Serialize)]
pub struct ConvergeSummary {
    pub grid_levels: usize,
    pub box_levels: usize,
    pub probe_frequencies: usize,
    pub out_dir: PathBuf,
}

/// Grid-refinement, box-growth and weak-convergence studies; emits
/// convergence.csv with observed orders measured on successive refinement
/// differences (the box-truncation error is level-independent and cancels).
pub fn cmd_converge(resolved: &Resolved) -> Result<ConvergeSummary> {
    let cs = &resolved.converge;
    let mut rows: Vec<ConvergenceRow> = Vec::new();

    let solve_lambda1 = |v: &PotentialField, tau: f64| -> Result<Option<f64>> {
        let h = build_hamiltonian(v, v.domain())?;
        let s = negative_eigenpairs(&h, tau, resolved.converge.k_max)?;
        Ok(s.lambda1())
    };

    // grid refinement at fixed box size
    let mut grid_lams: Vec<(usize, f64)> = Vec::new();
    for &n in &cs.grid_ns {
        let dom = crate::domain::build_domain(
            resolved.domain.dimension(),
            resolved.domain.half_width(),
            n,
        )?;
        let v = resolved.build_potential_on(&dom)?;
        let tau = cs.tau_neg.unwrap_or(dom.default_tau_neg());
        if let Some(lam) = solve_lambda1(&v, tau)? {
            grid_lams.push((n, lam));
        }
    }
    for (i, &(n, lam)) in grid_lams.iter().enumerate() {
        let delta = (i > 0).then(|| (lam - grid_lams[i - 1].1).abs());
        let observed_order = if i >= 2 {
            let d1 = (grid_lams[i - 1].1 - grid_lams[i - 2].1).abs();
            let d2 = (lam - grid_lams[i - 1].1).abs();
            (d1 > 0.0 && d2 > 0.0).then(|| (d1 / d2).log2())
        } else {
            None
        };
        rows.push(ConvergenceRow {
            study: "grid".into(),
            parameter: n as f64,
            lambda1: lam,
            delta,
            observed_order,
        });
    }

    // box growth at comparable resolution (n scales with R)
    let base_r = resolved.domain.half_width();
    let base_n = resolved.domain.points_per_axis();
    let mut prev: Option<f64> = None;
    let mut box_levels = 0;
    for &r in &cs.box_rs {
        let n = (((base_n + 1) as f64 * r / base_r).round() as usize).saturating_sub(1).max(8);
        let dom = crate::domain::build_domain(resolved.domain.dimension(), r, n)?;
        let v = resolved.build_potential_on(&dom)?;
        let tau = cs.tau_neg.unwrap_or(dom.default_tau_neg());
        if let Some(lam) = solve_lambda1(&v, tau)? {
            rows.push(ConvergenceRow {
                study: "box".into(),
                parameter: r,
                lambda1: lam,
                delta: prev.map(|p| (lam - p).abs()),
                observed_order: None,
            });
            prev = Some(lam);
            box_levels += 1;
        }
    }

    // weak-convergence probe on the base grid
    let v = resolved.build_potential()?;
    let tau = cs.tau_neg.unwrap_or(resolved.domain.default_tau_neg());
    let table = weak_convergence_probe(&v, &cs.frequencies, cs.amplitude, tau, cs.k_max)?;
    for row in &table.rows {
        rows.push(ConvergenceRow {
            study: "weak".into(),
            parameter: row.frequency as f64,
            lambda1: row.eigenvalues.first().copied().unwrap_or(0.0),
            delta: row.deviations.first().copied(),
            observed_order: None,
        });
    }

    let out = &resolved.out_dir;
    std::fs::create_dir_all(out)?;
    io::atomic_write(
        &out.join("config.json"),
        resolved.document_json()?.as_bytes(),
    )?;
    io::write_convergence_csv(&out.join("convergence.csv"), &rows)?;
    io::write_probe_json(&out.join("probe.json"), &table)?;

    Ok(ConvergeSummary {
        grid_levels: grid_lams.len(),
        box_levels,
        probe_frequencies: table.rows.len(),
        out_dir: out.clone(),
    })
}

/// Spectrum of a potential via the production path (shared by examples).
pub fn solve_spectrum(
    v: &PotentialField,
    tau_neg: f64,
    k_max: usize,
) -> Result<NegativeSpectrum> {
    let h = build_hamiltonian(v, v.domain())?;
    negative_eigenpairs(&h, tau_neg, k_max)
}

/// Production-path cost evaluation helper used by examples and tests.
pub fn evaluate_cost(
    spec: &crate::costs::CostSpec,
    v: &PotentialField,
    tau_neg: f64,
    k_max: usize,
) -> Result<crate::costs::CostValue> {
    let eval = CostEvaluator::new(spec, tau_neg, k_max, crate::spectrum::DEFAULT_EPS_MULT);
    Ok(eval.evaluate(v)?.1)
}
