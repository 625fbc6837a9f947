//! File formats: potential exchange (CSV values + JSON sidecar), spectrum
//! and trace CSVs, eigenvector binary dumps, and run-record persistence.
//! All writes go through a write-temp-then-rename step; floats are printed
//! with the shortest round-trip representation, so re-reading reproduces
//! the exact bits.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{GridDomain, PotentialField, SupportRegion};
use crate::error::{Error, Result};
use crate::inequalities::RatioReport;
use crate::optimize::{ProbeTable, RunRecord};
use crate::spectrum::{NegativeSpectrum, PhiSequence};

/// Write atomically: temp file in the same directory, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serialization failure: {e}")))?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

/// Sidecar metadata of the potential exchange format.
#[derive(Debug, Serialize, Deserialize)]
pub struct PotentialMeta {
    pub dimension: usize,
    pub half_width: f64,
    pub points_per_axis: usize,
    pub support_intervals: Vec<(f64, f64)>,
}

/// Write a potential as a coordinate/value CSV plus a JSON sidecar.
pub fn write_potential(csv_path: &Path, meta_path: &Path, v: &PotentialField) -> Result<()> {
    let dom = v.domain();
    let mut out = String::new();
    let headers = ["x1", "x2", "x3"];
    out.push_str(&headers[..dom.dimension()].join(","));
    out.push_str(",value\n");
    for (i, &val) in v.values().iter().enumerate() {
        let xs = dom.node_coords(i);
        for x in xs.iter().take(dom.dimension()) {
            out.push_str(&format!("{x},"));
        }
        out.push_str(&format!("{val}\n"));
    }
    atomic_write(csv_path, out.as_bytes())?;
    write_json(
        meta_path,
        &PotentialMeta {
            dimension: dom.dimension(),
            half_width: dom.half_width(),
            points_per_axis: dom.points_per_axis(),
            support_intervals: v.support().intervals().to_vec(),
        },
    )
}

/// Read a potential written by [`write_potential`]; values round-trip
/// bit-exactly.
pub fn read_potential(csv_path: &Path, meta_path: &Path) -> Result<PotentialField> {
    let meta: PotentialMeta = serde_json::from_str(&std::fs::read_to_string(meta_path)?)
        .map_err(|e| Error::Config(format!("bad potential sidecar: {e}")))?;
    let dom = GridDomain::new(meta.dimension, meta.half_width, meta.points_per_axis)?;
    let support = Arc::new(SupportRegion::new(&dom, &meta.support_intervals)?);

    let text = std::fs::read_to_string(csv_path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("empty potential file".into()))?;
    let cols = header.split(',').count();
    if cols != dom.dimension() + 1 {
        return Err(Error::Config(format!(
            "expected {} columns, header has {cols}",
            dom.dimension() + 1
        )));
    }
    let mut values = Vec::with_capacity(dom.node_count());
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let last = line
            .rsplit(',')
            .next()
            .ok_or_else(|| Error::Config("malformed potential row".into()))?;
        values.push(
            last.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad value {last:?}: {e}")))?,
        );
    }
    PotentialField::new(support, values)
}

/// Spectrum CSV: index, eigenvalue, multiplicity-cluster id, residual.
pub fn write_spectrum_csv(path: &Path, s: &NegativeSpectrum) -> Result<()> {
    let mut cluster_of = Vec::with_capacity(s.len());
    for (cid, range) in crate::spectrum::cluster_ranges(s.eigenvalues(), s.eps_mult())
        .into_iter()
        .enumerate()
    {
        for _ in range {
            cluster_of.push(cid);
        }
    }
    let mut out = String::from("index,eigenvalue,cluster,residual\n");
    for i in 0..s.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i,
            s.eigenvalue(i),
            cluster_of[i],
            s.residuals()[i]
        ));
    }
    atomic_write(path, out.as_bytes())
}

/// Zero-padded sequence export.
pub fn write_phi_json(path: &Path, phi: &PhiSequence) -> Result<()> {
    #[derive(Serialize)]
    struct PhiOut<'a> {
        length: usize,
        entries: &'a [f64],
    }
    write_json(
        path,
        &PhiOut {
            length: phi.len(),
            entries: phi.entries(),
        },
    )
}

/// Eigenvectors as a little-endian f64 binary array with a JSON header.
pub fn write_eigenvectors(bin_path: &Path, header_path: &Path, s: &NegativeSpectrum) -> Result<()> {
    #[derive(Serialize)]
    struct VecHeader {
        shape: [usize; 2],
        spacing: f64,
        endianness: &'static str,
    }
    let n = s.domain().node_count();
    let mut bytes = Vec::with_capacity(8 * n * s.len());
    for i in 0..s.len() {
        for &u in s.eigenvector(i) {
            bytes.extend_from_slice(&u.to_le_bytes());
        }
    }
    atomic_write(bin_path, &bytes)?;
    write_json(
        header_path,
        &VecHeader {
            shape: [s.len(), n],
            spacing: s.domain().spacing(),
            endianness: "little",
        },
    )
}

/// One inequality report entry of ratios.json; `status` distinguishes
/// computed ratios from dimensionally inapplicable ones.
#[derive(Debug, Serialize)]
pub struct RatioOutcome {
    pub name: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<RatioReport>,
}

pub fn write_ratios_json(path: &Path, outcomes: &[RatioOutcome]) -> Result<()> {
    write_json(path, &outcomes)
}

/// Convergence-study row; empty fields stay empty in the CSV.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub study: String,
    pub parameter: f64,
    pub lambda1: f64,
    pub delta: Option<f64>,
    pub observed_order: Option<f64>,
}

pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let mut out = String::from("study,parameter,lambda1,delta,observed_order\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.study,
            r.parameter,
            r.lambda1,
            r.delta.map(|d| d.to_string()).unwrap_or_default(),
            r.observed_order.map(|o| o.to_string()).unwrap_or_default()
        ));
    }
    atomic_write(path, out.as_bytes())
}

pub fn write_probe_json(path: &Path, table: &ProbeTable) -> Result<()> {
    write_json(path, table)
}

/// SHA-256 hex digest of a byte string (config hashing).
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config_sha256: &'a str,
    seed: u64,
    method: crate::optimize::Method,
    status: crate::optimize::RunStatus,
    best_objective: f64,
    best_spectral: f64,
    iterations: usize,
    ties: &'a [u64],
    wall_secs: f64,
}

/// Persist a run record directory: trace.csv, best_potential.csv (+ meta),
/// spectrum.csv of the best iterate, manifest.json. The caller provides the
/// resolved config JSON (written as config.json) whose digest keys the
/// manifest.
pub fn persist_run(
    dir: &Path,
    record: &RunRecord,
    resolved_config_json: &str,
    best_spectrum: Option<&NegativeSpectrum>,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    atomic_write(&dir.join("config.json"), resolved_config_json.as_bytes())?;

    let mut trace = String::from(
        "iter,objective,spectral,feasibility,lambda_min,negative_count,control\n",
    );
    for r in &record.iterations {
        trace.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.iter,
            r.objective,
            r.spectral,
            r.feasibility,
            r.lambda_min.map(|l| l.to_string()).unwrap_or_default(),
            r.negative_count,
            r.control
        ));
    }
    atomic_write(&dir.join("trace.csv"), trace.as_bytes())?;

    write_potential(
        &dir.join("best_potential.csv"),
        &dir.join("best_potential.json"),
        &record.best_potential,
    )?;

    if let Some(s) = best_spectrum {
        write_spectrum_csv(&dir.join("spectrum.csv"), s)?;
    }

    let manifest = Manifest {
        tool: "spo",
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: &sha256_hex(resolved_config_json.as_bytes()),
        seed: record.seed,
        method: record.method,
        status: record.status,
        best_objective: record.best_objective,
        best_spectral: record.best_spectral,
        iterations: record.iterations.len(),
        ties: &record.ties,
        wall_secs: record.wall_secs,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(dir.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_domain;

    #[test]
    fn potential_roundtrip_is_exact() {
        let dom = build_domain(1, 4.0, 63).unwrap();
        let sup = Arc::new(SupportRegion::new(&dom, &[(-1.0, 1.0)]).unwrap());
        let v = PotentialField::from_fn(sup, |x| -((x[0] * 37.1).sin().abs() + 1e-13)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("v.csv");
        let meta = dir.path().join("v.json");
        write_potential(&csv, &meta, &v).unwrap();
        let back = read_potential(&csv, &meta).unwrap();
        assert_eq!(v, back, "round-trip must preserve bits");
    }

    #[test]
    fn sha_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
