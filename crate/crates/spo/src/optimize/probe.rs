//! Weak-convergence probe: oscillatory modulations V_n = V·(1 + a·sin(nπx₁/R))
//! converge weakly (not strongly) to V as the frequency grows, and the
//! negative eigenvalues must follow. The probe tabulates |λ_i(V_n) − λ_i(V)|
//! per frequency at desk scale.

use std::sync::Arc;

use serde::Serialize;

use crate::domain::{build_hamiltonian, PotentialField};
use crate::error::{Error, Result};
use crate::spectrum::negative_eigenpairs;

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub frequency: u32,
    pub eigenvalues: Vec<f64>,
    /// |λ_i(V_n) − λ_i(V)| for i up to the common count.
    pub deviations: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeTable {
    pub base_eigenvalues: Vec<f64>,
    pub amplitude: f64,
    pub rows: Vec<ProbeRow>,
}

/// Run the probe for a list of strictly increasing frequencies. Frequencies
/// at or beyond the grid resolution across the support (Nyquist) are
/// rejected.
pub fn weak_convergence_probe(
    v: &PotentialField,
    frequencies: &[u32],
    amplitude: f64,
    tau_neg: f64,
    k_max: usize,
) -> Result<ProbeTable> {
    if frequencies.is_empty() {
        return Err(Error::InvalidArgument("need at least one frequency".into()));
    }
    for w in frequencies.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidArgument(
                "frequencies must be strictly increasing".into(),
            ));
        }
    }
    if !amplitude.is_finite() {
        return Err(Error::InvalidArgument("amplitude must be finite".into()));
    }
    let dom = *v.domain();
    let nodes_across = v.support().axis_node_count(0);
    for &f in frequencies {
        if f as usize >= nodes_across {
            return Err(Error::InvalidArgument(format!(
                "frequency {f} is at or beyond the {nodes_across} grid nodes across the support (Nyquist)"
            )));
        }
    }

    let h = build_hamiltonian(v, &dom)?;
    let base = negative_eigenpairs(&h, tau_neg, k_max)?;

    let mut rows = Vec::with_capacity(frequencies.len());
    for &f in frequencies {
        let values: Vec<f64> = v
            .values()
            .iter()
            .enumerate()
            .map(|(i, &vi)| {
                if vi == 0.0 {
                    0.0
                } else {
                    let x1 = dom.node_coords(i)[0];
                    let phase = f as f64 * std::f64::consts::PI * x1 / dom.half_width();
                    vi * (1.0 + amplitude * phase.sin())
                }
            })
            .collect();
        let vn = PotentialField::new(Arc::clone(v.support()), values)?;
        let hn = build_hamiltonian(&vn, &dom)?;
        let sn = negative_eigenpairs(&hn, tau_neg, k_max)?;
        let common = base.len().min(sn.len());
        let deviations = (0..common)
            .map(|i| (sn.eigenvalue(i) - base.eigenvalue(i)).abs())
            .collect();
        rows.push(ProbeRow {
            frequency: f,
            eigenvalues: sn.eigenvalues().to_vec(),
            deviations,
        });
    }

    Ok(ProbeTable {
        base_eigenvalues: base.eigenvalues().to_vec(),
        amplitude,
        rows,
    })
}
