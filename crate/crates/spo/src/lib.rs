//! Numerical toolkit for spectral optimization of Schrödinger potentials
//! with compact support.
//!
//! The toolkit computes negative discrete spectra of −Δ+V on a Dirichlet
//! box, evaluates spectral cost functionals with multiplicity weights,
//! measures empirical CLR / Lieb-Thirring / Keller inequality ratios, and
//! solves constrained potential-optimization problems by projected
//! eigenvalue-gradient descent, bang-bang simulated annealing and an
//! exhaustive brute-force oracle.
//!
//! Start with the `examples/` directory: each file is a runnable walk
//! through one capability. The `spo` binary exposes the same flows as
//! config-driven `solve`, `optimize`, `verify` and `converge` subcommands.

pub mod cli;
pub mod config;
pub mod costs;
pub mod domain;
pub mod error;
pub mod families;
pub mod inequalities;
pub mod io;
pub mod optimize;
pub mod spectrum;

pub use error::{Error, Result};
