//! Low-lying spectra of assembled Hamiltonians and the experiments built
//! on them: Landau levels, Aharonov-Bohm flux sweeps, Robin interpolation,
//! gauge cross-checks and convergence studies.

mod eigen;
mod experiments;

pub use eigen::{solve_weighted, Method, SolverOptions, Spectrum, DENSE_CAP, SMALL_DIM};
pub use experiments::*;

use crate::error::Result;
use crate::operator::Hamiltonian;

/// Lowest `k` eigenpairs of `h` with vectors in degree-of-freedom form,
/// W-orthonormal.
pub fn eigs_lowest(h: &Hamiltonian, k: usize, method: Method, tol: f64) -> Result<Spectrum> {
    eigs_with(h, &SolverOptions::new(k, method, tol))
}

pub fn eigs_with(h: &Hamiltonian, opts: &SolverOptions) -> Result<Spectrum> {
    solve_weighted(h.weighted(), h.weights(), opts)
}
