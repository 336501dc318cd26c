use thiserror::Error;

/// Errors raised across the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("inadmissible potential: {0}")]
    Potential(String),

    #[error("potential is singular at ({0}, {1})")]
    Singular(f64, f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("boundary condition: {0}")]
    Boundary(String),

    #[error("potentials are not gauge equivalent: {0}")]
    NotGaugeEquivalent(String),

    #[error("assembled operator is not W-Hermitian: defect {defect:e} exceeds {limit:e}")]
    Hermiticity { defect: f64, limit: f64 },

    #[error("eigensolver: {0}")]
    Solver(String),

    #[error("eigensolver did not converge after {restarts} restarts (worst residual {residual:e})")]
    NoConvergence { restarts: usize, residual: f64 },

    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("Cayley transform undefined: 1 is an eigenvalue of U (smallest singular value of I - U is {0:e})")]
    CayleySingular(f64),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
