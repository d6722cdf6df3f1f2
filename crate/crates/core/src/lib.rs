//! Titchmarsh-Weyl matrix functions and spectral pairs for half-line
//! Schrodinger operators `-d^2/dx^2 + q` with bounded complex `q`.
//!
//! The non-self-adjoint operator is studied through its self-adjoint block
//! form `-eps d^2/dx^2 + Q`, `Q = [[0, q], [conj q, 0]]`, whose 2x2 matrix
//! M-function is a Herglotz function. Its spectral measure decomposes as
//! `[[1, psi], [conj psi, 1]] d nu`.

pub mod cli;
pub mod eigensolver;
pub mod linalg;
pub mod model;
pub mod oracles;
pub mod propagator;
pub mod spectral;
pub mod weyl;

pub use linalg::{BoundaryParam, Mat2C};
pub use model::{Potential, Problem};
pub use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is numerically singular")]
    SingularMatrix,
    #[error("x = {0} is outside the domain")]
    OutOfDomain(f64),
    #[error("step control failed at x = {0}")]
    StepUnderflow(f64),
    #[error("k must be nonzero")]
    ZeroK,
    #[error("no convergence: b = {b}, certified error {radius:e}")]
    NoConvergence { b: f64, radius: f64 },
    #[error("density diagonal mismatch {0:e}")]
    AsymmetricDensity(f64),
    #[error("density below the noise floor")]
    ZeroDensity,
    #[error("no eigenvalue in the search interval")]
    NoEigenvalue,
    #[error("degenerate singular value near {0}")]
    Degenerate(f64),
    #[error("{0} is not a singular value")]
    NotAnEigenvalue(f64),
    #[error("boundary functional vanishes")]
    ZeroEll,
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("sweep budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
