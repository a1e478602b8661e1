use thiserror::Error;

/// Errors raised by the numerical and physical layers of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("matrix is not Hermitian: max |rho - rho^dagger| = {deviation:.3e} (tolerance {tolerance:.1e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("state is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("eigensolver did not converge within {iterations} iterations (n = {dim})")]
    NoConvergence { dim: usize, iterations: usize },

    #[error("eigenpair {index} residual {residual:.3e} exceeds bound {bound:.3e}")]
    Residual { index: usize, residual: f64, bound: f64 },

    #[error("matrix has no eigenvalue within {tolerance:.1e} of zero (smallest singular value {smallest:.3e})")]
    NoNullSpace { smallest: f64, tolerance: f64 },

    #[error("leading coefficient of the quadratic eigenproblem is singular; use the Markovian spectrum instead")]
    SingularLeading,

    #[error("Laplace variable s = {re} + {im}i sits on the kernel pole")]
    KernelPole { re: f64, im: f64 },

    #[error("unsupported memory kernel: {0}")]
    UnsupportedKernel(String),

    #[error("root classification failed: {physical} physical / {kernel} kernel-branch roots (expected 16/16)")]
    Classification { physical: usize, kernel: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, Error>;
