use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mode index {index} out of range for {mode_count} modes")]
    ModeOutOfRange { index: usize, mode_count: usize },

    #[error("qubit index {index} out of range for {qubit_count} qubits")]
    QubitOutOfRange { index: usize, qubit_count: usize },

    #[error("{count} modes exceed the dense-matrix limit of {limit}")]
    TooLarge { count: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian")]
    NotHermitian,

    #[error("invalid mean-field parameters: {0}")]
    InvalidMeanField(String),

    #[error("degenerate Fermi level: orbital energies {lower} and {upper} coincide")]
    DegenerateFermiLevel { lower: f64, upper: f64 },

    #[error("self-consistency did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("wrong parameter count: expected {expected}, got {got}")]
    ParameterCount { expected: usize, got: usize },

    #[error("extrapolation needs at least two distinct stretch factors")]
    DegenerateStretches,

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("plot error: {0}")]
    Plot(String),

    #[error("all mean-field orders failed: {0}")]
    AllOrdersFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
