use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad or missing configuration input.
    #[error("config error: {0}")]
    Config(String),

    /// Drive power puts the bath outside the stable (|g| < Δ̄) domain.
    #[error("unstable squeezing: |g| = {g_mag:.6e} Hz is not below the bandwidth {bandwidth:.6e} Hz")]
    Unstable { g_mag: f64, bandwidth: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("qubits {0} and {1} coincide")]
    CoincidentQubits(usize, usize),

    #[error("quadrature did not converge: error estimate {achieved:.3e} exceeds tolerance {requested:.3e} after {evaluations} evaluations")]
    Quadrature {
        achieved: f64,
        requested: f64,
        evaluations: usize,
    },

    #[error("step size underflow at t = {t}: h = {h:.3e}")]
    StepUnderflow { t: f64, h: f64 },

    #[error("eigen-solver did not converge: {0}")]
    NonConvergence(String),

    #[error("steady state is not unique: second eigenvalue |λ₂| = {second:.3e} below {threshold:.3e}")]
    AmbiguousSteadyState { second: f64, threshold: f64 },

    #[error("mean spin vanishes (|<S>| = {0:.3e}); squeezing direction undefined")]
    UndefinedDirection(f64),

    #[error("invariant violated at t = {t}: {what}")]
    Invariant { t: f64, what: String },

    #[error("unsupported system size: {0} qubits (1..=8 supported)")]
    Size(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Unstable { .. }
            | Error::CoincidentQubits(..)
            | Error::Size(_)
            | Error::Io(_) => 2,
            Error::Invariant { .. } => 4,
            _ => 3,
        }
    }
}
