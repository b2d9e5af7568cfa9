use thiserror::Error;

/// Errors produced by constructors and numeric routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(&'static str),

    #[error("invalid power allocation: {0}")]
    InvalidAllocation(&'static str),

    #[error("invalid rate targets: {0}")]
    InvalidTargets(&'static str),

    #[error("invalid SNR grid: {0}")]
    InvalidSnrGrid(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("user rank {rank} out of range 1..={users}")]
    RankOutOfRange { rank: usize, users: usize },

    #[error("degenerate interval: lower bound {lo} exceeds upper bound {hi}")]
    DegenerateInterval { lo: f64, hi: f64 },

    #[error("invalid quadrature rule: {0}")]
    InvalidRule(&'static str),

    #[error(
        "adaptive quadrature did not converge: estimate {estimate}, \
         error bound {error_bound} exceeds tolerance {tolerance}"
    )]
    QuadratureNonConvergence {
        /// Best available estimate of the integral.
        estimate: f64,
        /// Conservative bound on the remaining error.
        error_bound: f64,
        /// Absolute tolerance that was requested.
        tolerance: f64,
    },

    /// The zero-outage comparison produced an ordering that cannot occur for
    /// feasible targets; reaching it indicates a bug upstream.
    #[error("scheme comparison reached an ordering that is unreachable for feasible targets")]
    UnreachableComparison,
}

pub type Result<T> = std::result::Result<T, Error>;
