//! Crate-wide error type.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("infeasible degree: cannot build a {d}-regular graph on {p} vertices")]
    InfeasibleDegree { p: usize, d: usize },

    #[error("rejection sampling exhausted after {attempts} attempts")]
    RetryExhausted { attempts: usize },

    #[error("matrix {name} is singular or not positive definite")]
    SingularMatrix { name: String },

    #[error("covariance completion did not converge after {sweeps} sweeps (max violation {max_violation:.3e})")]
    NonConvergence { sweeps: usize, max_violation: f64 },

    #[error("mean correlation {rho} outside the admissible range ({lo:.6}, 1)")]
    RhoRange { rho: f64, lo: f64 },

    #[error("sample too small for this test: {reason}")]
    SampleSize { reason: String },

    #[error("every joint level of the conditioning discrete variables is empty")]
    EmptyCell,

    #[error("both endpoints are discrete; discrete-discrete associations are not tested")]
    DiscretePair,

    #[error("no feasible conditioning subset for pair ({a}, {b})")]
    NoFeasibleSubset { a: usize, b: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty result table: {0}")]
    EmptyTable(String),

    #[error("generative graph has no admissible edges")]
    EmptyTruth,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("graph error: {0}")]
    Graph(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that merely mark one conditioning set as unusable for a
    /// test (singular statistics, too few observations, degenerate levels).
    /// The non-rejection-rate sampler skips such draws instead of aborting.
    pub fn is_infeasible_test(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix { .. } | Error::SampleSize { .. } | Error::EmptyCell
        )
    }

    /// Process exit code contract: 0 success, 1 usage/config, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::RhoRange { .. } | Error::DimensionMismatch(_) => 1,
            Error::Parse { .. } | Error::Io(_) | Error::Graph(_) | Error::EmptyTruth => 2,
            _ => 3,
        }
    }
}
