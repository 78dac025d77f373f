use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-side precondition was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate parameters (condition number {condition:.3e}): {detail}")]
    DegenerateParameters { condition: f64, detail: String },

    #[error("coherent-population-trapping singularity: |Γ̃32| = {magnitude:.3e}")]
    Singularity { magnitude: f64 },

    #[error("packet solve failed at ξ = {xi}: {source}")]
    PacketSolve {
        xi: f64,
        #[source]
        source: Box<Error>,
    },

    /// Scale-separation preconditions of an asymptotic regime are unmet.
    #[error("regime preconditions unmet: {}", .0.join("; "))]
    Regime(Vec<String>),

    /// Structural assumptions of a closed form are violated.
    #[error("assumptions violated: {}", .0.join("; "))]
    Assumptions(Vec<String>),

    #[error("no convergence after {iterations} iterations (last relative residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error(
        "fixed-point iteration oscillates after {iterations} iterations (residual {residual:.3e}); \
         retry with damping ≤ {suggested_damping}"
    )]
    Oscillation { iterations: usize, residual: f64, suggested_damping: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// True for errors that come from the numerics rather than from the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::DegenerateParameters { .. }
            | Error::Singularity { .. }
            | Error::NonConvergence { .. }
            | Error::Oscillation { .. } => true,
            Error::PacketSolve { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
