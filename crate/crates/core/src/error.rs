use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("cutoff too small: construction needs nmax >= {required}, got {got}")]
    CutoffTooSmall { required: usize, got: usize },

    #[error("invalid density matrix ({0})")]
    InvalidState(String),

    #[error("numerical drift beyond tolerance: {0}")]
    NumericalDrift(String),

    #[error("invalid POVM ({0})")]
    InvalidPovm(String),

    #[error("POVM completeness violated: max identity defect {defect:.3e}")]
    PovmIncomplete { defect: f64 },

    #[error("parameter not identifiable on this state (SLD residual {residual:.3e})")]
    NotIdentifiable { residual: f64 },

    #[error(
        "quadrature not converged: entries changed by {change:.3e} relative \
         ({coarse:?} with {n} nodes vs {fine:?} with {n2} nodes)"
    )]
    QuadratureNotConverged {
        n: usize,
        n2: usize,
        coarse: [f64; 4],
        fine: [f64; 4],
        change: f64,
    },

    #[error("probe quorum is not informationally complete (Gram rank {rank} < 4)")]
    QuorumNotComplete { rank: usize },

    #[error("maximum-likelihood reconstruction did not converge after {iters} iterations (last improvement {improvement:.3e})")]
    ReconstructionNotConverged { iters: usize, improvement: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
