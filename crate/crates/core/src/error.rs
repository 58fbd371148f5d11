use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("point outside the foliated slab: {0}")]
    OutOfRange(String),

    #[error("surface is not spacelike: {0}")]
    SpacelikeFailure(String),

    #[error("null-degenerate point (L = {l:.3e} below guard {guard:.3e})")]
    NullDegenerate { l: f64, guard: f64 },

    #[error("degenerate frame: Gram-Schmidt pivot {pivot:.3e}")]
    DegenerateFrame { pivot: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("no barrier pair found: {0}")]
    NoBarrier(String),

    #[error("guard starvation at Newton iteration {iteration}: step shrunk below {min_step:.3e}")]
    GuardStarvation { iteration: usize, min_step: f64 },

    #[error("Newton did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("continuation stage {stage} failed: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient fit window: {levels} s-levels (need {needed})")]
    InsufficientWindow { levels: usize, needed: usize },

    #[error("finite-difference instability: estimates {coarse:.6e} and {fine:.6e} disagree")]
    FdInstability { coarse: f64, fine: f64 },

    #[error("singular matrix at pivot {0}")]
    Singular(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
