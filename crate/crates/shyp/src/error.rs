use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("points or sets live in different spaces")]
    SpaceMismatch,
    #[error("empty point set")]
    EmptySet,
    #[error("word over the wrong alphabet")]
    AlphabetMismatch,
    #[error("cannot parse word {0:?}")]
    Parse(String),
    #[error("presentation has no free-group boundary")]
    NotHyperbolic,
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("ping-pong check failed: {0}")]
    PingPong(String),
    #[error("no expansion at {witness} (best factor {best})")]
    Uncoverable { witness: String, best: f64 },
    #[error("refinement needs a strictly smaller delta ({new} >= {old})")]
    Refinement { new: f64, old: f64 },
    #[error("no admissible cover index at step {step} ({witness})")]
    NoAdmissible { step: usize, witness: String },
    #[error("no expansivity witness up to depth {0}")]
    NotFound(usize),
    #[error("perturbation of letter {letter} is not admissible: {distance} >= {epsilon}")]
    NotAdmissible { letter: String, distance: f64, epsilon: f64 },
    #[error("no convergence after {depth} steps (diameter {diameter})")]
    NoConvergence { depth: usize, diameter: f64 },
    #[error("perturbed cover misses {witness}")]
    Uncovered { witness: String },
    #[error("map is not injective: {0}")]
    NotInjective(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}
