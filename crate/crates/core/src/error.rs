use thiserror::Error;

use crate::dimension::CaseTag;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by all modules of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("contraction ratio at index {index} is {value}; ratios must lie strictly in (0, 1)")]
    RatioOutOfRange { index: usize, value: f64 },

    #[error("probability at index {index} is {value}; probabilities must lie strictly in (0, 1)")]
    ProbOutOfRange { index: usize, value: f64 },

    #[error("probabilities sum to {sum}; the sum must equal 1 within 1e-9")]
    ProbSumMismatch { sum: f64 },

    #[error("length mismatch: expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("branching factor is {branching}; it must be at least 2")]
    BranchingTooSmall { branching: u32 },

    #[error("only {count} maps given; at least 2 are required")]
    TooFewMaps { count: usize },

    #[error("letter {letter} outside the alphabet {{1..{alphabet}}}")]
    LetterOutOfRange { letter: usize, alphabet: usize },

    #[error("root solver did not converge: {context}")]
    NoConvergence { context: &'static str },

    #[error("grid resolution {resolution} is too coarse; at least 2 subdivisions are required")]
    GridTooCoarse { resolution: usize },

    #[error("operation requires case {expected}, but the problem classifies as {actual}")]
    WrongCase { expected: CaseTag, actual: CaseTag },

    #[error("probability parameter {p} outside (0, 1)")]
    POutOfRange { p: f64 },

    #[error("contraction ratio {r} outside (0, 1)")]
    InvalidRatio { r: f64 },

    #[error("two-map closed form is singular at p = 1/2")]
    SingularAtHalf,

    #[error("ratios must satisfy r1 < r2; got r1 = {r1}, r2 = {r2}")]
    RatiosNotOrdered { r1: f64, r2: f64 },

    #[error("scale exponent {n} must be strictly positive")]
    ScaleOutOfRange { n: f64 },

    #[error("stopping set too large: estimated {estimate:.3e} words exceeds the cap of {cap}")]
    SetTooLarge { estimate: f64, cap: usize },

    #[error("frontier too large: {size} distinct words exceeds the cap of {cap}")]
    FrontierTooLarge { size: usize, cap: usize },

    #[error("particle count would overflow 64 bits at depth {depth}")]
    CountOverflow { depth: u32 },

    #[error("degenerate fit: {context}")]
    DegenerateFit { context: &'static str },

    #[error("invalid vector: {0}")]
    InvalidVector(&'static str),

    #[error("internal consistency failure: {context} (value {value})")]
    Inconsistent { context: &'static str, value: f64 },
}
