//! Almost-sure Hausdorff/box dimension of random subsets of self-similar sets.
//!
//! The model: fix an iterated function system with contraction ratios
//! `r_1..r_N`, a probability vector `p_1..p_N`, and a full `M`-ary tree whose
//! edges receive i.i.d. labels from `{1..N}` with law `p`. Every infinite
//! root path spells a coding of a point of the attractor; the random subset
//! consists of all points reached this way. Its dimension depends only on
//! `(r, p, M)`, so everything here is symbolic on codings.
//!
//! The crate computes that dimension three independent ways:
//!
//! * [`dimension`] — closed-form case analysis driven by Moran-type root
//!   solving (the production path),
//! * [`variational`] — a brute-force grid maximizer of the underlying
//!   constrained entropy problem (the cross-check oracle),
//! * [`simulate`] — exact expectation recursion over stopping sets and an
//!   exact-distribution Monte Carlo of the branching random walk
//!   (the stochastic verification layer).

#![forbid(unsafe_code)]

pub mod dimension;
mod error;
pub mod model;
mod rng;
mod roots;
pub mod simulate;
pub mod special;
pub mod variational;

pub use error::{Error, Result};
pub use model::{ratio_product, ProbabilityVector, Problem, Ratios, Word};
