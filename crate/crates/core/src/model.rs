//! Problem data: contraction ratios, the probability vector, the tree
//! branching factor, and finite codings (words) over the map alphabet.

use crate::error::{Error, Result};

/// Absolute tolerance on `sum(p) == 1`; configuration files carry decimal
/// literals that rarely sum exactly.
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

/// Ordered contraction ratios of the iterated function system.
///
/// Invariants: at least two entries, each strictly inside `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ratios(Vec<f64>);

impl Ratios {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewMaps {
                count: values.len(),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::RatioOutOfRange { index, value });
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

/// Probability vector over the maps.
///
/// Invariants: at least two entries, each strictly inside `(0, 1)`, summing
/// to 1 within [`PROB_SUM_TOLERANCE`]. Exact zeros are rejected; callers
/// that want pruning must remove zero-probability maps (and renormalize)
/// before validation, because pruning changes the number of maps.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewMaps {
                count: values.len(),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::ProbOutOfRange { index, value });
            }
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::ProbSumMismatch { sum });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// The full problem instance `(r, p, M)`: ratios and probabilities of equal
/// length `N >= 2`, and the tree branching factor `M >= 2`.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    ratios: Ratios,
    probs: ProbabilityVector,
    branching: u32,
}

impl Problem {
    pub fn new(ratios: Ratios, probs: ProbabilityVector, branching: u32) -> Result<Self> {
        if ratios.len() != probs.len() {
            return Err(Error::LengthMismatch {
                expected: ratios.len(),
                actual: probs.len(),
            });
        }
        if branching < 2 {
            return Err(Error::BranchingTooSmall { branching });
        }
        Ok(Self {
            ratios,
            probs,
            branching,
        })
    }

    /// Validates raw input and assembles a [`Problem`]. Input order is
    /// preserved; nothing is renormalized.
    pub fn validate(raw_ratios: &[f64], raw_probs: &[f64], branching: u32) -> Result<Self> {
        if raw_ratios.len() != raw_probs.len() {
            return Err(Error::LengthMismatch {
                expected: raw_ratios.len(),
                actual: raw_probs.len(),
            });
        }
        let ratios = Ratios::new(raw_ratios.to_vec())?;
        let probs = ProbabilityVector::new(raw_probs.to_vec())?;
        Self::new(ratios, probs, branching)
    }

    pub fn ratios(&self) -> &Ratios {
        &self.ratios
    }

    pub fn probs(&self) -> &ProbabilityVector {
        &self.probs
    }

    pub fn branching(&self) -> u32 {
        self.branching
    }

    /// Number of maps `N`.
    pub fn map_count(&self) -> usize {
        self.ratios.len()
    }
}

/// A finite coding over the alphabet `{1..N}`.
///
/// Letters are 1-based externally, matching the usual alphabet convention;
/// internally they are stored as 0-based indices into the ratio list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds a word from 1-based letters, validating against the alphabet
    /// size.
    pub fn from_letters(letters: &[usize], alphabet: usize) -> Result<Self> {
        let mut indices = Vec::with_capacity(letters.len());
        for &letter in letters {
            if letter == 0 || letter > alphabet {
                return Err(Error::LetterOutOfRange { letter, alphabet });
            }
            indices.push((letter - 1) as u32);
        }
        Ok(Self(indices))
    }

    /// The 1-based letters of the word.
    pub fn letters(&self) -> Vec<usize> {
        self.0.iter().map(|&i| i as usize + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn indices(&self) -> &[u32] {
        &self.0
    }

    /// The word extended by one 0-based letter index.
    pub(crate) fn child(&self, index: u32) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(index);
        Self(v)
    }

    /// Concatenation `self . other`.
    pub fn concat(&self, other: &Word) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }
}

/// Product of the contraction ratios along a word; the empty word gives 1.
pub fn ratio_product(problem: &Problem, word: &Word) -> Result<f64> {
    let ratios = problem.ratios().values();
    let mut product = 1.0;
    for &index in word.indices() {
        let r = *ratios
            .get(index as usize)
            .ok_or(Error::LetterOutOfRange {
                letter: index as usize + 1,
                alphabet: ratios.len(),
            })?;
        product *= r;
    }
    Ok(product)
}
