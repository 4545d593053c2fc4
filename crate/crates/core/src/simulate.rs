//! Stochastic verification layer: stopping-set enumeration, the exact
//! occupancy-probability recursion, and an exact-distribution Monte Carlo of
//! the branching random walk.

use std::collections::{BTreeMap, BTreeSet};

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::dimension::solve_moran;
use crate::error::{Error, Result};
use crate::model::{Problem, Word};
use crate::rng::CounterRng;

/// Boundary comparisons tolerate this much accumulated rounding, so that a
/// word whose true ratio product ties the scale exactly lands inside the
/// stopping set. Products are built by repeated multiplication and the scale
/// by `exp`, which can disagree by a few ulps per letter.
const BOUNDARY_SLACK: f64 = 1e-12;

fn boundary_limit(n: f64) -> f64 {
    (-n).exp() * (1.0 + BOUNDARY_SLACK)
}

/// Size caps for the enumeration and simulation operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimCaps {
    /// Maximum stopping-set cardinality (heuristic `e^{s0 n}` checked first).
    pub stopping_set: usize,
    /// Maximum number of distinct words held in the walk frontier.
    pub frontier: usize,
}

impl Default for SimCaps {
    fn default() -> Self {
        Self {
            stopping_set: 5_000_000,
            frontier: 10_000_000,
        }
    }
}

/// Scale parameter of a stopping set; the cover scale is `e^{-n}`.
#[derive(Debug, Clone, Copy)]
pub struct StoppingSetParams {
    n: f64,
    caps: SimCaps,
}

impl StoppingSetParams {
    pub fn new(n: f64) -> Result<Self> {
        Self::with_caps(n, SimCaps::default())
    }

    pub fn with_caps(n: f64, caps: SimCaps) -> Result<Self> {
        let admissible = n.is_finite() && n > 0.0;
        if !admissible {
            return Err(Error::ScaleOutOfRange { n });
        }
        Ok(Self { n, caps })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn caps(&self) -> SimCaps {
        self.caps
    }
}

/// All words whose ratio product first drops to or below `e^{-n}`, in
/// lexicographic order. The result is a prefix-free exact cover: no word is
/// a prefix of another, and every infinite sequence has exactly one prefix
/// in the set.
pub fn stopping_set(problem: &Problem, params: &StoppingSetParams) -> Result<Vec<Word>> {
    let s0 = solve_moran(problem.ratios())?;
    let estimate = (s0 * params.n).exp();
    let cap = params.caps.stopping_set;
    if estimate > cap as f64 {
        return Err(Error::SetTooLarge { estimate, cap });
    }

    let limit = boundary_limit(params.n);
    let ratios = problem.ratios().values();
    let mut out = Vec::new();
    // preorder depth-first traversal: every popped node is either emitted
    // (first inequality holds, the parent's failure to hold is implied by it
    // having been expanded) or expanded; children go on the stack in reverse
    // letter order so leaves come off lexicographically
    let mut stack: Vec<(Word, f64)> = vec![(Word::empty(), 1.0)];
    while let Some((word, product)) = stack.pop() {
        if !word.is_empty() && product <= limit {
            if out.len() >= cap {
                return Err(Error::SetTooLarge { estimate, cap });
            }
            out.push(word);
            continue;
        }
        for index in (0..ratios.len() as u32).rev() {
            let child = word.child(index);
            stack.push((child, product * ratios[index as usize]));
        }
    }
    debug_assert!(out.windows(2).all(|w| w[0] < w[1]));
    Ok(out)
}

/// Probability that at least one root path of length `|word|` carries
/// `word`, via backward iteration of `a -> 1 - (1 - p a)^M` from the empty
/// word (`a = 1`).
pub fn occupancy_probability(problem: &Problem, word: &Word) -> Result<f64> {
    let probs = problem.probs().values();
    let m = problem.branching();
    let mf = m as f64;
    // powi is exact-exponent only up to i32
    let pow_m = |base: f64| -> f64 {
        if m <= i32::MAX as u32 {
            base.powi(m as i32)
        } else {
            base.powf(mf)
        }
    };
    let gamma = 1.0 - pow_m(1.0 - problem.probs().min());
    let mut a = 1.0f64;
    for &index in word.indices().iter().rev() {
        let p = *probs.get(index as usize).ok_or(Error::LetterOutOfRange {
            letter: index as usize + 1,
            alphabet: probs.len(),
        })?;
        let next = 1.0 - pow_m(1.0 - p * a);
        // linear and quadratic envelopes of the recursion step
        debug_assert!(next >= gamma * a - 1e-12);
        debug_assert!(next <= (mf * p * a).min(1.0) + 1e-12);
        debug_assert!(next >= mf * p * a * (1.0 - mf * a) - 1e-12);
        a = next;
    }
    Ok(a)
}

/// `E[#occupied cover] = sum of occupancy probabilities over the stopping
/// set`; lies in `[1, #set]`.
pub fn expected_cover_count(problem: &Problem, params: &StoppingSetParams) -> Result<f64> {
    let words = stopping_set(problem, params)?;
    // summed in word order so the result is independent of scheduling
    let terms = words
        .par_iter()
        .map(|w| occupancy_probability(problem, w))
        .collect::<Result<Vec<f64>>>()?;
    Ok(terms.iter().sum())
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    let slope = num / den;
    (slope, mean_y - slope * mean_x)
}

/// Least-squares fit of `log expected_cover_count` against the scale.
#[derive(Debug, Clone)]
pub struct GrowthRateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Per-point residuals `y_k - (intercept + slope n_k)`.
    pub residuals: Vec<f64>,
}

/// Fits the exponential growth rate of the expected occupied-cover count;
/// the slope estimates the dimension.
pub fn growth_rate_fit(problem: &Problem, n_values: &[f64], caps: SimCaps) -> Result<GrowthRateFit> {
    if n_values.len() < 3 {
        return Err(Error::DegenerateFit {
            context: "need at least 3 scale values",
        });
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::DegenerateFit {
            context: "scale values must be strictly increasing",
        });
    }
    let ys = n_values
        .par_iter()
        .map(|&n| {
            let params = StoppingSetParams::with_caps(n, caps)?;
            Ok(expected_cover_count(problem, &params)?.ln())
        })
        .collect::<Result<Vec<f64>>>()?;
    let (slope, intercept) = least_squares(n_values, &ys);
    let residuals = n_values
        .iter()
        .zip(&ys)
        .map(|(&n, &y)| y - (intercept + slope * n))
        .collect();
    Ok(GrowthRateFit {
        slope,
        intercept,
        residuals,
    })
}

/// Occupied tree nodes at one depth of the walk, aggregated by word.
///
/// Aggregation is distributionally exact: edge labels are independent across
/// distinct edges, so the children of all nodes carrying the same word are
/// exchangeable and only the count matters.
#[derive(Debug, Clone)]
pub struct Frontier {
    entries: BTreeMap<Word, FrontierEntry>,
    depth: u32,
}

#[derive(Debug, Clone, Copy)]
struct FrontierEntry {
    product: f64,
    count: u64,
}

impl Frontier {
    fn root() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(
            Word::empty(),
            FrontierEntry {
                product: 1.0,
                count: 1,
            },
        );
        Self { entries, depth: 0 }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Number of distinct occupied words.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total particle count across entries.
    pub fn total_count(&self) -> u64 {
        self.entries.values().map(|e| e.count).sum()
    }

    /// `(word, count)` pairs in lexicographic word order.
    pub fn counts(&self) -> impl Iterator<Item = (&Word, u64)> {
        self.entries.iter().map(|(w, e)| (w, e.count))
    }
}

/// One sampled occupied stopping set.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSample {
    /// The realized words, each satisfying the stopping inequality.
    pub stopped_words: BTreeSet<Word>,
    pub seed: u64,
    pub n: f64,
}

/// Exact binomial draw for every trial count.
///
/// `rand_distr` is exact in its own regimes (inversion below the BINV
/// threshold, BTPE rejection above), but it routes trial counts beyond
/// `i32::MAX` to BTPE even when the mean is small, where BTPE's constants
/// break down. That corner is covered here by CDF inversion with the pmf
/// ratio recurrence, which stays stable because the mean is small.
fn sample_binomial(trials: u64, p: f64, rng: &mut CounterRng) -> u64 {
    if trials == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return trials;
    }
    let mean = trials as f64 * p;
    if mean < 10.0 && trials > i32::MAX as u64 {
        let u: f64 = (rng.next() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let ratio = p / (1.0 - p);
        let mut pmf = (trials as f64 * (-p).ln_1p()).exp();
        let mut cdf = pmf;
        let mut k = 0u64;
        while u > cdf && k < trials && k < 1_100 {
            k += 1;
            pmf *= (trials - k + 1) as f64 / k as f64 * ratio;
            cdf += pmf;
        }
        return k;
    }
    Binomial::new(trials, p)
        .expect("probability verified to lie in (0, 1)")
        .sample(rng)
}

/// Draws multinomial counts as a chain of conditional binomials; the
/// distribution-level tests rely on every draw being exact.
fn multinomial_counts(trials: u64, probs: &[f64], rng: &mut CounterRng) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = trials;
    let mut tail = 1.0f64;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            counts[i] = remaining;
            break;
        }
        let q = (p / tail).clamp(0.0, 1.0);
        counts[i] = sample_binomial(remaining, q, rng);
        remaining -= counts[i];
        tail -= p;
    }
    counts
}

/// Simulates the branching random walk exactly in distribution.
///
/// The frontier starts as the root word with count 1. At each step every
/// entry `(w, c)` spawns `M c` children with multinomially distributed
/// labels; children satisfying the stopping inequality retire into the
/// sample (set semantics, counts discarded), the rest re-enter the frontier.
/// The random stream is keyed by `(seed, step, entry index)` with entries in
/// lexicographic order, so identical inputs give identical outputs no matter
/// how the per-entry draws are scheduled.
pub fn run_walk(problem: &Problem, params: &StoppingSetParams, seed: u64) -> Result<WalkSample> {
    let limit = boundary_limit(params.n);
    let ratios = problem.ratios().values();
    let probs = problem.probs().values().to_vec();
    let m = problem.branching() as u64;

    let mut frontier = Frontier::root();
    let mut stopped: BTreeSet<Word> = BTreeSet::new();
    // stopped particles carried forward at rate M, so that
    // frontier total + retired_weighted = M^depth at every depth
    let mut retired_weighted: u64 = 0;
    let mut total: u64 = 1;

    while !frontier.is_empty() {
        let depth = frontier.depth;
        total = total
            .checked_mul(m)
            .ok_or(Error::CountOverflow { depth: depth + 1 })?;
        retired_weighted *= m; // <= total, so this cannot overflow

        let entries: Vec<(Word, FrontierEntry)> = frontier
            .entries
            .iter()
            .map(|(w, e)| (w.clone(), *e))
            .collect();
        let draws: Vec<Vec<u64>> = entries
            .par_iter()
            .enumerate()
            .map(|(index, (_, entry))| {
                let mut rng = CounterRng::keyed(seed, depth as u64, index as u64);
                multinomial_counts(m * entry.count, &probs, &mut rng)
            })
            .collect();

        let mut next: BTreeMap<Word, FrontierEntry> = BTreeMap::new();
        let mut next_total: u64 = 0;
        for ((word, entry), counts) in entries.iter().zip(&draws) {
            for (index, &k) in counts.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let child = word.child(index as u32);
                let child_product = entry.product * ratios[index];
                if child_product <= limit {
                    stopped.insert(child);
                    retired_weighted += k;
                } else {
                    next_total += k;
                    let previous = next.insert(
                        child,
                        FrontierEntry {
                            product: child_product,
                            count: k,
                        },
                    );
                    // distinct parents always spawn distinct children
                    debug_assert!(previous.is_none());
                }
            }
        }
        debug_assert_eq!(next_total + retired_weighted, total);
        if next.len() > params.caps.frontier {
            return Err(Error::FrontierTooLarge {
                size: next.len(),
                cap: params.caps.frontier,
            });
        }
        frontier = Frontier {
            entries: next,
            depth: depth + 1,
        };
    }

    debug_assert!(!stopped.is_empty());
    Ok(WalkSample {
        stopped_words: stopped,
        seed,
        n: params.n,
    })
}

/// Monte Carlo analogue of [`growth_rate_fit`]: slope of the seed-averaged
/// `log #stopped_words` against the scale.
#[derive(Debug, Clone)]
pub struct EmpiricalDimension {
    pub slope: f64,
    pub per_n_means: Vec<f64>,
}

pub fn empirical_dimension(
    problem: &Problem,
    n_values: &[f64],
    seeds: &[u64],
    caps: SimCaps,
) -> Result<EmpiricalDimension> {
    if n_values.len() < 2 {
        return Err(Error::DegenerateFit {
            context: "need at least 2 scale values",
        });
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::DegenerateFit {
            context: "scale values must be strictly increasing",
        });
    }
    if seeds.is_empty() {
        return Err(Error::DegenerateFit {
            context: "need at least one seed",
        });
    }
    let pairs: Vec<(usize, u64)> = n_values
        .iter()
        .enumerate()
        .flat_map(|(i, _)| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let log_counts: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, seed)| {
            let params = StoppingSetParams::with_caps(n_values[i], caps)?;
            let sample = run_walk(problem, &params, seed)?;
            Ok((sample.stopped_words.len() as f64).ln())
        })
        .collect::<Result<Vec<f64>>>()?;
    let per_n_means: Vec<f64> = (0..n_values.len())
        .map(|i| {
            let start = i * seeds.len();
            log_counts[start..start + seeds.len()].iter().sum::<f64>() / seeds.len() as f64
        })
        .collect();
    let (slope, _) = least_squares(n_values, &per_n_means);
    Ok(EmpiricalDimension {
        slope,
        per_n_means,
    })
}
