//! Closed-form dimension of the random subset: Moran-type root solvers, the
//! three-case classifier, and the optimizer vectors.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Problem, Ratios};
use crate::roots::{expand_upper, solve_decreasing};
use crate::variational::VariationalVector;

/// Condition sums within this distance of zero count as equalities; the
/// degenerate uniform case evaluates to an exact zero only in exact
/// arithmetic.
const CLASSIFY_MARGIN: f64 = 1e-10;

/// Default residual target for the Moran-type solvers.
pub const DEFAULT_SOLVER_TOL: f64 = 1e-12;

const MAX_ITER: usize = 200;

/// Which branch of the case analysis applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseTag {
    /// The dimension saturates at the ambient value `s0`.
    MaxEntropy,
    /// The dimension is the weighted Moran exponent `s~`.
    WeightedMoran,
    /// The dimension is `s^` from the two-equation critical system.
    CriticalPair,
    /// Both conditions hold with equality: `M = N` and `p` uniform.
    DegenerateUniform,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CaseTag::MaxEntropy => "MaxEntropy",
            CaseTag::WeightedMoran => "WeightedMoran",
            CaseTag::CriticalPair => "CriticalPair",
            CaseTag::DegenerateUniform => "DegenerateUniform",
        };
        f.write_str(name)
    }
}

/// Computed dimension together with the case tag, the optimizer vector on
/// the constraint surface, and the auxiliary solver outputs.
#[derive(Debug, Clone)]
pub struct DimensionResult {
    pub case: CaseTag,
    /// The almost-sure Hausdorff (= box) dimension.
    pub value: f64,
    /// The maximizing vector; satisfies `h(beta) = 1`.
    pub beta: VariationalVector,
    /// Only present for [`CaseTag::CriticalPair`].
    pub t_hat: Option<f64>,
    /// Ambient dimension: root of `sum r_i^s = 1`.
    pub s0: f64,
    /// Weighted Moran exponent: root of `sum p_i r_i^s = 1/M`.
    pub s_tilde: f64,
}

/// Solves `sum_i r_i^s = 1` for the ambient dimension `s0`.
pub fn solve_moran(ratios: &Ratios) -> Result<f64> {
    solve_moran_tol(ratios, DEFAULT_SOLVER_TOL)
}

/// [`solve_moran`] with an explicit residual target.
pub fn solve_moran_tol(ratios: &Ratios, tol: f64) -> Result<f64> {
    let rs = ratios.values().to_vec();
    let f = move |s: f64| rs.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    let rs2 = ratios.values().to_vec();
    let df = move |s: f64| rs2.iter().map(|r| r.powf(s) * r.ln()).sum::<f64>();
    // At the nominal upper endpoint, sum r_i^s <= N r_max^s = 1; rounding can
    // leave the residual a hair positive, so expand until it straddles.
    let n = ratios.len() as f64;
    let hi0 = n.ln() / -ratios.max().ln();
    let hi = expand_upper(&f, 0.0, hi0, "ambient Moran bracket")?;
    solve_decreasing(&f, Some(&df), 0.0, hi, tol, MAX_ITER, "ambient Moran equation")
}

/// Solves `sum_i p_i r_i^s = 1/M` for the weighted Moran exponent.
pub fn solve_weighted_moran(problem: &Problem) -> Result<f64> {
    solve_weighted_moran_tol(problem, DEFAULT_SOLVER_TOL)
}

/// [`solve_weighted_moran`] with an explicit residual target.
pub fn solve_weighted_moran_tol(problem: &Problem, tol: f64) -> Result<f64> {
    let target = 1.0 / problem.branching() as f64;
    let terms: Vec<(f64, f64)> = problem
        .probs()
        .values()
        .iter()
        .copied()
        .zip(problem.ratios().values().iter().copied())
        .collect();
    let t1 = terms.clone();
    let f = move |s: f64| t1.iter().map(|&(p, r)| p * r.powf(s)).sum::<f64>() - target;
    let df = move |s: f64| {
        terms
            .iter()
            .map(|&(p, r)| p * r.powf(s) * r.ln())
            .sum::<f64>()
    };
    // At s = -1 the sum is at least 1 > 1/M; above s0 + 1 it may still be
    // too large when M exceeds N, hence the geometric expansion.
    let s0 = solve_moran_tol(problem.ratios(), tol)?;
    let hi = expand_upper(&f, -1.0, s0 + 1.0, "weighted Moran bracket")?;
    solve_decreasing(
        &f,
        Some(&df),
        -1.0,
        hi,
        tol,
        MAX_ITER,
        "weighted Moran equation",
    )
}

fn condition_sums(problem: &Problem, s0: f64, s_tilde: f64) -> (f64, f64) {
    let m = problem.branching() as f64;
    let mut large = 0.0;
    let mut small = 0.0;
    for (&r, &p) in problem
        .ratios()
        .values()
        .iter()
        .zip(problem.probs().values())
    {
        let log_mp = (m * p).ln();
        large += r.powf(s0) * log_mp;
        small += p * r.powf(s_tilde) * log_mp;
    }
    (large, small)
}

fn classify_with(problem: &Problem, s0: f64, s_tilde: f64) -> CaseTag {
    let (large, small) = condition_sums(problem, s0, s_tilde);
    let large_holds = large >= -CLASSIFY_MARGIN;
    let small_holds = small <= CLASSIFY_MARGIN;
    match (large_holds, small_holds) {
        (true, true) => CaseTag::DegenerateUniform,
        (true, false) => CaseTag::MaxEntropy,
        (false, true) => CaseTag::WeightedMoran,
        (false, false) => CaseTag::CriticalPair,
    }
}

/// Evaluates the two condition sums at the solved exponents and returns the
/// matching case.
pub fn classify(problem: &Problem) -> Result<CaseTag> {
    let s0 = solve_moran(problem.ratios())?;
    let s_tilde = solve_weighted_moran(problem)?;
    Ok(classify_with(problem, s0, s_tilde))
}

fn g1(problem: &Problem, s: f64, t: f64) -> f64 {
    let m = problem.branching() as f64;
    problem
        .ratios()
        .values()
        .iter()
        .zip(problem.probs().values())
        .map(|(&r, &p)| r.powf(s) * (m * p).powf(t))
        .sum()
}

fn g2(problem: &Problem, s: f64, t: f64) -> f64 {
    let m = problem.branching() as f64;
    problem
        .ratios()
        .values()
        .iter()
        .zip(problem.probs().values())
        .map(|(&r, &p)| r.powf(s) * (m * p).powf(t) * (m * p).ln())
        .sum()
}

/// For fixed `t`, the unique `s` with `g1(s, t) = 1`. The inner residual
/// target is tighter than the outer bracket because the outer bisection
/// consumes this solution.
fn inner_exponent(problem: &Problem, t: f64, s_hint: f64) -> Result<f64> {
    const INNER_TOL: f64 = 1e-13;
    let f = |s: f64| g1(problem, s, t) - 1.0;
    let df = |s: f64| {
        let m = problem.branching() as f64;
        problem
            .ratios()
            .values()
            .iter()
            .zip(problem.probs().values())
            .map(|(&r, &p)| r.powf(s) * (m * p).powf(t) * r.ln())
            .sum()
    };
    // g1(0, t) = sum (M p_i)^t > 1 for t in [0, 1].
    let hi = expand_upper(f, 0.0, s_hint.abs() + 1.0, "critical-pair inner bracket")?;
    solve_decreasing(f, Some(&df), 0.0, hi, INNER_TOL, MAX_ITER, "critical-pair inner solve")
}

fn critical_pair_inner(problem: &Problem, s0: f64, s_tilde: f64) -> Result<(f64, f64)> {
    const OUTER_WIDTH: f64 = 1e-12;
    const RESIDUAL_TARGET: f64 = 1e-11;

    // Along the curve g1(s, t) = 1 the sign of ds/dt equals the sign of g2,
    // so the critical t is bracketed by g2 < 0 at t = 0 and g2 > 0 at t = 1.
    let hint = s0.max(s_tilde);
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    if g2(problem, s0, 0.0) >= 0.0 || g2(problem, s_tilde, 1.0) <= 0.0 {
        return Err(Error::NoConvergence {
            context: "critical-pair outer bracket",
        });
    }
    let mut best_t = 0.5;
    let mut best_res = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s_mid = inner_exponent(problem, mid, hint)?;
        let val = g2(problem, s_mid, mid);
        if val.abs() < best_res {
            best_res = val.abs();
            best_t = mid;
        }
        if val < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= OUTER_WIDTH && best_res <= RESIDUAL_TARGET {
            break;
        }
    }

    let t_hat = best_t;
    let s_hat = inner_exponent(problem, t_hat, hint)?;
    let res1 = (g1(problem, s_hat, t_hat) - 1.0).abs();
    let res2 = g2(problem, s_hat, t_hat).abs();
    if res1 > 1e-10 || res2 > 1e-10 || s_hat <= 0.0 || !(t_hat > 0.0 && t_hat < 1.0) {
        return Err(Error::NoConvergence {
            context: "critical-pair system",
        });
    }
    Ok((s_hat, t_hat))
}

/// Solves the two-equation critical system for `(s^, t^)`.
///
/// Requires the problem to classify as [`CaseTag::CriticalPair`].
pub fn solve_critical_pair(problem: &Problem) -> Result<(f64, f64)> {
    let s0 = solve_moran(problem.ratios())?;
    let s_tilde = solve_weighted_moran(problem)?;
    let case = classify_with(problem, s0, s_tilde);
    if case != CaseTag::CriticalPair {
        return Err(Error::WrongCase {
            expected: CaseTag::CriticalPair,
            actual: case,
        });
    }
    critical_pair_inner(problem, s0, s_tilde)
}

fn normalized_beta(weights: &[f64], ratios: &[f64]) -> Result<VariationalVector> {
    let denom: f64 = weights
        .iter()
        .zip(ratios)
        .map(|(&w, &r)| w * r.ln())
        .sum();
    // denom < 0 since every log r_i < 0 and weights are positive
    let beta: Vec<f64> = weights.iter().map(|&w| -w / denom).collect();
    VariationalVector::new(beta)
}

/// Full closed-form dimension computation: classification, value, optimizer
/// vector, and auxiliary exponents.
pub fn dimension(problem: &Problem) -> Result<DimensionResult> {
    let s0 = solve_moran(problem.ratios())?;
    let s_tilde = solve_weighted_moran(problem)?;
    let case = classify_with(problem, s0, s_tilde);
    let rs = problem.ratios().values();
    let ps = problem.probs().values();
    let m = problem.branching() as f64;

    let (value, beta, t_hat) = match case {
        CaseTag::MaxEntropy | CaseTag::DegenerateUniform => {
            let weights: Vec<f64> = rs.iter().map(|&r| r.powf(s0)).collect();
            (s0, normalized_beta(&weights, rs)?, None)
        }
        CaseTag::WeightedMoran => {
            let weights: Vec<f64> = rs
                .iter()
                .zip(ps)
                .map(|(&r, &p)| p * r.powf(s_tilde))
                .collect();
            (s_tilde, normalized_beta(&weights, rs)?, None)
        }
        CaseTag::CriticalPair => {
            let (s_hat, t_hat) = critical_pair_inner(problem, s0, s_tilde)?;
            let weights: Vec<f64> = rs
                .iter()
                .zip(ps)
                .map(|(&r, &p)| r.powf(s_hat) * (m * p).powf(t_hat))
                .collect();
            (s_hat, normalized_beta(&weights, rs)?, Some(t_hat))
        }
    };

    let positive = value.is_finite() && value > 0.0;
    if !positive {
        return Err(Error::Inconsistent {
            context: "computed dimension is not strictly positive",
            value,
        });
    }

    Ok(DimensionResult {
        case,
        value,
        beta,
        t_hat,
        s0,
        s_tilde,
    })
}
