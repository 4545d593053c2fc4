//! Closed-form dimensions and phase-transition thresholds for the special
//! cases: homogeneous systems of any size, and two-map systems on a binary
//! tree.

use crate::dimension::{solve_moran, CaseTag};
use crate::error::{Error, Result};
use crate::model::{ProbabilityVector, Ratios};
use crate::roots::{expand_upper, solve_decreasing};

const MAX_ITER: usize = 200;

/// Which branch of the homogeneous case analysis applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomogeneousRegime {
    /// `M <= L(N, p)`: the tree branching is the bottleneck, `rho = M`.
    BranchingLimited,
    /// `L <= M <= U`: `rho = sum (M p_i)^lambda` at the interior exponent.
    Interior,
    /// `M >= U(N, p)`: the alphabet is the bottleneck, `rho = N`.
    AlphabetLimited,
}

/// Dimension of the homogeneous case, together with the intermediate
/// quantities of the case analysis.
#[derive(Debug, Clone)]
pub struct HomogeneousResult {
    pub regime: HomogeneousRegime,
    pub rho: f64,
    /// Interior exponent; present only in [`HomogeneousRegime::Interior`].
    pub lambda: Option<f64>,
    /// `L(N, p) = prod p_i^{-p_i}`, the perplexity of `p`.
    pub lower: f64,
    /// `U(N, p) = prod p_i^{-1/N}`.
    pub upper: f64,
    /// The dimension `-log(rho) / log(r)`.
    pub value: f64,
}

/// Dimension when every contraction ratio equals `r`: the growth base `rho`
/// is `M`, `N`, or an interior power sum, depending on where `M` falls
/// relative to `L(N, p) <= N <= U(N, p)`.
pub fn homogeneous_dimension(
    probs: &ProbabilityVector,
    branching: u32,
    ratio: f64,
) -> Result<HomogeneousResult> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidRatio { r: ratio });
    }
    if branching < 2 {
        return Err(Error::BranchingTooSmall { branching });
    }
    let ps = probs.values();
    let n = ps.len() as f64;
    let lower = (-ps.iter().map(|&p| p * p.ln()).sum::<f64>()).exp();
    let upper = (-ps.iter().map(|&p| p.ln()).sum::<f64>() / n).exp();
    let m = branching as f64;

    let (regime, rho, lambda) = if m <= lower {
        (HomogeneousRegime::BranchingLimited, m, None)
    } else if m >= upper {
        (HomogeneousRegime::AlphabetLimited, n, None)
    } else {
        // lambda -> sum p_i^lambda log(M p_i) is negative at 0 and positive
        // at 1 exactly in this regime; solve_decreasing wants the opposite
        // signs, so negate.
        let f = |lambda: f64| -ps.iter().map(|&p| p.powf(lambda) * (m * p).ln()).sum::<f64>();
        let df = |lambda: f64| {
            -ps.iter()
                .map(|&p| p.powf(lambda) * p.ln() * (m * p).ln())
                .sum::<f64>()
        };
        let lambda = solve_decreasing(f, Some(&df), 0.0, 1.0, 1e-12, MAX_ITER, "interior exponent")?;
        let rho = ps.iter().map(|&p| (m * p).powf(lambda)).sum::<f64>();
        (HomogeneousRegime::Interior, rho, Some(lambda))
    };

    Ok(HomogeneousResult {
        regime,
        rho,
        lambda,
        lower,
        upper,
        value: -rho.ln() / ratio.ln(),
    })
}

/// The exponent `xi(p) = log(2p) / (log p - log(1-p))`, extended by its
/// limit `xi(1/2) = 1/2` across the removable singularity.
pub fn xi(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::POutOfRange { p });
    }
    let eps = p - 0.5;
    if eps.abs() < 1e-8 {
        // second-order expansion around 1/2 (the quadratic term vanishes);
        // the cubic remainder is below double precision here
        return Ok(0.5 - 0.5 * eps);
    }
    Ok((2.0 * p).ln() / (p.ln() - (1.0 - p).ln()))
}

/// Two-map homogeneous dimension `(xi log xi + (1-xi) log(1-xi)) / log r`.
pub fn two_map_homogeneous_dimension(p: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidRatio { r });
    }
    let x = xi(p)?;
    Ok((x * x.ln() + (1.0 - x) * (1.0 - x).ln()) / r.ln())
}

/// Phase-transition probabilities of the two-map case.
#[derive(Debug, Clone, Copy)]
pub struct TwoMapThresholds {
    /// `p_*` in `(0, 1/2)`: below it the critical-pair branch takes over.
    pub p_lower: f64,
    /// `p^*` in `(1/2, 1)`: above it the critical-pair branch takes over.
    pub p_upper: f64,
}

fn check_two_map_ratios(r1: f64, r2: f64) -> Result<()> {
    if !(r1 > 0.0 && r1 < 1.0) {
        return Err(Error::InvalidRatio { r: r1 });
    }
    if !(r2 > 0.0 && r2 < 1.0) {
        return Err(Error::InvalidRatio { r: r2 });
    }
    if r1 >= r2 {
        return Err(Error::RatiosNotOrdered { r1, r2 });
    }
    Ok(())
}

/// Weighted Moran exponent for the two-map case:
/// `p r1^s + (1-p) r2^s = 1/2`. Accepts the closed interval in `p` so the
/// threshold search can evaluate the endpoint `p = 1`.
fn s_tilde_scalar(p: f64, r1: f64, r2: f64, s0: f64) -> Result<f64> {
    let f = move |s: f64| p * r1.powf(s) + (1.0 - p) * r2.powf(s) - 0.5;
    let df = move |s: f64| p * r1.powf(s) * r1.ln() + (1.0 - p) * r2.powf(s) * r2.ln();
    let hi = expand_upper(f, -1.0, s0 + 1.0, "two-map weighted bracket")?;
    solve_decreasing(f, Some(&df), -1.0, hi, 1e-13, MAX_ITER, "two-map weighted Moran")
}

/// Public wrapper for the two-map weighted Moran exponent.
pub fn two_map_s_tilde(p: f64, r1: f64, r2: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::POutOfRange { p });
    }
    check_two_map_ratios(r1, r2)?;
    let s0 = solve_moran(&Ratios::new(vec![r1, r2])?)?;
    s_tilde_scalar(p, r1, r2, s0)
}

/// `g(p) = r1^{s0} log(2p) + r2^{s0} log(2(1-p))`; strictly concave with
/// `g(1/2) = 0`, so its other zero is `p_*`.
fn g_lower(p: f64, a1: f64, a2: f64) -> f64 {
    a1 * (2.0 * p).ln() + a2 * (2.0 * (1.0 - p)).ln()
}

/// `g~(p) = p r1^{s~} log(2p) + (1-p) r2^{s~} log(2(1-p))`; strictly convex
/// on `[1/2, 1]` with `g~(1/2) = 0` and `g~(1) = (log 2)/2`, so its unique
/// interior zero is `p^*`. The `(1-p) log(2(1-p))` factor uses the
/// `0 log 0 = 0` convention at `p = 1`.
fn g_upper(p: f64, r1: f64, r2: f64, s0: f64) -> Result<f64> {
    let st = s_tilde_scalar(p, r1, r2, s0)?;
    let first = p * r1.powf(st) * (2.0 * p).ln();
    let second = if p >= 1.0 {
        0.0
    } else {
        (1.0 - p) * r2.powf(st) * (2.0 * (1.0 - p)).ln()
    };
    Ok(first + second)
}

/// Computes `p_*` and `p^*` by one-dimensional root finding on `g` and `g~`.
pub fn two_map_thresholds(r1: f64, r2: f64) -> Result<TwoMapThresholds> {
    check_two_map_ratios(r1, r2)?;
    let s0 = solve_moran(&Ratios::new(vec![r1, r2])?)?;
    let a1 = r1.powf(s0);
    let a2 = r2.powf(s0);

    // p_*: g < 0 on (0, p_*), g > 0 on (p_*, 1/2). Walk the endpoints in
    // until the bracket straddles; every probe that lands on the wrong side
    // tightens the bracket from that side.
    let mut lo = 0.25;
    while g_lower(lo, a1, a2) >= 0.0 {
        lo *= 0.25;
        if lo < 1e-300 {
            return Err(Error::NoConvergence {
                context: "lower threshold bracket",
            });
        }
    }
    let mut hi = 0.5 - 0.125;
    let mut delta = 0.125;
    while g_lower(hi, a1, a2) <= 0.0 {
        lo = lo.max(hi);
        delta *= 0.5;
        hi = 0.5 - delta;
        if delta < 1e-14 {
            return Err(Error::NoConvergence {
                context: "lower threshold bracket",
            });
        }
    }
    // g increases through p_* on this bracket; negate for solve_decreasing.
    let g_neg = |p: f64| -g_lower(p, a1, a2);
    let dg_neg = |p: f64| -(a1 / p - a2 / (1.0 - p));
    let p_lower = solve_decreasing(g_neg, Some(&dg_neg), lo, hi, 1e-12, MAX_ITER, "lower threshold")?;

    // p^*: g~ < 0 on (1/2, p^*), g~ > 0 on (p^*, 1]; the right endpoint is
    // always a valid bracket since g~(1) = (log 2)/2.
    let mut lo = 0.5 + 0.125;
    let mut delta = 0.125;
    while g_upper(lo, r1, r2, s0)? >= 0.0 {
        delta *= 0.5;
        lo = 0.5 + delta;
        if delta < 1e-14 {
            return Err(Error::NoConvergence {
                context: "upper threshold bracket",
            });
        }
    }
    let mut hi = 1.0;
    // plain bisection on the residual (no analytic derivative for g~)
    let mut best = 0.5 * (lo + hi);
    let mut best_res = g_upper(best, r1, r2, s0)?.abs();
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let val = g_upper(mid, r1, r2, s0)?;
        if val.abs() < best_res {
            best = mid;
            best_res = val.abs();
        }
        if val < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if best_res <= 1e-13 {
            break;
        }
    }
    if best_res > 1e-12 {
        return Err(Error::NoConvergence {
            context: "upper threshold",
        });
    }

    Ok(TwoMapThresholds {
        p_lower,
        p_upper: best,
    })
}

/// Closed-form `s^(p)` for the two-map case, valid for `p != 1/2`.
pub fn two_map_s_hat(p: f64, r1: f64, r2: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::POutOfRange { p });
    }
    check_two_map_ratios(r1, r2)?;
    if p == 0.5 {
        return Err(Error::SingularAtHalf);
    }
    let log2p = (2.0 * p).ln();
    let log2q = (2.0 * (1.0 - p)).ln();
    let c1 = log2q / ((1.0 - p).ln() - p.ln());
    let c2 = log2p / (p.ln() - (1.0 - p).ln()); // = 1 - c1
    Ok((c1.ln() * log2q - c2.ln() * log2p) / (r1.ln() * log2q - r2.ln() * log2p))
}

/// Precomputed two-map dispatch data: thresholds and the ambient dimension
/// for a fixed ratio pair, reusable across a whole sweep in `p`.
#[derive(Debug, Clone)]
pub struct TwoMapCurve {
    r1: f64,
    r2: f64,
    s0: f64,
    thresholds: TwoMapThresholds,
}

impl TwoMapCurve {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        check_two_map_ratios(r1, r2)?;
        let s0 = solve_moran(&Ratios::new(vec![r1, r2])?)?;
        let thresholds = two_map_thresholds(r1, r2)?;
        Ok(Self {
            r1,
            r2,
            s0,
            thresholds,
        })
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn thresholds(&self) -> TwoMapThresholds {
        self.thresholds
    }

    /// Dimension at `p`, with the case that produced it.
    pub fn eval(&self, p: f64) -> Result<(f64, CaseTag)> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::POutOfRange { p });
        }
        if p == 0.5 {
            // M = N = 2 with uniform p: both conditions hold with equality
            return Ok((self.s0, CaseTag::DegenerateUniform));
        }
        if p >= self.thresholds.p_lower && p < 0.5 {
            return Ok((self.s0, CaseTag::MaxEntropy));
        }
        if p > 0.5 && p <= self.thresholds.p_upper {
            let st = s_tilde_scalar(p, self.r1, self.r2, self.s0)?;
            return Ok((st, CaseTag::WeightedMoran));
        }
        Ok((two_map_s_hat(p, self.r1, self.r2)?, CaseTag::CriticalPair))
    }
}

/// One-shot convenience wrapper around [`TwoMapCurve`].
pub fn two_map_dimension(p: f64, r1: f64, r2: f64) -> Result<(f64, CaseTag)> {
    TwoMapCurve::new(r1, r2)?.eval(p)
}
