//! The objective functions of the constrained maximization and a brute-force
//! grid maximizer over the constraint surface.
//!
//! The maximizer is deliberately assumption-free: it validates the analytic
//! case analysis in [`crate::dimension`], so it must not share that module's
//! structure. It exploits only positive homogeneity, which folds the
//! unbounded surface `h(x) = 1` onto the probability simplex.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::Problem;

/// A point of `[0, inf)^N` with at least one positive entry.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalVector(Vec<f64>);

impl VariationalVector {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidVector("vector must be nonempty"));
        }
        if !x.iter().all(|&v| v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidVector("entries must be finite and >= 0"));
        }
        if !x.iter().any(|&v| v > 0.0) {
            return Err(Error::InvalidVector("at least one entry must be positive"));
        }
        Ok(Self(x))
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
}

/// Entropy-type term `sum_i x_i (log sum_j x_j - log x_i)`, with the
/// convention `0 log 0 = 0`.
pub fn psi(x: &VariationalVector) -> f64 {
    psi_raw(x.values())
}

fn psi_raw(x: &[f64]) -> f64 {
    let total: f64 = x.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut acc = total * total.ln();
    for &v in x {
        if v > 0.0 {
            acc -= v * v.ln();
        }
    }
    acc
}

fn check_len(problem: &Problem, x: &VariationalVector) -> Result<()> {
    if problem.map_count() != x.len() {
        return Err(Error::LengthMismatch {
            expected: problem.map_count(),
            actual: x.len(),
        });
    }
    Ok(())
}

/// Linear term `sum_i x_i log(M p_i)`.
pub fn phi(problem: &Problem, x: &VariationalVector) -> Result<f64> {
    check_len(problem, x)?;
    let m = problem.branching() as f64;
    Ok(x.values()
        .iter()
        .zip(problem.probs().values())
        .map(|(&v, &p)| v * (m * p).ln())
        .sum())
}

/// Normalization term `-sum_i x_i log r_i`; strictly positive for nonzero x.
pub fn h(problem: &Problem, x: &VariationalVector) -> Result<f64> {
    check_len(problem, x)?;
    Ok(x.values()
        .iter()
        .zip(problem.ratios().values())
        .map(|(&v, &r)| -v * r.ln())
        .sum())
}

/// The full objective `psi(x) + min(0, phi(x))`.
pub fn objective(problem: &Problem, x: &VariationalVector) -> Result<f64> {
    Ok(psi(x) + phi(problem, x)?.min(0.0))
}

/// Output of [`maximize_on_surface`].
#[derive(Debug, Clone)]
pub struct OracleResult {
    /// The constrained maximum.
    pub value: f64,
    /// A maximizer with `h(argmax) = 1`.
    pub argmax: VariationalVector,
    pub grid_resolution: usize,
}

/// Default grid resolution by alphabet size; the grid has
/// `O(resolution^(N-1))` cells.
pub fn default_grid_resolution(map_count: usize) -> usize {
    if map_count <= 3 {
        1000
    } else {
        200
    }
}

/// Objective along simplex directions: by homogeneity the maximum of
/// `psi + min(0, phi)` over `{h = 1}` equals the maximum over the simplex of
/// `(psi(a) + min(0, phi(a))) / h(a)`.
struct SimplexObjective {
    log_mp: Vec<f64>,
    neg_log_r: Vec<f64>,
}

impl SimplexObjective {
    fn new(problem: &Problem) -> Self {
        let m = problem.branching() as f64;
        Self {
            log_mp: problem.probs().values().iter().map(|&p| (m * p).ln()).collect(),
            neg_log_r: problem.ratios().values().iter().map(|&r| -r.ln()).collect(),
        }
    }

    fn eval(&self, alpha: &[f64]) -> f64 {
        let mut phi = 0.0;
        let mut h = 0.0;
        for ((&a, &c), &d) in alpha.iter().zip(&self.log_mp).zip(&self.neg_log_r) {
            phi += a * c;
            h += a * d;
        }
        (psi_raw(alpha) + phi.min(0.0)) / h
    }
}

/// Grid state shared by the composition scan: precomputed `k log k` table
/// plus the per-coordinate linear coefficients scaled by `1/resolution`.
struct GridScan<'a> {
    objective: &'a SimplexObjective,
    resolution: usize,
    k_log_k: Vec<f64>,
    log_res: f64,
}

impl<'a> GridScan<'a> {
    fn new(objective: &'a SimplexObjective, resolution: usize) -> Self {
        let k_log_k = (0..=resolution)
            .map(|k| if k == 0 { 0.0 } else { (k as f64) * (k as f64).ln() })
            .collect();
        Self {
            objective,
            resolution,
            k_log_k,
            log_res: (resolution as f64).ln(),
        }
    }

    /// Best `(value, composition)` over all compositions of `resolution`
    /// whose first coordinate is `k0`.
    fn best_with_first(&self, k0: usize) -> (f64, Vec<usize>) {
        let n = self.objective.log_mp.len();
        let mut ks = vec![0usize; n];
        ks[0] = k0;
        let mut best = (f64::NEG_INFINITY, Vec::new());
        let seed_entropy = -self.k_log_k[k0];
        let seed_phi = k0 as f64 * self.objective.log_mp[0];
        let seed_h = k0 as f64 * self.objective.neg_log_r[0];
        self.scan(
            1,
            self.resolution - k0,
            seed_entropy,
            seed_phi,
            seed_h,
            &mut ks,
            &mut best,
        );
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn scan(
        &self,
        coord: usize,
        remaining: usize,
        entropy: f64,
        phi: f64,
        h: f64,
        ks: &mut Vec<usize>,
        best: &mut (f64, Vec<usize>),
    ) {
        let n = self.objective.log_mp.len();
        let res = self.resolution as f64;
        if coord == n - 1 {
            let k = remaining;
            let entropy = entropy - self.k_log_k[k];
            let phi = phi + k as f64 * self.objective.log_mp[coord];
            let h = h + k as f64 * self.objective.neg_log_r[coord];
            // psi(alpha) for alpha = k/res: log(res) + entropy/res since the
            // coordinates sum to one
            let value = (self.log_res + entropy / res + (phi / res).min(0.0)) / (h / res);
            if value > best.0 {
                ks[coord] = k;
                *best = (value, ks.clone());
            }
            return;
        }
        for k in 0..=remaining {
            ks[coord] = k;
            self.scan(
                coord + 1,
                remaining - k,
                entropy - self.k_log_k[k],
                phi + k as f64 * self.objective.log_mp[coord],
                h + k as f64 * self.objective.neg_log_r[coord],
                ks,
                best,
            );
        }
    }
}

/// Local refinement: compass search over coordinate-pair exchanges on the
/// simplex, halving the step until the cell diameter drops below 1e-6.
fn refine(objective: &SimplexObjective, start: Vec<f64>, step0: f64) -> Vec<f64> {
    let n = start.len();
    let mut alpha = start;
    let mut value = objective.eval(&alpha);
    let mut step = step0;
    let mut budget = 100_000usize;
    while step >= 5e-7 && budget > 0 {
        budget -= 1;
        let mut improved = false;
        let mut best_move: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            for j in 0..n {
                if i == j || alpha[j] < step {
                    continue;
                }
                let mut cand = alpha.clone();
                cand[i] += step;
                cand[j] -= step;
                let v = objective.eval(&cand);
                if v > value && best_move.is_none_or(|(bv, _, _)| v > bv) {
                    best_move = Some((v, i, j));
                }
            }
        }
        if let Some((v, i, j)) = best_move {
            alpha[i] += step;
            alpha[j] -= step;
            value = v;
            improved = true;
        }
        if !improved {
            step *= 0.5;
        }
    }
    alpha
}

/// Maximizes `psi(x) + min(0, phi(x))` over `{x >= 0 : h(x) = 1}` by scanning
/// a regular simplex grid of directions and locally refining around the best
/// cell. Exact-boundary grid points use the `0 log 0 = 0` convention.
pub fn maximize_on_surface(problem: &Problem, grid_resolution: usize) -> Result<OracleResult> {
    if grid_resolution < 2 {
        return Err(Error::GridTooCoarse {
            resolution: grid_resolution,
        });
    }
    let surface = SimplexObjective::new(problem);
    let scan = GridScan::new(&surface, grid_resolution);

    // Deterministic regardless of partitioning: per-slice winners are merged
    // by (value desc, composition lex asc).
    let best = (0..=grid_resolution)
        .into_par_iter()
        .map(|k0| scan.best_with_first(k0))
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|a, b| {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        })
        .expect("grid is nonempty");

    let res = grid_resolution as f64;
    let alpha0: Vec<f64> = best.1.iter().map(|&k| k as f64 / res).collect();
    let alpha = refine(&surface, alpha0, 1.0 / res);

    // Map the direction back onto the surface h(x) = 1.
    let h_alpha: f64 = alpha
        .iter()
        .zip(&surface.neg_log_r)
        .map(|(&a, &d)| a * d)
        .sum();
    let x: Vec<f64> = alpha.iter().map(|&a| a / h_alpha).collect();
    let argmax = VariationalVector::new(x)?;
    let value = objective(problem, &argmax)?;
    Ok(OracleResult {
        value,
        argmax,
        grid_resolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn problem(rs: &[f64], ps: &[f64], m: u32) -> Problem {
        Problem::validate(rs, ps, m).unwrap()
    }

    fn vector(x: &[f64]) -> VariationalVector {
        VariationalVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn psi_of_single_atom_is_zero() {
        assert_eq!(psi(&vector(&[1.0, 0.0])), 0.0);
    }

    #[test]
    fn psi_of_uniform_pair() {
        assert_abs_diff_eq!(psi(&vector(&[1.0, 1.0])), 2.0 * 2.0f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn psi_weighted_example() {
        // 8 log 8 - 2 log 2 - 6 log 6, cross-checked term by term against
        // -sum x_i log(x_i / sum x)
        let x = vector(&[2.0, 6.0]);
        let direct = 8.0 * 8.0f64.ln() - 2.0 * 2.0f64.ln() - 6.0 * 6.0f64.ln();
        let term_by_term: f64 = -2.0 * (2.0f64 / 8.0).ln() - 6.0 * (6.0f64 / 8.0).ln();
        assert_abs_diff_eq!(direct, term_by_term, epsilon = 1e-12);
        assert_abs_diff_eq!(psi(&x), direct, epsilon = 1e-12);
        assert_abs_diff_eq!(psi(&x), 4.498681156950466, epsilon = 1e-12);
    }

    #[test]
    fn phi_vanishes_for_uniform_binary() {
        let p = problem(&[0.2, 0.7], &[0.5, 0.5], 2);
        assert_eq!(phi(&p, &vector(&[3.0, 4.0])).unwrap(), 0.0);
    }

    #[test]
    fn phi_single_term() {
        let p = problem(&[0.2, 0.7], &[0.3, 0.7], 2);
        assert_abs_diff_eq!(
            phi(&p, &vector(&[1.0, 0.0])).unwrap(),
            0.6f64.ln(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn phi_two_terms_with_m_three() {
        let p = problem(&[0.2, 0.7], &[0.2, 0.8], 3);
        assert_abs_diff_eq!(
            phi(&p, &vector(&[1.0, 1.0])).unwrap(),
            0.6f64.ln() + 2.4f64.ln(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            phi(&p, &vector(&[1.0, 1.0])).unwrap(),
            0.36464311358790924,
            epsilon = 1e-12
        );
    }

    #[test]
    fn h_examples() {
        let e = std::f64::consts::E;
        let p = problem(&[1.0 / e, 1.0 / e], &[0.5, 0.5], 2);
        assert_abs_diff_eq!(h(&p, &vector(&[1.0, 0.0])).unwrap(), 1.0, epsilon = 1e-15);

        let p = problem(&[1.0 / 3.0, 1.0 / 3.0], &[0.5, 0.5], 2);
        assert_abs_diff_eq!(
            h(&p, &vector(&[1.0, 1.0])).unwrap(),
            2.0 * 3.0f64.ln(),
            epsilon = 1e-14
        );

        let p = problem(&[0.2, 0.7], &[0.5, 0.5], 2);
        assert_abs_diff_eq!(
            h(&p, &vector(&[0.5, 0.5])).unwrap(),
            0.5 * (-(0.2f64.ln()) - 0.7f64.ln()),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            h(&p, &vector(&[0.5, 0.5])).unwrap(),
            0.9830564281864164,
            epsilon = 1e-12
        );
    }

    #[test]
    fn objective_uniform_square_case() {
        let p = problem(&[0.4, 0.4], &[0.5, 0.5], 2);
        let x = vector(&[1.0, 1.0]);
        assert_abs_diff_eq!(
            objective(&p, &x).unwrap(),
            2.0 * 2.0f64.ln(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn objective_negative_phi_single_atom() {
        let p = problem(&[0.2, 0.7], &[0.3, 0.7], 2);
        let x = vector(&[1.0, 0.0]);
        assert_abs_diff_eq!(objective(&p, &x).unwrap(), 0.6f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn objective_at_moran_weights_recovers_ambient_dimension() {
        // x proportional to r_i^{s0}, scaled so h(x) = 1
        let p = problem(&[0.2, 0.7], &[0.5, 0.5], 2);
        let s0 = crate::dimension::solve_moran(p.ratios()).unwrap();
        let w: Vec<f64> = p.ratios().values().iter().map(|&r| r.powf(s0)).collect();
        let scale: f64 = -w
            .iter()
            .zip(p.ratios().values())
            .map(|(&wi, &r)| wi * r.ln())
            .sum::<f64>();
        let x = vector(&[w[0] / scale, w[1] / scale]);
        assert_abs_diff_eq!(h(&p, &x).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(objective(&p, &x).unwrap(), s0, epsilon = 1e-10);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let p = problem(&[0.2, 0.7], &[0.5, 0.5], 2);
        let x = vector(&[1.0, 1.0, 1.0]);
        assert!(matches!(
            phi(&p, &x),
            Err(Error::LengthMismatch { expected: 2, actual: 3 })
        ));
    }

    #[test]
    fn grid_too_coarse_is_rejected() {
        let p = problem(&[0.2, 0.7], &[0.5, 0.5], 2);
        assert!(matches!(
            maximize_on_surface(&p, 1),
            Err(Error::GridTooCoarse { resolution: 1 })
        ));
    }

    #[test]
    fn oracle_recovers_cantor_dimension() {
        let p = problem(&[1.0 / 3.0, 1.0 / 3.0], &[0.5, 0.5], 2);
        let result = maximize_on_surface(&p, 1000).unwrap();
        assert_abs_diff_eq!(result.value, 2.0f64.ln() / 3.0f64.ln(), epsilon = 1e-4);
        assert_abs_diff_eq!(h(&p, &result.argmax).unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn oracle_matches_weighted_moran_point() {
        let p = problem(&[0.2, 0.7], &[0.6, 0.4], 2);
        let result = maximize_on_surface(&p, 1000).unwrap();
        assert_abs_diff_eq!(result.value, 0.7145184895515095, epsilon = 1e-3);
    }

    #[test]
    fn oracle_matches_critical_pair_point() {
        let p = problem(&[0.2, 0.7], &[0.05, 0.95], 2);
        let result = maximize_on_surface(&p, 1000).unwrap();
        assert_abs_diff_eq!(result.value, 0.8326154047046259, epsilon = 1e-3);
    }

    #[test]
    fn oracle_result_is_self_consistent() {
        let p = problem(&[0.3, 0.4, 0.2], &[0.2, 0.3, 0.5], 3);
        let result = maximize_on_surface(&p, 200).unwrap();
        let again = objective(&p, &result.argmax).unwrap();
        assert_abs_diff_eq!(result.value, again, epsilon = 1e-12);
        assert_abs_diff_eq!(h(&p, &result.argmax).unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn boundary_continuity_of_objective() {
        // objective at x_2 = 0 equals the limit along x_2 -> 0
        let p = problem(&[0.2, 0.7], &[0.3, 0.7], 2);
        let at_zero = objective(&p, &vector(&[1.0, 0.0])).unwrap();
        let mut eps = 1e-6;
        let mut last = f64::NAN;
        for _ in 0..3 {
            last = objective(&p, &vector(&[1.0, eps])).unwrap();
            eps /= 10.0;
        }
        assert_abs_diff_eq!(at_zero, last, epsilon = 1e-6);
    }

    proptest! {
        #[test]
        fn psi_is_positively_homogeneous(
            xs in prop::collection::vec(0.0f64..10.0, 2..5),
            scale in 0.01f64..100.0,
        ) {
            prop_assume!(xs.iter().any(|&v| v > 0.0));
            let x = vector(&xs);
            let scaled = vector(&xs.iter().map(|&v| v * scale).collect::<Vec<_>>());
            let lhs = psi(&scaled);
            let rhs = scale * psi(&x);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
        }

        #[test]
        fn psi_respects_entropy_bounds(
            xs in prop::collection::vec(0.0f64..10.0, 2..5),
        ) {
            prop_assume!(xs.iter().any(|&v| v > 0.0));
            let x = vector(&xs);
            let total: f64 = xs.iter().sum();
            let bound = total * (xs.len() as f64).ln();
            prop_assert!(psi(&x) >= -1e-12);
            prop_assert!(psi(&x) <= bound + 1e-12);
        }

        #[test]
        fn entropy_bound_is_tight_iff_uniform(v in 0.1f64..10.0, n in 2usize..5) {
            let xs = vec![v; n];
            let x = vector(&xs);
            let total = v * n as f64;
            let bound = total * (n as f64).ln();
            prop_assert!((psi(&x) - bound).abs() <= 1e-10 * bound.max(1.0));
        }
    }
}
