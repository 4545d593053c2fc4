//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities (run with `--nocapture` to see them).

use std::time::Instant;

use fracdim_core::dimension::{dimension, solve_moran};
use fracdim_core::simulate::{
    expected_cover_count, growth_rate_fit, occupancy_probability, run_walk, stopping_set, SimCaps,
    StoppingSetParams,
};
use fracdim_core::special::{
    homogeneous_dimension, two_map_homogeneous_dimension, two_map_s_tilde, TwoMapCurve,
};
use fracdim_core::variational::maximize_on_surface;
use fracdim_core::{ProbabilityVector, Problem, Ratios, Word};

/// Small deterministic generator for the randomized criteria.
struct TestRng(u64);

impl TestRng {
    fn next(&mut self) -> u64 {
        // splitmix64
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        lo + u * (hi - lo)
    }
}

#[test]
fn criterion_01_figure_caption_values() {
    let start = Instant::now();
    let curve = TwoMapCurve::new(0.2, 0.7).unwrap();
    let s0 = curve.s0();
    let t = curve.thresholds();
    assert!((s0 - 0.8398).abs() <= 5e-4, "s0 = {s0}");
    assert!((t.p_lower - 0.0900).abs() <= 5e-4, "p_* = {}", t.p_lower);
    assert!((t.p_upper - 0.7903).abs() <= 5e-4, "p^* = {}", t.p_upper);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "criterion 1 PASS: s0 = {s0:.6}, p_* = {:.6}, p^* = {:.6} ({elapsed:?})",
        t.p_lower, t.p_upper
    );
}

#[test]
fn criterion_02_figure_curve_points() {
    let start = Instant::now();
    let curve = TwoMapCurve::new(0.2, 0.7).unwrap();
    let probes = [
        (0.05, 0.8326),
        (0.3, 0.8398),
        (0.6, 0.7145),
        (0.64, 0.6726),
        (0.7, 0.6171),
        (0.84, 0.5104),
        (0.9, 0.4558),
        (0.95, 0.3924),
        (0.99, 0.2954),
    ];
    for (p, want) in probes {
        let (value, _) = curve.eval(p).unwrap();
        assert!(
            (value - want).abs() <= 1e-3,
            "dimension at p = {p}: {value} vs {want}"
        );
    }
    // the full 400-point sweep stays inside the runtime budget
    for i in 0..400 {
        let p = 0.002 + 0.996 * i as f64 / 399.0;
        curve.eval(p).unwrap();
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("criterion 2 PASS: 9 probe points within 1e-3, 400-point sweep in {elapsed:?}");
}

#[test]
fn criterion_03_homogeneous_bound_values() {
    let start = Instant::now();
    let probs = ProbabilityVector::new(vec![0.05, 0.2, 0.75]).unwrap();
    let result = homogeneous_dimension(&probs, 2, 0.5).unwrap();
    assert!((result.lower - 1.9886).abs() <= 1e-3, "L = {}", result.lower);
    assert!((result.upper - 5.1087).abs() <= 1e-3, "U = {}", result.upper);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 0.1, "took {elapsed:?}");
    println!(
        "criterion 3 PASS: L = {:.6}, U = {:.6} ({elapsed:?})",
        result.lower, result.upper
    );
}

#[test]
fn criterion_04_closed_form_triple_agreement() {
    let start = Instant::now();
    let mut rng = TestRng(0x5eed_0004);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let r = rng.uniform(0.1, 0.9);
        let p = rng.uniform(0.02, 0.98);
        let via_xi = two_map_homogeneous_dimension(p, r).unwrap();
        let probs = ProbabilityVector::new(vec![p, 1.0 - p]).unwrap();
        let via_rho = homogeneous_dimension(&probs, 2, r).unwrap().value;
        let problem = Problem::validate(&[r, r], &[p, 1.0 - p], 2).unwrap();
        let via_general = dimension(&problem).unwrap().value;
        for (a, b) in [
            (via_xi, via_rho),
            (via_xi, via_general),
            (via_rho, via_general),
        ] {
            let diff = (a - b).abs();
            worst = worst.max(diff);
            assert!(diff <= 1e-9, "r = {r}, p = {p}: {a} vs {b}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("criterion 4 PASS: 50 instances, worst pairwise gap {worst:.2e} ({elapsed:?})");
}

#[test]
fn criterion_05_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = TestRng(0x5eed_0005);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = 2 + i % 3; // alphabet sizes 2, 3, 4 in rotation
        let ratios: Vec<f64> = (0..n).map(|_| rng.uniform(0.15, 0.6)).collect();
        let raw: Vec<f64> = (0..n).map(|_| rng.uniform(0.05, 1.0)).collect();
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let m = 2 + (rng.next() % 4) as u32;
        let problem = Problem::validate(&ratios, &probs, m).unwrap();
        let closed = dimension(&problem).unwrap().value;
        let resolution = if n <= 3 { 2000 } else { 200 };
        let oracle = maximize_on_surface(&problem, resolution).unwrap().value;
        let diff = (closed - oracle).abs();
        worst = worst.max(diff);
        assert!(
            diff <= 2e-3,
            "instance {i} (N = {n}, M = {m}): closed {closed} vs oracle {oracle}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!("criterion 5 PASS: 100 instances, worst gap {worst:.2e} ({elapsed:?})");
}

/// Exact occupancy probabilities by enumerating every labeling of the
/// complete depth-3 binary edge tree (14 edges, 2^14 assignments).
fn enumerate_depth3(probs: [f64; 2]) -> Vec<(Vec<usize>, f64)> {
    let level_offsets = [0usize, 2, 6]; // edges before levels 1, 2, 3
    let total_edges = 14usize;
    let mut words: Vec<Vec<usize>> = Vec::new();
    for len in 1..=3usize {
        for code in 0..(1usize << len) {
            words.push((0..len).map(|b| ((code >> b) & 1) + 1).collect());
        }
    }
    let mut sums = vec![0.0f64; words.len()];
    for assignment in 0..(1u32 << total_edges) {
        let label = |edge: usize| ((assignment >> edge) & 1) as usize + 1;
        let mut probability = 1.0;
        for edge in 0..total_edges {
            probability *= probs[label(edge) - 1];
        }
        // realized words of each length along all root paths
        for (w, sum) in words.iter().zip(sums.iter_mut()) {
            let len = w.len();
            let mut found = false;
            'paths: for path in 0..(1usize << len) {
                let mut node = 0usize;
                for (level, &want) in w.iter().enumerate() {
                    let branch = (path >> level) & 1;
                    let edge = level_offsets[level] + node * 2 + branch;
                    if label(edge) != want {
                        continue 'paths;
                    }
                    node = node * 2 + branch;
                }
                found = true;
                break;
            }
            if found {
                *sum += probability;
            }
        }
    }
    words.into_iter().zip(sums).collect()
}

#[test]
fn criterion_06_recursion_matches_enumeration() {
    let start = Instant::now();
    let problem = Problem::validate(&[0.4, 0.4], &[0.3, 0.7], 2).unwrap();
    let exact = enumerate_depth3([0.3, 0.7]);
    let mut worst: f64 = 0.0;
    for (letters, want) in &exact {
        let word = Word::from_letters(letters, 2).unwrap();
        let got = occupancy_probability(&problem, &word).unwrap();
        let diff = (got - want).abs();
        worst = worst.max(diff);
        assert!(diff <= 1e-12, "word {letters:?}: {got} vs {want}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "criterion 6 PASS: {} words within 1e-12 of enumeration, worst {worst:.2e} ({elapsed:?})",
        exact.len()
    );
}

#[test]
fn criterion_07_growth_rate_consistency() {
    let start = Instant::now();
    let caps = SimCaps::default();

    let cantor = Problem::validate(&[1.0 / 3.0, 1.0 / 3.0], &[0.5, 0.5], 2).unwrap();
    let ns: Vec<f64> = (1..=12).map(|k| k as f64 * 3.0f64.ln()).collect();
    let cantor_slope = growth_rate_fit(&cantor, &ns, caps).unwrap().slope;
    let cantor_target = 2.0f64.ln() / 3.0f64.ln();

    let figure = Problem::validate(&[0.2, 0.7], &[0.6, 0.4], 2).unwrap();
    let ns2: Vec<f64> = (2..=10).map(|k| k as f64).collect();
    let figure_slope = growth_rate_fit(&figure, &ns2, caps).unwrap().slope;
    let figure_target = 0.7145;

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "criterion 7 measured: slope {cantor_slope:.4} vs {cantor_target:.4} (±0.02), \
         slope {figure_slope:.4} vs {figure_target:.4} (±0.03) ({elapsed:?})"
    );
    assert!(
        (cantor_slope - cantor_target).abs() <= 0.02,
        "fitted slope {cantor_slope:.4} differs from {cantor_target:.4} by \
         {:.4}; the expected-count fit over these scales carries a subexponential \
         correction that a least-squares line cannot absorb",
        (cantor_slope - cantor_target).abs()
    );
    assert!(
        (figure_slope - figure_target).abs() <= 0.03,
        "fitted slope {figure_slope:.4} differs from {figure_target:.4} by {:.4}",
        (figure_slope - figure_target).abs()
    );
    println!("criterion 7 PASS");
}

#[test]
fn criterion_08_monte_carlo_consistency() {
    let start = Instant::now();

    // exact means frozen from an independent high-precision evaluation
    type Instance = (&'static [f64], &'static [f64], u32, f64, f64);
    let instances: [Instance; 5] = [
        (&[1.0 / 3.0, 1.0 / 3.0], &[0.5, 0.5], 2, 3.0 * 1.0986122886681098, 4.13232421875),
        (&[1.0 / 3.0, 1.0 / 3.0], &[0.3, 0.7], 2, 3.0 * 1.0986122886681098, 3.6056823612),
        (&[0.2, 0.7], &[0.6, 0.4], 2, 2.0, 3.9447699003),
        (&[0.2, 0.7], &[0.9, 0.1], 2, 3.0, 1.7087808486),
        (&[0.4, 0.5], &[0.5, 0.5], 3, 4.0, 37.0109409384),
    ];
    let runs = 10_000u64;
    for (rs, ps, m, n, frozen) in instances {
        let problem = Problem::validate(rs, ps, m).unwrap();
        let params = StoppingSetParams::new(n).unwrap();
        let exact = expected_cover_count(&problem, &params).unwrap();
        assert!(
            (exact - frozen).abs() <= 1e-6,
            "expected count {exact} vs frozen {frozen}"
        );
        let counts: Vec<f64> = (0..runs)
            .map(|seed| {
                run_walk(&problem, &params, seed)
                    .unwrap()
                    .stopped_words
                    .len() as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / runs as f64;
        let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>()
            / (runs - 1) as f64;
        let se = (var / runs as f64).sqrt();
        assert!(
            (mean - exact).abs() <= 4.0 * se,
            "mean {mean} vs exact {exact}, se {se}"
        );
    }

    // distribution check at depth 3 against full enumeration
    let problem = Problem::validate(&[1.0 / 3.0, 1.0 / 3.0], &[0.3, 0.7], 2).unwrap();
    let params = StoppingSetParams::new(3.0 * 3.0f64.ln()).unwrap();
    let exact_dist = depth3_count_distribution([0.3, 0.7]);
    let trials = 100_000u64;
    let mut observed = [0u64; 9];
    for seed in 0..trials {
        let z = run_walk(&problem, &params, seed).unwrap().stopped_words.len();
        observed[z] += 1;
    }
    // merge bins with expected count below 5 into the nearest kept bin
    let mut chi2 = 0.0;
    let mut bins = 0usize;
    let mut merged_obs = 0.0f64;
    let mut merged_exp = 0.0f64;
    for z in 1..=8usize {
        let expected = exact_dist[z] * trials as f64;
        merged_obs += observed[z] as f64;
        merged_exp += expected;
        if merged_exp >= 5.0 {
            chi2 += (merged_obs - merged_exp) * (merged_obs - merged_exp) / merged_exp;
            bins += 1;
            merged_obs = 0.0;
            merged_exp = 0.0;
        }
    }
    if merged_exp > 0.0 {
        chi2 += (merged_obs - merged_exp) * (merged_obs - merged_exp) / merged_exp;
        bins += 1;
    }
    let df = (bins - 1) as f64;
    let critical = chi_squared_quantile(df, 0.999);
    assert!(
        chi2 <= critical,
        "chi-square {chi2:.3} exceeds the {critical:.3} critical value at df {df}"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!(
        "criterion 8 PASS: 5 instances within 4 SE; chi-square {chi2:.2} <= {critical:.2} ({elapsed:?})"
    );
}

/// Exact distribution of the number of distinct realized length-3 words.
fn depth3_count_distribution(probs: [f64; 2]) -> [f64; 9] {
    let level_offsets = [0usize, 2, 6];
    let mut dist = [0.0f64; 9];
    for assignment in 0..(1u32 << 14) {
        let label = |edge: usize| ((assignment >> edge) & 1) as usize;
        let mut probability = 1.0;
        for edge in 0..14 {
            probability *= probs[label(edge)];
        }
        let mut seen = [false; 8];
        for path in 0..8usize {
            let mut node = 0usize;
            let mut code = 0usize;
            for (level, &offset) in level_offsets.iter().enumerate() {
                let branch = (path >> level) & 1;
                let edge = offset + node * 2 + branch;
                code |= label(edge) << level;
                node = node * 2 + branch;
            }
            seen[code] = true;
        }
        let distinct = seen.iter().filter(|&&s| s).count();
        dist[distinct] += probability;
    }
    dist
}

fn chi_squared_quantile(df: f64, p: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(df).unwrap().inverse_cdf(p)
}

#[test]
fn criterion_09_sweep_shape_invariants() {
    let start = Instant::now();
    let curve = TwoMapCurve::new(0.2, 0.7).unwrap();
    let t = curve.thresholds();
    let points: Vec<(f64, f64)> = (0..400)
        .map(|i| {
            let p = 0.002 + 0.996 * i as f64 / 399.0;
            (p, curve.eval(p).unwrap().0)
        })
        .collect();

    let mut flat_min = f64::INFINITY;
    let mut flat_max = f64::NEG_INFINITY;
    for pair in points.windows(2) {
        let (p0, v0) = pair[0];
        let (p1, v1) = pair[1];
        if p1 <= t.p_lower {
            assert!(v1 >= v0 - 1e-12, "not nondecreasing at p = {p1}");
        }
        if p0 >= 0.5 {
            assert!(v1 < v0, "not strictly decreasing at p = {p1}");
        }
        for (p, v) in [(p0, v0), (p1, v1)] {
            if p >= t.p_lower && p <= 0.5 {
                flat_min = flat_min.min(v);
                flat_max = flat_max.max(v);
            }
        }
    }
    assert!(
        flat_max - flat_min <= 1e-6,
        "flat segment varies by {}",
        flat_max - flat_min
    );

    // convexity of the weighted exponent via second differences
    let h = 0.01;
    for i in 1..49 {
        let p = 0.5 + h * i as f64;
        let f = |q: f64| two_map_s_tilde(q, 0.2, 0.7).unwrap();
        let second = f(p + h) - 2.0 * f(p) + f(p - h);
        assert!(second > 0.0, "second difference at {p} is {second}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("criterion 9 PASS: monotone/flat/decreasing segments and convexity hold ({elapsed:?})");
}

/// Auxiliary consistency pin used by several criteria: the library's solved
/// exponents against digits frozen from an independent evaluation.
#[test]
fn frozen_reference_exponents() {
    let s0 = solve_moran(&Ratios::new(vec![0.2, 0.7]).unwrap()).unwrap();
    assert!((s0 - 0.8397803044678211).abs() <= 1e-11);
    let st = two_map_s_tilde(0.6, 0.2, 0.7).unwrap();
    assert!((st - 0.7145184895515095).abs() <= 1e-11);
    // spot-check that the stopping set behind criterion 8's instances is the
    // expected exact cover
    let problem = Problem::validate(&[1.0 / 3.0, 1.0 / 3.0], &[0.3, 0.7], 2).unwrap();
    let params = StoppingSetParams::new(3.0 * 3.0f64.ln()).unwrap();
    assert_eq!(stopping_set(&problem, &params).unwrap().len(), 8);
}
