//! Command-line interface: configuration ingestion, dispatch to the
//! computation modules, and CSV/SVG/report emission.

mod config;
mod error;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use fracdim_core::dimension::{dimension, DimensionResult};
use fracdim_core::simulate::{
    growth_rate_fit, occupancy_probability, run_walk, stopping_set, StoppingSetParams,
};
use fracdim_core::special::{two_map_s_tilde, TwoMapCurve};
use fracdim_core::variational::{default_grid_resolution, maximize_on_surface};
use fracdim_core::Problem;

use config::RunConfig;
use error::{CliError, CliResult};
use output::{emit_summary, fmt_sig, Sink};

#[derive(Parser)]
#[command(
    name = "fracdim",
    version,
    about = "Dimension of random subsets of self-similar sets built by random tree labelings"
)]
struct Cli {
    /// Configuration file (TOML key-value pairs; see README)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Random seed (overrides the configuration file)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file; data goes to standard output when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format for the sweep command
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Remove zero-probability maps and renormalize before validation
    #[arg(long, global = true)]
    prune_zeros: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form dimension report for the configured problem
    Dim,
    /// Dimension as a function of p for a two-map system on a binary tree
    Sweep {
        r1: f64,
        r2: f64,
        /// Number of sweep points over p in [0.002, 0.998]
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// Phase-transition thresholds p_* and p^* for a two-map system
    Thresholds { r1: f64, r2: f64 },
    /// Exact expected cover counts over a range of scales, with fitted slope
    Expect {
        #[arg(long)]
        n_min: f64,
        #[arg(long)]
        n_max: f64,
        #[arg(long, default_value_t = 1.0)]
        n_step: f64,
    },
    /// Monte Carlo of the branching random walk over scales and replicas
    Simulate {
        /// Comma-separated scale exponents
        #[arg(long, value_delimiter = ',', required = true)]
        n_values: Vec<f64>,
        #[arg(long)]
        replicas: u64,
    },
    /// Brute-force variational maximization next to the closed form
    Oracle {
        /// Simplex grid subdivisions (default depends on the alphabet size)
        #[arg(long)]
        grid_resolution: Option<usize>,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn run() -> CliResult<()> {
    let cli = Cli::parse();
    init_threads()?;
    let sink = Sink::from_flag(cli.out.clone());
    match cli.command {
        Command::Dim => cmd_dim(&cli, &sink),
        Command::Sweep { r1, r2, points } => cmd_sweep(r1, r2, points, &sink, cli.format),
        Command::Thresholds { r1, r2 } => cmd_thresholds(r1, r2, &sink),
        Command::Expect {
            n_min,
            n_max,
            n_step,
        } => cmd_expect(&cli, &sink, n_min, n_max, n_step),
        Command::Simulate {
            ref n_values,
            replicas,
        } => {
            let n_values = n_values.clone();
            cmd_simulate(&cli, &sink, &n_values, replicas)
        }
        Command::Oracle { grid_resolution } => cmd_oracle(&cli, &sink, grid_resolution),
    }
}

/// FRACDIM_THREADS caps parallelism; outputs are identical at any width.
fn init_threads() -> CliResult<()> {
    match std::env::var("FRACDIM_THREADS") {
        Ok(raw) => {
            let threads: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
                CliError::validation(format!(
                    "FRACDIM_THREADS must be a positive integer, got {raw:?}"
                ))
            })?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .map_err(|e| CliError::validation(e.to_string()))
        }
        Err(_) => Ok(()),
    }
}

fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::validation("--config <path> is required for this command"))?;
    let mut config = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn csv_only(format: Format) -> CliResult<()> {
    if format == Format::Svg {
        return Err(CliError::validation(
            "svg output is only available for the sweep command",
        ));
    }
    Ok(())
}

fn verify_residuals(problem: &Problem, result: &DimensionResult, tol: f64) -> CliResult<()> {
    let rs = problem.ratios().values();
    let ps = problem.probs().values();
    let moran: f64 = rs.iter().map(|r| r.powf(result.s0)).sum::<f64>() - 1.0;
    let weighted: f64 = rs
        .iter()
        .zip(ps)
        .map(|(&r, &p)| p * r.powf(result.s_tilde))
        .sum::<f64>()
        - 1.0 / problem.branching() as f64;
    if moran.abs() > tol || weighted.abs() > tol {
        return Err(CliError::solver(format!(
            "solver residuals {:.3e} / {:.3e} exceed solver_tol {tol:.3e}",
            moran.abs(),
            weighted.abs()
        )));
    }
    Ok(())
}

fn format_vector(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|&v| fmt_sig(v, 12)).collect();
    format!("[{}]", parts.join(", "))
}

fn cmd_dim(cli: &Cli, sink: &Sink) -> CliResult<()> {
    let config = load_config(cli)?;
    let problem = config.problem(cli.prune_zeros)?;
    let result = dimension(&problem)?;
    verify_residuals(&problem, &result, config.solver_tol)?;

    let mut report = String::new();
    report.push_str(&format!("case = {}\n", result.case));
    report.push_str(&format!("dimension = {}\n", fmt_sig(result.value, 12)));
    report.push_str(&format!("s0 = {}\n", fmt_sig(result.s0, 12)));
    report.push_str(&format!("s_tilde = {}\n", fmt_sig(result.s_tilde, 12)));
    report.push_str(&format!("beta = {}\n", format_vector(result.beta.values())));
    if let Some(t_hat) = result.t_hat {
        report.push_str(&format!("t_hat = {}\n", fmt_sig(t_hat, 12)));
    }
    sink.write_all(&report)
}

fn cmd_sweep(r1: f64, r2: f64, points: usize, sink: &Sink, format: Format) -> CliResult<()> {
    if points < 10 {
        return Err(CliError::validation(format!(
            "at least 10 sweep points are required, got {points}"
        )));
    }
    let curve = TwoMapCurve::new(r1, r2)?;
    let grid: Vec<f64> = (0..points)
        .map(|i| 0.002 + 0.996 * i as f64 / (points - 1) as f64)
        .collect();
    let rows: Vec<(f64, f64, String)> = grid
        .par_iter()
        .map(|&p| {
            let (value, case) = curve.eval(p)?;
            Ok((p, value, case.to_string()))
        })
        .collect::<CliResult<Vec<_>>>()?;

    match format {
        Format::Csv => {
            let mut csv = String::from("p,dimension,case\n");
            for (p, value, case) in &rows {
                csv.push_str(&format!(
                    "{},{},{case}\n",
                    fmt_sig(*p, 10),
                    fmt_sig(*value, 10)
                ));
            }
            sink.write_all(&csv)?;
        }
        Format::Svg => {
            let curve_points: Vec<(f64, f64)> = rows.iter().map(|&(p, v, _)| (p, v)).collect();
            let document = svg::render_sweep(&curve_points, curve.s0(), curve.thresholds());
            sink.write_all(&document)?;
        }
    }

    let t = curve.thresholds();
    emit_summary(
        sink,
        &format!(
            "s0 = {}\np_star = {}\np_star_upper = {}\n",
            fmt_sig(curve.s0(), 12),
            fmt_sig(t.p_lower, 12),
            fmt_sig(t.p_upper, 12)
        ),
    );
    Ok(())
}

fn cmd_thresholds(r1: f64, r2: f64, sink: &Sink) -> CliResult<()> {
    let curve = TwoMapCurve::new(r1, r2)?;
    let s0 = curve.s0();
    let t = curve.thresholds();

    let residual_g =
        r1.powf(s0) * (2.0 * t.p_lower).ln() + r2.powf(s0) * (2.0 * (1.0 - t.p_lower)).ln();
    let st = two_map_s_tilde(t.p_upper, r1, r2)?;
    let p = t.p_upper;
    let residual_eq1 = p * r1.powf(st) + (1.0 - p) * r2.powf(st) - 0.5;
    let residual_eq2 =
        p * r1.powf(st) * p.ln() + (1.0 - p) * r2.powf(st) * (1.0 - p).ln() + 0.5 * 2.0f64.ln();
    let residual_g_tilde =
        p * r1.powf(st) * (2.0 * p).ln() + (1.0 - p) * r2.powf(st) * (2.0 * (1.0 - p)).ln();

    let mut report = String::new();
    report.push_str(&format!("s0 = {}\n", fmt_sig(s0, 12)));
    report.push_str(&format!("p_star = {}\n", fmt_sig(t.p_lower, 12)));
    report.push_str(&format!("p_star_upper = {}\n", fmt_sig(t.p_upper, 12)));
    report.push_str(&format!("residual_g = {:.3e}\n", residual_g));
    report.push_str(&format!("residual_g_tilde = {:.3e}\n", residual_g_tilde));
    report.push_str(&format!("residual_system_eq1 = {:.3e}\n", residual_eq1));
    report.push_str(&format!("residual_system_eq2 = {:.3e}\n", residual_eq2));
    sink.write_all(&report)
}

fn least_squares(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let num: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (x - mean_x) * (y - mean_y))
        .sum();
    let den: f64 = xs.iter().map(|&x| (x - mean_x) * (x - mean_x)).sum();
    num / den
}

fn cmd_expect(cli: &Cli, sink: &Sink, n_min: f64, n_max: f64, n_step: f64) -> CliResult<()> {
    csv_only(cli.format)?;
    let range_valid = n_min > 0.0 && n_step > 0.0 && n_max >= n_min;
    if !range_valid {
        return Err(CliError::validation(format!(
            "invalid scale range: n_min = {n_min}, n_max = {n_max}, n_step = {n_step}"
        )));
    }
    let config = load_config(cli)?;
    let problem = config.problem(cli.prune_zeros)?;
    let caps = config.caps();

    let mut ns = Vec::new();
    let mut n = n_min;
    while n <= n_max + 1e-9 {
        ns.push(n);
        n += n_step;
    }

    let rows: Vec<(f64, usize, f64)> = ns
        .par_iter()
        .map(|&n| {
            let params = StoppingSetParams::with_caps(n, caps)?;
            let words = stopping_set(&problem, &params)?;
            let mut expected = 0.0;
            for word in &words {
                expected += occupancy_probability(&problem, word)?;
            }
            Ok((n, words.len(), expected))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut csv = String::from("n,gamma_n_size,expected_cover,log_expected_over_n\n");
    for &(n, size, expected) in &rows {
        csv.push_str(&format!(
            "{},{size},{},{}\n",
            fmt_sig(n, 10),
            fmt_sig(expected, 10),
            fmt_sig(expected.ln() / n, 10)
        ));
    }
    sink.write_all(&csv)?;

    let closed = dimension(&problem)?.value;
    let slope_line = if ns.len() >= 3 {
        let fit = growth_rate_fit(&problem, &ns, caps)?;
        format!("fitted_slope = {}\n", fmt_sig(fit.slope, 12))
    } else {
        "fitted_slope = n/a (need at least 3 scales)\n".to_string()
    };
    emit_summary(
        sink,
        &format!(
            "{slope_line}closed_form_dimension = {}\n",
            fmt_sig(closed, 12)
        ),
    );
    Ok(())
}

fn cmd_simulate(cli: &Cli, sink: &Sink, n_values: &[f64], replicas: u64) -> CliResult<()> {
    csv_only(cli.format)?;
    if replicas == 0 {
        return Err(CliError::validation("at least one replica is required"));
    }
    if n_values.is_empty() {
        return Err(CliError::validation("at least one scale value is required"));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::validation(
            "scale values must be strictly increasing",
        ));
    }
    let config = load_config(cli)?;
    let problem = config.problem(cli.prune_zeros)?;
    let caps = config.caps();
    let seeds: Vec<u64> = (0..replicas).map(|i| config.seed.wrapping_add(i)).collect();

    let pairs: Vec<(f64, u64)> = n_values
        .iter()
        .flat_map(|&n| seeds.iter().map(move |&s| (n, s)))
        .collect();
    let counts: Vec<usize> = pairs
        .par_iter()
        .map(|&(n, seed)| {
            let params = StoppingSetParams::with_caps(n, caps)?;
            Ok(run_walk(&problem, &params, seed)?.stopped_words.len())
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut csv = String::from("n,seed,stopped_count\n");
    for (&(n, seed), &count) in pairs.iter().zip(&counts) {
        csv.push_str(&format!("{},{seed},{count}\n", fmt_sig(n, 10)));
    }
    sink.write_all(&csv)?;

    let closed = dimension(&problem)?.value;
    let empirical_line = if n_values.len() >= 2 {
        let means: Vec<f64> = (0..n_values.len())
            .map(|i| {
                let start = i * seeds.len();
                counts[start..start + seeds.len()]
                    .iter()
                    .map(|&c| (c as f64).ln())
                    .sum::<f64>()
                    / seeds.len() as f64
            })
            .collect();
        format!(
            "empirical_slope = {}\n",
            fmt_sig(least_squares(n_values, &means), 12)
        )
    } else {
        "empirical_slope = n/a (need at least 2 scales)\n".to_string()
    };
    let exact_line = if n_values.len() >= 3 {
        match growth_rate_fit(&problem, n_values, caps) {
            Ok(fit) => format!("exact_expectation_slope = {}\n", fmt_sig(fit.slope, 12)),
            Err(err) => format!("exact_expectation_slope = n/a ({err})\n"),
        }
    } else {
        "exact_expectation_slope = n/a (need at least 3 scales)\n".to_string()
    };
    emit_summary(
        sink,
        &format!(
            "{empirical_line}{exact_line}closed_form_dimension = {}\n",
            fmt_sig(closed, 12)
        ),
    );
    Ok(())
}

fn cmd_oracle(cli: &Cli, sink: &Sink, grid_resolution: Option<usize>) -> CliResult<()> {
    let config = load_config(cli)?;
    let problem = config.problem(cli.prune_zeros)?;
    if problem.map_count() > 4 {
        return Err(CliError::validation(format!(
            "the oracle is limited to 4 maps (grid cost grows exponentially), got {}",
            problem.map_count()
        )));
    }
    let resolution = grid_resolution
        .or(config.grid_resolution)
        .unwrap_or_else(|| default_grid_resolution(problem.map_count()));
    let oracle = maximize_on_surface(&problem, resolution)?;
    let closed = dimension(&problem)?.value;

    let mut report = String::new();
    report.push_str(&format!("oracle_value = {}\n", fmt_sig(oracle.value, 12)));
    report.push_str(&format!(
        "oracle_argmax = {}\n",
        format_vector(oracle.argmax.values())
    ));
    report.push_str(&format!("closed_form = {}\n", fmt_sig(closed, 12)));
    report.push_str(&format!(
        "difference = {:.3e}\n",
        (oracle.value - closed).abs()
    ));
    report.push_str(&format!("grid_resolution = {}\n", oracle.grid_resolution));
    sink.write_all(&report)
}
