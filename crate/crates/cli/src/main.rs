use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use colored_ito::correction::spectral_factor;
use colored_ito::harness::{
    aggregate, l2_error, order_for, read_aggregates, read_records, run_ensemble, summary_path,
    write_aggregates, write_plot_script, write_records, AGGREGATE_HEADER,
};
use colored_ito::integrators::run;
use colored_ito::noise::{autocorrelation, e_folding_time, EFolding};
use colored_ito::oracle::exact_solution;
use colored_ito::seed::realization_seed;
use colored_ito::spectral::{build_operators, choose_truncation, wavenumbers};
use colored_ito::{ExperimentConfig, NoiseRealization, NoiseSpec, Scheme, StepSize};

/// Convergence experiments for SDEs driven by colored noise.
#[derive(Parser)]
#[command(name = "colored-ito", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print noise variance, increment variance and e-folding time per color.
    NoiseStats(NoiseStatsArgs),
    /// Integrate one realization and print the final modes next to the exact ones.
    Simulate(SimulateArgs),
    /// Run the full ensemble sweep and write member and summary CSV files.
    Converge(ConvergeArgs),
    /// Turn a summary (or member) CSV into a gnuplot script.
    PlotScript(PlotArgs),
    /// Pick the truncation wavenumber from a probe simulation.
    Truncation(TruncationArgs),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed for the noise realizations.
    #[arg(long)]
    seed: Option<u64>,
    /// Color parameters, comma separated.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Step sizes as `1/M` or decimals, comma separated.
    #[arg(long = "dt-list", value_delimiter = ',')]
    dt_list: Vec<StepSize>,
}

impl Common {
    fn experiment(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.base_seed = seed;
        }
        if !self.alpha.is_empty() {
            cfg.alphas = self.alpha.clone();
        }
        if !self.dt_list.is_empty() {
            cfg.dts = self.dt_list.clone();
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct NoiseStatsArgs {
    #[command(flatten)]
    common: Common,
    /// Realizations used for the empirical estimates.
    #[arg(long, default_value_t = 1000)]
    realizations: usize,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Scheme, e.g. `euler_forward`, `decentered@0.5`, `midpoint_reference`.
    #[arg(long, default_value = "euler_forward")]
    scheme: Scheme,
    /// Decentering parameter for `decentered`.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, conflicts_with = "no_corrected")]
    corrected: bool,
    #[arg(long = "no-corrected")]
    no_corrected: bool,
    /// Realization index within the seeded ensemble.
    #[arg(long, default_value_t = 0)]
    realization: u64,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    common: Common,
    /// Schemes, comma separated, e.g. `euler_forward,euler_forward+ito`.
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<Scheme>,
    #[arg(long)]
    realizations: Option<usize>,
    /// Member CSV path; the summary goes next to it as `<name>.summary.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Summary or member CSV written by `converge`.
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TruncationArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1e-4)]
    threshold: f64,
}

fn noise_stats(args: &NoiseStatsArgs) -> Result<()> {
    let mut cfg = args.common.experiment()?;
    if args.common.dt_list.is_empty() && args.common.config.is_none() {
        cfg.dts = vec![StepSize::per_unit(766)?];
    }
    if args.common.alpha.is_empty() && args.common.config.is_none() {
        cfg.alphas = vec![0.0, 1e-6, 1e-5, 1e-4, 1.0];
    }
    if args.realizations < 2 {
        bail!("--realizations must be at least 2");
    }
    println!(
        "{:>10} {:>8} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "alpha", "dt", "S", "S/dt", "var(n)", "dt*S", "var(dbeta)", "e-fold"
    );
    for &step in &cfg.dts {
        for &alpha in &cfg.alphas {
            let spec = NoiseSpec::for_step(alpha, step)?;
            let s = spectral_factor(&spec).value();
            let dt = step.dt();
            let (mut var, mut inc) = (0.0, 0.0);
            let times: Vec<f64> = (0..16).map(|i| i as f64 / 16.0).collect();
            for r in 0..args.realizations as u64 {
                let noise = NoiseRealization::sample(&spec, realization_seed(cfg.base_seed, r));
                for &t in &times {
                    var += noise.evaluate(t).powi(2);
                    inc += noise.integrate(t, t + dt)?.powi(2);
                }
            }
            let count = (args.realizations * times.len()) as f64;
            let lags: Vec<f64> = (0..=100).map(|i| i as f64 * dt).collect();
            let acf = autocorrelation(&spec, &lags, args.realizations.min(200), cfg.base_seed)?;
            let fold = match e_folding_time(&acf)? {
                EFolding::Reached(t) => format!("{t:.4e}"),
                EFolding::NotReached => format!(">{:.2e}", lags[lags.len() - 1]),
            };
            println!(
                "{:>10.1e} {:>8} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12}",
                alpha,
                step.to_string(),
                s,
                s / dt,
                var / count,
                s * dt,
                inc / count,
                fold
            );
        }
    }
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = args.common.experiment()?;
    let mut scheme = args.scheme;
    if let Some(lambda) = args.lambda {
        scheme = Scheme::decentered(lambda, scheme.corrected)?;
    }
    if args.corrected {
        scheme.corrected = true;
    }
    if args.no_corrected {
        scheme.corrected = false;
    }
    let alpha = cfg.alphas[0];
    let step = cfg.dts[0];
    let spec = NoiseSpec::for_step(alpha, step)?;
    let noise = NoiseRealization::sample(&spec, realization_seed(cfg.base_seed, args.realization));
    let ops = build_operators(&cfg.model)?;
    let out = run(
        &cfg.model,
        &scheme.with_step(step),
        &noise,
        &ops,
        &spectral_factor(&spec),
    )?;
    let exact = exact_solution(&cfg.model, &ops, &noise, cfg.model.t_final)?;

    println!(
        "# {scheme}, alpha = {alpha:e}, dt = {step}, t = {}",
        out.final_state.t
    );
    println!(
        "{:>4} {:>24} {:>24} {:>24} {:>24}",
        "k", "re", "im", "exact_re", "exact_im"
    );
    for ((k, f), e) in wavenumbers(cfg.model.n_x)
        .zip(&out.final_state.coeffs)
        .zip(&exact.coeffs)
    {
        println!(
            "{k:>4} {:>24.16e} {:>24.16e} {:>24.16e} {:>24.16e}",
            f.re, f.im, e.re, e.im
        );
    }
    println!("# l2_error = {:.16e}", l2_error(&out.final_state, &exact)?);
    Ok(())
}

fn converge(args: &ConvergeArgs) -> Result<()> {
    let mut cfg = args.common.experiment()?;
    if !args.scheme.is_empty() {
        cfg.schemes = args.scheme.clone();
    }
    if let Some(n) = args.realizations {
        cfg.realizations = n;
    }
    if let Some(out) = &args.out {
        cfg.output_path = out.clone();
    } else if let Some(config) = &args.common.config {
        // Relative output paths in a config file are relative to that file.
        if cfg.output_path.is_relative() {
            let dir = config.parent().unwrap_or(Path::new(""));
            cfg.output_path = dir.join(&cfg.output_path);
        }
    }
    let outcome = run_ensemble(&cfg)?;
    let summary = summary_path(&cfg.output_path);
    write_records(&outcome.records, &cfg.output_path)?;
    write_aggregates(&outcome.aggregates, &summary)?;
    println!(
        "wrote {} and {}",
        cfg.output_path.display(),
        summary.display()
    );

    println!("order over the {} finest steps:", cfg.order_window);
    for &alpha in &cfg.alphas {
        for scheme in &cfg.schemes {
            match order_for(&outcome.aggregates, alpha, scheme, cfg.order_window) {
                Ok(order) => println!("  alpha = {alpha:<8e} {scheme:<24} {order:.3}"),
                Err(e) => println!("  alpha = {alpha:<8e} {scheme:<24} n/a ({e})"),
            }
        }
    }
    if !outcome.failures.is_empty() {
        eprintln!("{} cells failed:", outcome.failures.len());
        for f in &outcome.failures {
            eprintln!(
                "  alpha = {:e}, dt = {}, {}, realization {}: {}",
                f.alpha, f.step, f.scheme, f.realization, f.message
            );
        }
    }
    Ok(())
}

fn plot_script(args: &PlotArgs) -> Result<()> {
    let header = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let is_summary = header
        .lines()
        .next()
        .is_some_and(|l| l == AGGREGATE_HEADER.join(","));
    let aggregates = if is_summary {
        read_aggregates(&args.input)?
    } else {
        aggregate(&mut read_records(&args.input)?)
    };
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.input.with_extension("gp"));
    write_plot_script(&aggregates, &out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn truncation(args: &TruncationArgs) -> Result<()> {
    let cfg = args.common.experiment()?;
    let n = choose_truncation(&cfg.model, args.threshold)?;
    println!("{n}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::NoiseStats(a) => noise_stats(a),
        Command::Simulate(a) => simulate(a),
        Command::Converge(a) => converge(a),
        Command::PlotScript(a) => plot_script(a),
        Command::Truncation(a) => truncation(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
