use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use mtf::analysis::verify_deterministic_bound;
use mtf::estimator::{FitConfig, PointRule, Variant};
use mtf::harness::{
    bench, bench_csv, bounds_csv, cross_validate, cv_csv, experiment_csv, fit_csv,
    parse_lambda_grid, rate_experiment, rates_csv, read_series, run_experiment, series_csv,
    simulate, write_with_metadata, EstimatorSpec, ExperimentConfig, RateKind, SignalKind,
    SignalSpec, CV_DESCRIPTION, RNG_DESCRIPTION,
};

#[derive(Parser)]
#[command(name = "mtf", version, about = "Minmax trend filtering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a noisy signal.
    Simulate {
        #[command(flatten)]
        signal: SignalArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit one penalty and emit the band.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        estimator: EstimatorArgs,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-fold cross-validation over a penalty grid.
    Cv {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        estimator: EstimatorArgs,
        #[arg(long, default_value = "0:100:5")]
        lambda_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo replications with cross-validated penalties.
    Experiment {
        #[command(flatten)]
        signal: SignalArgs,
        #[command(flatten)]
        estimator: EstimatorArgs,
        #[arg(long, default_value = "0:100:5")]
        lambda_grid: String,
        #[arg(long, default_value_t = 2)]
        folds: usize,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error scaling with theory-prescribed penalties.
    Rates {
        #[arg(long, value_enum)]
        kind: RateArg,
        #[arg(long, value_delimiter = ',', default_value = "256,1024,4096")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        reps: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the deterministic error bound on a simulated instance.
    VerifyBounds {
        #[command(flatten)]
        signal: SignalArgs,
        #[command(flatten)]
        estimator: EstimatorArgs,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wall time of a single fit per size.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "1024,4096")]
        sizes: Vec<usize>,
        #[command(flatten)]
        estimator: EstimatorArgs,
        #[arg(long, default_value_t = 10.0)]
        lambda: f64,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SignalArg {
    Smooth,
    Doppler,
    Discont,
    Pwpoly,
    Custom,
}

#[derive(Args)]
struct SignalArgs {
    #[arg(long, value_enum, default_value = "smooth")]
    signal: SignalArg,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 0.3)]
    sigma: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of pieces for `pwpoly`.
    #[arg(long, default_value_t = 4)]
    pieces: usize,
    /// Polynomial degree of each `pwpoly` piece.
    #[arg(long, default_value_t = 0)]
    piece_degree: u32,
    /// Truth file for `custom`.
    #[arg(long)]
    signal_file: Option<PathBuf>,
}

impl SignalArgs {
    fn spec(&self) -> Result<SignalSpec> {
        let kind = match self.signal {
            SignalArg::Smooth => SignalKind::Smooth,
            SignalArg::Doppler => SignalKind::Doppler,
            SignalArg::Discont => SignalKind::Discont,
            SignalArg::Pwpoly => SignalKind::PiecewisePoly {
                pieces: self.pieces,
                degree: self.piece_degree,
            },
            SignalArg::Custom => match &self.signal_file {
                Some(path) => SignalKind::Custom { path: path.clone() },
                None => bail!("--signal custom needs --signal-file"),
            },
        };
        // A custom file sets its own length.
        let n = if matches!(kind, SignalKind::Custom { .. }) { 0 } else { self.n };
        Ok(SignalSpec::new(kind, n))
    }

    fn describe(&self) -> Result<serde_json::Value> {
        Ok(json!({
            "signal": self.spec()?,
            "sigma": self.sigma,
            "seed": self.seed,
        }))
    }
}

/// Observations come from `--input` or from a simulated signal.
#[derive(Args)]
struct DataArgs {
    /// Observed series, one value per line.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    signal: SignalArgs,
}

impl DataArgs {
    fn load(&self) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
        match &self.input {
            Some(path) => Ok((read_series(path)?, None)),
            None => {
                let (truth, y) = simulate(&self.signal.spec()?, self.signal.sigma, self.signal.seed)?;
                Ok((y, Some(truth)))
            }
        }
    }

    fn describe(&self) -> Result<serde_json::Value> {
        Ok(match &self.input {
            Some(path) => json!({ "input": path }),
            None => self.signal.describe()?,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Full,
    Dyadic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum PointArg {
    Midpoint,
    Upper,
    Lower,
}

#[derive(Clone, Copy, ValueEnum)]
enum RateArg {
    Fast,
    Slow,
    Boundary,
}

#[derive(Args)]
struct EstimatorArgs {
    #[arg(long, default_value_t = 0)]
    degree: usize,
    #[arg(long, value_enum, default_value = "dyadic")]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "on")]
    boundary_endpoints: Toggle,
    #[arg(long, value_enum, default_value = "midpoint")]
    point_rule: PointArg,
}

impl EstimatorArgs {
    fn spec(&self) -> EstimatorSpec {
        let variant = match self.variant {
            VariantArg::Full => Variant::Full,
            VariantArg::Dyadic => Variant::Dyadic,
        };
        let mut spec = EstimatorSpec::new(self.degree, variant, matches!(self.boundary_endpoints, Toggle::On));
        spec.point_rule = match self.point_rule {
            PointArg::Midpoint => PointRule::Midpoint,
            PointArg::Upper => PointRule::Upper,
            PointArg::Lower => PointRule::Lower,
        };
        spec
    }
}

fn meta(command: &str, config: serde_json::Value) -> serde_json::Value {
    json!({
        "tool": "mtf",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "rng": RNG_DESCRIPTION,
        "cv_scheme": CV_DESCRIPTION,
        "float_format": "{:.16e}",
    })
}

fn emit(out: &Option<PathBuf>, csv: &str, metadata: serde_json::Value) -> Result<()> {
    match out {
        Some(path) => write_with_metadata(path, csv, &metadata)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { signal, out } => {
            let (truth, y) = simulate(&signal.spec()?, signal.sigma, signal.seed)?;
            emit(&out, &series_csv(&truth, &y), meta("simulate", signal.describe()?))
        }
        Command::Fit {
            data,
            estimator,
            lambda,
            out,
        } => {
            let (y, truth) = data.load()?;
            let est = estimator.spec();
            let config = FitConfig::new(est.degree, lambda, est.effective_variant())
                .with_point_rule(est.point_rule);
            config.validate()?;
            let band = est.band(&est.prepare(&y)?, lambda);
            let metadata = meta(
                "fit",
                json!({ "data": data.describe()?, "estimator": est, "lambda": lambda }),
            );
            emit(&out, &fit_csv(&y, &band, truth.as_deref()), metadata)
        }
        Command::Cv {
            data,
            estimator,
            lambda_grid,
            out,
        } => {
            let (y, _) = data.load()?;
            let est = estimator.spec();
            let grid = parse_lambda_grid(&lambda_grid)?;
            let result = cross_validate(&y, &est, &grid)?;
            eprintln!("selected lambda = {}", result.best_lambda);
            let metadata = meta(
                "cv",
                json!({
                    "data": data.describe()?,
                    "estimator": est,
                    "lambda_grid": grid,
                    "best_lambda": result.best_lambda,
                }),
            );
            emit(&out, &cv_csv(&result), metadata)
        }
        Command::Experiment {
            signal,
            estimator,
            lambda_grid,
            folds,
            reps,
            out,
        } => {
            let config = ExperimentConfig {
                signal: signal.spec()?,
                sigma: signal.sigma,
                seed: signal.seed,
                estimator: estimator.spec(),
                lambda_grid: parse_lambda_grid(&lambda_grid)?,
                folds,
                replications: reps,
            };
            let result = run_experiment(&config)?;
            let s = result.summary;
            eprintln!(
                "mse mean {:.6} median {:.6} q10 {:.6} q90 {:.6}",
                s.mean, s.median, s.q10, s.q90
            );
            let metadata = meta("experiment", json!({ "config": config, "summary": s }));
            emit(&out, &experiment_csv(&result.rows), metadata)
        }
        Command::Rates {
            kind,
            sizes,
            reps,
            sigma,
            seed,
            out,
        } => {
            let kind = match kind {
                RateArg::Fast => RateKind::Fast,
                RateArg::Slow => RateKind::Slow,
                RateArg::Boundary => RateKind::Boundary,
            };
            let table = rate_experiment(kind, &sizes, reps, sigma, seed)?;
            eprintln!("log-log slope = {:.4}", table.slope);
            let metadata = meta(
                "rates",
                json!({
                    "kind": kind, "sizes": sizes, "reps": reps, "sigma": sigma,
                    "seed": seed, "slope": table.slope,
                }),
            );
            emit(&out, &rates_csv(&table), metadata)
        }
        Command::VerifyBounds {
            signal,
            estimator,
            lambda,
            out,
        } => {
            let (truth, y) = simulate(&signal.spec()?, signal.sigma, signal.seed)?;
            let eps: Vec<f64> = y.iter().zip(&truth).map(|(a, b)| a - b).collect();
            let est = estimator.spec();
            let config = FitConfig::new(est.degree, lambda, est.effective_variant())
                .with_point_rule(est.point_rule);
            let report = verify_deterministic_bound(&truth, &eps, &config)?;
            if report.skipped {
                eprintln!("lambda = 0: bound is vacuous, nothing checked");
            } else {
                eprintln!(
                    "{} of {} indices violate the bound",
                    report.failures(),
                    report.diagnostics.len()
                );
            }
            let metadata = meta(
                "verify-bounds",
                json!({
                    "signal": signal.describe()?, "estimator": est, "lambda": lambda,
                    "skipped": report.skipped, "failures": report.failures(),
                }),
            );
            emit(&out, &bounds_csv(&report.diagnostics), metadata)
        }
        Command::Bench {
            sizes,
            estimator,
            lambda,
            repeats,
            threads,
            seed,
            out,
        } => {
            let est = estimator.spec();
            let pool = rayon_pool(threads)?;
            let rows = pool.install(|| bench(&sizes, &est, lambda, repeats, seed))?;
            for r in &rows {
                eprintln!("n = {:>6}: {:.3} s", r.n, r.seconds);
            }
            let metadata = meta(
                "bench",
                json!({ "sizes": sizes, "estimator": est, "lambda": lambda, "threads": threads }),
            );
            emit(&out, &bench_csv(&rows), metadata)
        }
    }
}

fn rayon_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building thread pool")
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
