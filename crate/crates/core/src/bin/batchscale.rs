use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use batchscale::dynamics::{accumulation_growth_sim, noise_scale_sweep, SweepPoint};
use batchscale::harness::report::render_reported_counts;
use batchscale::harness::{compare_schedules, lr_sweep, reported_counts, run_experiment, ExperimentConfig};
use batchscale::problem::make_noisy_quadratic;
use batchscale::schedule::{accumulation_forecast, ConversionMode, Schedule};
use batchscale::{Error, Result};

#[derive(Parser)]
#[command(name = "batchscale", version, about = "Learning-rate decay as batch-size increase")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a schedule JSON file and print the result.
    Convert {
        schedule: PathBuf,
        #[arg(long, default_value = "increase")]
        mode: ConversionMode,
        #[arg(long)]
        b_max: Option<usize>,
        /// Write the converted schedule here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print exact and integer update counts of a schedule.
    Count { schedule: PathBuf },
    /// Update counts of the wide-ResNet CIFAR-10 schedules against their
    /// reported budgets.
    #[command(name = "paper-counts")]
    ReportedCounts,
    /// Train an experiment config and persist it.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated seeds replacing the config's.
        #[arg(long, value_delimiter = ',', conflicts_with = "seed")]
        seeds: Option<Vec<u64>>,
        /// Single seed replacing the config's.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "BATCHSCALE_OUT", default_value = "batchscale-out")]
        out: PathBuf,
    },
    /// Train one config under several conversion modes and compare.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "decay,hybrid,increase")]
        modes: Vec<ConversionMode>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "BATCHSCALE_OUT", default_value = "batchscale-out")]
        out: PathBuf,
    },
    /// Sweep the initial learning rate of a config.
    SweepLr {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        lrs: Vec<f64>,
        /// Scale every batch size with the learning rate.
        #[arg(long)]
        scale_batch: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "BATCHSCALE_OUT", default_value = "batchscale-out")]
        out: PathBuf,
    },
    /// Stationary variance of SGD on the noisy quadratic across batch sizes.
    SweepNoise {
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 32768)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
        batch_sizes: Vec<usize>,
        #[arg(long, default_value_t = 0.0)]
        momentum: f64,
        #[arg(long, default_value_t = 200_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare simulated momentum accumulation with its closed forms.
    VerifyAccumulation {
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,0.9,0.98,0.9875")]
        momenta: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        steps: u64,
        #[arg(long, default_value_t = 1.0)]
        gradient: f64,
        #[arg(long, default_value_t = 50_000)]
        n: usize,
        #[arg(long, default_value_t = 128)]
        batch_size: usize,
    },
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::read(path)?;
    if let Some(s) = seed {
        cfg.seeds = vec![s];
    }
    Ok(cfg)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Convert {
            schedule,
            mode,
            b_max,
            out,
        } => {
            let converted = Schedule::read(&schedule)?.apply_conversion(mode, b_max)?;
            match out {
                Some(p) => converted.write(&p)?,
                None => println!("{}", converted.to_json_pretty()),
            }
        }
        Command::Count { schedule } => {
            let s = Schedule::read(&schedule)?;
            println!("{:>8} {:>8} {:>8} {:>14}", "start", "end", "batch", "updates");
            for p in s.phases() {
                println!(
                    "{:>8} {:>8} {:>8} {:>14}",
                    p.start_epoch,
                    p.end_epoch,
                    p.batch_size,
                    p.epochs() * s.dataset_size() as f64 / p.batch_size as f64
                );
            }
            println!("exact: {} ({})", s.update_count_exact(), s.update_count_ratio());
            println!("integer: {}", s.update_count());
        }
        Command::ReportedCounts => {
            let rows = reported_counts();
            print!("{}", render_reported_counts(&rows));
        }
        Command::Run { config, seeds, seed, out } => {
            let mut cfg = load_config(&config, seed)?;
            if let Some(s) = seeds {
                cfg.seeds = s;
            }
            let records = run_experiment(&cfg, &out)?;
            for r in &records {
                let s = &r.summary;
                println!(
                    "seed {}: {} updates, train loss {:.6}, eval {:.6}{}",
                    r.seed,
                    s.total_updates,
                    s.final_train_loss,
                    s.final_eval_metric,
                    s.failure.as_deref().map_or(String::new(), |f| format!(" [failed: {f}]"))
                );
            }
            println!("wrote {}", out.display());
        }
        Command::Compare {
            config,
            modes,
            seed,
            out,
        } => {
            let report = compare_schedules(&load_config(&config, seed)?, &modes)?;
            print!("{}", report.render());
            write_json(&out.join("comparison.json"), &report)?;
        }
        Command::SweepLr {
            config,
            lrs,
            scale_batch,
            seed,
            out,
        } => {
            let report = lr_sweep(&load_config(&config, seed)?, &lrs, scale_batch)?;
            print!("{}", report.render());
            write_json(&out.join("lr_sweep.json"), &report)?;
        }
        Command::SweepNoise {
            lambda,
            sigma,
            n,
            dim,
            lr,
            batch_sizes,
            momentum,
            samples,
            seed,
            out,
        } => {
            let q = make_noisy_quadratic(lambda, sigma, n, dim, seed)?;
            let points: Vec<SweepPoint> = batch_sizes
                .iter()
                .map(|&b| SweepPoint {
                    lr,
                    batch_size: b,
                    momentum,
                })
                .collect();
            let result = noise_scale_sweep(&q, &points, None, samples, seed)?;
            match out {
                Some(p) => {
                    let f = std::fs::File::create(&p).map_err(|e| Error::Io { path: p.clone(), source: e })?;
                    result.write_csv(f)?;
                }
                None => result.write_csv(std::io::stdout().lock())?,
            }
            eprintln!(
                "variance = {:.6e} + {:.6e} g, R^2 = {:.5}",
                result.fit_intercept, result.fit_slope, result.r_squared
            );
        }
        Command::VerifyAccumulation {
            momenta,
            steps,
            gradient,
            n,
            batch_size,
        } => {
            println!(
                "{:>8} {:>16} {:>16} {:>14}",
                "m", "max |sim-disc|", "cont/disc gap", "lost epochs"
            );
            for m in momenta {
                let trace = accumulation_growth_sim(gradient, m, steps)?;
                let forecast = accumulation_forecast(gradient, m, n, batch_size)?;
                println!(
                    "{:>8} {:>16.3e} {:>16.4} {:>14.6}",
                    m,
                    trace.max_abs_error_vs_discrete(),
                    trace.max_relative_gap_vs_continuous(steps),
                    forecast.lost_epochs()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
