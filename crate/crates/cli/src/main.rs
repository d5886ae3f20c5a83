use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qwalk_cli::config::{ExperimentConfig, Family, ModelConfig};
use qwalk_cli::dispersion::dispersion_csv;
use qwalk_cli::presets;
use qwalk_cli::run::{resolve_out_dir, run};
use qwalk_cli::verify::{verify, VerifyOptions};

/// Discrete-time Weyl and Dirac quantum walk simulator.
#[derive(Parser)]
#[command(name = "qwalk", version)]
struct Cli {
    /// Cap on worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// Experiment config (JSON).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Compiled-in experiment, see `qwalk presets`.
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> Result<Option<ExperimentConfig>> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return Ok(Some(ExperimentConfig::from_json(&text)?));
        }
        if let Some(name) = &self.preset {
            return presets::preset(name)
                .map(Some)
                .ok_or_else(|| anyhow!("unknown preset {name:?}; known: {}", presets::NAMES.join(", ")));
        }
        Ok(None)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write series, snapshots and run.json.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory (default: $QWALK_OUT_DIR/<name>, else qwalk-out/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the number of steps.
        #[arg(long)]
        steps: Option<u64>,
        /// Override the sampling stride.
        #[arg(long)]
        stride: Option<u64>,
    },
    /// Run the invariant suite and report residuals.
    Verify {
        #[command(flatten)]
        source: Source,
        /// Seed for the random test points.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Perturb one transition matrix entry by this amount.
        #[arg(long, hide = true)]
        corrupt_transition: Option<f64>,
    },
    /// Sample dispersion, group velocity and eigenvectors on a regular grid.
    Dispersion {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_parser = ["weyl", "dirac"])]
        family: Option<String>,
        #[arg(long)]
        dimension: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        mass: f64,
        /// Points per axis.
        #[arg(long, default_value_t = 32)]
        resolution: usize,
        /// Output directory for dispersion.csv (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List presets, or print one as JSON.
    Presets {
        #[arg(long)]
        show: Option<String>,
    },
}

fn execute(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Run {
            source,
            out,
            steps,
            stride,
        } => {
            let Some(mut config) = source.load()? else {
                bail!("run needs --config or --preset");
            };
            if let Some(t) = steps {
                config.steps = t;
                config.snapshots.retain(|&s| s <= t);
            }
            if let Some(s) = stride {
                config.stride = s;
            }
            let dir = resolve_out_dir(out, std::env::var("QWALK_OUT_DIR").ok(), &config);
            let summary = run(&config, &dir)?;
            println!(
                "{}: {} steps, final norm {:.15}, {:.2} s, outputs in {}",
                config.name,
                config.steps,
                summary.final_norm,
                summary.timing.total_seconds,
                dir.display()
            );
            if summary.degraded {
                eprintln!("warning: norm drifted beyond tolerance; run marked degraded");
            }
            if summary.unreliable_mean_samples > 0 {
                eprintln!(
                    "warning: {} mean-position samples had mass near the wrap seam",
                    summary.unreliable_mean_samples
                );
            }
            Ok(true)
        }
        Command::Verify {
            source,
            seed,
            corrupt_transition,
        } => {
            let models = match source.load()? {
                Some(config) => vec![config.model.build()?],
                None => vec![],
            };
            let checks = verify(&VerifyOptions {
                models,
                corrupt_transition,
                seed,
            });
            for c in &checks {
                println!(
                    "{} {:<50} residual {:.3e} (tolerance {:.0e})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.residual,
                    c.tolerance
                );
            }
            let failed = checks.iter().filter(|c| !c.pass).count();
            println!("{} checks, {failed} failed", checks.len());
            Ok(failed == 0)
        }
        Command::Dispersion {
            source,
            family,
            dimension,
            mass,
            resolution,
            out,
        } => {
            let model = match (source.load()?, family) {
                (Some(config), None) => config.model,
                (None, Some(family)) => ModelConfig {
                    family: if family == "weyl" { Family::Weyl } else { Family::Dirac },
                    dimension: dimension.ok_or_else(|| anyhow!("--dimension is required with --family"))?,
                    mass,
                },
                (Some(_), Some(_)) => bail!("give either a config/preset or --family, not both"),
                (None, None) => bail!("dispersion needs --family and --dimension, or a config/preset"),
            }
            .build()?;
            let csv = dispersion_csv(&model, resolution)?;
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    fs::write(dir.join("dispersion.csv"), csv)?;
                }
                None => print!("{csv}"),
            }
            Ok(true)
        }
        Command::Presets { show } => {
            match show {
                Some(name) => {
                    let config = presets::preset(&name).ok_or_else(|| anyhow!("unknown preset {name:?}"))?;
                    println!("{}", config.to_json());
                }
                None => {
                    for name in presets::NAMES {
                        println!("{name}  {}", presets::describe(name).unwrap());
                    }
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
