//! Command-line front end: solve, generate, reference-solve, noisy trials and
//! batch experiments.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use mistr::format::{read_difference_set, write_point_set};
use mistr::harness::{run_experiment, write_outputs, ExperimentConfig};
use mistr::noise::{noisy_pipeline, NoisyParams};
use mistr::oracle::brute_force_solve;
use mistr::rng::{stream, DIRECTION_STREAM, SCENE_STREAM};
use mistr::scene::{generate, SceneModel, SceneParams};
use mistr::search::{mistr, MistrParams};

/// Column order of the `noisy-pr` CSV.
const NOISY_HEADER: &str = "trial,realized_k,kappa,support_ok,mistr_exact,equivalent,depth,wall_ms";

#[derive(Parser)]
#[command(name = "mistr", version, about = "Sparse lattice support recovery from difference sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover a point set from a difference-set file.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = MistrParams::default().projections)]
        projections: usize,
        #[arg(long, default_value_t = MistrParams::default().c)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = MistrParams::default().node_budget)]
        node_budget: u64,
        /// Point-set file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// JSON file for the search statistics.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Draw a random support.
    Gen {
        #[arg(long, default_value = "gaussian")]
        model: SceneModel,
        #[arg(long)]
        s: u64,
        #[arg(long)]
        n: f64,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Point-set file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the noisy autocorrelation pipeline for a batch of trials.
    NoisyPr {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 71.0)]
        n: f64,
        #[arg(long)]
        s: u64,
        #[arg(long)]
        sigma: f64,
        /// Relative threshold on `|y| / ||y||`.
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = MistrParams::default().projections)]
        projections: usize,
        /// CSV file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List every smallest solution class of a difference set.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        max_k: usize,
    },
    /// Run a batch experiment from a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve { input, projections, c, seed, node_budget, output, stats } => {
            let w = read_difference_set(&input).with_context(|| format!("reading {}", input.display()))?;
            let params = MistrParams { projections, c, node_budget };
            let result = mistr(&w, &params, &mut stream(seed, DIRECTION_STREAM))?;
            emit(&write_point_set(&result.recovered), output.as_ref())?;
            if let Some(path) = stats {
                let json = serde_json::json!({
                    "exact": result.exact,
                    "depth_used": result.depth_used,
                    "nodes_explored": result.stats.nodes_explored,
                    "nodes_pruned": result.stats.nodes_pruned,
                    "diffset_checks": result.stats.diffset_checks,
                    "wall_ms": result.stats.wall_ms(),
                });
                std::fs::write(&path, serde_json::to_string_pretty(&json)? + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if !result.exact {
                eprintln!("warning: best candidate does not reproduce the difference set");
            }
            Ok(())
        }
        Command::Gen { model, s, n, d, seed, output } => {
            let v = generate(&SceneParams::new(model, s, n, d), &mut stream(seed, SCENE_STREAM))?;
            emit(&write_point_set(&v), output.as_ref())
        }
        Command::NoisyPr { d, n, s, sigma, tau, trials, seed, projections, output } => {
            if trials == 0 {
                bail!("trials must be at least 1");
            }
            let mut params = NoisyParams::new(SceneParams::new(SceneModel::Gaussian, s, n, d), sigma, tau);
            params.mistr.projections = projections;
            let mut csv = format!("{NOISY_HEADER}\n");
            let mut successes = 0;
            for trial in 0..trials {
                let r = noisy_pipeline(&params, seed + trial as u64)?;
                successes += usize::from(r.success());
                writeln!(
                    csv,
                    "{trial},{},{},{},{},{},{},{:.3}",
                    r.realized_k, r.kappa, r.support_ok, r.mistr_exact, r.equivalent, r.depth, r.wall_ms
                )?;
            }
            emit(&csv, output.as_ref())?;
            eprintln!("success rate {:.3} ({successes}/{trials})", successes as f64 / trials as f64);
            Ok(())
        }
        Command::Oracle { input, max_k } => {
            let w = read_difference_set(&input).with_context(|| format!("reading {}", input.display()))?;
            let classes = brute_force_solve(&w, max_k)?;
            match classes.k {
                None => println!("no solution with at most {max_k} points"),
                Some(k) => {
                    println!("{} class(es) of size {k}", classes.len());
                    for (i, s) in classes.solutions.iter().enumerate() {
                        println!("# class {}", i + 1);
                        print!("{}", write_point_set(s));
                    }
                }
            }
            Ok(())
        }
        Command::Experiment { config, output_dir } => {
            let mut cfg = ExperimentConfig::read(&config).with_context(|| format!("reading {}", config.display()))?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let output = run_experiment(&cfg)?;
            let (csv, json) = write_outputs(&cfg, &output)?;
            for g in &output.summary {
                eprintln!(
                    "s={} projections={} success={:.3} mean_depth={:.2} runtime_ms={:.3}",
                    g.s, g.projections, g.success_rate, g.mean_depth, g.runtime_ms.mean
                );
            }
            println!("{}\n{}", csv.display(), json.display());
            Ok(())
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
