//! Command-line front end: `run` executes an experiment plan, `bounds`
//! evaluates the closed-form bounds, `graphgen` writes a graph file, and
//! `mixing` reports the kernel mixing profile of a graph file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use colearn::analysis;
use colearn::config::ExperimentPlan;
use colearn::graph::{Graph, TransitionKernel};
use colearn::runner;

#[derive(Parser)]
#[command(name = "colearn", version, about = "Collaborative bandit learning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of an experiment plan and write CSV outputs.
    Run { config: PathBuf },
    /// Evaluate a closed-form bound (prints name=value pairs; with --sweep,
    /// a param,value,bound CSV).
    Bounds {
        #[command(subcommand)]
        which: BoundsCommand,
    },
    /// Generate a repaired random graph and write it as an edge-list file.
    Graphgen {
        n: u32,
        edge_probability: f64,
        seed: u64,
        out: PathBuf,
    },
    /// Power-iterate a graph's transition kernel from the worst-case start
    /// until the distribution is within epsilon of uniform.
    Mixing { graphfile: PathBuf, epsilon: f64 },
}

#[derive(Args)]
struct SweepArg {
    /// Sweep one numeric flag: `--sweep alpha=0.9,0.8,0.7`.
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// Largest tolerable corrupted fraction while Q1 <= alpha.
    Reliability {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        #[command(flatten)]
        sweep: SweepArg,
    },
    /// Stationary upper bound on the best arm's expected popularity.
    Corollary {
        #[arg(long)]
        tau: f64,
        #[arg(long = "K")]
        k: u32,
        /// Means p2..pK, comma separated (required when tau > 0).
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        #[command(flatten)]
        sweep: SweepArg,
    },
    /// Gambler's-ruin success bound from zeta initial adopters.
    Learnability {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        zeta: u32,
        #[arg(long = "N")]
        n: u32,
        #[command(flatten)]
        sweep: SweepArg,
    },
    /// Chernoff bound on seeding the best arm from an all-null round.
    Init {
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        p1: f64,
        #[arg(long = "K")]
        k: u32,
        #[arg(long)]
        delta1: f64,
        #[command(flatten)]
        sweep: SweepArg,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Run { config } => {
            let plan = ExperimentPlan::load(&config)?;
            let report = runner::run(&plan)?;
            for cell in &report.cells {
                let params = if cell.overrides.is_empty() {
                    "-".to_string()
                } else {
                    cell.overrides
                        .iter()
                        .map(|(k, v)| format!("{k}={v}"))
                        .collect::<Vec<_>>()
                        .join(";")
                };
                let median = cell
                    .median_rounds_to_success
                    .map_or("-".to_string(), |m| format!("{m}"));
                println!(
                    "cell {} ({params}): success_rate={:.3} median_rounds_to_success={median} mean_terminal_q1={:.4}",
                    cell.index, cell.success_rate, cell.mean_terminal_q1
                );
            }
            println!("manifest: {}", report.manifest.display());
            Ok(())
        }
        Command::Bounds { which } => bounds(which),
        Command::Graphgen {
            n,
            edge_probability,
            seed,
            out,
        } => {
            let graph = Graph::generate_random(n, edge_probability, seed)?;
            graph.save(&out)?;
            println!(
                "wrote {} (n={}, m={})",
                out.display(),
                graph.n(),
                graph.edge_count()
            );
            Ok(())
        }
        Command::Mixing { graphfile, epsilon } => {
            let graph = Graph::load(&graphfile)?;
            let kernel = TransitionKernel::build(&graph);
            let steps = analysis::mixing_profile(&kernel, epsilon)?;
            println!("mixing_steps={steps}");
            Ok(())
        }
    }
}

type SweepAxis = (String, Vec<f64>);

/// Parses `--sweep key=v1,v2,...`.
fn parse_sweep(arg: &SweepArg) -> Result<Option<SweepAxis>, Box<dyn std::error::Error>> {
    let Some(spec) = &arg.sweep else {
        return Ok(None);
    };
    let (key, values) = spec
        .split_once('=')
        .ok_or("expected --sweep key=v1,v2,...")?;
    let values = values
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()?;
    if values.is_empty() {
        return Err("empty sweep".into());
    }
    Ok(Some((key.trim().to_string(), values)))
}

/// Prints either `name=value` or, when sweeping, a `param,value,bound` CSV.
fn emit(
    name: &str,
    sweep: &SweepArg,
    eval: impl Fn(&str, Option<f64>) -> colearn::Result<f64>,
) -> Result<(), Box<dyn std::error::Error>> {
    match parse_sweep(sweep)? {
        None => {
            println!("{name}={:.6}", eval("", None)?);
        }
        Some((key, values)) => {
            println!("param,value,bound");
            for v in values {
                println!("{key},{v},{:.6}", eval(&key, Some(v))?);
            }
        }
    }
    Ok(())
}

fn bad_sweep_key(key: &str) -> colearn::Error {
    colearn::Error::Parameter(format!("cannot sweep {key:?} for this bound"))
}

fn bounds(which: BoundsCommand) -> Result<(), Box<dyn std::error::Error>> {
    match which {
        BoundsCommand::Reliability { alpha, p1, p2, sweep } => {
            emit("reliability_threshold", &sweep, |key, value| {
                let (mut a, mut b, mut c) = (alpha, p1, p2);
                if let Some(v) = value {
                    match key {
                        "alpha" => a = v,
                        "p1" => b = v,
                        "p2" => c = v,
                        other => return Err(bad_sweep_key(other)),
                    }
                }
                analysis::reliability_threshold(a, b, c)
            })
        }
        BoundsCommand::Corollary { tau, k, p, sweep } => {
            let rest = match p {
                Some(p) => p,
                None if tau == 0.0 => vec![0.0; (k - 1).max(1) as usize],
                None => return Err("--p is required when tau > 0".into()),
            };
            emit("stationary_popularity_upper", &sweep, move |key, value| {
                let mut t = tau;
                if let Some(v) = value {
                    match key {
                        "tau" => t = v,
                        other => return Err(bad_sweep_key(other)),
                    }
                }
                analysis::stationary_popularity_upper(t, k, &rest)
            })
        }
        BoundsCommand::Learnability { q, zeta, n, sweep } => {
            if q < 0.5 {
                eprintln!("warning: the bound derivation assumes q >= 1/2 (got q={q})");
            }
            emit("learnability_bound", &sweep, |key, value| {
                let (mut qq, mut z) = (q, zeta);
                if let Some(v) = value {
                    match key {
                        "q" => qq = v,
                        "zeta" => z = v as u32,
                        other => return Err(bad_sweep_key(other)),
                    }
                }
                analysis::learnability_bound(qq, z, n)
            })
        }
        BoundsCommand::Init { n, mu, p1, k, delta1, sweep } => {
            emit("init_success_bound", &sweep, |key, value| {
                let (mut nn, mut m, mut p, mut d) = (n, mu, p1, delta1);
                if let Some(v) = value {
                    match key {
                        "N" => nn = v as u32,
                        "mu" => m = v,
                        "p1" => p = v,
                        "delta1" => d = v,
                        other => return Err(bad_sweep_key(other)),
                    }
                }
                analysis::init_success_bound(nn, m, p, k, d)
            })
        }
    }
}
