//! Mixing profiles of the Metropolis-Hastings kernel on generated graphs:
//! steps for a worst-case point mass to come within epsilon = 1/N^3 of the
//! uniform distribution, across three graph sizes.
//!
//! Usage: `cargo run --release --example mixing_profile [seed]` (default 7).

use colearn::analysis;
use colearn::graph::{Graph, TransitionKernel};

fn main() -> colearn::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map_or(7, |a| a.parse().expect("seed"));

    println!("Erdos-Renyi with average degree ~ 3 log2(N), repaired; eps = 1/N^3");
    println!(
        "{:>6} {:>8} {:>10} {:>12} {:>20}",
        "N", "edges", "steps", "eps", "uniform_residual"
    );
    let mut points = Vec::new();
    for n in [100u32, 500, 1000] {
        let p = (3.0 * (n as f64).log2() / n as f64).min(1.0);
        let graph = Graph::generate_random(n, p, seed)?;
        let kernel = TransitionKernel::build(&graph);
        let eps = 1.0 / (n as f64).powi(3);
        let steps = analysis::mixing_profile(&kernel, eps)?;

        // stationarity of the uniform distribution under one exact step
        let uniform = vec![1.0 / n as f64; n as usize];
        let residual = kernel
            .step_distribution(&uniform)
            .iter()
            .map(|x| (x - 1.0 / n as f64).abs())
            .fold(0.0, f64::max);

        println!(
            "{n:>6} {:>8} {steps:>10} {eps:>12.2e} {residual:>20.2e}",
            graph.edge_count()
        );
        points.push(((n as f64).log2().ln(), (steps as f64).ln()));
    }

    // least-squares slope of ln(steps) against ln(log2 N)
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / points.len() as f64;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let slope = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum::<f64>()
        / points.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>();
    println!("\nfitted exponent of steps ~ (log2 N)^b: b = {slope:.2} (sub-quadratic: b < 2)");
    Ok(())
}
