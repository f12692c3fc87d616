//! Evaluates every closed-form bound the analysis module provides, including
//! the spot-check values reproduced by the `colearn bounds` subcommand.
//!
//! Usage: `cargo run --example bounds_gallery`.

use colearn::analysis;

fn main() -> colearn::Result<()> {
    println!("reliability threshold tau_max(alpha, p1, p2):");
    println!("{:>7} {:>6} {:>6} {:>12}", "alpha", "p1", "p2", "tau_max");
    for alpha in [0.9, 0.8, 0.7, 0.6] {
        for (p1, p2) in [(0.8, 0.6), (0.8, 0.4)] {
            let t = analysis::reliability_threshold(alpha, p1, p2)?;
            println!("{alpha:>7} {p1:>6} {p2:>6} {t:>12.6}");
        }
    }

    println!("\nstationary popularity upper bound 1 - (tau/K) sum p_k:");
    for (tau, k, rest) in [(0.0, 5, vec![0.5; 4]), (0.5, 2, vec![0.6]), (0.1, 3, vec![0.6, 0.4])] {
        let b = analysis::stationary_popularity_upper(tau, k, &rest)?;
        println!("  tau={tau} K={k} rest={rest:?} -> {b:.6}");
    }

    println!("\ngambler's-ruin learnability bound (1 - rho^zeta)/(1 - rho^N):");
    for (q, zeta, n) in [(1.0, 1, 10), (0.5, 3, 10), (0.9, 1, 10), (0.75, 5, 100)] {
        let b = analysis::learnability_bound(q, zeta, n)?;
        println!("  q={q} zeta={zeta} N={n} -> {b:.6}");
    }

    println!("\ninitial-seeding Chernoff bound 1 - exp(-N mu p1 d^2 / 2K):");
    for (n, delta) in [(2000u32, 0.5), (10_000, 0.5), (2000, 0.25)] {
        let b = analysis::init_success_bound(n, 0.3, 0.8, 100, delta)?;
        println!("  N={n} mu=0.3 p1=0.8 K=100 delta1={delta} -> {b:.6}");
    }

    println!("\nspot-check triple (also via `colearn bounds ...`):");
    println!(
        "  reliability_threshold(0.9, 0.8, 0.6) = {:.6}",
        analysis::reliability_threshold(0.9, 0.8, 0.6)?
    );
    println!(
        "  stationary_popularity_upper(0.5, K=2, p2=0.6) = {:.6}",
        analysis::stationary_popularity_upper(0.5, 2, &[0.6])?
    );
    println!(
        "  learnability_bound(0.9, 1, 10) = {:.6}",
        analysis::learnability_bound(0.9, 1, 10)?
    );
    Ok(())
}
