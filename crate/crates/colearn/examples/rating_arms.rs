//! End-to-end run on arms ingested from a ratings-style means file: writes a
//! small `arm_id,mean_rating` CSV (the shape a rating-matrix pipeline would
//! export), loads and normalizes it, keeps the best arm plus a subsample of
//! the rest, and lets the agents find the top-rated item.
//!
//! Usage: `cargo run --release --example rating_arms [N]` (default 500).

use std::io::Write;

use colearn::engine::{ArmSpec, Outcome, SimConfig, Simulation};

fn main() -> colearn::Result<()> {
    let n: u32 = std::env::args()
        .nth(1)
        .map_or(500, |a| a.parse().expect("N"));

    // A 120-item catalog: best item rated 4.5/5, the rest spread over
    // [2.0, 3.5] deterministically.
    let dir = std::env::temp_dir().join("colearn_rating_arms");
    std::fs::create_dir_all(&dir)?;
    let csv = dir.join("means.csv");
    let mut file = std::io::BufWriter::new(std::fs::File::create(&csv)?);
    writeln!(file, "arm_id,mean_rating")?;
    writeln!(file, "1,4.5")?;
    writeln!(file, "2,3.5")?;
    for arm in 3..=120u32 {
        let rating = 2.0 + 1.4 * ((arm * 37) % 101) as f64 / 101.0;
        writeln!(file, "{arm},{rating:.3}")?;
    }
    drop(file);
    println!("wrote {}", csv.display());

    let config = SimConfig {
        arms: ArmSpec::File {
            path: csv,
            normalizer: 5.0,
            sample_k: Some(50),
            sample_with_replacement: false,
        },
        max_rounds: 120,
        ..SimConfig::synthetic(n, 50, 0.9, 0.7, 0.02)
    };
    let sim = Simulation::prepare(config)?;
    println!(
        "loaded K={} arms, p1={:.2} p2={:.2} (normalized by 5)",
        sim.model().k(),
        sim.model().mean(1),
        sim.model().mean(2)
    );

    let rep = sim.run_replication(0);
    match rep.outcome {
        Outcome::Success { round } => {
            println!("all {n} agents adopted the top-rated item at round {round}")
        }
        Outcome::Timeout => println!("timeout; terminal Q1 = {:.4}", rep.terminal_q1_mean),
    }
    for m in rep.rounds.iter().filter(|m| m.round % 10 == 0 || m.round == 1) {
        println!("  round {:>3}: Q1 = {:.4}", m.round, m.q1);
    }
    Ok(())
}
