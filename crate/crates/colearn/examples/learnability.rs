//! Learnability at the synthetic-grid scale: N agents on a sparse random
//! graph learn the best of K Bernoulli arms, every agent memorizing a single
//! adoption and a single suggestion per round.
//!
//! Usage: `cargo run --release --example learnability [N] [K] [replications]`
//! (defaults 2000 100 4).

use colearn::engine::{Outcome, SimConfig, Simulation};

fn main() -> colearn::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: u32 = args.next().map_or(2000, |a| a.parse().expect("N"));
    let k: u32 = args.next().map_or(100, |a| a.parse().expect("K"));
    let replications: u32 = args.next().map_or(4, |a| a.parse().expect("replications"));

    let config = SimConfig {
        replications,
        ..SimConfig::synthetic(n, k, 0.8, 0.6, 0.01)
    };
    let sim = Simulation::prepare(config)?;
    println!(
        "N={n} K={k} p1=0.8 p2=0.6 mu=0.3 h=10 | budget={} ttl={} slots/round={}",
        sim.budget(),
        sim.ttl(),
        sim.slots_per_round()
    );

    let start = std::time::Instant::now();
    let summary = sim.run_experiment();
    let elapsed = start.elapsed();

    println!("\nreplication 0, per-round best-arm popularity:");
    println!("{:>6} {:>8} {:>10} {:>12} {:>14}", "round", "Q1", "Z0", "emitted", "max_recv/slot");
    for m in &summary.replications[0].rounds {
        if m.round % 5 == 0 || m.round == 1 || m.z[1] == n {
            println!(
                "{:>6} {:>8.4} {:>10} {:>12} {:>14}",
                m.round, m.q1, m.z[0], m.tokens_emitted, m.max_received_per_slot
            );
        }
    }

    println!("\noutcomes:");
    for rep in &summary.replications {
        match rep.outcome {
            Outcome::Success { round } => println!("  replication {}: success at round {round}", rep.index),
            Outcome::Timeout => println!("  replication {}: timeout", rep.index),
        }
    }
    println!(
        "\nsuccess_rate={:.2} median_rounds_to_success={} ({elapsed:.1?} total)",
        summary.success_rate,
        summary
            .median_rounds_to_success
            .map_or("-".into(), |m| m.to_string()),
    );

    // congestion readout: per-slot receptions should stay within twice the
    // budget except with vanishing probability
    let threshold = 2 * sim.budget() as u64;
    let (exceed, pairs) = summary
        .replications
        .iter()
        .flat_map(|r| r.rounds.iter())
        .fold((0u64, 0u64), |(e, p), m| {
            (e + m.congestion_exceed, p + m.congestion_pairs)
        });
    println!(
        "congestion: {exceed}/{pairs} (agent,slot) observations above {threshold} received tokens"
    );
    Ok(())
}
