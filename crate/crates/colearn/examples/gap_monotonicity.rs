//! Sweeps the gap between the best two arms with the plan runner: a larger
//! `p1 - p2` gap speeds up consensus on the best arm.
//!
//! Usage: `cargo run --release --example gap_monotonicity [N] [replications]`
//! (defaults 800 5). Writes CSVs under `target/examples/gap_sweep/`.

use colearn::config::ExperimentPlan;
use colearn::runner;

fn main() -> colearn::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: u32 = args.next().map_or(800, |a| a.parse().expect("N"));
    let replications: u32 = args.next().map_or(5, |a| a.parse().expect("replications"));

    let plan_text = format!(
        "N = {n}\nK = 20\np1 = 0.8\np2 = 0.7\nedge_probability = 0.02\n\
         replications = {replications}\nseed = 7\noutput_dir = target/examples/gap_sweep\n\
         sweep.p2 = 0.6,0.5,0.4\n"
    );
    let plan = ExperimentPlan::parse_str(&plan_text, std::path::Path::new("."))?;
    println!("running {} cells x {replications} replications (N={n}, K=20, p1=0.8)...", plan.cells()?.len());

    let report = runner::run(&plan)?;
    println!("\n{:>6} {:>14} {:>22}", "p2", "success_rate", "median_rounds_to_succ");
    for cell in &report.cells {
        let p2 = &cell.overrides[0].1;
        println!(
            "{:>6} {:>14.2} {:>22}",
            p2,
            cell.success_rate,
            cell.median_rounds_to_success
                .map_or("-".into(), |m| m.to_string())
        );
    }
    println!("\nwrote {}", report.manifest.display());
    println!("(medians should not increase as p2 drops: a wider gap learns faster)");
    Ok(())
}
