//! Executes an [`ExperimentPlan`] and writes plot-ready CSVs.
//!
//! Per cell `i`, files land in `cell_<i>/` under the plan's output
//! directory:
//!
//! - `trajectory.csv`: per-replication per-round metrics
//!   (`replication,round,Q1,Z0,Z1,Zrest,tokens_emitted,tokens_expired,max_received_per_slot,corrupted_count`)
//! - `summary.csv`: per-replication outcomes
//!   (`replication,outcome,rounds_to_success,terminal_Q1_mean`; the rounds
//!   field is empty on timeout)
//! - `meanfield.csv`: the oracle recursion at the same parameters
//!   (`round,Q1_meanfield`)
//!
//! A `manifest.csv` listing every cell, its overrides, seed, and file paths
//! is written last. All numbers use `.` decimals and LF newlines; a rerun of
//! the same plan produces byte-identical files.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::analysis::{self, PopularityState};
use crate::config::{Cell, ExperimentPlan};
use crate::engine::{ExperimentSummary, Simulation};
use crate::Result;

/// Where one cell's outputs went.
#[derive(Debug, Clone)]
pub struct CellReport {
    pub index: usize,
    pub overrides: Vec<(String, String)>,
    pub seed: u64,
    pub trajectory: PathBuf,
    pub summary: PathBuf,
    pub meanfield: PathBuf,
    pub success_rate: f64,
    pub median_rounds_to_success: Option<f64>,
    pub mean_terminal_q1: f64,
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub manifest: PathBuf,
    pub cells: Vec<CellReport>,
}

/// Runs every cell of the plan and writes the CSVs and manifest.
/// Fail-fast: the output directory is probed and every cell is prepared
/// (configs checked, graph/means files loaded) before anything is simulated
/// or written.
pub fn run(plan: &ExperimentPlan) -> Result<RunReport> {
    let cells = plan.cells()?;
    let output_dir = plan.output_dir();
    std::fs::create_dir_all(&output_dir)?;
    let probe = output_dir.join(".write_probe");
    std::fs::write(&probe, b"")?;
    std::fs::remove_file(&probe)?;
    for cell in &cells {
        Simulation::prepare(cell.config.clone())?;
    }

    let mut reports = Vec::with_capacity(cells.len());
    for cell in &cells {
        reports.push(run_cell(&output_dir, cell)?);
    }

    let manifest = output_dir.join("manifest.csv");
    let mut text = String::from("cell,params,seed,trajectory,summary,meanfield\n");
    for report in &reports {
        let params = if report.overrides.is_empty() {
            "-".to_string()
        } else {
            report
                .overrides
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(";")
        };
        writeln!(
            text,
            "{},{},{},{},{},{}",
            report.index,
            params,
            report.seed,
            rel(&report.trajectory, &output_dir),
            rel(&report.summary, &output_dir),
            rel(&report.meanfield, &output_dir),
        )
        .expect("string write");
    }
    std::fs::write(&manifest, text)?;

    Ok(RunReport {
        output_dir,
        manifest,
        cells: reports,
    })
}

fn rel(path: &std::path::Path, base: &std::path::Path) -> String {
    path.strip_prefix(base)
        .unwrap_or(path)
        .display()
        .to_string()
}

fn run_cell(output_dir: &std::path::Path, cell: &Cell) -> Result<CellReport> {
    let sim = Simulation::prepare(cell.config.clone())?;
    let summary = sim.run_experiment();

    let dir = output_dir.join(format!("cell_{:03}", cell.index));
    std::fs::create_dir_all(&dir)?;
    let trajectory = dir.join("trajectory.csv");
    std::fs::write(&trajectory, trajectory_csv(&summary, cell.config.n))?;
    let summary_path = dir.join("summary.csv");
    std::fs::write(&summary_path, summary_csv(&summary))?;
    let meanfield = dir.join("meanfield.csv");
    std::fs::write(&meanfield, meanfield_csv(&sim))?;

    Ok(CellReport {
        index: cell.index,
        overrides: cell.overrides.clone(),
        seed: cell.config.seed,
        trajectory,
        summary: summary_path,
        meanfield,
        success_rate: summary.success_rate,
        median_rounds_to_success: summary.median_rounds_to_success,
        mean_terminal_q1: summary.mean_terminal_q1,
    })
}

/// Trajectory CSV in the engine's wire format.
pub fn trajectory_csv(summary: &ExperimentSummary, n: u32) -> String {
    let mut out = String::from(
        "replication,round,Q1,Z0,Z1,Zrest,tokens_emitted,tokens_expired,max_received_per_slot,corrupted_count\n",
    );
    for rep in &summary.replications {
        for m in &rep.rounds {
            let zrest = n - m.z[0] - m.z[1];
            writeln!(
                out,
                "{},{},{:.6},{},{},{},{},{},{},{}",
                rep.index,
                m.round,
                m.q1,
                m.z[0],
                m.z[1],
                zrest,
                m.tokens_emitted,
                m.tokens_expired,
                m.max_received_per_slot,
                m.corrupted_count
            )
            .expect("string write");
        }
    }
    out
}

/// Summary CSV in the engine's wire format.
pub fn summary_csv(summary: &ExperimentSummary) -> String {
    let mut out = String::from("replication,outcome,rounds_to_success,terminal_Q1_mean\n");
    for rep in &summary.replications {
        let (outcome, rounds) = match rep.outcome.rounds_to_success() {
            Some(r) => ("success", r.to_string()),
            None => ("timeout", String::new()),
        };
        writeln!(
            out,
            "{},{},{},{:.6}",
            rep.index, outcome, rounds, rep.terminal_q1_mean
        )
        .expect("string write");
    }
    out
}

/// Mean-field oracle trajectory at the cell's parameters, one row per round
/// up to the configured horizon.
pub fn meanfield_csv(sim: &Simulation) -> String {
    let cfg = sim.config();
    let init = PopularityState::initial(cfg.n, cfg.k, cfg.init_z1);
    let q1 = analysis::meanfield_q1_trajectory(
        &init,
        cfg.mu,
        sim.model(),
        cfg.tau,
        cfg.max_rounds,
    );
    let mut out = String::from("round,Q1_meanfield\n");
    for (idx, value) in q1.iter().enumerate() {
        writeln!(out, "{},{:.9}", idx + 1, value).expect("string write");
    }
    out
}
