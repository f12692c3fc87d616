//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `--nocapture` to see them). The synthetic-grid cells are shared
//! across criteria 1, 2, 3, and 6 through a lazily computed table.
//!
//! Expect roughly 20-30 minutes total on two cores; the workload sizes
//! (N=2000 grid, N=5000 drift check, 200-round reliability cells) are fixed
//! by the criteria, and replications parallelize across cores.

use once_cell::sync::Lazy;

use colearn::analysis::{self, PopularityState};
use colearn::arms::{sample_arm_means, ArmModel, FillRule};
use colearn::engine::{ArmSpec, Outcome, SimConfig, Simulation};
use colearn::graph::{Graph, TransitionKernel};
use colearn::protocol::SlotScratch;

const GRID_N: u32 = 2000;
const GRID_EDGE_P: f64 = 0.01;
const GRID_REPS: u32 = 20;

struct GridCell {
    k: u32,
    p2: f64,
    success_rate: f64,
    median_rounds: Option<f64>,
    congestion_exceed: u64,
    congestion_pairs: u64,
}

fn run_grid_cell(k: u32, p2: f64) -> GridCell {
    let config = SimConfig {
        replications: GRID_REPS,
        ..SimConfig::synthetic(GRID_N, k, 0.8, p2, GRID_EDGE_P)
    };
    let sim = Simulation::prepare(config).expect("grid config is valid");
    let summary = sim.run_experiment();
    let (congestion_exceed, congestion_pairs) = summary
        .replications
        .iter()
        .flat_map(|r| r.rounds.iter())
        .fold((0, 0), |(e, p), m| {
            (e + m.congestion_exceed, p + m.congestion_pairs)
        });
    GridCell {
        k,
        p2,
        success_rate: summary.success_rate,
        median_rounds: summary.median_rounds_to_success,
        congestion_exceed,
        congestion_pairs,
    }
}

/// Cells for criteria 1 (K=100, p2=0.6), 2 (p2 sweep), 3 (K sweep), 6.
static GRID: Lazy<Vec<GridCell>> = Lazy::new(|| {
    [(100, 0.6), (100, 0.5), (100, 0.4), (200, 0.6), (300, 0.6)]
        .into_iter()
        .map(|(k, p2)| run_grid_cell(k, p2))
        .collect()
});

fn grid_cell(k: u32, p2: f64) -> &'static GridCell {
    GRID.iter()
        .find(|c| c.k == k && c.p2 == p2)
        .expect("cell exists")
}

#[test]
fn criterion_1_learnability_at_desk_scale() {
    let cell = grid_cell(100, 0.6);
    let median = cell.median_rounds;
    let pass = cell.success_rate == 1.0 && median.is_some_and(|m| m <= 60.0);
    println!(
        "criterion 1 (learnability): {} — N={GRID_N} K=100 p=(0.8,0.6) tau=0, 20 replications: \
         success_rate={:.2} (need 1.00), median_rounds_to_success={:?} (need <= 60)",
        if pass { "PASS" } else { "FAIL" },
        cell.success_rate,
        median
    );
    assert!(pass);
}

#[test]
fn criterion_2_gap_monotonicity() {
    let medians: Vec<f64> = [0.6, 0.5, 0.4]
        .iter()
        .map(|&p2| {
            grid_cell(100, p2)
                .median_rounds
                .expect("grid cells all succeed")
        })
        .collect();
    let pass = medians[0] >= medians[1] && medians[1] >= medians[2];
    println!(
        "criterion 2 (gap monotonicity): {} — medians for p2=0.6/0.5/0.4: \
         {:?} (need nonincreasing)",
        if pass { "PASS" } else { "FAIL" },
        medians
    );
    assert!(pass);
}

#[test]
fn criterion_3_k_insensitivity() {
    let medians: Vec<f64> = [100, 200, 300]
        .iter()
        .map(|&k| {
            grid_cell(k, 0.6)
                .median_rounds
                .expect("grid cells all succeed")
        })
        .collect();
    let max = medians.iter().cloned().fold(f64::MIN, f64::max);
    let min = medians.iter().cloned().fold(f64::MAX, f64::min);
    let pass = max <= 1.3 * min;
    println!(
        "criterion 3 (K-insensitivity): {} — medians for K=100/200/300: {:?} \
         (need max <= 1.3 * min; ratio {:.3})",
        if pass { "PASS" } else { "FAIL" },
        medians,
        max / min
    );
    assert!(pass);
}

#[test]
fn criterion_4_mean_field_agreement() {
    let config = SimConfig {
        replications: 50,
        max_rounds: 22,
        ..SimConfig::synthetic(5000, 2, 0.8, 0.6, 0.01)
    };
    let sim = Simulation::prepare(config).expect("valid config");
    let summary = sim.run_experiment();
    let horizon = summary
        .replications
        .iter()
        .map(|r| r.rounds.len())
        .min()
        .expect("replications ran");

    let mut window_rounds = 0;
    let mut worst: (f64, u32) = (0.0, 0);
    for round in 2..=horizon {
        let mut mc = 0.0;
        let mut oracle = 0.0;
        let mut q1_prev = 0.0;
        for rep in &summary.replications {
            let prev = &rep.rounds[round - 2];
            let now = &rep.rounds[round - 1];
            mc += now.z[1] as f64 - prev.z[1] as f64;
            let state = PopularityState::from_counts(&prev.z, 5000);
            let (gain, loss) = analysis::meanfield_drift_arm1(&state, 0.3, sim.model());
            oracle += gain - loss;
            q1_prev += prev.q1;
        }
        mc /= 50.0;
        oracle /= 50.0;
        q1_prev /= 50.0;
        if (0.05..=0.95).contains(&q1_prev) {
            window_rounds += 1;
            let rel = (mc - oracle).abs() / oracle.abs();
            if rel > worst.0 {
                worst = (rel, round as u32);
            }
        }
    }
    // the whole window must fit inside the simulated horizon
    let final_q1 = summary.mean_q1_trajectory[horizon - 1];
    let pass = window_rounds >= 5 && worst.0 <= 0.10 && final_q1 > 0.95;
    println!(
        "criterion 4 (mean-field agreement): {} — N=5000 K=2, 50 replications, \
         {window_rounds} rounds with Q1 in [0.05,0.95]; worst relative drift error \
         {:.1}% at round {} (need <= 10%)",
        if pass { "PASS" } else { "FAIL" },
        worst.0 * 100.0,
        worst.1
    );
    assert!(pass);
}

#[test]
fn criterion_5_mixing_profiles() {
    let mut lines = Vec::new();
    let mut points = Vec::new();
    let mut residual_ok = true;
    for n in [100u32, 500, 1000] {
        let p = 3.0 * (n as f64).log2() / n as f64;
        let graph = Graph::generate_random(n, p, 7).expect("valid parameters");
        let kernel = TransitionKernel::build(&graph);
        let eps = 1.0 / (n as f64).powi(3);
        let steps = analysis::mixing_profile(&kernel, eps).expect("mixes");
        let uniform = vec![1.0 / n as f64; n as usize];
        let residual = kernel
            .step_distribution(&uniform)
            .iter()
            .map(|x| (x - 1.0 / n as f64).abs())
            .fold(0.0, f64::max);
        residual_ok &= residual <= 1e-12;
        lines.push(format!("N={n}: steps={steps} residual={residual:.1e}"));
        points.push(((n as f64).log2().ln(), (steps as f64).ln()));
    }
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum::<f64>()
        / points.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>();
    let pass = slope < 2.0 && residual_ok;
    println!(
        "criterion 5 (mixing): {} — {}; fitted exponent {slope:.2} (need < 2), \
         uniform stationary within 1e-12: {residual_ok}",
        if pass { "PASS" } else { "FAIL" },
        lines.join(", ")
    );
    assert!(pass);
}

#[test]
fn criterion_6_congestion() {
    let cell = grid_cell(100, 0.6);
    let fraction = cell.congestion_exceed as f64 / cell.congestion_pairs as f64;
    let pass = fraction <= 0.01;
    println!(
        "criterion 6 (congestion): {} — {}/{} (agent,slot) observations above \
         2*ceil(h*log2 N) received tokens = {:.4}% (need <= 1%)",
        if pass { "PASS" } else { "FAIL" },
        cell.congestion_exceed,
        cell.congestion_pairs,
        fraction * 100.0
    );
    assert!(pass);
}

#[test]
fn criterion_7_reliability_at_the_threshold() {
    let (p1, p2) = (0.8, 0.6);
    let mut pass = true;
    let mut report = Vec::new();
    for alpha in [0.9, 0.8, 0.7, 0.6] {
        let tau = analysis::reliability_threshold(alpha, p1, p2).expect("valid gap");
        let bound = analysis::stationary_popularity_upper(tau, 2, &[p2]).expect("valid");
        let config = SimConfig {
            tau,
            replications: 20,
            max_rounds: 200,
            ..SimConfig::synthetic(1000, 2, p1, p2, 0.01)
        };
        let summary = Simulation::prepare(config)
            .expect("valid config")
            .run_experiment();
        let min_terminal = summary
            .replications
            .iter()
            .map(|r| r.terminal_q1_mean)
            .fold(f64::MAX, f64::min);
        let mean_terminal = summary.mean_terminal_q1;
        let cell_ok = min_terminal >= alpha - 0.1 && mean_terminal < bound;
        pass &= cell_ok;
        report.push(format!(
            "alpha={alpha}: tau={tau:.4} terminal(min/mean)=({min_terminal:.3},{mean_terminal:.3}) bound={bound:.4} {}",
            if cell_ok { "ok" } else { "VIOLATED" }
        ));
    }
    println!(
        "criterion 7 (reliability): {} — N=1000 K=2, last 20 of 200 rounds, 20 replications; {}",
        if pass { "PASS" } else { "FAIL" },
        report.join("; ")
    );
    assert!(pass);
}

/// Tallies (trials, violations) pairs from the invariant battery.
#[derive(Default)]
struct Tally {
    trials: u64,
    violations: u64,
    notes: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: &str) {
        self.trials += 1;
        if !ok {
            self.violations += 1;
            if self.notes.len() < 8 {
                self.notes.push(what.to_string());
            }
        }
    }
}

#[test]
fn criterion_8_invariant_suite() {
    let mut tally = Tally::default();

    // Kernel invariants over generated graphs: row sums, exact symmetry on
    // edges, uniform stationarity entrywise.
    for seed in 0..50u64 {
        let n = 3 + (seed as u32 * 7) % 78;
        let p = 0.05 + 0.01 * (seed % 60) as f64;
        let g = Graph::generate_random(n, p, seed).expect("valid");
        let k = TransitionKernel::build(&g);
        for i in 1..=n {
            let row: f64 =
                g.neighbors(i).iter().map(|&j| k.psi(i, j)).sum::<f64>() + k.psi(i, i);
            tally.check((row - 1.0).abs() <= 1e-12, "row sum");
            for &j in g.neighbors(i) {
                if i < j {
                    tally.check(k.psi(i, j) == k.psi(j, i), "edge symmetry");
                }
            }
        }
        let uniform = vec![1.0 / n as f64; n as usize];
        for x in k.step_distribution(&uniform) {
            tally.check((x - 1.0 / n as f64).abs() <= 1e-12, "uniform stationarity");
        }
        let again = Graph::generate_random(n, p, seed).expect("valid");
        tally.check(again == g, "generation determinism");
    }

    // Trace invariants over mixed small sims, with and without corruption.
    let mut sims_run = 0;
    for idx in 0..140u64 {
        let n = 20 + (idx as u32 * 13) % 41;
        let k = 2 + (idx as u32) % 4;
        let tau = [0.0, 0.0, 0.1, 0.25][(idx % 4) as usize];
        let mu = [0.1, 0.3, 0.9][(idx % 3) as usize];
        let mode = if idx % 5 == 0 {
            colearn::AdversaryMode::PerAgent
        } else {
            colearn::AdversaryMode::PerToken
        };
        let config = SimConfig {
            tau,
            mu,
            adversary_mode: mode,
            seed: idx,
            max_rounds: 15,
            ..SimConfig::synthetic(n, k, 0.9, 0.5, 0.2)
        };
        let sim = Simulation::prepare(config).expect("valid");
        let rep = sim.run_replication(idx as u32);
        let mut prev_omega_nonnull = vec![false; n as usize];
        let mut prev_z0 = u32::MAX;
        // replay rounds manually to watch per-agent adoption monotonicity
        let mut agents: Vec<colearn::protocol::AgentState> =
            (1..=n).map(colearn::protocol::AgentState::new).collect();
        let mut scratch = SlotScratch::new(n as usize);
        for round in 1..=rep.rounds.len() as u32 {
            let m = sim.run_round(&mut agents, idx as u32, round, &mut scratch);
            tally.check(m.z.iter().sum::<u32>() == n, "sum Z_k = N");
            tally.check(
                m.tokens_emitted == m.tokens_expired + m.tokens_discarded,
                "token conservation",
            );
            tally.check(m.q1 == m.z[1] as f64 / n as f64, "Q1 = Z1/N");
            tally.check(m.z[0] <= prev_z0, "Z0 nonincreasing");
            prev_z0 = m.z[0];
            for (slot, agent) in agents.iter().enumerate() {
                let nonnull = agent.omega != 0;
                tally.check(
                    nonnull || !prev_omega_nonnull[slot],
                    "adoption monotonicity",
                );
                prev_omega_nonnull[slot] = nonnull;
            }
            tally.check(m == rep.rounds[round as usize - 1], "replay determinism");
        }
        // absorption: once everyone holds arm 1 with tau = 0, three more
        // rounds stay there
        if tau == 0.0 {
            if let Outcome::Success { round } = rep.outcome {
                for extra in 1..=3 {
                    let m = sim.run_round(&mut agents, idx as u32, round + extra, &mut scratch);
                    tally.check(m.z[1] == n, "absorption after success");
                }
            }
        }
        sims_run += 1;
    }

    // Drift positivity over a random parameter grid.
    let mut rng_state = 0x5eedu64;
    let mut next = move || {
        rng_state = rng_state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (rng_state >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..10_000 {
        let arms = 2 + (next() * 4.0) as usize;
        let p1 = 0.2 + 0.8 * next();
        let p2 = (p1 - 1e-3) * next();
        let mut means = vec![p1, p2];
        for _ in 2..arms {
            means.push(p2 * next());
        }
        let model = ArmModel::new(means).expect("valid means");
        let mu = next();
        let mut q: Vec<f64> = (0..=arms).map(|_| next() + 1e-9).collect();
        let sum: f64 = q.iter().sum();
        q.iter_mut().for_each(|x| *x /= sum);
        let state = PopularityState { q, n: 1000 };
        let (gain, loss) = analysis::meanfield_drift_arm1(&state, mu, &model);
        tally.check(
            gain / (gain + loss) >= p1 / (p1 + p2) - 1e-12,
            "drift positivity",
        );
    }

    let pass = tally.violations == 0 && tally.trials >= 100_000;
    println!(
        "criterion 8 (invariant suite): {} — {} randomized trials over {} sims, \
         {} violations (need 0 over >= 100000){}",
        if pass { "PASS" } else { "FAIL" },
        tally.trials,
        sims_run,
        tally.violations,
        if tally.notes.is_empty() {
            String::new()
        } else {
            format!("; first failures: {:?}", tally.notes)
        }
    );
    assert!(pass);
}

#[test]
fn criterion_9_bounds_subcommand_spot_checks() {
    // Independent verification:
    //   reliability(0.9,0.8,0.6) = (0.1*0.2)/(0.1*0.8 + 0.9*0.6) = 0.02/0.62
    //                            = 0.032258064...
    //   corollary(0.5,K=2,p2=0.6) = 1 - (0.5/2)*0.6 = 0.85
    //   learnability(0.9,1,10) = (1 - 1/9)/(1 - (1/9)^10) = 0.888888889...
    let bin = env!("CARGO_BIN_EXE_colearn");
    let cases: [(&[&str], &str); 3] = [
        (
            &["bounds", "reliability", "--alpha", "0.9", "--p1", "0.8", "--p2", "0.6"],
            "reliability_threshold=0.032258",
        ),
        (
            &["bounds", "corollary", "--tau", "0.5", "--K", "2", "--p", "0.6"],
            "stationary_popularity_upper=0.850000",
        ),
        (
            &["bounds", "learnability", "--q", "0.9", "--zeta", "1", "--N", "10"],
            "learnability_bound=0.888889",
        ),
    ];
    let mut pass = true;
    let mut got = Vec::new();
    for (args, expect) in cases {
        let out = std::process::Command::new(bin)
            .args(args)
            .output()
            .expect("binary runs");
        let stdout = String::from_utf8_lossy(&out.stdout).trim().to_string();
        pass &= out.status.success() && stdout == expect;
        got.push(stdout);
    }
    println!(
        "criterion 9 (formula spot-checks): {} — bounds subcommand printed {:?}",
        if pass { "PASS" } else { "FAIL" },
        got
    );
    assert!(pass);
}

#[test]
fn rating_means_end_to_end() {
    // Ingestion path at desk scale: a 50-arm means file with p1=0.9, p2=0.7
    // (ratings 4.5 and 3.5 on a 5-point scale) must reach consensus within
    // 80 rounds.
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("means.csv");
    let mut text = String::from("arm_id,mean_rating\n1,4.5\n2,3.5\n");
    for arm in 3..=50u32 {
        text.push_str(&format!("{arm},{:.3}\n", 1.5 + 1.9 * ((arm * 29) % 97) as f64 / 97.0));
    }
    std::fs::write(&path, text).expect("write means");

    let config = SimConfig {
        arms: ArmSpec::File {
            path,
            normalizer: 5.0,
            sample_k: None,
            sample_with_replacement: false,
        },
        max_rounds: 80,
        ..SimConfig::synthetic(1000, 50, 0.9, 0.7, 0.01)
    };
    let sim = Simulation::prepare(config).expect("valid config");
    assert_eq!(sim.model().mean(1), 0.9);
    assert_eq!(sim.model().mean(2), 0.7);
    let rep = sim.run_replication(0);
    let pass = matches!(rep.outcome, Outcome::Success { .. });
    println!(
        "rating-means end-to-end: {} — 50-arm means file, N=1000: {:?} (need success within 80 rounds)",
        if pass { "PASS" } else { "FAIL" },
        rep.outcome
    );
    assert!(pass);
}

#[test]
fn oracle_consensus_within_sixty_meanfield_rounds() {
    // The recursion itself is the oracle for the synthetic grid: from the
    // all-null start it must push Q1 above 0.99 within 60 rounds.
    let model = sample_arm_means(100, 0.8, 0.6, FillRule::Uniform, 1).expect("valid");
    let init = PopularityState::initial(2000, 100, 0);
    let q1 = analysis::meanfield_q1_trajectory(&init, 0.3, &model, 0.0, 60);
    let pass = q1.last().copied().expect("rounds ran") > 0.99;
    println!(
        "mean-field oracle consensus: {} — Q1 after 60 rounds = {:.4} (need > 0.99)",
        if pass { "PASS" } else { "FAIL" },
        q1.last().unwrap()
    );
    assert!(pass);
}
