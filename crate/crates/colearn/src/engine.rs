//! Round/slot scheduler, metrics, success detection, and replication
//! management.
//!
//! A round executes the three stages over all agents: dissemination (token
//! emission, possibly falsified, then `ceil(c_slot * log2(N)^2)` forwarding
//! slots), sampling, and adopting. All randomness comes from
//! [`crate::rng::stream`] keyed by `(seed, replication, round, stage,
//! agent)`, so a trajectory is a pure function of the config and the
//! replication index, and replications can run in parallel.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::adversary::{self, AdversaryMode, CorruptionSpec};
use crate::arms::{self, ArmModel, FillRule};
use crate::graph::{Graph, TransitionKernel};
use crate::protocol::{self, AgentState, SlotScratch};
use crate::rng::{self, Stage};
use crate::{Error, Result};

/// Where the communication graph comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    /// Erdős–Rényi with deterministic repair; the generator seed is derived
    /// from the experiment seed.
    Random { edge_probability: f64 },
    /// Plain-text edge-list file (validated on load).
    File(PathBuf),
}

/// Where the arm means come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ArmSpec {
    /// `p1`, `p2`, and `K - 2` filled means.
    Sampled { p1: f64, p2: f64, fill: FillRule },
    /// Means file (`arm_id,mean_rating`), divided by `normalizer`. When
    /// `sample_k` is set, the best arm is kept and `sample_k - 1` others are
    /// drawn from the rest.
    File {
        path: PathBuf,
        normalizer: f64,
        sample_k: Option<u32>,
        sample_with_replacement: bool,
    },
    /// Explicit means (tests and embedding).
    Explicit(Vec<f64>),
}

/// Full description of one simulation cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: u32,
    pub k: u32,
    pub graph: GraphSpec,
    pub arms: ArmSpec,
    /// Exploration probability of null adopters.
    pub mu: f64,
    /// Token budget multiplier: budget = ceil(h * log2 N).
    pub h: u32,
    /// TTL multiplier: ttl = ceil(c_ttl * log2 N).
    pub c_ttl: f64,
    /// Round length multiplier: slots = ceil(c_slot * log2(N)^2).
    pub c_slot: f64,
    /// Corrupted fraction per round.
    pub tau: f64,
    pub adversary_mode: AdversaryMode,
    pub max_rounds: u32,
    pub seed: u64,
    pub replications: u32,
    /// Number of agents starting with the best arm adopted (`Z_1(0)`).
    pub init_z1: u32,
}

impl SimConfig {
    /// Synthetic-arms config with the documented defaults: mu=0.3, h=10,
    /// c_ttl=3, c_slot=1, tau=0, per-token adversary, max_rounds=200,
    /// seed=42, one replication, everyone starting null.
    pub fn synthetic(n: u32, k: u32, p1: f64, p2: f64, edge_probability: f64) -> SimConfig {
        SimConfig {
            n,
            k,
            graph: GraphSpec::Random { edge_probability },
            arms: ArmSpec::Sampled {
                p1,
                p2,
                fill: FillRule::Uniform,
            },
            mu: 0.3,
            h: 10,
            c_ttl: 3.0,
            c_slot: 1.0,
            tau: 0.0,
            adversary_mode: AdversaryMode::PerToken,
            max_rounds: 200,
            seed: 42,
            replications: 1,
            init_z1: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Parameter(format!("need N >= 3, got {}", self.n)));
        }
        if self.k < 2 {
            return Err(Error::Parameter(format!("need K >= 2, got {}", self.k)));
        }
        for (name, value) in [("mu", self.mu), ("tau", self.tau)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Parameter(format!(
                    "{name} must be in [0,1], got {value}"
                )));
            }
        }
        if self.h < 1 {
            return Err(Error::Parameter("h must be >= 1".into()));
        }
        for (name, value) in [("c_ttl", self.c_ttl), ("c_slot", self.c_slot)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::Parameter(format!("{name} must be positive, got {value}")));
            }
        }
        if self.max_rounds < 1 {
            return Err(Error::Parameter("max_rounds must be >= 1".into()));
        }
        if self.replications < 1 {
            return Err(Error::Parameter("replications must be >= 1".into()));
        }
        if self.init_z1 > self.n {
            return Err(Error::Parameter(format!(
                "init_z1 {} exceeds N {}",
                self.init_z1, self.n
            )));
        }
        Ok(())
    }
}

/// Everything one round reports.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundMetrics {
    /// 1-based round index.
    pub round: u32,
    /// Adoption counts `Z_0..Z_K` at the end of the round; sums to `N`.
    pub z: Vec<u32>,
    /// `Z_1 / N`.
    pub q1: f64,
    pub tokens_emitted: u64,
    /// Tokens whose counter hit zero and became suggestions.
    pub tokens_expired: u64,
    /// Feasible tokens dropped from queues at round end.
    pub tokens_discarded: u64,
    /// Largest per-agent per-slot received-token count this round.
    pub max_received_per_slot: u32,
    /// `(agent, slot)` observations above `2 * budget` received tokens.
    pub congestion_exceed: u64,
    /// Total `(agent, slot)` observations (`N * slots_per_round`).
    pub congestion_pairs: u64,
    /// Agents corrupted this round.
    pub corrupted_count: u32,
}

/// How a replication ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// All agents adopted the best arm in `round`.
    Success { round: u32 },
    /// `max_rounds` elapsed first.
    Timeout,
}

impl Outcome {
    pub fn rounds_to_success(&self) -> Option<u32> {
        match self {
            Outcome::Success { round } => Some(*round),
            Outcome::Timeout => None,
        }
    }
}

/// One replication's trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub index: u32,
    pub rounds: Vec<RoundMetrics>,
    pub outcome: Outcome,
    /// Mean `Q_1` over the last (up to) 20 recorded rounds; the stationary
    /// popularity readout for reliability experiments.
    pub terminal_q1_mean: f64,
}

/// Aggregate over all replications of a config.
#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    /// Sorted by replication index.
    pub replications: Vec<Replication>,
    pub success_rate: f64,
    /// Median first-hitting round of `Z_1 = N`; `None` when the median
    /// replication timed out.
    pub median_rounds_to_success: Option<f64>,
    /// Per-round mean `Q_1`; trajectories that ended early are extended with
    /// their final value (exact for tau = 0, where success is absorbing).
    pub mean_q1_trajectory: Vec<f64>,
    pub mean_terminal_q1: f64,
}

/// A prepared simulation: validated config plus the materialized graph,
/// kernel, and arm model shared (immutably) by all replications.
#[derive(Debug)]
pub struct Simulation {
    config: SimConfig,
    graph: Graph,
    kernel: TransitionKernel,
    model: ArmModel,
    budget: usize,
    ttl: u32,
    slots_per_round: u32,
    corruption: CorruptionSpec,
}

impl Simulation {
    pub fn prepare(config: SimConfig) -> Result<Simulation> {
        config.validate()?;
        let graph = match &config.graph {
            GraphSpec::Random { edge_probability } => Graph::generate_random(
                config.n,
                *edge_probability,
                rng::stream(config.seed, 0, 0, Stage::Graph, 0).get_seed_u64(),
            )?,
            GraphSpec::File(path) => Graph::load(path)?,
        };
        if graph.n() != config.n {
            return Err(Error::Parameter(format!(
                "graph has {} agents but config says N = {}",
                graph.n(),
                config.n
            )));
        }
        let model = match &config.arms {
            ArmSpec::Sampled { p1, p2, fill } => arms::sample_arm_means(
                config.k,
                *p1,
                *p2,
                *fill,
                rng::stream(config.seed, 0, 0, Stage::Arms, 0).get_seed_u64(),
            )?,
            ArmSpec::File {
                path,
                normalizer,
                sample_k,
                sample_with_replacement,
            } => {
                let loaded = arms::load_arm_means(path, *normalizer)?;
                match sample_k {
                    Some(k) => loaded.subsample(
                        *k,
                        *sample_with_replacement,
                        rng::stream(config.seed, 0, 0, Stage::Arms, 0).get_seed_u64(),
                    )?,
                    None => loaded,
                }
            }
            ArmSpec::Explicit(means) => ArmModel::new(means.clone())?,
        };
        if model.k() != config.k {
            return Err(Error::Parameter(format!(
                "arm model has {} arms but config says K = {}",
                model.k(),
                config.k
            )));
        }
        let log2n = (config.n as f64).log2();
        let kernel = TransitionKernel::build(&graph);
        Ok(Simulation {
            budget: protocol::token_budget(config.h, config.n),
            ttl: (config.c_ttl * log2n).ceil() as u32,
            slots_per_round: (config.c_slot * log2n * log2n).ceil() as u32,
            corruption: CorruptionSpec::new(config.tau)?,
            config,
            graph,
            kernel,
            model,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn kernel(&self) -> &TransitionKernel {
        &self.kernel
    }

    pub fn model(&self) -> &ArmModel {
        &self.model
    }

    /// Tokens emitted per adopter and per-slot pop budget.
    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn ttl(&self) -> u32 {
        self.ttl
    }

    pub fn slots_per_round(&self) -> u32 {
        self.slots_per_round
    }

    /// Fresh agent states for round 1 (`init_z1` agents pre-adopt arm 1).
    fn initial_agents(&self) -> Vec<AgentState> {
        let mut agents: Vec<AgentState> = (1..=self.config.n).map(AgentState::new).collect();
        for agent in agents.iter_mut().take(self.config.init_z1 as usize) {
            agent.omega = 1;
        }
        agents
    }

    /// Executes one round over `agents` and reports its metrics.
    pub fn run_round(
        &self,
        agents: &mut [AgentState],
        replication: u32,
        round: u32,
        scratch: &mut SlotScratch,
    ) -> RoundMetrics {
        let cfg = &self.config;
        let n = cfg.n;
        let (seed, rep, rnd) = (cfg.seed, replication as u64, round as u64);

        let corrupted = adversary::select_corrupted(
            n,
            &self.corruption,
            &mut rng::stream(seed, rep, rnd, Stage::Corrupt, 0),
        );
        let mut is_corrupted = vec![false; n as usize];
        for &id in &corrupted {
            is_corrupted[(id - 1) as usize] = true;
        }

        let mut tokens_emitted = 0u64;
        for (row, agent) in agents.iter_mut().enumerate() {
            agent.begin_round();
            if agent.omega != 0 {
                let mut emit_rng = rng::stream(seed, rep, rnd, Stage::Emit, agent.id);
                let omega = agent.omega;
                let arms_src = adversary::falsify_emission(
                    is_corrupted[row],
                    omega,
                    cfg.k,
                    cfg.adversary_mode,
                    &mut emit_rng,
                );
                tokens_emitted +=
                    protocol::emit_tokens_with(agent, self.budget, self.ttl, arms_src) as u64;
            }
        }

        let mut route_rngs: Vec<_> = (1..=n)
            .map(|id| rng::stream(seed, rep, rnd, Stage::Route, id))
            .collect();
        let threshold = 2 * self.budget as u32;
        let mut alive = tokens_emitted;
        let mut tokens_expired = 0u64;
        let mut max_received = 0u32;
        let mut congestion_exceed = 0u64;
        for _ in 0..self.slots_per_round {
            // Empty slots still belong to the round (they count as zero-reception
            // observations); executing them would draw nothing.
            if alive == 0 {
                break;
            }
            let stats = protocol::run_slot(agents, &self.kernel, self.budget, &mut route_rngs, scratch);
            tokens_expired += stats.expired;
            alive -= stats.expired;
            for &r in &scratch.received {
                max_received = max_received.max(r);
                if r > threshold {
                    congestion_exceed += 1;
                }
            }
        }

        for agent in agents.iter_mut() {
            let mut sample_rng = rng::stream(seed, rep, rnd, Stage::Sample, agent.id);
            protocol::sample_stage(agent, cfg.mu, cfg.k, &mut sample_rng);
        }
        for agent in agents.iter_mut() {
            let mut adopt_rng = rng::stream(seed, rep, rnd, Stage::Adopt, agent.id);
            protocol::adopt_stage(agent, &self.model, &mut adopt_rng);
        }

        let mut tokens_discarded = 0u64;
        let mut z = vec![0u32; cfg.k as usize + 1];
        for agent in agents.iter_mut() {
            tokens_discarded += agent.end_round();
            z[agent.omega as usize] += 1;
        }
        debug_assert_eq!(z.iter().sum::<u32>(), n);
        debug_assert_eq!(tokens_emitted, tokens_expired + tokens_discarded);

        RoundMetrics {
            round,
            q1: z[1] as f64 / n as f64,
            z,
            tokens_emitted,
            tokens_expired,
            tokens_discarded,
            max_received_per_slot: max_received,
            congestion_exceed,
            congestion_pairs: n as u64 * self.slots_per_round as u64,
            corrupted_count: corrupted.len() as u32,
        }
    }

    /// Runs rounds until `Z_1 = N` (success) or `max_rounds` (timeout).
    /// Deterministic given `(config, replication)`.
    pub fn run_replication(&self, replication: u32) -> Replication {
        let mut agents = self.initial_agents();
        let mut scratch = SlotScratch::new(self.config.n as usize);
        let mut rounds = Vec::new();
        let mut outcome = Outcome::Timeout;
        for round in 1..=self.config.max_rounds {
            let metrics = self.run_round(&mut agents, replication, round, &mut scratch);
            let success = metrics.z[1] == self.config.n;
            rounds.push(metrics);
            if success {
                outcome = Outcome::Success { round };
                break;
            }
        }
        let window = rounds.len().min(20);
        let terminal_q1_mean =
            rounds[rounds.len() - window..].iter().map(|m| m.q1).sum::<f64>() / window as f64;
        Replication {
            index: replication,
            rounds,
            outcome,
            terminal_q1_mean,
        }
    }

    /// Runs all replications (in parallel) and aggregates them in index
    /// order, so the summary does not depend on scheduling.
    pub fn run_experiment(&self) -> ExperimentSummary {
        let mut replications: Vec<Replication> = (0..self.config.replications)
            .into_par_iter()
            .map(|rep| self.run_replication(rep))
            .collect();
        replications.sort_by_key(|r| r.index);
        summarize(replications)
    }
}

fn summarize(replications: Vec<Replication>) -> ExperimentSummary {
    let successes = replications
        .iter()
        .filter(|r| matches!(r.outcome, Outcome::Success { .. }))
        .count();
    let success_rate = successes as f64 / replications.len() as f64;
    let median_rounds_to_success = median_rounds(&replications);
    let horizon = replications.iter().map(|r| r.rounds.len()).max().unwrap_or(0);
    let mut mean_q1_trajectory = vec![0.0; horizon];
    for rep in &replications {
        let last = rep.rounds.last().map_or(0.0, |m| m.q1);
        for (r, slot) in mean_q1_trajectory.iter_mut().enumerate() {
            *slot += rep.rounds.get(r).map_or(last, |m| m.q1);
        }
    }
    for slot in &mut mean_q1_trajectory {
        *slot /= replications.len() as f64;
    }
    let mean_terminal_q1 = replications.iter().map(|r| r.terminal_q1_mean).sum::<f64>()
        / replications.len() as f64;
    ExperimentSummary {
        replications,
        success_rate,
        median_rounds_to_success,
        mean_q1_trajectory,
        mean_terminal_q1,
    }
}

/// Median first-hitting round with timeouts ranked above every success;
/// `None` when a timeout lands on the median position.
fn median_rounds(replications: &[Replication]) -> Option<f64> {
    let mut rounds: Vec<Option<u32>> = replications
        .iter()
        .map(|r| r.outcome.rounds_to_success())
        .collect();
    rounds.sort_by_key(|r| r.map_or(u64::MAX, |v| v as u64));
    let n = rounds.len();
    if n % 2 == 1 {
        rounds[n / 2].map(|v| v as f64)
    } else {
        match (rounds[n / 2 - 1], rounds[n / 2]) {
            (Some(a), Some(b)) => Some((a as f64 + b as f64) / 2.0),
            _ => None,
        }
    }
}

/// Extension trait used to pull a 64-bit sub-seed out of a stream.
trait SeedU64 {
    fn get_seed_u64(self) -> u64;
}

impl SeedU64 for rand_chacha::ChaCha8Rng {
    fn get_seed_u64(mut self) -> u64 {
        rand::RngCore::next_u64(&mut self)
    }
}
