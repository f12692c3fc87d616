//! Collaborative best-arm learning over general graphs.
//!
//! A population of agents repeatedly pulls Bernoulli arms and gossips its
//! current preferences as fixed-budget tokens forwarded by Metropolis-Hastings
//! random walks under a CONGEST-style per-slot message budget. Each round has
//! three stages: every agent with a preference *disseminates* it, every agent
//! *samples* one arm from the suggestions it memorized (or explores uniformly),
//! and finally *adopts* the sampled arm if pulling it yields reward. A
//! round-varying adversary may corrupt a fraction of the agents so that their
//! emitted tokens carry uniformly random arms instead.
//!
//! The crate provides:
//!
//! - [`graph`]: undirected graphs, Erdős–Rényi generation with deterministic
//!   connectivity/odd-cycle repair, and the Metropolis-Hastings transition
//!   kernel whose stationary distribution is uniform.
//! - [`arms`]: Bernoulli arm models, synthetic mean assignment, and ingestion
//!   of per-arm mean files (e.g. normalized rating averages).
//! - [`protocol`]: the per-agent state machine — token emission, FIFO slot
//!   forwarding, suggestion sampling, and reward-driven adoption.
//! - [`adversary`]: round-varying uniform corruption of emitted tokens.
//! - [`engine`]: deterministic round/slot scheduling, metrics, replication
//!   management, and experiment aggregation.
//! - [`analysis`]: closed-form reliability/learnability bounds, kernel mixing
//!   profiles, and a mean-field popularity recursion used as an independent
//!   oracle against Monte-Carlo trajectories.
//! - [`config`] / [`runner`]: flat key=value experiment plans, sweep
//!   expansion, and plot-ready CSV emission.
//!
//! Everything is reproducible: all randomness flows through counter-derived
//! [`rng`] streams keyed by `(seed, replication, round, stage, agent)`.
//!
//! See the crate `examples/` directory for one runnable demo per capability,
//! and the `colearn` binary for the `run`/`bounds`/`graphgen`/`mixing`
//! subcommands.

pub mod adversary;
pub mod analysis;
pub mod arms;
pub mod config;
pub mod engine;
pub mod graph;
pub mod protocol;
pub mod rng;
pub mod runner;

pub use adversary::{AdversaryMode, CorruptionSpec};
pub use arms::{ArmModel, FillRule};
pub use engine::{ExperimentSummary, Outcome, Replication, RoundMetrics, SimConfig, Simulation};
pub use graph::{Graph, TransitionKernel};

/// Errors surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value is outside its documented domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A data file (graph or arm means) is malformed; `line` is 1-based.
    #[error("{path}:{line}: {msg}")]
    Ingestion {
        path: String,
        line: usize,
        msg: String,
    },
    /// An experiment config file is invalid; `line` is 1-based (0 when the
    /// problem is not tied to a single line).
    #[error("config error (line {line}): {msg}")]
    Config { line: usize, msg: String },
    /// A computation failed a sanity check, e.g. a mixing profile that never
    /// converges because the kernel came from a bipartite graph.
    #[error("diagnostic: {0}")]
    Diagnostic(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
