//! The per-agent state machine: token emission, FIFO slot forwarding under a
//! per-slot budget, suggestion sampling, and reward-driven adoption.
//!
//! `h log N` is realized as `ceil(h * log2(N))` everywhere (token count and
//! per-slot pop budget). Slots are two-phase: all pops are taken from
//! pre-slot queue states, then deliveries are applied, so a token received in
//! slot `t` is never forwarded in slot `t` and results do not depend on the
//! order agents are visited.

use std::collections::VecDeque;

use rand::Rng;

use crate::arms::ArmModel;
use crate::graph::{AgentId, TransitionKernel};

/// A disseminated adoption: the arm id and the remaining hop counter. The
/// token stays feasible (forwardable) while the counter is positive; on
/// reaching zero it is merged into the receiver's suggestions instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub arm: u32,
    pub counter: u32,
}

/// Mutable per-agent state for one replication.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub id: AgentId,
    /// Current adoption; 0 is the null arm (no preference). Once non-null it
    /// never returns to null.
    pub omega: u32,
    /// Feasible tokens buffered for forwarding, in arrival order.
    pub fifo: VecDeque<Token>,
    /// Arm ids of the expired tokens received this round (a multiset:
    /// duplicates weight the sampling).
    pub suggestions: Vec<u32>,
    /// The arm chosen this round by the sampling stage; 0 means no pull.
    pub chosen: u32,
}

impl AgentState {
    pub fn new(id: AgentId) -> AgentState {
        AgentState {
            id,
            omega: 0,
            fifo: VecDeque::new(),
            suggestions: Vec::new(),
            chosen: 0,
        }
    }

    /// Round-start reset: suggestions empty, no choice yet.
    pub fn begin_round(&mut self) {
        self.suggestions.clear();
        self.chosen = 0;
    }

    /// Round-end cleanup: drops leftover feasible tokens (returning how many)
    /// so rounds never mix token populations, and clears suggestions.
    pub fn end_round(&mut self) -> u64 {
        let discarded = self.fifo.len() as u64;
        self.fifo.clear();
        self.suggestions.clear();
        discarded
    }
}

/// Per-round token budget: `ceil(h * log2(n))`. Used both for the number of
/// tokens an adopter emits and for the per-slot pop budget.
pub fn token_budget(h: u32, n: u32) -> usize {
    (h as f64 * (n as f64).log2()).ceil() as usize
}

/// Emits this round's tokens for an honest agent: nothing when the adoption
/// is null, otherwise exactly [`token_budget`] copies of `omega` with the
/// given TTL, appended to the agent's queue. Returns the number emitted.
pub fn emit_tokens(agent: &mut AgentState, h: u32, n: u32, ttl: u32) -> usize {
    if agent.omega == 0 {
        return 0;
    }
    let omega = agent.omega;
    emit_tokens_with(agent, token_budget(h, n), ttl, std::iter::repeat(omega))
}

/// Emission with caller-supplied arm contents (the adversary substitutes
/// falsified arms here); emits nothing for null adopters regardless.
pub fn emit_tokens_with(
    agent: &mut AgentState,
    count: usize,
    ttl: u32,
    arms: impl IntoIterator<Item = u32>,
) -> usize {
    if agent.omega == 0 {
        return 0;
    }
    let mut emitted = 0;
    for arm in arms.into_iter().take(count) {
        agent.fifo.push_back(Token { arm, counter: ttl });
        emitted += 1;
    }
    emitted
}

/// Reusable buffers for [`run_slot`].
#[derive(Debug, Default)]
pub struct SlotScratch {
    /// `(source row, destination row, token)` collected during the pop phase.
    outbox: Vec<(u32, u32, Token)>,
    /// Per-agent count of tokens received over an edge this slot (self-loop
    /// deliveries stay local and are not counted as network messages).
    pub received: Vec<u32>,
}

impl SlotScratch {
    pub fn new(n: usize) -> SlotScratch {
        SlotScratch {
            outbox: Vec::new(),
            received: vec![0; n],
        }
    }
}

/// What one slot did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotStats {
    /// Tokens whose counter reached zero and were merged into suggestions.
    pub expired: u64,
    /// Tokens forwarded this slot (pops).
    pub forwarded: u64,
    /// Longest queue after deliveries.
    pub max_queue_len: usize,
}

/// Runs one synchronous slot over all agents.
///
/// Phase 1 pops up to `budget` tokens per agent from the pre-slot queues,
/// decrements each counter, and draws each destination independently from the
/// agent's kernel row (self-loops allowed). Phase 2 delivers in sender-id
/// order: feasible tokens go to the receiver's queue tail, expired ones merge
/// into its suggestion multiset. Each agent `i` consumes only `rngs[i]`.
pub fn run_slot<R: Rng>(
    agents: &mut [AgentState],
    kernel: &TransitionKernel,
    budget: usize,
    rngs: &mut [R],
    scratch: &mut SlotScratch,
) -> SlotStats {
    scratch.outbox.clear();
    scratch.received.clear();
    scratch.received.resize(agents.len(), 0);

    for row in 0..agents.len() {
        let take = agents[row].fifo.len().min(budget);
        for _ in 0..take {
            let mut token = agents[row].fifo.pop_front().expect("length checked");
            token.counter -= 1;
            let dest = kernel.sample_destination(row, &mut rngs[row]);
            scratch.outbox.push((row as u32, dest as u32, token));
        }
    }

    let mut expired = 0;
    for &(src, dest, token) in &scratch.outbox {
        if src != dest {
            scratch.received[dest as usize] += 1;
        }
        if token.counter > 0 {
            agents[dest as usize].fifo.push_back(token);
        } else {
            agents[dest as usize].suggestions.push(token.arm);
            expired += 1;
        }
    }

    SlotStats {
        expired,
        forwarded: scratch.outbox.len() as u64,
        max_queue_len: agents.iter().map(|a| a.fifo.len()).max().unwrap_or(0),
    }
}

/// Sampling stage for one agent. A null adopter explores with probability
/// `mu` (uniform over the `K` arms); otherwise — and always for non-null
/// adopters — the choice is uniform over the suggestion multiset, or 0 when
/// no suggestion arrived. Sets and returns `agent.chosen`.
pub fn sample_stage(agent: &mut AgentState, mu: f64, k: u32, rng: &mut impl Rng) -> u32 {
    let chosen = if agent.omega == 0 && rng.gen::<f64>() < mu {
        rng.gen_range(1..=k)
    } else if agent.suggestions.is_empty() {
        0
    } else {
        agent.suggestions[rng.gen_range(0..agent.suggestions.len())]
    };
    agent.chosen = chosen;
    chosen
}

/// Adopting stage for one agent: pulls the chosen arm (if any) and moves the
/// adoption there on reward. Returns the reward, or `None` when nothing was
/// pulled. The adoption never changes on a zero reward, so a non-null
/// adoption can never become null again.
pub fn adopt_stage(agent: &mut AgentState, model: &ArmModel, rng: &mut impl Rng) -> Option<bool> {
    if agent.chosen == 0 {
        return None;
    }
    let reward = model
        .pull(agent.chosen, rng)
        .expect("sample_stage keeps chosen within 1..=K");
    if reward {
        agent.omega = agent.chosen;
    }
    Some(reward)
}
