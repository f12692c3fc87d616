//! Round-varying uniform corruption.
//!
//! Each round the adversary picks a fresh uniform subset of `floor(tau * N)`
//! agents. A corrupted adopter disseminates falsified tokens whose arms are
//! uniformly random over the `K` arms; its sampling and adopting stages are
//! untouched. Agents with a null adoption emit nothing even when corrupted —
//! the adversary replaces message contents, not behavior.

use rand::Rng;

use crate::graph::AgentId;
use crate::{Error, Result};

/// Falsification granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdversaryMode {
    /// Every emitted token carries an independent uniform arm.
    #[default]
    PerToken,
    /// One uniform arm is drawn per corrupted agent per round and stamped on
    /// all of its tokens (sensitivity variant).
    PerAgent,
}

/// Per-round corruption budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorruptionSpec {
    pub tau: f64,
}

impl CorruptionSpec {
    pub fn new(tau: f64) -> Result<CorruptionSpec> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::Parameter(format!(
                "corruption fraction must be in [0,1], got {tau}"
            )));
        }
        Ok(CorruptionSpec { tau })
    }

    /// Number of agents corrupted each round: `floor(tau * n)`.
    pub fn count(&self, n: u32) -> u32 {
        (self.tau * n as f64).floor() as u32
    }
}

/// Draws this round's corrupted set: exactly `floor(tau * n)` distinct agent
/// ids, uniform without replacement, returned sorted. Redrawn independently
/// every round from a fresh stream.
pub fn select_corrupted(n: u32, spec: &CorruptionSpec, rng: &mut impl Rng) -> Vec<AgentId> {
    let m = spec.count(n) as usize;
    // partial Fisher-Yates over 1..=n
    let mut ids: Vec<AgentId> = (1..=n).collect();
    for i in 0..m {
        let j = i + rng.gen_range(0..(n as usize - i));
        ids.swap(i, j);
    }
    ids.truncate(m);
    ids.sort_unstable();
    ids
}

/// Arm contents for one agent's emission this round. Honest agents emit
/// their adoption; corrupted agents emit uniform arms, drawn per token or
/// once per round depending on the mode.
pub fn falsify_emission<'r, R: Rng>(
    corrupted: bool,
    omega: u32,
    k: u32,
    mode: AdversaryMode,
    rng: &'r mut R,
) -> impl Iterator<Item = u32> + 'r {
    let fixed = match (corrupted, mode) {
        (false, _) => Some(omega),
        (true, AdversaryMode::PerAgent) => Some(rng.gen_range(1..=k)),
        (true, AdversaryMode::PerToken) => None,
    };
    std::iter::repeat_with(move || fixed.unwrap_or_else(|| rng.gen_range(1..=k)))
}
