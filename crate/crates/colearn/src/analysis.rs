//! Closed-form bounds and a mean-field expectation oracle.
//!
//! The mean-field recursion tracks the expected popularity vector
//! `Q_0..Q_K` of one round under the large-N sampling limit, where an agent
//! that consults its suggestions picks arm `k` with the arm's share of the
//! disseminated token pool. Only adopters emit, so that share is
//! `Q_k / (1 - Q_0)` (and the pool is empty when everyone is null). The
//! recursion ignores finite-token fluctuations and the empty-suggestion
//! event for adopters, which vanish as N grows; Monte-Carlo agreement
//! tolerances account for the residue.

use crate::arms::ArmModel;
use crate::graph::TransitionKernel;
use crate::{Error, Result};

/// Expected popularity vector: `q[0]` is the null fraction, `q[k]` the
/// fraction adopting arm `k`. Entries are nonnegative and sum to 1 (within
/// 1e-12).
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityState {
    pub q: Vec<f64>,
    pub n: u32,
}

impl PopularityState {
    pub fn new(q: Vec<f64>, n: u32) -> Result<PopularityState> {
        if q.len() < 3 {
            return Err(Error::Parameter(
                "popularity vector needs the null class and K >= 2 arms".into(),
            ));
        }
        if q.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::Parameter(
                "popularity entries must lie in [0,1]".into(),
            ));
        }
        let sum: f64 = q.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!(
                "popularity must sum to 1 (got {sum})"
            )));
        }
        Ok(PopularityState { q, n })
    }

    /// State with `z1` agents on arm 1 and the rest null.
    pub fn initial(n: u32, k: u32, z1: u32) -> PopularityState {
        let q1 = z1 as f64 / n as f64;
        let mut q = vec![0.0; k as usize + 1];
        q[0] = 1.0 - q1;
        q[1] = q1;
        PopularityState { q, n }
    }

    /// State from an adoption census `Z_0..Z_K`.
    pub fn from_counts(z: &[u32], n: u32) -> PopularityState {
        PopularityState {
            q: z.iter().map(|&c| c as f64 / n as f64).collect(),
            n,
        }
    }

    pub fn k(&self) -> u32 {
        (self.q.len() - 1) as u32
    }
}

/// Token-pool share of each arm: `q_k / (1 - q_0)` shifted toward uniform by
/// the corrupted fraction `tau`. Zero pool when every agent is null.
fn token_shares(q: &[f64], tau: f64) -> Vec<f64> {
    let k = q.len() - 1;
    let nonnull = 1.0 - q[0];
    if nonnull <= 0.0 {
        return vec![0.0; k];
    }
    q[1..]
        .iter()
        .map(|&qk| (1.0 - tau) * (qk / nonnull) + tau / k as f64)
        .collect()
}

/// Expected one-round gain and loss of arm-1 adopters (in agent counts):
/// null agents convert at `(mu/K + (1-mu) s_1) p_1`, other adopters at
/// `s_1 p_1`, and arm-1 adopters defect at `sum_{k>=2} s_k p_k`.
pub fn meanfield_drift_arm1(state: &PopularityState, mu: f64, model: &ArmModel) -> (f64, f64) {
    let n = state.n as f64;
    let q = &state.q;
    let k = model.k() as usize;
    let s = token_shares(q, 0.0);
    let p = model.means();
    let gain = n * q[0] * (mu / k as f64 + (1.0 - mu) * s[0]) * p[0]
        + n * (1.0 - q[0] - q[1]) * s[0] * p[0];
    let loss = n * q[1] * (1..k).map(|j| s[j] * p[j]).sum::<f64>();
    (gain, loss)
}

/// One mean-field round without corruption.
pub fn meanfield_step(state: &PopularityState, mu: f64, model: &ArmModel) -> PopularityState {
    meanfield_step_with_corruption(state, mu, model, 0.0)
}

/// One mean-field round; `tau` shifts the token pool toward uniform the way
/// per-token falsification does in expectation.
pub fn meanfield_step_with_corruption(
    state: &PopularityState,
    mu: f64,
    model: &ArmModel,
    tau: f64,
) -> PopularityState {
    let q = &state.q;
    let k = model.k() as usize;
    debug_assert_eq!(q.len(), k + 1);
    let s = token_shares(q, tau);
    let p = model.means();
    let weighted: f64 = (0..k).map(|j| s[j] * p[j]).sum();
    let mut next = vec![0.0; k + 1];
    for arm in 0..k {
        let qk = q[arm + 1];
        let gain_null = q[0] * (mu / k as f64 + (1.0 - mu) * s[arm]) * p[arm];
        let gain_switch = (1.0 - q[0] - qk) * s[arm] * p[arm];
        let loss = qk * (weighted - s[arm] * p[arm]);
        next[arm + 1] = (qk + gain_null + gain_switch - loss).max(0.0);
    }
    let sum: f64 = next[1..].iter().sum();
    next[0] = (1.0 - sum).max(0.0);
    let total: f64 = next.iter().sum();
    debug_assert!((total - 1.0).abs() <= 1e-12);
    if total != 1.0 && (total - 1.0).abs() <= 1e-12 {
        for x in &mut next {
            *x /= total;
        }
    }
    PopularityState {
        q: next,
        n: state.n,
    }
}

/// Iterates the recursion and returns the `Q_1` value after each of the
/// first `rounds` rounds.
pub fn meanfield_q1_trajectory(
    init: &PopularityState,
    mu: f64,
    model: &ArmModel,
    tau: f64,
    rounds: u32,
) -> Vec<f64> {
    let mut state = init.clone();
    let mut out = Vec::with_capacity(rounds as usize);
    for _ in 0..rounds {
        state = meanfield_step_with_corruption(&state, mu, model, tau);
        out.push(state.q[1]);
    }
    out
}

/// Largest per-round corrupted fraction under which the expected arm-1 drift
/// stays nonnegative while `Q_1 <= alpha`:
/// `(1-alpha)(p1-p2) / ((1-alpha) p1 + alpha p2)`.
pub fn reliability_threshold(alpha: f64, p1: f64, p2: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!(
            "alpha must be in (0,1), got {alpha}"
        )));
    }
    if !(0.0..=1.0).contains(&p1) || !(0.0..=1.0).contains(&p2) {
        return Err(Error::Parameter("arm means must lie in [0,1]".into()));
    }
    if p2 >= p1 {
        return Err(Error::Parameter(format!(
            "need p2 < p1, got p1={p1} p2={p2}"
        )));
    }
    Ok((1.0 - alpha) * (p1 - p2) / ((1.0 - alpha) * p1 + alpha * p2))
}

/// Upper bound on the stationary expected popularity of the best arm under
/// `tau N` per-round corruptions: `1 - (tau/K) * sum_{k>=2} p_k`.
/// `rest_means` are `p_2..p_K` (so its length must be `k - 1`).
pub fn stationary_popularity_upper(tau: f64, k: u32, rest_means: &[f64]) -> Result<f64> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Parameter(format!(
            "tau must be in [0,1], got {tau}"
        )));
    }
    if k < 2 {
        return Err(Error::Parameter(format!("need K >= 2, got {k}")));
    }
    if rest_means.len() != (k - 1) as usize {
        return Err(Error::Parameter(format!(
            "expected {} non-best means, got {}",
            k - 1,
            rest_means.len()
        )));
    }
    if rest_means.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::Parameter("arm means must lie in [0,1]".into()));
    }
    Ok(1.0 - tau / k as f64 * rest_means.iter().sum::<f64>())
}

/// Success probability lower bound when `Z_1` performs a gambler's-ruin walk
/// with per-round up-step probability `q`, starting from `zeta` adopters out
/// of `n`: `(1 - rho^zeta) / (1 - rho^n)` with `rho = (1-q)/q`. The
/// derivation assumes `q >= 1/2`; smaller `q` still evaluates but the bound
/// loses its meaning.
pub fn learnability_bound(q: f64, zeta: u32, n: u32) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Parameter(format!("q must be in (0,1], got {q}")));
    }
    if zeta < 1 || zeta > n {
        return Err(Error::Parameter(format!(
            "need 1 <= zeta <= n, got zeta={zeta} n={n}"
        )));
    }
    let rho = (1.0 - q) / q;
    if (rho - 1.0).abs() < 1e-12 {
        return Ok(zeta as f64 / n as f64);
    }
    // (1 - rho^zeta)/(1 - rho^n) via expm1 for stability near rho = 1;
    // ln(0) = -inf makes q = 1 come out as exactly 1.
    let ln_rho = rho.ln();
    Ok(f64::exp_m1(zeta as f64 * ln_rho) / f64::exp_m1(n as f64 * ln_rho))
}

/// Chernoff lower bound on the probability that a fully-null round yields at
/// least `(1 - delta1) mu p1 N / K` best-arm adopters:
/// `1 - exp(-N mu p1 delta1^2 / (2K))`.
pub fn init_success_bound(n: u32, mu: f64, p1: f64, k: u32, delta1: f64) -> Result<f64> {
    if n < 1 || k < 1 {
        return Err(Error::Parameter("need n >= 1 and k >= 1".into()));
    }
    if !(0.0..=1.0).contains(&mu) || !(0.0..=1.0).contains(&p1) {
        return Err(Error::Parameter("mu and p1 must lie in [0,1]".into()));
    }
    if !(delta1 > 0.0 && delta1 < 1.0) {
        return Err(Error::Parameter(format!(
            "delta1 must be in (0,1), got {delta1}"
        )));
    }
    Ok(1.0 - (-(n as f64) * mu * p1 * delta1 * delta1 / (2.0 * k as f64)).exp())
}

/// Step cap before [`mixing_profile`] reports non-convergence.
pub const MIXING_STEP_CAP: u32 = 1_000_000;

/// Power-iterates a point mass from the worst-case start (the max-degree
/// agent, lowest id on ties) until `max_v |pi_t(v) - 1/N| <= epsilon`;
/// returns the number of steps. Exact sparse linear algebra, no Monte Carlo.
/// Hitting the step cap means the kernel cannot mix (bipartite or
/// disconnected input slipped through) and is a diagnostic error.
pub fn mixing_profile(kernel: &TransitionKernel, epsilon: f64) -> Result<u32> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::Parameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let n = kernel.n();
    let start = (1..=n)
        .max_by_key(|&i| (kernel.degree(i), std::cmp::Reverse(i)))
        .expect("kernel has at least one agent");
    let target = 1.0 / n as f64;
    let mut pi = vec![0.0; n as usize];
    pi[(start - 1) as usize] = 1.0;
    for step in 1..=MIXING_STEP_CAP {
        pi = kernel.step_distribution(&pi);
        let deviation = pi
            .iter()
            .map(|&x| (x - target).abs())
            .fold(0.0, f64::max);
        if deviation <= epsilon {
            return Ok(step);
        }
    }
    Err(Error::Diagnostic(format!(
        "distribution did not reach uniformity within {MIXING_STEP_CAP} steps; \
         the underlying graph is likely bipartite or disconnected"
    )))
}
