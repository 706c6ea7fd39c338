//! Decision strategies: the tabular Q-learning agent plus the always-local,
//! always-offload, and oracle baselines behind one dispatch enum.
//!
//! The learner keeps one pair of action values per task state and follows an
//! epsilon-greedy schedule `epsilon(k) = 1000 / (2000 + 50k)` over a single
//! global iteration counter `k`. Action values estimate long-term *cost*, so
//! exploitation takes the argmin; ties break toward local execution, which
//! avoids radio energy when indifferent. Costs are non-negative and tables
//! start at zero, so zero acts as an optimistic initial value that gets both
//! actions tried early.
//!
//! The oracle picks the argmin of the deterministic one-step cost at the
//! link's base rate. In this environment the next task's state never depends
//! on the chosen action, so the oracle is also the best stationary policy
//! and doubles as the convergence reference for the learner.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::model::{self, ApplicationClass, CostWeights, DeviceProfile, Normalizers};

#[derive(Debug, Error, PartialEq)]
pub enum AgentError {
    #[error("learning rate must lie in [0,1], got {0}")]
    InvalidAlpha(f64),
    #[error("discount factor must lie in [0,1], got {0}")]
    InvalidGamma(f64),
    #[error("cost must be finite, got {0}")]
    NonFiniteCost(f64),
}

/// Task state as the agent sees it: input size in bits and computational
/// intensity in integer thousandths of cycles/bit. Exact-equality keys; two
/// tasks of the same application class always map to the same state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StateKey {
    pub input_bits: u64,
    pub cycles_per_bit_milli: u64,
}

impl StateKey {
    pub fn from_app(app: &ApplicationClass) -> Self {
        Self {
            input_bits: app.input_bits,
            cycles_per_bit_milli: (app.cycles_per_bit * 1000.0).round() as u64,
        }
    }

    pub fn cycles_per_bit(&self) -> f64 {
        self.cycles_per_bit_milli as f64 / 1000.0
    }

    /// Reconstructs the task parameters for cost evaluation; the name is
    /// synthetic since the key does not carry one.
    pub fn to_app(&self) -> ApplicationClass {
        ApplicationClass {
            name: format!("state_{}b_{}mc", self.input_bits, self.cycles_per_bit_milli),
            input_bits: self.input_bits,
            cycles_per_bit: self.cycles_per_bit(),
        }
    }
}

impl From<&ApplicationClass> for StateKey {
    fn from(app: &ApplicationClass) -> Self {
        Self::from_app(app)
    }
}

/// Where a task executes: on the wearable (local) or on the smartphone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Local = 0,
    Offload = 1,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Local, Action::Offload];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Action::Local => "local",
            Action::Offload => "offload",
        }
    }
}

/// Exploration probability after `k` Q-updates: `1000 / (2000 + 50k)`.
/// Starts at 0.5 and decays toward zero.
pub fn epsilon(k: u64) -> f64 {
    1000.0 / (2000.0 + 50.0 * k as f64)
}

/// Outcome of one action selection; `explored` marks the random branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub action: Action,
    pub explored: bool,
}

impl Selection {
    fn greedy(action: Action) -> Self {
        Self { action, explored: false }
    }
}

/// Per-state action values and visit counts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StateEntry {
    pub q: [f64; 2],
    pub visits: [u64; 2],
}

/// Tabular action-value store. States never visited read as `(0, 0)`; the
/// iteration counter `k` equals the number of updates applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QTable {
    entries: BTreeMap<StateKey, StateEntry>,
    k: u64,
    alpha: f64,
    gamma: f64,
}

impl QTable {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self, AgentError> {
        if !((0.0..=1.0).contains(&alpha) && alpha.is_finite()) {
            return Err(AgentError::InvalidAlpha(alpha));
        }
        if !((0.0..=1.0).contains(&gamma) && gamma.is_finite()) {
            return Err(AgentError::InvalidGamma(gamma));
        }
        Ok(Self { entries: BTreeMap::new(), k: 0, alpha, gamma })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Action values for a state, `(0, 0)` if never updated.
    pub fn q_values(&self, state: &StateKey) -> [f64; 2] {
        self.entries.get(state).map(|e| e.q).unwrap_or([0.0, 0.0])
    }

    /// Argmin of the stored action values; ties (including unvisited states)
    /// go to local execution.
    pub fn greedy_action(&self, state: &StateKey) -> Action {
        let q = self.q_values(state);
        if q[Action::Offload.index()] < q[Action::Local.index()] {
            Action::Offload
        } else {
            Action::Local
        }
    }

    /// Epsilon-greedy selection: draw `R ~ U[0,1)`; exploit the greedy
    /// action when `R < 1 - epsilon(k)`, otherwise pick uniformly at random.
    pub fn select_action<R: Rng + ?Sized>(&self, state: &StateKey, rng: &mut R) -> Selection {
        let r: f64 = rng.random();
        if r < 1.0 - epsilon(self.k) {
            Selection::greedy(self.greedy_action(state))
        } else {
            let action = if rng.random_range(0..2u8) == 0 { Action::Local } else { Action::Offload };
            Selection { action, explored: true }
        }
    }

    /// Bellman update toward the realized cost plus the discounted best
    /// (minimum) value of the next state:
    /// `Q(s,a) <- (1-alpha) Q(s,a) + alpha (cost + gamma * min_a' Q(s',a'))`.
    /// Increments `k`.
    pub fn update(&mut self, state: &StateKey, action: Action, cost: f64, next_state: &StateKey) -> Result<(), AgentError> {
        if !cost.is_finite() {
            return Err(AgentError::NonFiniteCost(cost));
        }
        // Read the bootstrap value before mutating: with a self-transition
        // the right-hand side must see the pre-update table.
        let next_q = self.q_values(next_state);
        let next_min = next_q[0].min(next_q[1]);
        let entry = self.entries.entry(*state).or_default();
        let i = action.index();
        entry.q[i] = (1.0 - self.alpha) * entry.q[i] + self.alpha * (cost + self.gamma * next_min);
        entry.visits[i] += 1;
        self.k += 1;
        Ok(())
    }

    /// Greedy action per stored state. States never visited are absent and
    /// default to local execution.
    pub fn greedy_policy(&self) -> BTreeMap<StateKey, Action> {
        self.entries.keys().map(|s| (*s, self.greedy_action(s))).collect()
    }

    /// Stored states in key order, for dumps and inspection.
    pub fn entries(&self) -> impl Iterator<Item = (&StateKey, &StateEntry)> {
        self.entries.iter()
    }
}

/// Everything the oracle needs to evaluate the deterministic one-step cost
/// of both actions. Uses the link's base rate even when the link itself is
/// stochastic.
#[derive(Debug, Clone)]
pub struct CostContext<'a> {
    pub wearable: &'a DeviceProfile,
    pub smartphone: &'a DeviceProfile,
    pub weights: CostWeights,
    pub normalizers: Normalizers,
    pub base_rate_bps: f64,
}

impl CostContext<'_> {
    /// Deterministic `(local, offload)` one-step costs of a state.
    pub fn one_step_costs(&self, state: &StateKey) -> (f64, f64) {
        let app = state.to_app();
        let (lt, le) = model::local_totals(&app, self.wearable);
        let (ot, oe) = model::offload_totals(&app, self.base_rate_bps, self.wearable, self.smartphone);
        (
            model::cost(&lt, &le, &self.weights, &self.normalizers),
            model::cost(&ot, &oe, &self.weights, &self.normalizers),
        )
    }

    /// Argmin of the one-step costs, ties toward local.
    pub fn oracle_action(&self, state: &StateKey) -> Action {
        let (local, offload) = self.one_step_costs(state);
        if offload < local {
            Action::Offload
        } else {
            Action::Local
        }
    }
}

/// Strategy tag used in configuration and output labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Local,
    Offload,
    Oracle,
    Qlearning,
}

impl StrategyKind {
    pub fn label(self) -> &'static str {
        match self {
            StrategyKind::Local => "local",
            StrategyKind::Offload => "offload",
            StrategyKind::Oracle => "oracle",
            StrategyKind::Qlearning => "qlearning",
        }
    }
}

/// A decision strategy instance. The Q-learning variant owns its table for
/// the duration of one episode.
#[derive(Debug, Clone)]
pub enum Strategy {
    AlwaysLocal,
    AlwaysOffload,
    Oracle,
    QLearning(QTable),
}

impl Strategy {
    pub fn decide<R: Rng + ?Sized>(&self, state: &StateKey, rng: &mut R, ctx: &CostContext<'_>) -> Selection {
        match self {
            Strategy::AlwaysLocal => Selection::greedy(Action::Local),
            Strategy::AlwaysOffload => Selection::greedy(Action::Offload),
            Strategy::Oracle => Selection::greedy(ctx.oracle_action(state)),
            Strategy::QLearning(table) => table.select_action(state, rng),
        }
    }

    pub fn qtable(&self) -> Option<&QTable> {
        match self {
            Strategy::QLearning(table) => Some(table),
            _ => None,
        }
    }
}
