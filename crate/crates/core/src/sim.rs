//! Episode driver and multi-run orchestration.
//!
//! An episode walks a fixed-length task stream: for each task it asks the
//! strategy for an action, evaluates the time/energy model (sampling the
//! link rate when offloading), computes the normalized cost, feeds the
//! Q-update when learning, and records the outcome. Normalization constants
//! are computed once from the full configured application set and held fixed
//! for the whole episode.
//!
//! Determinism contract: run `i` depends only on `(base_seed, i)`. Each run
//! gets its own ChaCha8 stream seeded through a SplitMix64 mix of the base
//! seed and the run index, so results are reproducible bit-for-bit across
//! platforms and independent of how many runs execute or in what order. The
//! task stream is generated up front, before any agent or link draws, which
//! also gives the Q-update its lookahead state for the final task (a
//! self-transition, since the stream ends there).

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::agent::{Action, AgentError, CostContext, QTable, StateKey, Strategy, StrategyKind};
use crate::link::{LinkError, LinkModel};
use crate::metrics::{self, AggregateSummary, MetricsError};
use crate::model::{self, ApplicationClass, CostWeights, DeviceProfile, EnergyBreakdown, ModelError, TimeBreakdown};
use crate::presets;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// How the task stream picks an application class for each task.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamKind {
    /// Every task belongs to the application class at this index.
    PerApp { app_index: usize },
    /// Cycle through the configured classes in order.
    RoundRobin,
    /// Draw each task's class independently with these probabilities
    /// (one weight per configured class, summing to 1).
    WeightedRandom { weights: Vec<f64> },
}

/// Full description of one simulation: devices, applications, link, cost
/// weights, stream shape, agent parameters, and run counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub apps: Vec<ApplicationClass>,
    pub wearable: DeviceProfile,
    pub smartphone: DeviceProfile,
    pub link: LinkModel,
    pub weights: CostWeights,
    pub tasks_per_run: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub stream: StreamKind,
    pub alpha: f64,
    pub gamma: f64,
    pub strategy: StrategyKind,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            apps: presets::default_apps(),
            wearable: presets::wearable(),
            smartphone: presets::smartphone(),
            link: LinkModel::calibrated_default(),
            weights: CostWeights { beta_e: presets::DEFAULT_BETA_E, beta_t: 1.0 - presets::DEFAULT_BETA_E },
            tasks_per_run: presets::DEFAULT_TASKS_PER_RUN,
            runs: presets::DEFAULT_RUNS,
            base_seed: presets::DEFAULT_SEED,
            stream: StreamKind::RoundRobin,
            alpha: presets::DEFAULT_ALPHA,
            gamma: presets::DEFAULT_GAMMA,
            strategy: StrategyKind::Qlearning,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.apps.is_empty() {
            return Err(ModelError::NoApplications.into());
        }
        for app in &self.apps {
            app.validate()?;
        }
        self.wearable.validate()?;
        self.smartphone.validate()?;
        self.link.validate()?;
        CostWeights::new(self.weights.beta_e, self.weights.beta_t)?;
        if self.tasks_per_run == 0 {
            return Err(SimError::InvalidConfig("tasks_per_run must be >= 1".into()));
        }
        if self.runs == 0 {
            return Err(SimError::InvalidConfig("runs must be >= 1".into()));
        }
        if !((0.0..=1.0).contains(&self.alpha) && self.alpha.is_finite()) {
            return Err(AgentError::InvalidAlpha(self.alpha).into());
        }
        if !((0.0..=1.0).contains(&self.gamma) && self.gamma.is_finite()) {
            return Err(AgentError::InvalidGamma(self.gamma).into());
        }
        match &self.stream {
            StreamKind::PerApp { app_index } => {
                if *app_index >= self.apps.len() {
                    return Err(SimError::InvalidConfig(format!(
                        "per_app stream index {} out of range for {} applications",
                        app_index,
                        self.apps.len()
                    )));
                }
            }
            StreamKind::RoundRobin => {}
            StreamKind::WeightedRandom { weights } => {
                if weights.len() != self.apps.len() {
                    return Err(SimError::InvalidConfig(format!(
                        "weighted_random needs {} weights, got {}",
                        self.apps.len(),
                        weights.len()
                    )));
                }
                if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
                    return Err(SimError::InvalidConfig("weighted_random weights must be >= 0".into()));
                }
                let sum: f64 = weights.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(SimError::InvalidConfig(format!(
                        "weighted_random weights must sum to 1, got {sum}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Convenience: same config restricted to a single-application stream.
    pub fn for_app(&self, app_index: usize) -> Self {
        Self { stream: StreamKind::PerApp { app_index }, ..self.clone() }
    }

    pub fn with_strategy(&self, strategy: StrategyKind) -> Self {
        Self { strategy, ..self.clone() }
    }
}

/// One executed task: what was decided and what it cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskOutcome {
    pub task_index: usize,
    pub app_index: usize,
    pub state: StateKey,
    pub action: Action,
    /// Whether the random (exploration) branch picked the action.
    pub explored: bool,
    pub time: TimeBreakdown,
    pub energy: EnergyBreakdown,
    pub cost: f64,
}

/// Per-run aggregates over the task trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub run_index: usize,
    pub seed: u64,
    pub tasks: usize,
    pub mean_time_s: f64,
    pub q1_time_s: f64,
    pub median_time_s: f64,
    pub q3_time_s: f64,
    pub mean_energy_j: f64,
    pub q1_energy_j: f64,
    pub median_energy_j: f64,
    pub q3_energy_j: f64,
    pub offloaded: usize,
    pub offload_percent: f64,
    pub mean_cost: f64,
    /// Sum of per-task costs: the episode's long-term cost.
    pub total_cost: f64,
}

/// Everything one episode produced. `qtable` is present only for the
/// Q-learning strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub summary: RunSummary,
    pub outcomes: Vec<TaskOutcome>,
    pub qtable: Option<QTable>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-run seed: SplitMix64 finalizer over the base seed xored with
/// the run index times the golden-ratio increment.
pub fn episode_seed(base_seed: u64, run_index: u64) -> u64 {
    splitmix64(base_seed ^ run_index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn sample_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if r < acc {
            return i;
        }
    }
    weights.len() - 1
}

fn generate_app_sequence<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> Vec<usize> {
    match &cfg.stream {
        StreamKind::PerApp { app_index } => vec![*app_index; cfg.tasks_per_run],
        StreamKind::RoundRobin => (0..cfg.tasks_per_run).map(|i| i % cfg.apps.len()).collect(),
        StreamKind::WeightedRandom { weights } => {
            (0..cfg.tasks_per_run).map(|_| sample_weighted(weights, rng)).collect()
        }
    }
}

/// Runs one episode. Fails before executing any task if the configuration
/// is invalid.
pub fn run_episode(cfg: &SimConfig, run_index: usize) -> Result<EpisodeResult, SimError> {
    cfg.validate()?;
    let seed = episode_seed(cfg.base_seed, run_index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let app_seq = generate_app_sequence(cfg, &mut rng);
    let states: Vec<StateKey> = cfg.apps.iter().map(StateKey::from_app).collect();
    let normalizers = model::normalizers_from_heaviest(&cfg.apps, &cfg.wearable)?;
    let ctx = CostContext {
        wearable: &cfg.wearable,
        smartphone: &cfg.smartphone,
        weights: cfg.weights,
        normalizers,
        base_rate_bps: cfg.link.base_rate_bps,
    };
    let mut strategy = match cfg.strategy {
        StrategyKind::Local => Strategy::AlwaysLocal,
        StrategyKind::Offload => Strategy::AlwaysOffload,
        StrategyKind::Oracle => Strategy::Oracle,
        StrategyKind::Qlearning => Strategy::QLearning(QTable::new(cfg.alpha, cfg.gamma)?),
    };

    let mut outcomes = Vec::with_capacity(cfg.tasks_per_run);
    for (i, &app_index) in app_seq.iter().enumerate() {
        let state = states[app_index];
        let selection = strategy.decide(&state, &mut rng, &ctx);
        let (time, energy) = match selection.action {
            Action::Local => model::local_totals(&cfg.apps[app_index], &cfg.wearable),
            Action::Offload => {
                let rate = cfg.link.sample_rate(&mut rng);
                model::offload_totals(&cfg.apps[app_index], rate, &cfg.wearable, &cfg.smartphone)
            }
        };
        let cost = model::cost(&time, &energy, &cfg.weights, &normalizers);
        // The final task bootstraps from its own state.
        let next_state = states[app_seq.get(i + 1).copied().unwrap_or(app_index)];
        if let Strategy::QLearning(table) = &mut strategy {
            table.update(&state, selection.action, cost, &next_state)?;
        }
        outcomes.push(TaskOutcome {
            task_index: i,
            app_index,
            state,
            action: selection.action,
            explored: selection.explored,
            time,
            energy,
            cost,
        });
    }

    let mut summary = metrics::summarize(&outcomes)?;
    summary.run_index = run_index;
    summary.seed = seed;
    let qtable = match strategy {
        Strategy::QLearning(table) => Some(table),
        _ => None,
    };
    Ok(EpisodeResult { summary, outcomes, qtable })
}

/// Runs `cfg.runs` independent episodes. Episodes may execute in parallel;
/// results are returned in run order and each depends only on
/// `(base_seed, run_index)`.
pub fn run_many(cfg: &SimConfig) -> Result<Vec<EpisodeResult>, SimError> {
    cfg.validate()?;
    (0..cfg.runs).into_par_iter().map(|i| run_episode(cfg, i)).collect()
}

/// One cell of a beta sweep: a single application class at a single energy
/// weight, aggregated over `cfg.runs` episodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub app_index: usize,
    pub app_name: String,
    pub beta_e: f64,
    pub beta_t: f64,
    pub aggregate: AggregateSummary,
}

/// Sweeps the energy weight over every configured application class with a
/// single-application stream per cell. Rows are ordered application-major,
/// beta ascending.
pub fn sweep_beta(cfg: &SimConfig, beta_e_values: &[f64]) -> Result<Vec<SweepCell>, SimError> {
    cfg.validate()?;
    for beta in beta_e_values {
        if !((0.0..=1.0).contains(beta) && beta.is_finite()) {
            return Err(SimError::InvalidConfig(format!("beta_e values must lie in [0,1], got {beta}")));
        }
    }
    let mut betas = beta_e_values.to_vec();
    betas.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut cells = Vec::with_capacity(cfg.apps.len() * betas.len());
    for app_index in 0..cfg.apps.len() {
        for &beta_e in &betas {
            let cell_cfg = SimConfig {
                stream: StreamKind::PerApp { app_index },
                weights: CostWeights::from_beta_e(beta_e)?,
                ..cfg.clone()
            };
            let episodes = run_many(&cell_cfg)?;
            cells.push(SweepCell {
                app_index,
                app_name: cfg.apps[app_index].name.clone(),
                beta_e,
                beta_t: 1.0 - beta_e,
                aggregate: metrics::aggregate(&episodes)?,
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::epsilon;

    fn per_app_config(app_index: usize, strategy: StrategyKind) -> SimConfig {
        SimConfig {
            stream: StreamKind::PerApp { app_index },
            strategy,
            ..SimConfig::default()
        }
    }

    #[test]
    fn always_local_iot_stream_is_constant() {
        let cfg = per_app_config(0, StrategyKind::Local);
        let ep = run_episode(&cfg, 0).unwrap();
        assert_eq!(ep.outcomes.len(), 300);
        for o in &ep.outcomes {
            assert_eq!(o.action, Action::Local);
            assert!((o.time.total_s - 0.048).abs() < 1e-12);
            assert!((o.energy.total_j - 4.8e-3).abs() < 1e-12);
        }
        assert_eq!(ep.summary.offload_percent, 0.0);
        assert!(ep.qtable.is_none());
    }

    #[test]
    fn always_offload_face_recognition_stream() {
        let cfg = per_app_config(3, StrategyKind::Offload);
        let ep = run_episode(&cfg, 0).unwrap();
        for o in &ep.outcomes {
            assert_eq!(o.action, Action::Offload);
            assert!((o.time.total_s - 0.62006).abs() / 0.62006 < 1e-2);
        }
        assert_eq!(ep.summary.offload_percent, 100.0);
    }

    #[test]
    fn singleton_run_summary_equals_the_outcome() {
        let cfg = SimConfig { tasks_per_run: 1, ..per_app_config(0, StrategyKind::Local) };
        let ep = run_episode(&cfg, 0).unwrap();
        let o = &ep.outcomes[0];
        assert_eq!(ep.summary.mean_time_s, o.time.total_s);
        assert_eq!(ep.summary.median_time_s, o.time.total_s);
        assert_eq!(ep.summary.mean_cost, o.cost);
        assert_eq!(ep.summary.total_cost, o.cost);
    }

    #[test]
    fn invalid_configs_are_rejected_before_running() {
        let mut cfg = SimConfig::default();
        cfg.tasks_per_run = 0;
        assert!(matches!(run_episode(&cfg, 0), Err(SimError::InvalidConfig(_))));

        let mut cfg = SimConfig::default();
        cfg.stream = StreamKind::PerApp { app_index: 99 };
        assert!(run_episode(&cfg, 0).is_err());

        let mut cfg = SimConfig::default();
        cfg.stream = StreamKind::WeightedRandom { weights: vec![0.5, 0.5] };
        assert!(run_episode(&cfg, 0).is_err());

        let mut cfg = SimConfig::default();
        cfg.weights = CostWeights { beta_e: 0.7, beta_t: 0.7 };
        assert!(run_episode(&cfg, 0).is_err());
    }

    #[test]
    fn local_runs_are_identical_across_run_indices() {
        let cfg = per_app_config(0, StrategyKind::Local);
        let episodes = run_many(&cfg).unwrap();
        assert_eq!(episodes.len(), 10);
        for ep in &episodes[1..] {
            assert_eq!(ep.outcomes, episodes[0].outcomes);
        }
    }

    #[test]
    fn same_base_seed_reproduces_bit_identical_episodes() {
        let cfg = per_app_config(0, StrategyKind::Qlearning);
        let a = run_many(&cfg).unwrap();
        let b = run_many(&cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.outcomes, y.outcomes);
            assert_eq!(x.qtable, y.qtable);
        }
        let other = SimConfig { base_seed: cfg.base_seed + 1, ..cfg.clone() };
        let c = run_many(&other).unwrap();
        assert_ne!(a[0].outcomes, c[0].outcomes);
    }

    #[test]
    fn qlearning_converges_to_local_for_iot_in_most_runs() {
        let cfg = per_app_config(0, StrategyKind::Qlearning);
        let episodes = run_many(&cfg).unwrap();
        let state = StateKey::from_app(&cfg.apps[0]);
        let converged = episodes
            .iter()
            .filter(|ep| ep.qtable.as_ref().unwrap().greedy_action(&state) == Action::Local)
            .count();
        assert!(converged >= 9, "converged {converged}/10");
    }

    #[test]
    fn round_robin_visits_each_state_equally() {
        let cfg = SimConfig {
            stream: StreamKind::RoundRobin,
            tasks_per_run: 300,
            strategy: StrategyKind::Local,
            ..SimConfig::default()
        };
        let ep = run_episode(&cfg, 0).unwrap();
        for app_index in 0..4 {
            let visits = ep.outcomes.iter().filter(|o| o.app_index == app_index).count();
            assert_eq!(visits, 75);
        }
    }

    #[test]
    fn weighted_stream_is_seed_deterministic_and_roughly_proportional() {
        let cfg = SimConfig {
            stream: StreamKind::WeightedRandom { weights: vec![0.7, 0.1, 0.1, 0.1] },
            tasks_per_run: 2000,
            strategy: StrategyKind::Local,
            ..SimConfig::default()
        };
        let a = run_episode(&cfg, 0).unwrap();
        let b = run_episode(&cfg, 0).unwrap();
        assert_eq!(a.outcomes, b.outcomes);
        let heavy = a.outcomes.iter().filter(|o| o.app_index == 0).count();
        assert!((heavy as f64 / 2000.0 - 0.7).abs() < 0.05);
    }

    #[test]
    fn trace_costs_replay_through_the_cost_function() {
        let cfg = per_app_config(2, StrategyKind::Qlearning);
        let ep = run_episode(&cfg, 3).unwrap();
        let norms = model::normalizers_from_heaviest(&cfg.apps, &cfg.wearable).unwrap();
        for o in &ep.outcomes {
            let replayed = model::cost(&o.time, &o.energy, &cfg.weights, &norms);
            assert!((replayed - o.cost).abs() <= 1e-12 * o.cost.abs().max(1.0));
        }
    }

    #[test]
    fn qlearning_stays_between_the_pure_strategies() {
        for app_index in 0..4 {
            let local = run_episode(&per_app_config(app_index, StrategyKind::Local), 0).unwrap().summary;
            let offload = run_episode(&per_app_config(app_index, StrategyKind::Offload), 0).unwrap().summary;
            let episodes = run_many(&per_app_config(app_index, StrategyKind::Qlearning)).unwrap();
            for ep in episodes {
                let (lo_t, hi_t) = (local.mean_time_s.min(offload.mean_time_s), local.mean_time_s.max(offload.mean_time_s));
                let (lo_e, hi_e) = (local.mean_energy_j.min(offload.mean_energy_j), local.mean_energy_j.max(offload.mean_energy_j));
                assert!(ep.summary.mean_time_s >= lo_t - 1e-12 && ep.summary.mean_time_s <= hi_t + 1e-12);
                assert!(ep.summary.mean_energy_j >= lo_e - 1e-12 && ep.summary.mean_energy_j <= hi_e + 1e-12);
            }
        }
    }

    #[test]
    fn qlearning_total_cost_within_exploration_overhead_of_the_better_baseline() {
        let cfg = per_app_config(0, StrategyKind::Qlearning);
        let local_total = run_episode(&cfg.with_strategy(StrategyKind::Local), 0).unwrap().summary.total_cost;
        let offload_total = run_episode(&cfg.with_strategy(StrategyKind::Offload), 0).unwrap().summary.total_cost;
        let best = local_total.min(offload_total);
        let per_task_gap = (offload_total - local_total).abs() / cfg.tasks_per_run as f64;
        let overhead: f64 = (0..cfg.tasks_per_run as u64).map(|k| epsilon(k) * per_task_gap).sum();

        for ep in run_many(&cfg).unwrap() {
            assert!(
                ep.summary.total_cost <= best + overhead,
                "run {}: total {} exceeds {} + {}",
                ep.summary.run_index,
                ep.summary.total_cost,
                best,
                overhead
            );
        }
    }

    #[test]
    fn sweep_rejects_out_of_range_betas_and_orders_rows() {
        let cfg = SimConfig { runs: 2, tasks_per_run: 40, ..SimConfig::default() };
        assert!(sweep_beta(&cfg, &[1.5]).is_err());
        let cells = sweep_beta(&cfg, &[1.0, 0.0]).unwrap();
        assert_eq!(cells.len(), 8);
        assert_eq!(cells[0].app_index, 0);
        assert_eq!(cells[0].beta_e, 0.0);
        assert_eq!(cells[1].beta_e, 1.0);
        assert_eq!(cells[7].app_index, 3);
    }

    #[test]
    fn sweep_endpoint_tradeoff_direction() {
        let cfg = SimConfig { runs: 3, ..SimConfig::default() };
        let cells = sweep_beta(&cfg, &[0.0, 1.0]).unwrap();
        for pair in cells.chunks(2) {
            let (fast, frugal) = (&pair[0], &pair[1]);
            assert_eq!(fast.beta_e, 0.0);
            assert!(frugal.aggregate.time_s.mean >= fast.aggregate.time_s.mean - 1e-12, "{}", fast.app_name);
            assert!(frugal.aggregate.energy_j.mean <= fast.aggregate.energy_j.mean + 1e-12, "{}", fast.app_name);
        }
    }

    #[test]
    fn episode_seed_is_stable() {
        // Frozen values guard against accidental changes to the seed mix,
        // which would silently break cross-version reproducibility.
        assert_eq!(episode_seed(42, 0), episode_seed(42, 0));
        assert_ne!(episode_seed(42, 0), episode_seed(42, 1));
        assert_ne!(episode_seed(42, 0), episode_seed(43, 0));
        assert_eq!(episode_seed(0, 0), 16294208416658607535);
    }
}
