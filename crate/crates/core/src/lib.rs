//! Seed-deterministic simulator and benchmark harness for computation
//! offloading between a wearable device and its paired smartphone.
//!
//! The wearable generates atomic tasks drawn from a small set of application
//! classes. Each task is either executed locally or shipped over a Wi-Fi
//! link to the smartphone; a tabular Q-learning agent learns which choice
//! minimizes a weighted, normalized energy/time cost. The crate is organized
//! around that pipeline:
//!
//! - [`model`] — closed-form time and energy arithmetic for both execution
//!   paths, plus the normalized cost function.
//! - [`link`] — parametric effective-rate model of the wireless link, with
//!   a calibrated deterministic default and an optional log-normal mode.
//! - [`agent`] — decision strategies: always-local, always-offload, a
//!   deterministic one-step oracle, and the epsilon-greedy Q-learner.
//! - [`sim`] — the episode driver, multi-run orchestration, and beta sweeps.
//! - [`metrics`] — summaries, pooled distribution statistics, and CSV/JSON
//!   emitters.
//! - [`presets`] — the default application classes and device profiles.
//!
//! Every run is a pure function of `(base_seed, run_index)`: identical seeds
//! produce bit-identical traces on any platform.

pub mod agent;
pub mod link;
pub mod metrics;
pub mod model;
pub mod presets;
pub mod sim;

pub use agent::{Action, QTable, StateKey, Strategy, StrategyKind};
pub use link::{LinkKind, LinkModel};
pub use model::{ApplicationClass, CostWeights, DeviceProfile, EnergyBreakdown, Normalizers, TimeBreakdown};
pub use sim::{EpisodeResult, RunSummary, SimConfig, StreamKind, TaskOutcome};
