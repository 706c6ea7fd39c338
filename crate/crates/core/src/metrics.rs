//! Aggregation and serialization of task outcomes.
//!
//! Quartiles use linear interpolation between closest ranks on the sorted
//! sample (`h = (n-1)p`), the same convention throughout. Exports carry SI
//! units (seconds, joules) with units in the column names; floats are
//! written with 9 significant digits so files re-parse within formatting
//! precision and identical inputs produce byte-identical output.

use std::io::{self, Write};

use serde::Serialize;

use crate::agent::{Action, QTable};
use crate::model::ApplicationClass;
use crate::sim::{EpisodeResult, RunSummary, SweepCell, TaskOutcome};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("cannot summarize an empty outcome list")]
    EmptyOutcomes,
    #[error("cannot aggregate zero runs")]
    EmptyRuns,
}

/// Quantile by linear interpolation between closest ranks; input must be
/// sorted and nonempty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted_copy(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Per-run summary statistics over one task trace.
pub fn summarize(outcomes: &[TaskOutcome]) -> Result<RunSummary, MetricsError> {
    if outcomes.is_empty() {
        return Err(MetricsError::EmptyOutcomes);
    }
    let n = outcomes.len() as f64;
    let times = sorted_copy(outcomes.iter().map(|o| o.time.total_s));
    let energies = sorted_copy(outcomes.iter().map(|o| o.energy.total_j));
    let total_cost: f64 = outcomes.iter().map(|o| o.cost).sum();
    let offloaded = outcomes.iter().filter(|o| o.action == Action::Offload).count();
    Ok(RunSummary {
        run_index: 0,
        seed: 0,
        tasks: outcomes.len(),
        mean_time_s: times.iter().sum::<f64>() / n,
        q1_time_s: quantile_sorted(&times, 0.25),
        median_time_s: quantile_sorted(&times, 0.5),
        q3_time_s: quantile_sorted(&times, 0.75),
        mean_energy_j: energies.iter().sum::<f64>() / n,
        q1_energy_j: quantile_sorted(&energies, 0.25),
        median_energy_j: quantile_sorted(&energies, 0.5),
        q3_energy_j: quantile_sorted(&energies, 0.75),
        offloaded,
        offload_percent: 100.0 * offloaded as f64 / n,
        mean_cost: total_cost / n,
        total_cost,
    })
}

/// Distribution statistics for one metric: mean of per-run means plus the
/// five-number summary of the pooled per-task sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricStats {
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl MetricStats {
    fn from_pool(mean: f64, pooled_sorted: &[f64]) -> Self {
        Self {
            mean,
            min: pooled_sorted[0],
            q1: quantile_sorted(pooled_sorted, 0.25),
            median: quantile_sorted(pooled_sorted, 0.5),
            q3: quantile_sorted(pooled_sorted, 0.75),
            max: pooled_sorted[pooled_sorted.len() - 1],
        }
    }
}

/// Multi-run aggregate: per-run means averaged, per-task samples pooled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateSummary {
    pub n_runs: usize,
    pub tasks_per_run: usize,
    pub time_s: MetricStats,
    pub energy_j: MetricStats,
    pub cost: MetricStats,
    pub offload_percent_mean: f64,
    pub offload_percent_min: f64,
    pub offload_percent_max: f64,
    /// Mean over runs of the per-run long-term cost.
    pub mean_total_cost: f64,
}

/// Pools every run's task outcomes for distribution statistics and averages
/// the per-run means.
pub fn aggregate(episodes: &[EpisodeResult]) -> Result<AggregateSummary, MetricsError> {
    if episodes.is_empty() {
        return Err(MetricsError::EmptyRuns);
    }
    let n_runs = episodes.len() as f64;
    let mean_of = |f: &dyn Fn(&RunSummary) -> f64| episodes.iter().map(|e| f(&e.summary)).sum::<f64>() / n_runs;

    let pooled_times = sorted_copy(episodes.iter().flat_map(|e| e.outcomes.iter().map(|o| o.time.total_s)));
    let pooled_energies = sorted_copy(episodes.iter().flat_map(|e| e.outcomes.iter().map(|o| o.energy.total_j)));
    let pooled_costs = sorted_copy(episodes.iter().flat_map(|e| e.outcomes.iter().map(|o| o.cost)));

    let offload_percents: Vec<f64> = episodes.iter().map(|e| e.summary.offload_percent).collect();
    Ok(AggregateSummary {
        n_runs: episodes.len(),
        tasks_per_run: episodes[0].summary.tasks,
        time_s: MetricStats::from_pool(mean_of(&|s| s.mean_time_s), &pooled_times),
        energy_j: MetricStats::from_pool(mean_of(&|s| s.mean_energy_j), &pooled_energies),
        cost: MetricStats::from_pool(mean_of(&|s| s.mean_cost), &pooled_costs),
        offload_percent_mean: mean_of(&|s| s.offload_percent),
        offload_percent_min: offload_percents.iter().copied().fold(f64::INFINITY, f64::min),
        offload_percent_max: offload_percents.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_total_cost: mean_of(&|s| s.total_cost),
    })
}

/// Formats a float with 9 significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

pub const SUMMARY_HEADER: &str = "strategy,app,beta_e,beta_t,runs,tasks_per_run,mean_time_s,q1_time_s,\
median_time_s,q3_time_s,mean_energy_j,q1_energy_j,median_energy_j,q3_energy_j,offload_percent,\
mean_cost,total_cost";

/// One row of the summary/sweep export: a strategy on an application stream
/// at fixed weights, aggregated over its runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub strategy: String,
    pub app: String,
    pub beta_e: f64,
    pub beta_t: f64,
    pub runs: usize,
    pub tasks_per_run: usize,
    pub mean_time_s: f64,
    pub q1_time_s: f64,
    pub median_time_s: f64,
    pub q3_time_s: f64,
    pub mean_energy_j: f64,
    pub q1_energy_j: f64,
    pub median_energy_j: f64,
    pub q3_energy_j: f64,
    pub offload_percent: f64,
    pub mean_cost: f64,
    pub total_cost: f64,
}

impl SummaryRow {
    pub fn from_aggregate(
        strategy: &str,
        app: &str,
        beta_e: f64,
        beta_t: f64,
        agg: &AggregateSummary,
    ) -> Self {
        Self {
            strategy: strategy.to_string(),
            app: app.to_string(),
            beta_e,
            beta_t,
            runs: agg.n_runs,
            tasks_per_run: agg.tasks_per_run,
            mean_time_s: agg.time_s.mean,
            q1_time_s: agg.time_s.q1,
            median_time_s: agg.time_s.median,
            q3_time_s: agg.time_s.q3,
            mean_energy_j: agg.energy_j.mean,
            q1_energy_j: agg.energy_j.q1,
            median_energy_j: agg.energy_j.median,
            q3_energy_j: agg.energy_j.q3,
            offload_percent: agg.offload_percent_mean,
            mean_cost: agg.cost.mean,
            total_cost: agg.mean_total_cost,
        }
    }

    pub fn from_sweep_cell(cell: &SweepCell, strategy: &str) -> Self {
        Self::from_aggregate(strategy, &cell.app_name, cell.beta_e, cell.beta_t, &cell.aggregate)
    }

    fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.strategy,
            self.app,
            fmt_float(self.beta_e),
            fmt_float(self.beta_t),
            self.runs,
            self.tasks_per_run,
            fmt_float(self.mean_time_s),
            fmt_float(self.q1_time_s),
            fmt_float(self.median_time_s),
            fmt_float(self.q3_time_s),
            fmt_float(self.mean_energy_j),
            fmt_float(self.q1_energy_j),
            fmt_float(self.median_energy_j),
            fmt_float(self.q3_energy_j),
            fmt_float(self.offload_percent),
            fmt_float(self.mean_cost),
            fmt_float(self.total_cost),
        )
    }
}

/// Writes the summary schema; an empty row list yields a header-only file.
pub fn write_summary_csv<W: Write>(w: &mut W, rows: &[SummaryRow]) -> io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for row in rows {
        row.write_csv(w)?;
    }
    Ok(())
}

pub const TRACE_HEADER: &str =
    "run,task_index,app,action,explored,transmit_s,exec_s,total_s,tx_j,rx_j,exec_j,idle_j,total_j,cost";

/// One task of one run, flattened for the trace export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub run: usize,
    pub task_index: usize,
    pub app: String,
    pub action: &'static str,
    pub explored: bool,
    pub transmit_s: f64,
    pub exec_s: f64,
    pub total_s: f64,
    pub tx_j: f64,
    pub rx_j: f64,
    pub exec_j: f64,
    pub idle_j: f64,
    pub total_j: f64,
    pub cost: f64,
}

/// Flattens episode traces into rows, in run then task order.
pub fn trace_rows(episodes: &[EpisodeResult], apps: &[ApplicationClass]) -> Vec<TraceRow> {
    episodes
        .iter()
        .flat_map(|ep| {
            ep.outcomes.iter().map(|o| TraceRow {
                run: ep.summary.run_index,
                task_index: o.task_index,
                app: apps[o.app_index].name.clone(),
                action: o.action.label(),
                explored: o.explored,
                transmit_s: o.time.transmit_s,
                exec_s: o.time.exec_s,
                total_s: o.time.total_s,
                tx_j: o.energy.tx_wearable_j,
                rx_j: o.energy.rx_smartphone_j,
                exec_j: o.energy.exec_j,
                idle_j: o.energy.idle_wearable_j,
                total_j: o.energy.total_j,
                cost: o.cost,
            })
        })
        .collect()
}

pub fn write_trace_csv<W: Write>(w: &mut W, rows: &[TraceRow]) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.run,
            r.task_index,
            r.app,
            r.action,
            r.explored,
            fmt_float(r.transmit_s),
            fmt_float(r.exec_s),
            fmt_float(r.total_s),
            fmt_float(r.tx_j),
            fmt_float(r.rx_j),
            fmt_float(r.exec_j),
            fmt_float(r.idle_j),
            fmt_float(r.total_j),
            fmt_float(r.cost),
        )?;
    }
    Ok(())
}

pub const QTABLE_HEADER: &str = "state_name,q_local,q_offload,visits_local,visits_offload";

/// Dumps a learned table, resolving state names through the application
/// list where possible.
pub fn write_qtable_csv<W: Write>(w: &mut W, table: &QTable, apps: &[ApplicationClass]) -> io::Result<()> {
    writeln!(w, "{QTABLE_HEADER}")?;
    for (state, entry) in table.entries() {
        let name = apps
            .iter()
            .find(|app| crate::agent::StateKey::from_app(app) == *state)
            .map(|app| app.name.clone())
            .unwrap_or_else(|| state.to_app().name);
        writeln!(
            w,
            "{},{},{},{},{}",
            name,
            fmt_float(entry.q[Action::Local.index()]),
            fmt_float(entry.q[Action::Offload.index()]),
            entry.visits[Action::Local.index()],
            entry.visits[Action::Offload.index()],
        )?;
    }
    Ok(())
}
