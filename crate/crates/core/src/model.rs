//! Closed-form time and energy model for local execution and offloading.
//!
//! A task is described by its input size `D` (bits) and computational
//! intensity `C` (CPU cycles per bit). Executing it on a device running at
//! `F` cycles/s takes `D*C/F` seconds and burns `a_c * F^2 * D*C` joules,
//! where `a_c` is the chip's effective switched capacitance. Offloading adds
//! the radio transfer `D/R` at rate `R` plus the energy the wearable spends
//! transmitting, the smartphone spends receiving and executing, and the
//! wearable spends idling while it waits for the remote execution to finish.
//! The result-return path is free: output data is assumed negligible next to
//! the input.
//!
//! Costs are a weighted sum of energy and time, each normalized by the local
//! execution cost of the heaviest configured application class. The maxima
//! are computed once per episode and held fixed, so local costs land in
//! `[0, 1]` while offloading a heavy task may exceed 1; no clamping is
//! applied, it would distort which action wins the argmin.
//!
//! Everything here is pure `f64` arithmetic over immutable values; safe to
//! call concurrently.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("application `{name}`: {problem}")]
    InvalidApplication { name: String, problem: String },
    #[error("device profile: {0}")]
    InvalidDevice(String),
    #[error("cost weights must lie in [0,1] and sum to 1, got beta_e={beta_e}, beta_t={beta_t}")]
    InvalidWeights { beta_e: f64, beta_t: f64 },
    #[error("normalizers must be positive and finite, got e_max={e_max_j} J, t_max={t_max_s} s")]
    InvalidNormalizers { e_max_j: f64, t_max_s: f64 },
    #[error("application set is empty")]
    NoApplications,
}

/// A task template: every task of this class carries `input_bits` of input
/// data and needs `cycles_per_bit` CPU cycles per bit to execute.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApplicationClass {
    pub name: String,
    pub input_bits: u64,
    pub cycles_per_bit: f64,
}

impl ApplicationClass {
    pub fn new(name: impl Into<String>, input_bits: u64, cycles_per_bit: f64) -> Result<Self, ModelError> {
        let app = Self { name: name.into(), input_bits, cycles_per_bit };
        app.validate()?;
        Ok(app)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let problem = if self.input_bits == 0 {
            Some("input_bits must be positive".to_string())
        } else if !(self.cycles_per_bit > 0.0 && self.cycles_per_bit.is_finite()) {
            Some(format!("cycles_per_bit must be positive and finite, got {}", self.cycles_per_bit))
        } else {
            None
        };
        match problem {
            Some(problem) => Err(ModelError::InvalidApplication { name: self.name.clone(), problem }),
            None => Ok(()),
        }
    }

    /// Total CPU cycles needed for one task: `D * C`.
    pub fn input_cycles(&self) -> f64 {
        self.input_bits as f64 * self.cycles_per_bit
    }
}

/// Static hardware parameters of one device. The wearable uses `tx_power_w`
/// and `idle_power_w`; the smartphone uses `rx_power_w`. Unused radio powers
/// are zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceProfile {
    /// CPU frequency in cycles per second.
    pub cpu_hz: f64,
    /// Effective switched capacitance of the processor.
    pub switched_capacitance: f64,
    /// Radio transmit power in watts.
    pub tx_power_w: f64,
    /// Radio receive power in watts.
    pub rx_power_w: f64,
    /// Idle power draw in watts while waiting on a remote execution.
    pub idle_power_w: f64,
}

impl DeviceProfile {
    pub fn new(
        cpu_hz: f64,
        switched_capacitance: f64,
        tx_power_w: f64,
        rx_power_w: f64,
        idle_power_w: f64,
    ) -> Result<Self, ModelError> {
        let profile = Self { cpu_hz, switched_capacitance, tx_power_w, rx_power_w, idle_power_w };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.cpu_hz > 0.0 && self.cpu_hz.is_finite()) {
            return Err(ModelError::InvalidDevice(format!("cpu_hz must be positive, got {}", self.cpu_hz)));
        }
        if !(self.switched_capacitance > 0.0 && self.switched_capacitance.is_finite()) {
            return Err(ModelError::InvalidDevice(format!(
                "switched_capacitance must be positive, got {}",
                self.switched_capacitance
            )));
        }
        for (label, value) in [
            ("tx_power_w", self.tx_power_w),
            ("rx_power_w", self.rx_power_w),
            ("idle_power_w", self.idle_power_w),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ModelError::InvalidDevice(format!("{label} must be >= 0, got {value}")));
            }
        }
        Ok(())
    }
}

/// Wall-clock breakdown of one task. `transmit_s` is zero for local
/// execution; `total_s` is always `transmit_s + exec_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeBreakdown {
    pub transmit_s: f64,
    pub exec_s: f64,
    pub total_s: f64,
}

impl TimeBreakdown {
    pub fn local(exec_s: f64) -> Self {
        Self { transmit_s: 0.0, exec_s, total_s: exec_s }
    }

    pub fn offload(transmit_s: f64, exec_s: f64) -> Self {
        Self { transmit_s, exec_s, total_s: transmit_s + exec_s }
    }
}

/// Energy breakdown of one task across both devices. For local execution
/// only `exec_j` is nonzero. `total_j` is always the four-component sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    /// Radio energy spent by the wearable transmitting the input data.
    pub tx_wearable_j: f64,
    /// Radio energy spent by the smartphone receiving the input data.
    pub rx_smartphone_j: f64,
    /// Computation energy on whichever device executed the task.
    pub exec_j: f64,
    /// Energy the wearable burns idling while the smartphone executes.
    pub idle_wearable_j: f64,
    pub total_j: f64,
}

impl EnergyBreakdown {
    pub fn local(exec_j: f64) -> Self {
        Self { tx_wearable_j: 0.0, rx_smartphone_j: 0.0, exec_j, idle_wearable_j: 0.0, total_j: exec_j }
    }

    pub fn offload(tx_wearable_j: f64, rx_smartphone_j: f64, exec_j: f64, idle_wearable_j: f64) -> Self {
        Self {
            tx_wearable_j,
            rx_smartphone_j,
            exec_j,
            idle_wearable_j,
            total_j: tx_wearable_j + rx_smartphone_j + exec_j + idle_wearable_j,
        }
    }
}

/// Relative importance of energy vs time in the cost function. The two
/// weights always sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostWeights {
    pub beta_e: f64,
    pub beta_t: f64,
}

impl CostWeights {
    /// Builds weights from the energy coefficient alone; `beta_t = 1 - beta_e`.
    pub fn from_beta_e(beta_e: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&beta_e) || !beta_e.is_finite() {
            return Err(ModelError::InvalidWeights { beta_e, beta_t: 1.0 - beta_e });
        }
        Ok(Self { beta_e, beta_t: 1.0 - beta_e })
    }

    pub fn new(beta_e: f64, beta_t: f64) -> Result<Self, ModelError> {
        let valid = (0.0..=1.0).contains(&beta_e)
            && (0.0..=1.0).contains(&beta_t)
            && (beta_e + beta_t - 1.0).abs() <= 1e-12;
        if !valid {
            return Err(ModelError::InvalidWeights { beta_e, beta_t });
        }
        Ok(Self { beta_e, beta_t })
    }
}

/// Fixed normalization constants for the cost function: the local execution
/// energy and time of the heaviest configured application class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normalizers {
    pub e_max_j: f64,
    pub t_max_s: f64,
}

impl Normalizers {
    pub fn new(e_max_j: f64, t_max_s: f64) -> Result<Self, ModelError> {
        if !(e_max_j > 0.0 && e_max_j.is_finite() && t_max_s > 0.0 && t_max_s.is_finite()) {
            return Err(ModelError::InvalidNormalizers { e_max_j, t_max_s });
        }
        Ok(Self { e_max_j, t_max_s })
    }
}

/// Time to execute a task locally on the wearable: `D*C / F_W`.
pub fn local_exec_time(app: &ApplicationClass, wearable: &DeviceProfile) -> f64 {
    app.input_cycles() / wearable.cpu_hz
}

/// Energy to execute a task locally on the wearable: `a_c * F_W^2 * D*C`.
pub fn local_exec_energy(app: &ApplicationClass, wearable: &DeviceProfile) -> f64 {
    wearable.switched_capacitance * wearable.cpu_hz * wearable.cpu_hz * app.input_cycles()
}

/// Time to push the input data to the smartphone at `rate_bps`: `D / R`.
pub fn offload_transmit_time(app: &ApplicationClass, rate_bps: f64) -> f64 {
    app.input_bits as f64 / rate_bps
}

/// Time to execute a task on the smartphone: `D*C / F_S`.
pub fn remote_exec_time(app: &ApplicationClass, smartphone: &DeviceProfile) -> f64 {
    app.input_cycles() / smartphone.cpu_hz
}

/// Full local-execution breakdown: computation only, no radio activity.
pub fn local_totals(app: &ApplicationClass, wearable: &DeviceProfile) -> (TimeBreakdown, EnergyBreakdown) {
    (
        TimeBreakdown::local(local_exec_time(app, wearable)),
        EnergyBreakdown::local(local_exec_energy(app, wearable)),
    )
}

/// Full offloading breakdown at the given link rate: transfer plus remote
/// execution for time; wearable tx, smartphone rx, smartphone execution, and
/// wearable idle wait for energy.
pub fn offload_totals(
    app: &ApplicationClass,
    rate_bps: f64,
    wearable: &DeviceProfile,
    smartphone: &DeviceProfile,
) -> (TimeBreakdown, EnergyBreakdown) {
    let transmit_s = offload_transmit_time(app, rate_bps);
    let exec_s = remote_exec_time(app, smartphone);
    let tx_wearable_j = wearable.tx_power_w * transmit_s;
    let rx_smartphone_j = smartphone.rx_power_w * transmit_s;
    let exec_j = smartphone.switched_capacitance * smartphone.cpu_hz * smartphone.cpu_hz * app.input_cycles();
    let idle_wearable_j = wearable.idle_power_w * exec_s;
    (
        TimeBreakdown::offload(transmit_s, exec_s),
        EnergyBreakdown::offload(tx_wearable_j, rx_smartphone_j, exec_j, idle_wearable_j),
    )
}

/// Normalized weighted cost of one executed task:
/// `beta_e * E/E_max + beta_t * T/T_max`.
///
/// The breakdown already encodes the chosen action, so the same formula
/// covers both the local and the offload case.
pub fn cost(time: &TimeBreakdown, energy: &EnergyBreakdown, weights: &CostWeights, norms: &Normalizers) -> f64 {
    weights.beta_e * (energy.total_j / norms.e_max_j) + weights.beta_t * (time.total_s / norms.t_max_s)
}

/// Normalization constants from the configured application set: the maximum
/// local execution energy and time over all classes. Computed once per
/// episode and held fixed.
pub fn normalizers_from_heaviest(
    apps: &[ApplicationClass],
    wearable: &DeviceProfile,
) -> Result<Normalizers, ModelError> {
    if apps.is_empty() {
        return Err(ModelError::NoApplications);
    }
    let e_max_j = apps
        .iter()
        .map(|app| local_exec_energy(app, wearable))
        .fold(f64::NEG_INFINITY, f64::max);
    let t_max_s = apps
        .iter()
        .map(|app| local_exec_time(app, wearable))
        .fold(f64::NEG_INFINITY, f64::max);
    Normalizers::new(e_max_j, t_max_s)
}
