//! Default application classes, device profiles, and simulation parameters.
//!
//! Input sizes use the decimal convention 1 MB = 8e6 bits.

use crate::model::{ApplicationClass, DeviceProfile};

/// Wearable CPU frequency in cycles/s.
pub const WEARABLE_CPU_HZ: f64 = 1.0e9;
/// Smartphone CPU frequency in cycles/s.
pub const SMARTPHONE_CPU_HZ: f64 = 2.2e9;
/// Effective switched capacitance, shared by both processors.
pub const SWITCHED_CAPACITANCE: f64 = 1.0e-28;
/// Wearable Wi-Fi transmit power in watts.
pub const WEARABLE_TX_POWER_W: f64 = 255.2e-3;
/// Smartphone Wi-Fi receive power in watts.
pub const SMARTPHONE_RX_POWER_W: f64 = 210.0e-3;
/// Wearable idle power draw in watts.
pub const WEARABLE_IDLE_POWER_W: f64 = 2.563e-3;

pub const DEFAULT_TASKS_PER_RUN: usize = 300;
pub const DEFAULT_RUNS: usize = 10;
pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_GAMMA: f64 = 0.9;
pub const DEFAULT_BETA_E: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 42;

const BITS_PER_MB: u64 = 8_000_000;

pub fn iot_sensors() -> ApplicationClass {
    // 0.2 MB, 30 cycles/bit
    ApplicationClass { name: "iot_sensors".into(), input_bits: BITS_PER_MB / 5, cycles_per_bit: 30.0 }
}

pub fn four_queens() -> ApplicationClass {
    // 0.2 MB, 87.8 cycles/bit
    ApplicationClass { name: "four_queens".into(), input_bits: BITS_PER_MB / 5, cycles_per_bit: 87.8 }
}

pub fn five_queens() -> ApplicationClass {
    // 0.2 MB, 263 cycles/bit
    ApplicationClass { name: "five_queens".into(), input_bits: BITS_PER_MB / 5, cycles_per_bit: 263.0 }
}

pub fn face_recognition() -> ApplicationClass {
    // 0.42 MB, 297.62 cycles/bit
    ApplicationClass { name: "face_recognition".into(), input_bits: 42 * BITS_PER_MB / 100, cycles_per_bit: 297.62 }
}

/// The four default application classes, lightest to heaviest.
pub fn default_apps() -> Vec<ApplicationClass> {
    vec![iot_sensors(), four_queens(), five_queens(), face_recognition()]
}

pub fn wearable() -> DeviceProfile {
    DeviceProfile {
        cpu_hz: WEARABLE_CPU_HZ,
        switched_capacitance: SWITCHED_CAPACITANCE,
        tx_power_w: WEARABLE_TX_POWER_W,
        rx_power_w: 0.0,
        idle_power_w: WEARABLE_IDLE_POWER_W,
    }
}

pub fn smartphone() -> DeviceProfile {
    DeviceProfile {
        cpu_hz: SMARTPHONE_CPU_HZ,
        switched_capacitance: SWITCHED_CAPACITANCE,
        tx_power_w: 0.0,
        rx_power_w: SMARTPHONE_RX_POWER_W,
        idle_power_w: 0.0,
    }
}

/// Index of the named application within `apps`, if present.
pub fn app_index_by_name(apps: &[ApplicationClass], name: &str) -> Option<usize> {
    apps.iter().position(|app| app.name == name)
}
