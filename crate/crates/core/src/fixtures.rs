//! Small ready-made instances used throughout the tests, benches and docs.

use crate::config::{ClassSpec, NetworkConfig, SharingScope, SystemSpec};

fn system(name: &str) -> SystemSpec {
    SystemSpec {
        name: name.to_string(),
        thresholds: [0.3, 0.7],
    }
}

fn class(name: &str, arrival_rate: f64, peak_rates: Vec<f64>) -> ClassSpec {
    ClassSpec {
        name: name.to_string(),
        arrival_rate,
        peak_rates,
    }
}

/// One class in one system.
pub fn single(peak: f64, t_min: f64, t_max: f64, arrival_rate: f64, service_rate: f64) -> NetworkConfig {
    NetworkConfig {
        systems: vec![system("S1")],
        classes: vec![class("C1", arrival_rate, vec![peak])],
        t_min,
        t_max,
        service_rate,
        scheduler_gain: Vec::new(),
        sharing_scope: SharingScope::PerSystem,
    }
}

/// D = 2 Mbps, t_min = 1, t_max = 2, λ = μ = 1: an M/M/2/2 loss system.
pub fn erlang_fixture() -> NetworkConfig {
    single(2.0, 1.0, 2.0, 1.0, 1.0)
}

/// Two classes sharing a single system, t_min = 1, t_max = 2, λ = μ = 1.
pub fn two_class_one_system(peak_a: f64, peak_b: f64) -> NetworkConfig {
    NetworkConfig {
        systems: vec![system("S1")],
        classes: vec![
            class("C1", 1.0, vec![peak_a]),
            class("C2", 1.0, vec![peak_b]),
        ],
        t_min: 1.0,
        t_max: 2.0,
        service_rate: 1.0,
        scheduler_gain: Vec::new(),
        sharing_scope: SharingScope::PerSystem,
    }
}

/// Two identical systems with `classes` identical classes of peak rate
/// `peak`, t_min = 1, t_max = 2, λ = μ = 1.
pub fn twin_systems(classes: usize, peak: f64) -> NetworkConfig {
    NetworkConfig {
        systems: vec![system("S1"), system("S2")],
        classes: (0..classes)
            .map(|n| class(&format!("C{}", n + 1), 1.0, vec![peak, peak]))
            .collect(),
        t_min: 1.0,
        t_max: 2.0,
        service_rate: 1.0,
        scheduler_gain: Vec::new(),
        sharing_scope: SharingScope::PerSystem,
    }
}

/// Small two-system, two-class instance (28 feasible states).
pub fn small_hetnet() -> NetworkConfig {
    NetworkConfig {
        systems: vec![system("S1"), system("S2")],
        classes: vec![
            class("center", 0.8, vec![2.0, 3.0]),
            class("edge", 0.6, vec![1.5, 2.0]),
        ],
        t_min: 1.0,
        t_max: 2.0,
        service_rate: 1.0,
        scheduler_gain: Vec::new(),
        sharing_scope: SharingScope::PerSystem,
    }
}

/// HSDPA + LTE with cell-center and cell-edge users, thresholds
/// [0.3, 0.7] on both systems, 10 Erlangs of offered traffic.
///
/// The peak rates are illustrative inputs, not measured values.
pub fn hsdpa_lte() -> NetworkConfig {
    NetworkConfig {
        systems: vec![system("HSDPA"), system("LTE")],
        classes: vec![
            class("center", 0.1, vec![5.0, 10.0]),
            class("edge", 0.1, vec![1.5, 3.0]),
        ],
        t_min: 1.0,
        t_max: 2.0,
        service_rate: 0.02,
        scheduler_gain: Vec::new(),
        sharing_scope: SharingScope::PerSystem,
    }
}
