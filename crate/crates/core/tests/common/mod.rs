#![allow(dead_code)]

use hetassoc::{ClassSpec, NetworkConfig, SharingScope, StateSpace, SystemSpec};
use proptest::prelude::*;

pub mod props;

/// Largest state space the random instances may produce.
pub const MAX_STATES: usize = 500;

fn quarter(lo: u32, hi: u32) -> impl Strategy<Value = f64> {
    (lo..=hi).prop_map(|q| q as f64 / 4.0)
}

fn thresholds() -> impl Strategy<Value = [f64; 2]> {
    (0u32..=10, 0u32..=10).prop_map(|(a, b)| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        [lo as f64 / 10.0, hi as f64 / 10.0]
    })
}

fn gain() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        Just(Vec::new()),
        (1.0f64..1.3, 1.0f64..1.2).prop_map(|(g2, r)| vec![1.0, g2, g2 * r]),
    ]
}

/// Small random instance: at most two systems and two classes and at most
/// [`MAX_STATES`] feasible states.
pub fn instance_with(systems: std::ops::RangeInclusive<usize>, classes: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = NetworkConfig> {
    (systems, classes).prop_flat_map(|(s, n)| {
        (
            prop::collection::vec(thresholds(), s),
            prop::collection::vec((0.05f64..2.0, prop::collection::vec(quarter(2, 16), s)), n),
            prop_oneof![Just(0.5), Just(1.0)],
            prop_oneof![Just(1.0), Just(1.5), Just(2.0)],
            0.2f64..2.0,
            gain(),
            prop_oneof![Just(SharingScope::PerSystem), Just(SharingScope::NetworkWide)],
        )
            .prop_map(|(th, cl, t_min, t_max, mu, gain, scope)| NetworkConfig {
                systems: th
                    .into_iter()
                    .enumerate()
                    .map(|(i, thresholds)| SystemSpec {
                        name: format!("S{}", i + 1),
                        thresholds,
                    })
                    .collect(),
                classes: cl
                    .into_iter()
                    .enumerate()
                    .map(|(i, (arrival_rate, peak_rates))| ClassSpec {
                        name: format!("C{}", i + 1),
                        arrival_rate,
                        peak_rates,
                    })
                    .collect(),
                t_min,
                t_max: t_min * t_max,
                service_rate: mu,
                scheduler_gain: gain,
                sharing_scope: scope,
            })
    })
    .prop_filter("state space too large", |cfg| {
        StateSpace::enumerate_with_cap(cfg, MAX_STATES).is_ok()
    })
}

/// Mostly two systems and two classes, where the interesting interactions are.
pub fn instance() -> impl Strategy<Value = NetworkConfig> {
    prop_oneof![
        1 => instance_with(1..=2, 1..=2),
        2 => instance_with(2..=2, 2..=2),
    ]
}

/// The same network with the two systems listed in the other order.
pub fn swap_systems(cfg: &NetworkConfig) -> NetworkConfig {
    let mut out = cfg.clone();
    out.systems.reverse();
    for c in &mut out.classes {
        c.peak_rates.reverse();
    }
    out
}

pub fn swap_classes(cfg: &NetworkConfig) -> NetworkConfig {
    let mut out = cfg.clone();
    out.classes.reverse();
    out
}
