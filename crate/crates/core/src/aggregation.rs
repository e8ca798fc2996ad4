//! Broadcast load information: the map from occupancy to a load label.
//!
//! Each system's load is the fraction of its minimum-rate capacity in use,
//! `min(1, Σ_n M_n^s · t_min / D_n^s)`, so a load of 1 coincides with the
//! admission boundary. A system reads `Low` when its load is at or below the
//! low threshold, `High` when strictly above the high threshold, and
//! `Medium` otherwise. Labels combine the per-system levels in mixed radix
//! with the first system most significant.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::{invalid, Result};
use crate::state_space::{NetworkState, StateSpace};

/// Absolute slack on threshold comparisons; loads are sums of ratios and a
/// load meant to be exactly 0.7 must not read as `High`.
const THRESHOLD_SLACK: f64 = 1e-12;

pub const LEVELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LoadLevel {
    Low = 0,
    Medium = 1,
    High = 2,
}

impl LoadLevel {
    fn from_digit(d: usize) -> Self {
        match d {
            0 => LoadLevel::Low,
            1 => LoadLevel::Medium,
            _ => LoadLevel::High,
        }
    }

    pub fn short(self) -> char {
        match self {
            LoadLevel::Low => 'L',
            LoadLevel::Medium => 'M',
            LoadLevel::High => 'H',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LoadLabel {
    levels: Vec<LoadLevel>,
}

impl LoadLabel {
    pub fn new(levels: Vec<LoadLevel>) -> Self {
        LoadLabel { levels }
    }

    pub fn levels(&self) -> &[LoadLevel] {
        &self.levels
    }

    pub fn index(&self) -> usize {
        self.levels
            .iter()
            .fold(0, |acc, &lvl| acc * LEVELS + lvl as usize)
    }

    pub fn from_index(systems: usize, mut index: usize) -> Self {
        let mut levels = vec![LoadLevel::Low; systems];
        for slot in levels.iter_mut().rev() {
            *slot = LoadLevel::from_digit(index % LEVELS);
            index /= LEVELS;
        }
        LoadLabel { levels }
    }
}

impl fmt::Display for LoadLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for lvl in &self.levels {
            write!(f, "{}", lvl.short())?;
        }
        Ok(())
    }
}

/// Per-system `(low, high)` thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationScheme {
    thresholds: Vec<(f64, f64)>,
}

impl AggregationScheme {
    pub fn new(thresholds: Vec<(f64, f64)>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(invalid("aggregation scheme needs at least one system"));
        }
        for (s, &(low, high)) in thresholds.iter().enumerate() {
            if !(0.0..=1.0).contains(&low) || !(0.0..=1.0).contains(&high) || low > high {
                return Err(invalid(format!(
                    "system {}: thresholds must satisfy 0 <= low <= high <= 1",
                    s + 1
                )));
            }
        }
        Ok(AggregationScheme { thresholds })
    }

    /// The thresholds carried by the configuration's system entries.
    pub fn from_config(config: &NetworkConfig) -> Self {
        AggregationScheme {
            thresholds: config
                .systems
                .iter()
                .map(|s| (s.thresholds[0], s.thresholds[1]))
                .collect(),
        }
    }

    /// Same `(low, high)` pair on every system.
    pub fn uniform(systems: usize, low: f64, high: f64) -> Result<Self> {
        Self::new(vec![(low, high); systems])
    }

    pub fn thresholds(&self) -> &[(f64, f64)] {
        &self.thresholds
    }

    pub fn systems(&self) -> usize {
        self.thresholds.len()
    }

    /// Number of labels, 3^S.
    pub fn label_count(&self) -> usize {
        LEVELS.pow(self.systems() as u32)
    }

    pub fn level(&self, s: usize, load: f64) -> LoadLevel {
        let (low, high) = self.thresholds[s];
        if load <= low + THRESHOLD_SLACK {
            LoadLevel::Low
        } else if load <= high + THRESHOLD_SLACK {
            LoadLevel::Medium
        } else {
            LoadLevel::High
        }
    }

    /// Flat `[low1, high1, low2, high2, ...]` form.
    pub fn flat(&self) -> Vec<f64> {
        self.thresholds.iter().flat_map(|&(l, h)| [l, h]).collect()
    }
}

impl fmt::Display for AggregationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.flat().iter().map(|v| format!("{v}")).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Fraction of system `s`'s minimum-rate capacity consumed in `state`.
pub fn system_load(config: &NetworkConfig, state: &NetworkState, s: usize) -> f64 {
    let used: f64 = (0..config.num_classes())
        .map(|n| state.get(n, s) as f64 * config.t_min / config.peak_rate(n, s))
        .sum();
    used.min(1.0)
}

pub fn label_of(scheme: &AggregationScheme, config: &NetworkConfig, state: &NetworkState) -> LoadLabel {
    LoadLabel::new(
        (0..config.num_systems())
            .map(|s| scheme.level(s, system_load(config, state, s)))
            .collect(),
    )
}

/// A partition of the state space into information labels.
///
/// The threshold scheme is one such partition; the baselines use a single
/// label (no information) or one label per state (full information).
#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    labels: Vec<usize>,
    count: usize,
}

impl Labeling {
    pub fn from_scheme(space: &StateSpace, scheme: &AggregationScheme) -> Self {
        Labeling {
            labels: space
                .states()
                .iter()
                .map(|m| label_of(scheme, space.config(), m).index())
                .collect(),
            count: scheme.label_count(),
        }
    }

    pub fn single(space: &StateSpace) -> Self {
        Labeling {
            labels: vec![0; space.len()],
            count: 1,
        }
    }

    pub fn per_state(space: &StateSpace) -> Self {
        Labeling {
            labels: (0..space.len()).collect(),
            count: space.len(),
        }
    }

    #[inline]
    pub fn label(&self, id: usize) -> usize {
        self.labels[id]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Labels that no enumerated state maps to.
    pub fn structurally_empty(&self) -> Vec<bool> {
        let mut empty = vec![true; self.count];
        for &l in &self.labels {
            empty[l] = false;
        }
        empty
    }
}
