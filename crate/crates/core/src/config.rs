//! Problem instances: systems, radio classes, rates and traffic.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Which users share a system's capacity in the throughput formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharingScope {
    /// Divide by the number of users in the whole network.
    NetworkWide,
    /// Divide by the number of users in the same system.
    #[default]
    PerSystem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub name: String,
    /// `[low, high]` load thresholds broadcast for this system.
    #[serde(default = "default_thresholds")]
    pub thresholds: [f64; 2],
}

fn default_thresholds() -> [f64; 2] {
    [0.3, 0.7]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub name: String,
    /// Poisson arrival rate, calls per second.
    pub arrival_rate: f64,
    /// Peak rate in Mbps when alone in each system, one entry per system.
    pub peak_rates: Vec<f64>,
}

/// A validated network instance.
///
/// Fields are public so instances can be built in code; anything that did
/// not come through [`load_config`] should be passed through
/// [`NetworkConfig::validate`] before use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub systems: Vec<SystemSpec>,
    pub classes: Vec<ClassSpec>,
    pub t_min: f64,
    pub t_max: f64,
    /// Departure rate μ; the mean call duration is 1/μ seconds.
    pub service_rate: f64,
    /// Scheduler gain for k = 1, 2, ... concurrent users. The last entry is
    /// held for larger k; an empty table means a constant gain of 1.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scheduler_gain: Vec<f64>,
    #[serde(default)]
    pub sharing_scope: SharingScope,
}

/// Parses and validates a JSON configuration document.
pub fn load_config(text: &str) -> Result<NetworkConfig> {
    let config: NetworkConfig = serde_json::from_str(text)?;
    config.validate()?;
    Ok(config)
}

impl NetworkConfig {
    pub fn num_systems(&self) -> usize {
        self.systems.len()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Peak rate D of class `n` in system `s` (both zero-based).
    #[inline]
    pub fn peak_rate(&self, n: usize, s: usize) -> f64 {
        self.classes[n].peak_rates[s]
    }

    #[inline]
    pub fn arrival_rate(&self, n: usize) -> f64 {
        self.classes[n].arrival_rate
    }

    pub fn total_arrival_rate(&self) -> f64 {
        self.classes.iter().map(|c| c.arrival_rate).sum()
    }

    /// Share of arrivals that belong to class `n`.
    pub fn class_weight(&self, n: usize) -> f64 {
        self.arrival_rate(n) / self.total_arrival_rate()
    }

    /// Offered traffic in Erlangs, summed over classes.
    pub fn offered_load(&self) -> f64 {
        self.total_arrival_rate() / self.service_rate
    }

    /// Scheduler gain with `k` users sharing; `k` must be at least 1.
    #[inline]
    pub fn gain(&self, k: u32) -> f64 {
        debug_assert!(k >= 1);
        match self.scheduler_gain.len() {
            0 => 1.0,
            len => self.scheduler_gain[(k as usize - 1).min(len - 1)],
        }
    }

    /// Copy of this instance rescaled to `erlangs` of offered traffic, split
    /// across classes in proportion to the configured arrival rates.
    pub fn with_offered_load(&self, erlangs: f64) -> NetworkConfig {
        let total = self.total_arrival_rate();
        let mut out = self.clone();
        for class in &mut out.classes {
            class.arrival_rate = erlangs * self.service_rate * class.arrival_rate / total;
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every instance invariant, naming the first one violated.
    pub fn validate(&self) -> Result<()> {
        let systems = self.num_systems();
        if systems == 0 {
            return Err(invalid("at least one system is required"));
        }
        if self.classes.is_empty() {
            return Err(invalid("at least one class is required"));
        }
        if !(self.t_min.is_finite() && self.t_min > 0.0) {
            return Err(invalid("t_min must be positive"));
        }
        if !self.t_max.is_finite() {
            return Err(invalid("t_max must be finite"));
        }
        if self.t_min > self.t_max {
            return Err(invalid("t_min exceeds t_max"));
        }
        if !(self.service_rate.is_finite() && self.service_rate > 0.0) {
            return Err(invalid("service_rate must be positive"));
        }
        for (i, sys) in self.systems.iter().enumerate() {
            let [low, high] = sys.thresholds;
            if !(0.0..=1.0).contains(&low) || !(0.0..=1.0).contains(&high) || low > high {
                return Err(invalid(format!(
                    "system {} ({}): thresholds must satisfy 0 <= low <= high <= 1",
                    i + 1,
                    sys.name
                )));
            }
        }
        for (n, class) in self.classes.iter().enumerate() {
            if class.peak_rates.len() != systems {
                return Err(invalid(format!(
                    "class {} ({}): expected {} peak rates, got {}",
                    n + 1,
                    class.name,
                    systems,
                    class.peak_rates.len()
                )));
            }
            if class.peak_rates.iter().any(|&d| !(d.is_finite() && d > 0.0)) {
                return Err(invalid(format!(
                    "class {} ({}): peak rates must be positive",
                    n + 1,
                    class.name
                )));
            }
            if !(class.arrival_rate.is_finite() && class.arrival_rate >= 0.0) {
                return Err(invalid(format!(
                    "class {} ({}): arrival_rate must be non-negative",
                    n + 1,
                    class.name
                )));
            }
        }
        if self.total_arrival_rate() <= 0.0 {
            return Err(invalid("no traffic"));
        }
        if self.scheduler_gain.iter().any(|&g| !(g.is_finite() && g > 0.0)) {
            return Err(invalid("scheduler_gain entries must be positive"));
        }
        // gain(k)/k must not increase, otherwise removing a user could make
        // a feasible state infeasible.
        let per_user: Vec<f64> = self
            .scheduler_gain
            .iter()
            .enumerate()
            .map(|(i, g)| g / (i + 1) as f64)
            .collect();
        if per_user.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12)) {
            return Err(invalid("scheduler_gain[k]/k must be non-increasing in k"));
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const HSDPA_LTE: &str = r#"{
        "systems": [
            {"name": "HSDPA", "thresholds": [0.3, 0.7]},
            {"name": "LTE", "thresholds": [0.3, 0.7]}
        ],
        "classes": [
            {"name": "center", "arrival_rate": 0.1, "peak_rates": [5.0, 10.0]},
            {"name": "edge", "arrival_rate": 0.1, "peak_rates": [1.5, 3.0]}
        ],
        "t_min": 1.0,
        "t_max": 2.0,
        "service_rate": 0.02
    }"#;

    #[test]
    fn loads_hsdpa_lte_instance() {
        let cfg = load_config(HSDPA_LTE).unwrap();
        assert_eq!(cfg.num_systems(), 2);
        assert_eq!(cfg.num_classes(), 2);
        assert_eq!(cfg.t_min, 1.0);
        assert_eq!(cfg.t_max, 2.0);
        assert_eq!(cfg.sharing_scope, SharingScope::PerSystem);
        assert!((cfg.offered_load() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_inverted_bounds() {
        let text = HSDPA_LTE.replace("\"t_min\": 1.0", "\"t_min\": 3.0");
        let err = load_config(&text).unwrap_err();
        assert!(err.to_string().contains("t_min exceeds t_max"), "{err}");
    }

    #[test]
    fn rejects_zero_traffic() {
        let text = HSDPA_LTE.replace("\"arrival_rate\": 0.1", "\"arrival_rate\": 0.0");
        let err = load_config(&text).unwrap_err();
        assert!(err.to_string().contains("no traffic"), "{err}");
    }

    #[test]
    fn rejects_malformed_json() {
        assert!(matches!(
            load_config("{\"systems\": ["),
            Err(crate::Error::Parse(_))
        ));
    }

    #[test]
    fn rejects_bad_shapes_and_gains() {
        let text = HSDPA_LTE.replace("[5.0, 10.0]", "[5.0]");
        assert!(load_config(&text).is_err());
        let text = HSDPA_LTE.replace("\"service_rate\": 0.02", "\"service_rate\": 0.02, \"scheduler_gain\": [1.0, 2.5]");
        let err = load_config(&text).unwrap_err();
        assert!(err.to_string().contains("non-increasing"), "{err}");
        let text = HSDPA_LTE.replace("\"service_rate\": 0.02", "\"service_rate\": 0.02, \"scheduler_gain\": [1.0, 1.5, 1.8]");
        let cfg = load_config(&text).unwrap();
        assert_eq!(cfg.gain(1), 1.0);
        assert_eq!(cfg.gain(3), 1.8);
        assert_eq!(cfg.gain(40), 1.8);
    }

    #[test]
    fn offered_load_rescales_proportionally() {
        let cfg = load_config(HSDPA_LTE).unwrap().with_offered_load(3.0);
        assert!((cfg.offered_load() - 3.0).abs() < 1e-12);
        assert!((cfg.arrival_rate(0) - cfg.arrival_rate(1)).abs() < 1e-15);
    }
}
