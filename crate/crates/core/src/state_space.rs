//! Feasible occupancy states, their dense indexing and per-state rates.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use crate::config::{NetworkConfig, SharingScope};
use crate::error::{Error, Result};
use crate::rule::AdmissionMode;

/// Default ceiling on the number of enumerated states.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// Relative slack on the admission comparison, so that boundary states such
/// as two users at exactly `t_min` are not lost to rounding.
const ADMISSION_SLACK: f64 = 1e-12;

/// Occupancy vector, system-major: `M_1^1 .. M_N^1, .., M_1^S .. M_N^S`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetworkState {
    counts: Vec<u32>,
    classes: usize,
}

impl NetworkState {
    pub fn empty(classes: usize, systems: usize) -> Self {
        NetworkState {
            counts: vec![0; classes * systems],
            classes,
        }
    }

    pub fn from_counts(classes: usize, counts: Vec<u32>) -> Self {
        assert!(classes > 0 && counts.len().is_multiple_of(classes));
        NetworkState { counts, classes }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn systems(&self) -> usize {
        self.counts.len() / self.classes
    }

    /// M_n^s, zero-based indices.
    #[inline]
    pub fn get(&self, n: usize, s: usize) -> u32 {
        self.counts[s * self.classes + n]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// Users of any class in system `s`.
    pub fn in_system(&self, s: usize) -> u32 {
        self.counts[s * self.classes..(s + 1) * self.classes]
            .iter()
            .sum()
    }

    /// G_n^s(M): one more class-`n` user in system `s`.
    pub fn with_arrival(&self, n: usize, s: usize) -> Self {
        let mut out = self.clone();
        out.counts[s * self.classes + n] += 1;
        out
    }

    /// D_n^s(M): one fewer class-`n` user in system `s`.
    pub fn with_departure(&self, n: usize, s: usize) -> Option<Self> {
        let idx = s * self.classes + n;
        if self.counts[idx] == 0 {
            return None;
        }
        let mut out = self.clone();
        out.counts[idx] -= 1;
        Some(out)
    }
}

impl fmt::Display for NetworkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Number of users sharing capacity with a class-`n` user of system `s`.
#[inline]
fn sharing_count(config: &NetworkConfig, state: &NetworkState, s: usize) -> u32 {
    match config.sharing_scope {
        SharingScope::NetworkWide => state.total(),
        SharingScope::PerSystem => state.in_system(s),
    }
}

/// Instantaneous throughput (Mbps) of a class-`n` user in system `s`.
///
/// The user is assumed to be counted in `state` already.
pub fn throughput(config: &NetworkConfig, state: &NetworkState, n: usize, s: usize) -> f64 {
    let k = sharing_count(config, state, s).max(1);
    (config.peak_rate(n, s) * config.gain(k) / k as f64).min(config.t_max)
}

/// Whether every user present in `state` receives at least `t_min`.
pub fn is_feasible(config: &NetworkConfig, state: &NetworkState) -> bool {
    let floor = config.t_min * (1.0 - ADMISSION_SLACK);
    (0..config.num_systems()).all(|s| {
        (0..config.num_classes())
            .all(|n| state.get(n, s) == 0 || throughput(config, state, n, s) >= floor)
    })
}

/// The materialized feasible state space with precomputed neighbours.
#[derive(Debug, Clone)]
pub struct StateSpace {
    config: NetworkConfig,
    states: Vec<NetworkState>,
    index: HashMap<NetworkState, usize>,
    // Flattened [id][slot], slot = s * N + n.
    arrivals: Vec<Option<u32>>,
    departures: Vec<Option<u32>>,
    throughputs: Vec<f64>,
}

impl StateSpace {
    pub fn enumerate(config: &NetworkConfig) -> Result<Self> {
        Self::enumerate_with_cap(config, DEFAULT_STATE_CAP)
    }

    /// Breadth-first closure of the empty state under single admissible
    /// arrivals, with ids assigned in lexicographic order of occupancy.
    pub fn enumerate_with_cap(config: &NetworkConfig, cap: usize) -> Result<Self> {
        config.validate()?;
        let classes = config.num_classes();
        let systems = config.num_systems();

        let zero = NetworkState::empty(classes, systems);
        let mut seen: HashSet<NetworkState> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(zero.clone());
        queue.push_back(zero);
        while let Some(state) = queue.pop_front() {
            for s in 0..systems {
                for n in 0..classes {
                    let next = state.with_arrival(n, s);
                    if !seen.contains(&next) && is_feasible(config, &next) {
                        if seen.len() >= cap {
                            return Err(Error::Capacity { cap });
                        }
                        seen.insert(next.clone());
                        queue.push_back(next);
                    }
                }
            }
        }

        let mut states: Vec<NetworkState> = seen.into_iter().collect();
        states.sort();
        let index: HashMap<NetworkState, usize> = states
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();

        let slots = classes * systems;
        let mut arrivals = Vec::with_capacity(states.len() * slots);
        let mut departures = Vec::with_capacity(states.len() * slots);
        let mut throughputs = Vec::with_capacity(states.len() * slots);
        for state in &states {
            for s in 0..systems {
                for n in 0..classes {
                    arrivals.push(index.get(&state.with_arrival(n, s)).map(|&i| i as u32));
                    departures.push(
                        state
                            .with_departure(n, s)
                            .map(|d| index[&d] as u32),
                    );
                    throughputs.push(if state.get(n, s) > 0 {
                        throughput(config, state, n, s)
                    } else {
                        0.0
                    });
                }
            }
        }

        Ok(StateSpace {
            config: config.clone(),
            states,
            index,
            arrivals,
            departures,
            throughputs,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.config.num_classes()
    }

    pub fn systems(&self) -> usize {
        self.config.num_systems()
    }

    pub fn states(&self) -> &[NetworkState] {
        &self.states
    }

    pub fn state(&self, id: usize) -> &NetworkState {
        &self.states[id]
    }

    pub fn id_of(&self, state: &NetworkState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Id of the empty state (always 0 under lexicographic ordering).
    pub fn zero_id(&self) -> usize {
        0
    }

    #[inline]
    fn slot(&self, n: usize, s: usize) -> usize {
        s * self.classes() + n
    }

    /// Id of G_n^s(M) when that state is feasible.
    #[inline]
    pub fn arrival(&self, id: usize, n: usize, s: usize) -> Option<usize> {
        let slots = self.classes() * self.systems();
        self.arrivals[id * slots + self.slot(n, s)].map(|i| i as usize)
    }

    /// Id of D_n^s(M) when M_n^s > 0.
    #[inline]
    pub fn departure(&self, id: usize, n: usize, s: usize) -> Option<usize> {
        let slots = self.classes() * self.systems();
        self.departures[id * slots + self.slot(n, s)].map(|i| i as usize)
    }

    /// Throughput of a class-`n` user in system `s` of state `id`; zero when
    /// no such user is present.
    #[inline]
    pub fn throughput(&self, id: usize, n: usize, s: usize) -> f64 {
        let slots = self.classes() * self.systems();
        self.throughputs[id * slots + self.slot(n, s)]
    }

    #[inline]
    pub fn count(&self, id: usize, n: usize, s: usize) -> u32 {
        self.states[id].get(n, s)
    }

    /// True when no system can admit another class-`n` user.
    pub fn is_blocking(&self, id: usize, n: usize) -> bool {
        (0..self.systems()).all(|s| self.arrival(id, n, s).is_none())
    }

    /// System that actually receives a class-`n` arrival in state `id` whose
    /// preferred system is `preferred`, or `None` when it is turned away.
    ///
    /// Under [`AdmissionMode::Redirect`] a saturated preference falls back to
    /// the lowest-index system that can admit the user.
    pub fn route(
        &self,
        id: usize,
        n: usize,
        preferred: usize,
        mode: AdmissionMode,
    ) -> Option<usize> {
        if self.arrival(id, n, preferred).is_some() {
            return Some(preferred);
        }
        match mode {
            AdmissionMode::Strict => None,
            AdmissionMode::Redirect => (0..self.systems())
                .find(|&s| s != preferred && self.arrival(id, n, s).is_some()),
        }
    }
}
