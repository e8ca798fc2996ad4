//! Discrete-event simulation of the association system.
//!
//! The simulator works on raw occupancy vectors and shares only the model
//! primitives (throughput, admission test, assignment rule) with the
//! analytic side. Estimates use batch means: the horizon is cut into equal
//! event-count batches and a Student-t interval is formed over batch values.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::aggregation::{AggregationScheme, Labeling};
use crate::config::NetworkConfig;
use crate::ctmc::{build_generator, class_blocking, solve_steady_state};
use crate::error::{invalid, Result};
use crate::exec::Exec;
use crate::rule::{AdmissionMode, AssignmentRule};
use crate::state_space::{is_feasible, throughput, NetworkState, StateSpace};
use crate::transient::UtilityTable;

pub const MIN_BATCHES: usize = 20;
/// Horizons shorter than this give unreliable intervals.
pub const RECOMMENDED_HORIZON: u64 = 100_000;

#[derive(Debug, Clone)]
pub struct SimOptions {
    /// Number of arrival and departure events recorded.
    pub horizon: u64,
    pub seed: u64,
    pub batches: usize,
    pub confidence: f64,
    pub admission: AdmissionMode,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            horizon: 1_000_000,
            seed: 7,
            batches: 30,
            confidence: 0.99,
            admission: AdmissionMode::Redirect,
        }
    }
}

/// Batch-means point estimate with a two-sided confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
    pub batches: usize,
}

impl Estimate {
    fn from_batches(values: &[f64], confidence: f64) -> Option<Self> {
        let k = values.len();
        if k < 2 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / k as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (k - 1) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.5 + confidence / 2.0);
        Some(Estimate {
            mean,
            half_width: t * (var / k as f64).sqrt(),
            batches: k,
        })
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower() <= value && value <= self.upper()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub arrivals: u64,
    pub admitted: u64,
    /// Arrivals that found no system with room.
    pub blocked: u64,
    /// Arrivals lost while some other system had room (strict admission).
    pub dropped: u64,
    pub departures: u64,
}

#[derive(Debug, Clone)]
pub struct SimReport {
    pub seed: u64,
    pub horizon: u64,
    pub batches: usize,
    pub events: EventCounts,
    /// Time-average occupancy of every visited state, lexicographic order.
    pub states: Vec<(NetworkState, Estimate)>,
    /// Per class, fraction of arrivals that found every system full.
    pub blocking: Vec<Option<Estimate>>,
    /// Mean volume (megabits) delivered per call, `[s * N + n]`.
    pub volume: Vec<Option<Estimate>>,
    /// Mean volume keyed by `(class, system, state found on arrival)`.
    pub entry_volume: HashMap<(usize, usize, NetworkState), Estimate>,
}

impl SimReport {
    pub fn state_probability(&self, state: &NetworkState) -> Option<&Estimate> {
        self.states
            .binary_search_by(|(m, _)| m.cmp(state))
            .ok()
            .map(|i| &self.states[i].1)
    }

    pub fn volume(&self, classes: usize, n: usize, s: usize) -> Option<&Estimate> {
        self.volume[s * classes + n].as_ref()
    }
}

struct User {
    class: usize,
    system: usize,
    volume: f64,
    // Batch of admission and entry key; None for users admitted after the
    // horizon, which only keep the dynamics running.
    tracked: Option<(usize, usize)>,
}

#[derive(Default, Clone)]
struct Sum {
    total: f64,
    count: u64,
}

impl Sum {
    fn add(&mut self, v: f64) {
        self.total += v;
        self.count += 1;
    }
}

/// Simulates `options.horizon` events starting from the empty network.
///
/// Calls still active at the horizon are followed to completion (without
/// recording anything else) so that long calls are not censored.
pub fn simulate(
    config: &NetworkConfig,
    rule: &AssignmentRule,
    scheme: &AggregationScheme,
    options: &SimOptions,
) -> Result<SimReport> {
    config.validate()?;
    if options.batches < MIN_BATCHES {
        return Err(invalid(format!("at least {MIN_BATCHES} batches are required")));
    }
    if options.horizon < options.batches as u64 {
        return Err(invalid("horizon shorter than the number of batches"));
    }
    let classes = config.num_classes();
    let systems = config.num_systems();
    let slots = classes * systems;
    let batches = options.batches;
    let mu = config.service_rate;
    let lambda_total = config.total_arrival_rate();

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut state = NetworkState::empty(classes, systems);
    let mut users: Vec<User> = Vec::new();
    let mut counts = EventCounts::default();

    let mut state_ids: HashMap<NetworkState, usize> = HashMap::new();
    let mut state_list: Vec<NetworkState> = Vec::new();
    let mut state_time: Vec<Vec<f64>> = vec![Vec::new(); batches];
    let mut batch_time = vec![0.0; batches];
    let mut arrivals = vec![vec![0u64; classes]; batches];
    let mut blocked = vec![vec![0u64; classes]; batches];
    let mut volume = vec![vec![Sum::default(); slots]; batches];
    let mut entry_ids: HashMap<(usize, usize, NetworkState), usize> = HashMap::new();
    let mut entry_keys: Vec<(usize, usize, NetworkState)> = Vec::new();
    let mut entry_volume: Vec<Vec<Sum>> = vec![Vec::new(); batches];
    let mut live_tracked = 0usize;

    let mut event = 0u64;
    let mut rates = vec![0.0; slots];
    loop {
        let recording = event < options.horizon;
        if !recording && live_tracked == 0 {
            break;
        }
        let batch = if recording {
            (event as u128 * batches as u128 / options.horizon as u128) as usize
        } else {
            batches - 1
        };

        let total_rate = lambda_total + users.len() as f64 * mu;
        let dt = Exp::new(total_rate).expect("positive rate").sample(&mut rng);

        for s in 0..systems {
            for n in 0..classes {
                if state.get(n, s) > 0 {
                    rates[s * classes + n] = throughput(config, &state, n, s);
                }
            }
        }
        for u in &mut users {
            u.volume += rates[u.system * classes + u.class] * dt;
        }
        if recording {
            let sid = *state_ids.entry(state.clone()).or_insert_with(|| {
                state_list.push(state.clone());
                state_list.len() - 1
            });
            let row = &mut state_time[batch];
            if row.len() <= sid {
                row.resize(sid + 1, 0.0);
            }
            row[sid] += dt;
            batch_time[batch] += dt;
        }

        let pick = rng.random::<f64>() * total_rate;
        if pick < lambda_total {
            let mut acc = 0.0;
            let mut n = classes - 1;
            for c in 0..classes {
                acc += config.arrival_rate(c);
                if pick < acc {
                    n = c;
                    break;
                }
            }
            let room: Vec<bool> = (0..systems)
                .map(|s| is_feasible(config, &state.with_arrival(n, s)))
                .collect();
            let preferred = rule.preferred_system(config, scheme, &state, n);
            let joined = if room[preferred] {
                Some(preferred)
            } else {
                match options.admission {
                    AdmissionMode::Redirect => (0..systems).find(|&s| s != preferred && room[s]),
                    AdmissionMode::Strict => None,
                }
            };
            if recording {
                counts.arrivals += 1;
                arrivals[batch][n] += 1;
                if !room.iter().any(|&r| r) {
                    counts.blocked += 1;
                    blocked[batch][n] += 1;
                } else if joined.is_none() {
                    counts.dropped += 1;
                }
            }
            if let Some(s) = joined {
                let tracked = recording.then(|| {
                    let key = (n, s, state.clone());
                    let eid = *entry_ids.entry(key.clone()).or_insert_with(|| {
                        entry_keys.push(key);
                        entry_keys.len() - 1
                    });
                    live_tracked += 1;
                    counts.admitted += 1;
                    (batch, eid)
                });
                users.push(User {
                    class: n,
                    system: s,
                    volume: 0.0,
                    tracked,
                });
                state = state.with_arrival(n, s);
            }
        } else {
            let idx = rng.random_range(0..users.len());
            let user = users.swap_remove(idx);
            state = state
                .with_departure(user.class, user.system)
                .expect("departing user is present");
            if recording {
                counts.departures += 1;
            }
            if let Some((b, eid)) = user.tracked {
                live_tracked -= 1;
                volume[b][user.system * classes + user.class].add(user.volume);
                let row = &mut entry_volume[b];
                if row.len() <= eid {
                    row.resize(eid + 1, Sum::default());
                }
                row[eid].add(user.volume);
            }
        }
        event += 1;
    }

    let conf = options.confidence;
    let mut states: Vec<(NetworkState, Estimate)> = state_list
        .iter()
        .enumerate()
        .filter_map(|(sid, m)| {
            let per_batch: Vec<f64> = (0..batches)
                .map(|b| state_time[b].get(sid).copied().unwrap_or(0.0) / batch_time[b])
                .collect();
            Estimate::from_batches(&per_batch, conf).map(|e| (m.clone(), e))
        })
        .collect();
    states.sort_by(|a, b| a.0.cmp(&b.0));

    let blocking = (0..classes)
        .map(|n| {
            let per_batch: Vec<f64> = (0..batches)
                .filter(|&b| arrivals[b][n] > 0)
                .map(|b| blocked[b][n] as f64 / arrivals[b][n] as f64)
                .collect();
            Estimate::from_batches(&per_batch, conf)
        })
        .collect();

    let mean_of = |sums: &mut dyn Iterator<Item = Option<&Sum>>| -> Option<Estimate> {
        let per_batch: Vec<f64> = sums
            .filter_map(|s| s.filter(|s| s.count > 0).map(|s| s.total / s.count as f64))
            .collect();
        Estimate::from_batches(&per_batch, conf)
    };
    let volume_est = (0..slots)
        .map(|slot| mean_of(&mut (0..batches).map(|b| Some(&volume[b][slot]))))
        .collect();
    let entry_volume = entry_keys
        .iter()
        .enumerate()
        .filter_map(|(eid, key)| {
            mean_of(&mut (0..batches).map(|b| entry_volume[b].get(eid))).map(|e| (key.clone(), e))
        })
        .collect();

    Ok(SimReport {
        seed: options.seed,
        horizon: options.horizon,
        batches,
        events: counts,
        states,
        blocking,
        volume: volume_est,
        entry_volume,
    })
}

/// One analytic quantity against its simulated interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub quantity: String,
    pub analytic: f64,
    pub estimate: Estimate,
}

impl Comparison {
    pub fn inside(&self) -> bool {
        self.estimate.contains(self.analytic)
    }
}

#[derive(Debug, Clone)]
pub struct CrossCheck {
    pub comparisons: Vec<Comparison>,
    /// Analytic mass of states the simulation never visited.
    pub unvisited_mass: f64,
}

impl CrossCheck {
    pub fn misses(&self) -> impl Iterator<Item = &Comparison> {
        self.comparisons.iter().filter(|c| !c.inside())
    }
}

/// Compares a simulation report with the analytic stationary law, blocking
/// and mean volume per call under the same rule.
pub fn cross_check(
    space: &StateSpace,
    rule: &AssignmentRule,
    scheme: &AggregationScheme,
    admission: AdmissionMode,
    report: &SimReport,
) -> Result<CrossCheck> {
    let labeling = Labeling::from_scheme(space, scheme);
    let gen = build_generator(space, rule, &labeling, admission);
    let ss = solve_steady_state(&gen)?;
    let table = UtilityTable::solve(space, &gen, Exec::Sequential)?;
    let classes = space.classes();
    let mut comparisons = Vec::new();
    let mut unvisited_mass = 0.0;

    for (id, state) in space.states().iter().enumerate() {
        match report.state_probability(state) {
            Some(e) => comparisons.push(Comparison {
                quantity: format!("pi{state}"),
                analytic: ss.prob(id),
                estimate: *e,
            }),
            None => unvisited_mass += ss.prob(id),
        }
    }
    for n in 0..classes {
        if let Some(e) = report.blocking[n] {
            comparisons.push(Comparison {
                quantity: format!("blocking class {}", n + 1),
                analytic: class_blocking(space, &ss, n),
                estimate: e,
            });
        }
    }
    // Calls of class n that join system s, weighted by how often they do.
    for s in 0..space.systems() {
        for n in 0..classes {
            let Some(e) = report.volume(classes, n, s) else { continue };
            let (mut flow, mut mass) = (0.0, 0.0);
            for id in 0..space.len() {
                if gen.admitted(id, n) == Some(s) {
                    let w = ss.prob(id);
                    flow += w * table.arrival_utility(space, id, n, s)?;
                    mass += w;
                }
            }
            if mass > 0.0 {
                comparisons.push(Comparison {
                    quantity: format!("volume class {} system {}", n + 1, s + 1),
                    analytic: flow / mass,
                    estimate: *e,
                });
            }
        }
    }
    Ok(CrossCheck {
        comparisons,
        unvisited_mass,
    })
}
