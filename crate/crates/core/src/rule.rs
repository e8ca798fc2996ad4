//! Association policies and the assignment rules built from them.

use std::fmt;
use std::str::FromStr;

use crate::aggregation::{label_of, AggregationScheme};
use crate::config::{NetworkConfig, SharingScope};
use crate::error::{invalid, Error, Result};
use crate::state_space::NetworkState;

/// What happens to an arrival whose preferred system is saturated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdmissionMode {
    /// The network redirects the user to another system with room.
    #[default]
    Redirect,
    /// The arrival is lost, even if another system has room.
    Strict,
}

/// An N×L table of system choices (zero-based internally).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Policy {
    labels: usize,
    choice: Vec<u8>,
}

impl Policy {
    /// Every class picks `system` under every label.
    pub fn constant(classes: usize, labels: usize, system: usize) -> Self {
        Policy {
            labels,
            choice: vec![system as u8; classes * labels],
        }
    }

    /// Row-major `[class][label]` zero-based system indices.
    pub fn from_choices(classes: usize, labels: usize, choice: Vec<u8>) -> Result<Self> {
        if choice.len() != classes * labels {
            return Err(Error::PolicyShape {
                got: (choice.len() / labels.max(1), labels),
                expected: (classes, labels),
            });
        }
        Ok(Policy { labels, choice })
    }

    pub fn classes(&self) -> usize {
        self.choice.len() / self.labels
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    #[inline]
    pub fn get(&self, n: usize, l: usize) -> usize {
        self.choice[n * self.labels + l] as usize
    }

    pub fn set(&mut self, n: usize, l: usize, system: usize) {
        self.choice[n * self.labels + l] = system as u8;
    }

    pub fn entries(&self) -> &[u8] {
        &self.choice
    }

    /// Checks every entry against the number of systems.
    pub fn check(&self, systems: usize) -> Result<()> {
        match self.choice.iter().find(|&&c| c as usize >= systems) {
            Some(&bad) => Err(Error::PolicyEntry {
                value: bad as usize + 1,
            }),
            None => Ok(()),
        }
    }
}

/// One-based, entries separated by `,` and classes by `;`.
impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, row) in self.choice.chunks(self.labels).enumerate() {
            if n > 0 {
                write!(f, ";")?;
            }
            for (l, c) in row.iter().enumerate() {
                if l > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", c + 1)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let rows: Vec<Vec<u8>> = text
            .trim()
            .split(';')
            .map(|row| {
                row.split(',')
                    .map(|e| match e.trim().parse::<u8>() {
                        Ok(v) if v >= 1 => Ok(v - 1),
                        _ => Err(invalid(format!("bad policy entry {e:?}"))),
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let labels = rows[0].len();
        if rows.iter().any(|r| r.len() != labels) {
            return Err(invalid("policy rows have different lengths"));
        }
        let classes = rows.len();
        Policy::from_choices(classes, labels, rows.concat())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// Join the system with the best peak rate; no load information.
    PeakRate,
    /// Join the system with the best estimated rate given the exact state.
    InstantaneousRate,
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Baseline::PeakRate => "peak_rate",
            Baseline::InstantaneousRate => "instantaneous_rate",
        })
    }
}

/// The decision function deciding which system an arriving user prefers.
#[derive(Debug, Clone, PartialEq)]
pub enum AssignmentRule {
    Policy(Policy),
    Baseline(Baseline),
}

impl AssignmentRule {
    /// Preferred system of a class-`n` arrival, given the broadcast label of
    /// the current state (only consulted by policies).
    pub fn preferred_with_label(
        &self,
        config: &NetworkConfig,
        state: &NetworkState,
        label: usize,
        n: usize,
    ) -> usize {
        match self {
            AssignmentRule::Policy(p) => p.get(n, label),
            AssignmentRule::Baseline(Baseline::PeakRate) => {
                argmax_first((0..config.num_systems()).map(|s| config.peak_rate(n, s)))
            }
            AssignmentRule::Baseline(Baseline::InstantaneousRate) => {
                argmax_first((0..config.num_systems()).map(|s| {
                    let others = match config.sharing_scope {
                        SharingScope::NetworkWide => state.total(),
                        SharingScope::PerSystem => state.in_system(s),
                    };
                    config.peak_rate(n, s) / (1.0 + others as f64)
                }))
            }
        }
    }

    /// Preferred system, computing the label from `scheme` when needed.
    pub fn preferred_system(
        &self,
        config: &NetworkConfig,
        scheme: &AggregationScheme,
        state: &NetworkState,
        n: usize,
    ) -> usize {
        let label = match self {
            AssignmentRule::Policy(_) => label_of(scheme, config, state).index(),
            AssignmentRule::Baseline(_) => 0,
        };
        self.preferred_with_label(config, state, label, n)
    }
}

/// Index of the first maximum.
fn argmax_first(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    best
}
