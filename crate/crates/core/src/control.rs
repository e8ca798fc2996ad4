//! Choosing the broadcast thresholds that minimize blocking at equilibrium.

use crate::aggregation::AggregationScheme;
use crate::error::Result;
use crate::exec::Exec;
use crate::game::{Game, GameOptions, NashMode};
use crate::rule::Policy;
use crate::state_space::StateSpace;

/// Policy spaces at most this large are searched exhaustively when no mode
/// is forced.
pub const AUTO_EXHAUSTIVE_LIMIT: u128 = 1 << 12;

/// Which equilibrium represents a scheme when several exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionRule {
    #[default]
    HighestUtility,
    WorstBlocking,
}

#[derive(Debug, Clone)]
pub struct ControlOptions {
    pub game: GameOptions,
    /// `None` picks exhaustive search for small policy spaces and best
    /// response otherwise.
    pub nash_mode: Option<NashMode>,
    pub selection: SelectionRule,
}

impl Default for ControlOptions {
    fn default() -> Self {
        ControlOptions {
            game: GameOptions::default(),
            nash_mode: None,
            selection: SelectionRule::HighestUtility,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchemeOutcome {
    pub scheme: AggregationScheme,
    pub mode: NashMode,
    pub equilibria: usize,
    /// Equilibrium picked by the selection rule.
    pub selected: Option<Policy>,
    /// Overall blocking of the selected equilibrium.
    pub blocking: Option<f64>,
    pub utility: Option<f64>,
    /// Blocking of the highest-utility and of the worst-blocking equilibrium.
    pub blocking_best_utility: Option<f64>,
    pub blocking_worst: Option<f64>,
}

impl SchemeOutcome {
    /// Operator objective `1 / b`; infinite when nothing is blocked.
    pub fn acceptance_objective(&self) -> Option<f64> {
        self.blocking.map(|b| 1.0 / b)
    }
}

#[derive(Debug, Clone)]
pub struct ControlResult {
    pub outcomes: Vec<SchemeOutcome>,
    /// Index of the scheme with minimal blocking.
    pub best: Option<usize>,
    /// All schemes whose blocking equals the minimum (within 1e-12).
    pub ties: Vec<usize>,
    pub warnings: Vec<String>,
}

impl ControlResult {
    pub fn best_scheme(&self) -> Option<&AggregationScheme> {
        self.best.map(|i| &self.outcomes[i].scheme)
    }
}

/// Every scheme on a lattice of the given step, `0 <= low <= high <= 1`
/// independently per system.
pub fn threshold_lattice(systems: usize, step: f64) -> Vec<AggregationScheme> {
    let ticks = (1.0 / step).round() as usize;
    let values: Vec<f64> = (0..=ticks)
        .map(|k| ((k as f64 * step) * 1e9).round() / 1e9)
        .filter(|v| *v <= 1.0)
        .collect();
    let pairs: Vec<(f64, f64)> = values
        .iter()
        .flat_map(|&lo| values.iter().filter(move |&&hi| hi >= lo).map(move |&hi| (lo, hi)))
        .collect();
    let mut grid: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
    for _ in 0..systems {
        grid = grid
            .into_iter()
            .flat_map(|prefix| {
                pairs.iter().map(move |&p| {
                    let mut v = prefix.clone();
                    v.push(p);
                    v
                })
            })
            .collect();
    }
    grid.into_iter()
        .map(|t| AggregationScheme::new(t).expect("lattice thresholds are valid"))
        .collect()
}

fn evaluate_scheme(
    space: &StateSpace,
    scheme: &AggregationScheme,
    options: &ControlOptions,
) -> Result<SchemeOutcome> {
    let game_options = GameOptions {
        exec: Exec::Sequential,
        ..options.game.clone()
    };
    let game = Game::new(space, scheme, game_options)?;
    let mode = options.nash_mode.unwrap_or(if game.policy_space().size() <= AUTO_EXHAUSTIVE_LIMIT {
        NashMode::Exhaustive
    } else {
        NashMode::BestResponse
    });
    let search = game.find_nash(mode)?;
    let eq = &search.equilibria;
    let by_utility = eq
        .iter()
        .fold(None, |best: Option<&crate::game::PolicyEvaluation>, e| match best {
            Some(b) if b.global_utility >= e.global_utility => Some(b),
            _ => Some(e),
        });
    let by_blocking = eq
        .iter()
        .fold(None, |worst: Option<&crate::game::PolicyEvaluation>, e| match worst {
            Some(w) if w.overall_blocking >= e.overall_blocking => Some(w),
            _ => Some(e),
        });
    let selected = match options.selection {
        SelectionRule::HighestUtility => by_utility,
        SelectionRule::WorstBlocking => by_blocking,
    };
    Ok(SchemeOutcome {
        scheme: scheme.clone(),
        mode,
        equilibria: eq.len(),
        selected: selected.map(|e| e.policy.clone()),
        blocking: selected.map(|e| e.overall_blocking),
        utility: selected.map(|e| e.global_utility),
        blocking_best_utility: by_utility.map(|e| e.overall_blocking),
        blocking_worst: by_blocking.map(|e| e.overall_blocking),
    })
}

/// Runs the equilibrium search for every scheme and picks the one whose
/// selected equilibrium blocks least. Schemes without a pure equilibrium
/// are kept in the report but excluded from the choice.
pub fn optimize_thresholds(
    space: &StateSpace,
    grid: &[AggregationScheme],
    options: &ControlOptions,
) -> Result<ControlResult> {
    let outcomes = options
        .game
        .exec
        .map(grid, |scheme| evaluate_scheme(space, scheme, options))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut warnings = Vec::new();
    for o in outcomes.iter().filter(|o| o.equilibria == 0) {
        warnings.push(format!("no pure equilibrium found for thresholds {}", o.scheme));
    }
    let min = outcomes
        .iter()
        .filter_map(|o| o.blocking)
        .fold(f64::INFINITY, f64::min);
    let ties: Vec<usize> = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.blocking.is_some_and(|b| b <= min + 1e-12))
        .map(|(i, _)| i)
        .collect();
    Ok(ControlResult {
        best: ties.first().copied(),
        ties,
        outcomes,
        warnings,
    })
}
