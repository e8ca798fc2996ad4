//! Traffic sweeps: the same analyses repeated over a range of offered loads.

use std::str::FromStr;

use crate::aggregation::AggregationScheme;
use crate::config::NetworkConfig;
use crate::control::{optimize_thresholds, ControlOptions, ControlResult, SelectionRule, AUTO_EXHAUSTIVE_LIMIT};
use crate::error::{invalid, Error, Result};
use crate::game::{evaluate_baseline, BaselineReport, Game, NashMode, OptimalMethod, PolicyEvaluation};
use crate::report::{num, opt, Table};
use crate::rule::{Baseline, Policy};
use crate::state_space::StateSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Analysis {
    Nash,
    Optimal,
    Baselines,
    Control,
}

impl FromStr for Analysis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "nash" => Ok(Analysis::Nash),
            "optimal" => Ok(Analysis::Optimal),
            "baselines" | "baseline" => Ok(Analysis::Baselines),
            "control" => Ok(Analysis::Control),
            other => Err(invalid(format!(
                "unknown analysis {other:?} (expected nash, optimal, baselines or control)"
            ))),
        }
    }
}

/// Comma-separated analyses, duplicates removed, in canonical order.
pub fn parse_analyses(list: &str) -> Result<Vec<Analysis>> {
    let mut out = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Analysis>>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(invalid("no analysis selected"));
    }
    Ok(out)
}

/// `A:B:STEP` in Erlangs, both ends included.
pub fn parse_traffic(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || invalid(format!("traffic range {spec:?} is not of the form A:B:STEP"));
    let [a, b, step] = parts.as_slice() else {
        return Err(bad());
    };
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let (a, b, step) = (parse(a)?, parse(b)?, parse(step)?);
    if !(a > 0.0 && b >= a && step > 0.0 && b.is_finite()) {
        return Err(invalid(format!(
            "traffic range {spec:?} needs 0 < A <= B and STEP > 0"
        )));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| ((a + k as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

/// Threshold schemes compared by default: the broadcast thresholds of the
/// configuration, a coarser and a finer pair, and the degenerate scheme in
/// which every non-empty system reads High.
pub fn comparison_grid(config: &NetworkConfig) -> Vec<AggregationScheme> {
    let systems = config.num_systems();
    let mut grid = vec![AggregationScheme::from_config(config)];
    for (lo, hi) in [(0.1, 0.4), (0.5, 0.9), (0.0, 0.0)] {
        let s = AggregationScheme::uniform(systems, lo, hi).expect("valid thresholds");
        if !grid.contains(&s) {
            grid.push(s);
        }
    }
    grid
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub traffic: Vec<f64>,
    pub analyses: Vec<Analysis>,
    /// Schemes for the control analysis.
    pub grid: Vec<AggregationScheme>,
    pub options: ControlOptions,
}

#[derive(Debug, Clone)]
pub struct NashPoint {
    pub mode: NashMode,
    pub equilibria: usize,
    /// Equilibrium chosen by the selection rule.
    pub selected: Option<Policy>,
    pub utility: Option<f64>,
    pub blocking: Option<f64>,
    pub min_utility: Option<f64>,
    pub max_utility: Option<f64>,
    /// Every equilibrium passed the independent re-check.
    pub certified: bool,
    pub max_certified_regret: f64,
}

#[derive(Debug, Clone)]
pub struct OptimalPoint {
    pub policy: Policy,
    pub utility: f64,
    pub blocking: f64,
    pub method: OptimalMethod,
    pub ties: usize,
}

#[derive(Debug, Clone)]
pub struct BaselinePoint {
    pub utility: f64,
    pub blocking: f64,
}

impl From<&BaselineReport> for BaselinePoint {
    fn from(r: &BaselineReport) -> Self {
        BaselinePoint {
            utility: r.global_utility,
            blocking: r.overall_blocking,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub erlangs: f64,
    pub states: usize,
    pub nash: Option<NashPoint>,
    pub optimal: Option<OptimalPoint>,
    pub peak: Option<BaselinePoint>,
    pub instantaneous: Option<BaselinePoint>,
    pub control: Option<ControlResult>,
}

fn select(eq: &[PolicyEvaluation], rule: SelectionRule) -> Option<&PolicyEvaluation> {
    // Folds keep the lexicographically first of equal candidates.
    eq.iter().fold(None, |best: Option<&PolicyEvaluation>, e| match (best, rule) {
        (Some(b), SelectionRule::HighestUtility) if b.global_utility >= e.global_utility => Some(b),
        (Some(b), SelectionRule::WorstBlocking) if b.overall_blocking >= e.overall_blocking => Some(b),
        _ => Some(e),
    })
}

/// Equilibria of the configuration's own scheme, each re-verified.
pub fn nash_point(space: &StateSpace, options: &ControlOptions) -> Result<NashPoint> {
    let scheme = AggregationScheme::from_config(space.config());
    let game = Game::new(space, &scheme, options.game.clone())?;
    let mode = options.nash_mode.unwrap_or(if game.policy_space().size() <= AUTO_EXHAUSTIVE_LIMIT {
        NashMode::Exhaustive
    } else {
        NashMode::BestResponse
    });
    let search = game.find_nash(mode)?;
    let eq = &search.equilibria;
    let mut certified = true;
    let mut max_regret: f64 = 0.0;
    for e in eq {
        let cert = game.certify(&e.policy)?;
        certified &= cert.holds;
        max_regret = max_regret.max(cert.max_regret);
    }
    let chosen = select(eq, options.selection);
    let utilities = eq.iter().map(|e| e.global_utility);
    Ok(NashPoint {
        mode,
        equilibria: eq.len(),
        selected: chosen.map(|e| e.policy.clone()),
        utility: chosen.map(|e| e.global_utility),
        blocking: chosen.map(|e| e.overall_blocking),
        min_utility: utilities.clone().reduce(f64::min),
        max_utility: utilities.reduce(f64::max),
        certified,
        max_certified_regret: max_regret,
    })
}

pub fn run_point(config: &NetworkConfig, erlangs: f64, spec: &SweepSpec) -> Result<SweepPoint> {
    let cfg = config.with_offered_load(erlangs);
    let space = StateSpace::enumerate(&cfg)?;
    let wants = |a| spec.analyses.contains(&a);
    let options = &spec.options;
    let nash = wants(Analysis::Nash).then(|| nash_point(&space, options)).transpose()?;
    let optimal = if wants(Analysis::Optimal) {
        let game = Game::new(&space, &AggregationScheme::from_config(&cfg), options.game.clone())?;
        let o = game.optimal_policy()?;
        Some(OptimalPoint {
            policy: o.best.policy.clone(),
            utility: o.best.global_utility,
            blocking: o.best.overall_blocking,
            method: o.method,
            ties: o.ties.len(),
        })
    } else {
        None
    };
    let (peak, instantaneous) = if wants(Analysis::Baselines) {
        let p = evaluate_baseline(&space, Baseline::PeakRate, &options.game)?;
        let i = evaluate_baseline(&space, Baseline::InstantaneousRate, &options.game)?;
        (Some(BaselinePoint::from(&p)), Some(BaselinePoint::from(&i)))
    } else {
        (None, None)
    };
    let control = wants(Analysis::Control)
        .then(|| optimize_thresholds(&space, &spec.grid, options))
        .transpose()?;
    Ok(SweepPoint {
        erlangs,
        states: space.len(),
        nash,
        optimal,
        peak,
        instantaneous,
        control,
    })
}

/// Runs every traffic point, in parallel when the executor allows it.
/// Results come back in traffic order and do not depend on the executor.
pub fn run_sweep(config: &NetworkConfig, spec: &SweepSpec) -> Result<Vec<SweepPoint>> {
    if spec.traffic.is_empty() {
        return Err(invalid("empty traffic range"));
    }
    if spec.analyses.contains(&Analysis::Control) && spec.grid.is_empty() {
        return Err(invalid("control analysis needs at least one threshold scheme"));
    }
    spec.options
        .game
        .exec
        .map(&spec.traffic, |&e| run_point(config, e, spec))
        .into_iter()
        .collect()
}

/// Global utility and blocking against traffic, one column group per
/// approach.
pub fn utility_table(points: &[SweepPoint]) -> Table {
    let mut t = Table::new(&[
        "erlangs",
        "states",
        "nash_mode",
        "equilibria",
        "nash_utility",
        "nash_blocking",
        "nash_utility_min",
        "nash_utility_max",
        "nash_policy",
        "certified",
        "optimal_utility",
        "optimal_blocking",
        "peak_rate_utility",
        "peak_rate_blocking",
        "instantaneous_rate_utility",
        "instantaneous_rate_blocking",
    ]);
    for p in points {
        let n = p.nash.as_ref();
        let o = p.optimal.as_ref();
        t.push(vec![
            num(p.erlangs),
            p.states.to_string(),
            n.map(|n| mode_name(n.mode).to_string()).unwrap_or_default(),
            n.map(|n| n.equilibria.to_string()).unwrap_or_default(),
            opt(n.and_then(|n| n.utility)),
            opt(n.and_then(|n| n.blocking)),
            opt(n.and_then(|n| n.min_utility)),
            opt(n.and_then(|n| n.max_utility)),
            n.and_then(|n| n.selected.as_ref()).map(|p| p.to_string()).unwrap_or_default(),
            n.filter(|n| n.equilibria > 0)
                .map(|n| n.certified.to_string())
                .unwrap_or_default(),
            opt(o.map(|o| o.utility)),
            opt(o.map(|o| o.blocking)),
            opt(p.peak.as_ref().map(|b| b.utility)),
            opt(p.peak.as_ref().map(|b| b.blocking)),
            opt(p.instantaneous.as_ref().map(|b| b.utility)),
            opt(p.instantaneous.as_ref().map(|b| b.blocking)),
        ])
        .expect("row width matches");
    }
    t
}

/// Equilibrium blocking against traffic, one row per (traffic, scheme).
pub fn blocking_table(points: &[SweepPoint]) -> Table {
    let mut t = Table::new(&[
        "erlangs",
        "thresholds",
        "mode",
        "equilibria",
        "blocking",
        "utility",
        "blocking_best_utility",
        "blocking_worst",
        "selected_policy",
        "best",
    ]);
    for p in points {
        let Some(c) = &p.control else { continue };
        for (i, o) in c.outcomes.iter().enumerate() {
            t.push(vec![
                num(p.erlangs),
                o.scheme.to_string(),
                mode_name(o.mode).to_string(),
                o.equilibria.to_string(),
                opt(o.blocking),
                opt(o.utility),
                opt(o.blocking_best_utility),
                opt(o.blocking_worst),
                o.selected.as_ref().map(|p| p.to_string()).unwrap_or_default(),
                c.ties.contains(&i).to_string(),
            ])
            .expect("row width matches");
        }
    }
    t
}

pub fn mode_name(mode: NashMode) -> &'static str {
    match mode {
        NashMode::Exhaustive => "exhaustive",
        NashMode::BestResponse => "best_response",
    }
}
