//! Global and individual utilities, optimal policies, Nash equilibria and
//! the two reference association rules.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aggregation::{AggregationScheme, Labeling};
use crate::ctmc::{
    blocking_by_label, build_generator, class_blocking, overall_blocking, solve_steady_state,
    BlockingNumerator, Generator, LabelBlocking, SteadyState,
};
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::linalg::gth_stationary;
use crate::rule::{AdmissionMode, AssignmentRule, Baseline, Policy};
use crate::state_space::StateSpace;
use crate::transient::UtilityTable;

/// Payoff of choosing a system that cannot admit the user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeviationPayoff {
    /// The utility of wherever the network actually places the user, or 0
    /// when it is blocked everywhere.
    #[default]
    Redirect,
    /// Leave such states out of the label average altogether.
    ExcludeInfeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NashMode {
    Exhaustive,
    BestResponse,
}

#[derive(Debug, Clone)]
pub struct GameOptions {
    pub admission: AdmissionMode,
    pub deviation: DeviationPayoff,
    pub blocking: BlockingNumerator,
    /// Equilibrium slack in megabits.
    pub epsilon: f64,
    pub restarts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
    /// Largest policy space searched exhaustively by [`Game::optimal_policy`].
    pub exhaustive_cap: u64,
    /// Fall back to coordinate ascent above the cap instead of failing.
    pub optimal_fallback: bool,
    pub exec: Exec,
}

impl Default for GameOptions {
    fn default() -> Self {
        GameOptions {
            admission: AdmissionMode::Redirect,
            deviation: DeviationPayoff::Redirect,
            blocking: BlockingNumerator::LabelRestricted,
            epsilon: 1e-9,
            restarts: 64,
            seed: 0,
            max_sweeps: 500,
            exhaustive_cap: 1 << 18,
            optimal_fallback: true,
            exec: Exec::default(),
        }
    }
}

/// Everything computed for one policy.
#[derive(Debug, Clone)]
pub struct PolicyEvaluation {
    pub policy: Policy,
    pub steady: SteadyState,
    pub label_mass: Vec<f64>,
    /// Per class, `b_n(l)` over labels.
    pub blocking: Vec<LabelBlocking>,
    pub class_blocking: Vec<f64>,
    pub overall_blocking: f64,
    /// Megabits.
    pub global_utility: f64,
    /// Labels with zero stationary mass.
    pub empty: Vec<bool>,
    systems: usize,
    labels: usize,
    // [(n * L + l) * S + s]; empty when not computed.
    individual: Vec<Option<f64>>,
}

impl PolicyEvaluation {
    /// `U_nl^s`, the payoff of a class-`n` user choosing `s` under label `l`
    /// while everyone else follows the policy. `None` on empty labels.
    pub fn individual(&self, n: usize, l: usize, s: usize) -> Option<f64> {
        self.individual
            .get((n * self.labels + l) * self.systems + s)
            .copied()
            .flatten()
    }

    /// Largest gain any `(n, l)` group could obtain by switching system.
    pub fn max_regret(&self) -> f64 {
        let classes = self.policy.classes();
        let mut worst: f64 = 0.0;
        for n in 0..classes {
            for l in 0..self.labels {
                if self.empty[l] {
                    continue;
                }
                let own = self.individual(n, l, self.policy.get(n, l)).unwrap_or(0.0);
                for s in 0..self.systems {
                    if let Some(u) = self.individual(n, l, s) {
                        worst = worst.max(u - own);
                    }
                }
            }
        }
        worst
    }

    /// No group gains more than `epsilon` by a unilateral switch.
    pub fn is_nash(&self, epsilon: f64) -> bool {
        self.max_regret() <= epsilon
    }
}

/// Global utility of a rule under an information pattern:
/// `Σ_n w_n Σ_l (1 − b_n(l)) Σ_{M ∈ l} u_n^{σ(n,M)}(M) π(M)`, where σ is the
/// system actually joined and blocked arrivals contribute nothing. The inner
/// sum is not normalized by the label mass.
pub fn global_utility(
    space: &StateSpace,
    labeling: &Labeling,
    gen: &Generator,
    steady: &SteadyState,
    blocking: &[LabelBlocking],
    table: &UtilityTable,
) -> f64 {
    let config = space.config();
    let mut total = 0.0;
    for n in 0..space.classes() {
        let mut class_sum = 0.0;
        for id in 0..space.len() {
            let p = steady.prob(id);
            if p == 0.0 {
                continue;
            }
            if let Some(s) = gen.admitted(id, n) {
                let u = table
                    .arrival_utility(space, id, n, s)
                    .expect("admitted system has room");
                class_sum += (1.0 - blocking[n].values[labeling.label(id)]) * u * p;
            }
        }
        total += config.class_weight(n) * class_sum;
    }
    total
}

/// Label-conditional payoffs `U_nl^s` for every class, label and system,
/// indexed `[(n * L + l) * S + s]`.
///
/// The average runs over the states of label `l` in which a class-`n` user
/// can be admitted somewhere. A saturated choice is worth whatever the
/// admission mode makes of it: the redirected system's utility, or zero
/// when the call is lost. Cells with nothing to average are `None`.
pub fn individual_utilities(
    space: &StateSpace,
    labeling: &Labeling,
    steady: &SteadyState,
    table: &UtilityTable,
    admission: AdmissionMode,
    deviation: DeviationPayoff,
) -> Vec<Option<f64>> {
    let classes = space.classes();
    let systems = space.systems();
    let labels = labeling.count();
    let cells = classes * labels * systems;
    let mut num = vec![0.0; cells];
    let mut den = vec![0.0; cells];
    for id in 0..space.len() {
        let p = steady.prob(id);
        if p == 0.0 {
            continue;
        }
        let l = labeling.label(id);
        for n in 0..classes {
            // Arrivals blocked whatever they choose carry no payoff for any
            // choice; they are left out of the average.
            if space.is_blocking(id, n) {
                continue;
            }
            for s in 0..systems {
                let cell = (n * labels + l) * systems + s;
                let value = match deviation {
                    DeviationPayoff::Redirect => space
                        .route(id, n, s, admission)
                        .map(|joined| table.arrival_utility(space, id, n, joined).expect("routed")),
                    DeviationPayoff::ExcludeInfeasible => {
                        if space.arrival(id, n, s).is_none() {
                            continue;
                        }
                        Some(table.arrival_utility(space, id, n, s).expect("feasible"))
                    }
                };
                num[cell] += value.unwrap_or(0.0) * p;
                den[cell] += p;
            }
        }
    }
    num.iter()
        .zip(&den)
        .map(|(&a, &b)| (b > 0.0).then(|| a / b))
        .collect()
}

/// `U_nl^s` for one cell; fails when label `l` carries no stationary mass.
pub fn individual_utility(
    space: &StateSpace,
    labeling: &Labeling,
    steady: &SteadyState,
    table: &UtilityTable,
    admission: AdmissionMode,
    deviation: DeviationPayoff,
    (n, l, s): (usize, usize, usize),
) -> Result<f64> {
    if steady.label_masses(labeling)[l] <= 0.0 {
        return Err(Error::EmptyLabel { label: l + 1 });
    }
    let all = individual_utilities(space, labeling, steady, table, admission, deviation);
    let systems = space.systems();
    // Under ExcludeInfeasible a label where `s` never has room yields no
    // average; report zero payoff.
    Ok(all[(n * labeling.count() + l) * systems + s].unwrap_or(0.0))
}

/// The free entries of canonical policies and their enumeration order.
#[derive(Debug, Clone)]
pub struct PolicySpace {
    classes: usize,
    labels: usize,
    systems: usize,
    free: Vec<(usize, usize)>,
}

impl PolicySpace {
    /// Entries on labels that no state maps to are pinned to system 1.
    pub fn new(classes: usize, systems: usize, labeling: &Labeling) -> Self {
        let empty = labeling.structurally_empty();
        let labels = labeling.count();
        let free = (0..classes)
            .flat_map(|n| (0..labels).map(move |l| (n, l)))
            .filter(|&(_, l)| !empty[l])
            .collect();
        PolicySpace {
            classes,
            labels,
            systems,
            free,
        }
    }

    /// `(class, label)` entries that policies may vary, in lexicographic order.
    pub fn free_slots(&self) -> &[(usize, usize)] {
        &self.free
    }

    pub fn size(&self) -> u128 {
        (self.systems as u128).saturating_pow(self.free.len() as u32)
    }

    /// The `index`-th canonical policy in lexicographic order.
    pub fn policy_at(&self, mut index: u64) -> Policy {
        let mut p = Policy::constant(self.classes, self.labels, 0);
        for &(n, l) in self.free.iter().rev() {
            p.set(n, l, (index % self.systems as u64) as usize);
            index /= self.systems as u64;
        }
        p
    }

    pub fn random<R: Rng>(&self, rng: &mut R) -> Policy {
        let mut p = Policy::constant(self.classes, self.labels, 0);
        for &(n, l) in &self.free {
            p.set(n, l, rng.random_range(0..self.systems));
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimalMethod {
    Exhaustive,
    CoordinateAscent,
}

#[derive(Debug, Clone)]
pub struct OptimalPolicy {
    pub best: PolicyEvaluation,
    /// Every policy whose utility is within epsilon of the best, in
    /// lexicographic order (the best one included).
    pub ties: Vec<Policy>,
    pub evaluated: u64,
    pub method: OptimalMethod,
}

/// One unilateral switch made during best-response iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseStep {
    pub class: usize,
    pub label: usize,
    pub from: usize,
    pub to: usize,
    /// Payoffs of the old and new choice under the policy before the switch.
    pub payoff_from: f64,
    pub payoff_to: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResponseOutcome {
    Converged(Policy),
    Cycle,
    SweepLimit,
}

#[derive(Debug, Clone)]
pub struct ResponseRun {
    pub start: Policy,
    pub outcome: ResponseOutcome,
    pub steps: Vec<ResponseStep>,
}

#[derive(Debug, Clone)]
pub struct NashSearch {
    pub mode: NashMode,
    /// Distinct equilibria in lexicographic policy order.
    pub equilibria: Vec<PolicyEvaluation>,
    pub evaluated: u64,
    pub restarts: usize,
    pub cycles: usize,
}

/// Result of re-checking an equilibrium through independent solvers.
#[derive(Debug, Clone)]
pub struct NashCertificate {
    pub policy: Policy,
    pub holds: bool,
    pub max_regret: f64,
    pub global_utility: f64,
    pub residual: f64,
}

type Cache = Mutex<HashMap<Policy, Arc<PolicyEvaluation>>>;

/// A policy game on one state space and one aggregation scheme.
pub struct Game<'a> {
    space: &'a StateSpace,
    scheme: AggregationScheme,
    labeling: Labeling,
    options: GameOptions,
    policies: PolicySpace,
}

impl<'a> Game<'a> {
    pub fn new(space: &'a StateSpace, scheme: &AggregationScheme, options: GameOptions) -> Result<Self> {
        if scheme.systems() != space.systems() {
            return Err(invalid(format!(
                "aggregation scheme has {} systems, network has {}",
                scheme.systems(),
                space.systems()
            )));
        }
        let labeling = Labeling::from_scheme(space, scheme);
        let policies = PolicySpace::new(space.classes(), space.systems(), &labeling);
        Ok(Game {
            space,
            scheme: scheme.clone(),
            labeling,
            options,
            policies,
        })
    }

    pub fn space(&self) -> &StateSpace {
        self.space
    }

    pub fn scheme(&self) -> &AggregationScheme {
        &self.scheme
    }

    pub fn labeling(&self) -> &Labeling {
        &self.labeling
    }

    pub fn options(&self) -> &GameOptions {
        &self.options
    }

    pub fn policy_space(&self) -> &PolicySpace {
        &self.policies
    }

    fn check_policy(&self, policy: &Policy) -> Result<()> {
        let expected = (self.space.classes(), self.labeling.count());
        if (policy.classes(), policy.labels()) != expected {
            return Err(Error::PolicyShape {
                got: (policy.classes(), policy.labels()),
                expected,
            });
        }
        policy.check(self.space.systems())
    }

    pub fn evaluate(&self, policy: &Policy) -> Result<PolicyEvaluation> {
        self.check_policy(policy)?;
        self.evaluate_with(policy, true, Exec::Sequential)
    }

    fn evaluate_with(&self, policy: &Policy, individual: bool, exec: Exec) -> Result<PolicyEvaluation> {
        let space = self.space;
        let rule = AssignmentRule::Policy(policy.clone());
        let gen = build_generator(space, &rule, &self.labeling, self.options.admission);
        let steady = solve_steady_state(&gen)?;
        let table = UtilityTable::solve(space, &gen, exec)?;
        let blocking: Vec<LabelBlocking> = (0..space.classes())
            .map(|n| blocking_by_label(space, &self.labeling, &steady, n, self.options.blocking))
            .collect();
        let global = global_utility(space, &self.labeling, &gen, &steady, &blocking, &table);
        let individual = if individual {
            individual_utilities(
                space,
                &self.labeling,
                &steady,
                &table,
                self.options.admission,
                self.options.deviation,
            )
        } else {
            Vec::new()
        };
        let label_mass = steady.label_masses(&self.labeling);
        Ok(PolicyEvaluation {
            policy: policy.clone(),
            class_blocking: (0..space.classes())
                .map(|n| class_blocking(space, &steady, n))
                .collect(),
            overall_blocking: overall_blocking(space, &steady),
            global_utility: global,
            empty: label_mass.iter().map(|&m| m <= 0.0).collect(),
            label_mass,
            blocking,
            steady,
            systems: space.systems(),
            labels: self.labeling.count(),
            individual,
        })
    }

    fn exhaustive_size(&self) -> Option<u64> {
        u64::try_from(self.policies.size()).ok()
    }

    /// Policy maximizing the global utility. Exhaustive up to the cap;
    /// beyond it, coordinate ascent from random restarts (or an error when
    /// the fallback is disabled).
    pub fn optimal_policy(&self) -> Result<OptimalPolicy> {
        let size = self.exhaustive_size().filter(|&s| s <= self.options.exhaustive_cap);
        match size {
            Some(size) => self.optimal_exhaustive(size),
            None if self.options.optimal_fallback => self.optimal_ascent(),
            None => Err(Error::SearchCap {
                size: self.policies.size(),
                cap: self.options.exhaustive_cap,
            }),
        }
    }

    fn optimal_exhaustive(&self, size: u64) -> Result<OptimalPolicy> {
        let utilities = self.options.exec.try_map_range(0..size, |i| {
            let p = self.policies.policy_at(i);
            self.evaluate_with(&p, false, Exec::Sequential)
                .map(|e| e.global_utility)
        })?;
        let best_u = utilities.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<Policy> = utilities
            .iter()
            .enumerate()
            .filter(|&(_, &u)| u >= best_u - self.options.epsilon)
            .map(|(i, _)| self.policies.policy_at(i as u64))
            .collect();
        let best = self.evaluate(&ties[0])?;
        Ok(OptimalPolicy {
            best,
            ties,
            evaluated: size,
            method: OptimalMethod::Exhaustive,
        })
    }

    fn optimal_ascent(&self) -> Result<OptimalPolicy> {
        let eps = self.options.epsilon;
        let runs = self.options.exec.map_range(0..self.options.restarts.max(1) as u64, |r| {
            let mut rng = ChaCha8Rng::seed_from_u64(self.options.seed.wrapping_add(r));
            let mut p = self.policies.random(&mut rng);
            let mut u = self.evaluate_with(&p, false, Exec::Sequential)?.global_utility;
            let mut evaluated = 1u64;
            for _ in 0..self.options.max_sweeps {
                let mut improved = false;
                for &(n, l) in self.policies.free_slots() {
                    for s in 0..self.space.systems() {
                        if s == p.get(n, l) {
                            continue;
                        }
                        let mut q = p.clone();
                        q.set(n, l, s);
                        let uq = self.evaluate_with(&q, false, Exec::Sequential)?.global_utility;
                        evaluated += 1;
                        if uq > u + eps {
                            p = q;
                            u = uq;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
            Ok::<_, Error>((p, u, evaluated))
        });
        let mut found: Vec<(Policy, f64)> = Vec::new();
        let mut evaluated = 0;
        for run in runs {
            let (p, u, e) = run?;
            evaluated += e;
            found.push((p, u));
        }
        let best_u = found.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<Policy> = found
            .into_iter()
            .filter(|x| x.1 >= best_u - eps)
            .map(|x| x.0)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let best = self.evaluate(&ties[0])?;
        Ok(OptimalPolicy {
            best,
            ties,
            evaluated,
            method: OptimalMethod::CoordinateAscent,
        })
    }

    /// Pure equilibria of the policy game.
    pub fn find_nash(&self, mode: NashMode) -> Result<NashSearch> {
        match mode {
            NashMode::Exhaustive => self.nash_exhaustive(),
            NashMode::BestResponse => self.nash_best_response(),
        }
    }

    fn nash_exhaustive(&self) -> Result<NashSearch> {
        let size = self.exhaustive_size().ok_or(Error::SearchCap {
            size: self.policies.size(),
            cap: u64::MAX,
        })?;
        let eps = self.options.epsilon;
        let flags = self.options.exec.try_map_range(0..size, |i| {
            let p = self.policies.policy_at(i);
            self.evaluate_with(&p, true, Exec::Sequential)
                .map(|e| e.is_nash(eps))
        })?;
        let equilibria = flags
            .iter()
            .enumerate()
            .filter(|(_, &ok)| ok)
            .map(|(i, _)| self.evaluate(&self.policies.policy_at(i as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(NashSearch {
            mode: NashMode::Exhaustive,
            equilibria,
            evaluated: size,
            restarts: 0,
            cycles: 0,
        })
    }

    fn cached(&self, cache: &Cache, policy: &Policy) -> Result<Arc<PolicyEvaluation>> {
        if let Some(e) = cache.lock().unwrap().get(policy) {
            return Ok(Arc::clone(e));
        }
        let e = Arc::new(self.evaluate_with(policy, true, Exec::Sequential)?);
        cache
            .lock()
            .unwrap()
            .insert(policy.clone(), Arc::clone(&e));
        Ok(e)
    }

    /// Gauss–Seidel best-response iteration from `start`: entries are
    /// visited in lexicographic `(class, label)` order and each is replaced
    /// by a best response to the current policy. Entries on labels with no
    /// stationary mass are reset to system 1.
    pub fn best_response_run(&self, start: Policy) -> Result<ResponseRun> {
        self.check_policy(&start)?;
        let cache = Cache::default();
        self.response_run(start, &cache)
    }

    fn response_run(&self, start: Policy, cache: &Cache) -> Result<ResponseRun> {
        let eps = self.options.epsilon;
        let mut p = start.clone();
        let mut steps = Vec::new();
        let mut seen = HashSet::new();
        for _ in 0..self.options.max_sweeps {
            if !seen.insert(p.clone()) {
                return Ok(ResponseRun {
                    start,
                    outcome: ResponseOutcome::Cycle,
                    steps,
                });
            }
            let mut changed = false;
            for &(n, l) in self.policies.free_slots() {
                let eval = self.cached(cache, &p)?;
                let current = p.get(n, l);
                let payoff = |s: usize| eval.individual(n, l, s).unwrap_or(0.0);
                let target = if eval.empty[l] {
                    0
                } else {
                    let mut best = 0;
                    for s in 1..self.space.systems() {
                        if payoff(s) > payoff(best) {
                            best = s;
                        }
                    }
                    if payoff(current) >= payoff(best) - eps {
                        current
                    } else {
                        best
                    }
                };
                if target != current {
                    steps.push(ResponseStep {
                        class: n,
                        label: l,
                        from: current,
                        to: target,
                        payoff_from: payoff(current),
                        payoff_to: payoff(target),
                    });
                    p.set(n, l, target);
                    changed = true;
                }
            }
            if !changed {
                return Ok(ResponseRun {
                    start,
                    outcome: ResponseOutcome::Converged(p),
                    steps,
                });
            }
        }
        Ok(ResponseRun {
            start,
            outcome: ResponseOutcome::SweepLimit,
            steps,
        })
    }

    fn nash_best_response(&self) -> Result<NashSearch> {
        let cache = Cache::default();
        let restarts = self.options.restarts.max(1);
        let runs = self.options.exec.map_range(0..restarts as u64, |r| {
            let mut rng = ChaCha8Rng::seed_from_u64(self.options.seed.wrapping_add(r));
            let start = self.policies.random(&mut rng);
            self.response_run(start, &cache)
        });
        let mut found = BTreeSet::new();
        let mut cycles = 0;
        for run in runs {
            match run?.outcome {
                ResponseOutcome::Converged(p) => {
                    found.insert(p);
                }
                _ => cycles += 1,
            }
        }
        let mut equilibria = Vec::new();
        for p in found {
            let e = self.cached(&cache, &p)?;
            if e.is_nash(self.options.epsilon) {
                equilibria.push((*e).clone());
            }
        }
        let evaluated = cache.lock().unwrap().len() as u64;
        Ok(NashSearch {
            mode: NashMode::BestResponse,
            equilibria,
            evaluated,
            restarts,
            cycles,
        })
    }

    /// Re-checks the equilibrium condition for `policy` from scratch, using
    /// state reduction for the stationary law and fixed-point iteration for
    /// the volumes, so no factorization or cached table is shared with the
    /// search.
    pub fn certify(&self, policy: &Policy) -> Result<NashCertificate> {
        self.check_policy(policy)?;
        let space = self.space;
        let rule = AssignmentRule::Policy(policy.clone());
        let gen = build_generator(space, &rule, &self.labeling, self.options.admission);
        let steady = stationary_by_reduction(&gen)?;
        let table = UtilityTable::solve_iterative(space, &gen, Exec::Sequential)?;
        let blocking: Vec<LabelBlocking> = (0..space.classes())
            .map(|n| blocking_by_label(space, &self.labeling, &steady, n, self.options.blocking))
            .collect();
        let global = global_utility(space, &self.labeling, &gen, &steady, &blocking, &table);
        let individual = individual_utilities(
            space,
            &self.labeling,
            &steady,
            &table,
            self.options.admission,
            self.options.deviation,
        );
        let mass = steady.label_masses(&self.labeling);
        let systems = space.systems();
        let labels = self.labeling.count();
        let mut max_regret: f64 = 0.0;
        for n in 0..space.classes() {
            for l in (0..labels).filter(|&l| mass[l] > 0.0) {
                let at = |s: usize| individual[(n * labels + l) * systems + s];
                let own = at(policy.get(n, l)).unwrap_or(0.0);
                for s in 0..systems {
                    if let Some(u) = at(s) {
                        max_regret = max_regret.max(u - own);
                    }
                }
            }
        }
        Ok(NashCertificate {
            policy: policy.clone(),
            holds: max_regret <= self.options.epsilon,
            max_regret,
            global_utility: global,
            residual: steady.residual(),
        })
    }
}

/// Stationary law on the closed class of the empty state by GTH reduction.
pub fn stationary_by_reduction(gen: &Generator) -> Result<SteadyState> {
    let live = gen.reachable_from(0);
    let mut local = vec![usize::MAX; gen.len()];
    for (i, &id) in live.iter().enumerate() {
        local[id] = i;
    }
    let mut rates = DMatrix::<f64>::zeros(live.len(), live.len());
    for (i, &id) in live.iter().enumerate() {
        for (to, r) in gen.row(id) {
            rates[(i, local[to])] += r;
        }
    }
    let x = gth_stationary(rates)?;
    let mut pi = vec![0.0; gen.len()];
    for (i, &id) in live.iter().enumerate() {
        pi[id] = x[i];
    }
    let residual = gen.residual(&pi);
    Ok(SteadyState::from_parts(pi, residual))
}

/// Performance of a reference rule through the same chain pipeline.
#[derive(Debug, Clone)]
pub struct BaselineReport {
    pub baseline: Baseline,
    pub steady: SteadyState,
    pub class_blocking: Vec<f64>,
    pub overall_blocking: f64,
    /// Megabits, with the rule's own information pattern as labels: one
    /// label for peak rate, one label per state for instantaneous rate.
    pub global_utility: f64,
}

pub fn evaluate_baseline(space: &StateSpace, which: Baseline, options: &GameOptions) -> Result<BaselineReport> {
    let labeling = match which {
        Baseline::PeakRate => Labeling::single(space),
        Baseline::InstantaneousRate => Labeling::per_state(space),
    };
    let rule = AssignmentRule::Baseline(which);
    let gen = build_generator(space, &rule, &labeling, options.admission);
    let steady = solve_steady_state(&gen)?;
    let table = UtilityTable::solve(space, &gen, options.exec)?;
    let blocking: Vec<LabelBlocking> = (0..space.classes())
        .map(|n| blocking_by_label(space, &labeling, &steady, n, options.blocking))
        .collect();
    let global = global_utility(space, &labeling, &gen, &steady, &blocking, &table);
    Ok(BaselineReport {
        baseline: which,
        class_blocking: (0..space.classes())
            .map(|n| class_blocking(space, &steady, n))
            .collect(),
        overall_blocking: overall_blocking(space, &steady),
        global_utility: global,
        steady,
    })
}
