//! Generator construction, stationary solve and blocking metrics.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::aggregation::Labeling;
use crate::error::{Error, Result};
use crate::linalg::lu_solve;
use crate::rule::{AdmissionMode, AssignmentRule};
use crate::state_space::StateSpace;

/// Max-norm tolerance on `πQ` after a solve, per unit of the largest exit
/// rate in the chain.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Sparse CTMC generator over the dense state ids of a [`StateSpace`].
#[derive(Debug, Clone)]
pub struct Generator {
    classes: usize,
    row_start: Vec<usize>,
    targets: Vec<u32>,
    rates: Vec<f64>,
    diagonal: Vec<f64>,
    // System receiving a class-n arrival in each state, [id * N + n].
    admitted: Vec<Option<u8>>,
}

/// Builds Q for an assignment rule. Arrivals go to the system the rule
/// prefers, subject to `mode` when that system is saturated; departures of
/// class-`n` users from system `s` occur at rate `M_n^s μ`.
pub fn build_generator(
    space: &StateSpace,
    rule: &AssignmentRule,
    labeling: &Labeling,
    mode: AdmissionMode,
) -> Generator {
    let config = space.config();
    let classes = space.classes();
    let systems = space.systems();
    let mu = config.service_rate;

    let mut row_start = Vec::with_capacity(space.len() + 1);
    let mut targets = Vec::new();
    let mut rates = Vec::new();
    let mut diagonal = Vec::with_capacity(space.len());
    let mut admitted = Vec::with_capacity(space.len() * classes);

    for id in 0..space.len() {
        row_start.push(targets.len());
        let state = space.state(id);
        let mut out = 0.0;
        for n in 0..classes {
            let preferred = rule.preferred_with_label(config, state, labeling.label(id), n);
            let joined = space.route(id, n, preferred, mode);
            admitted.push(joined.map(|s| s as u8));
            let lambda = config.arrival_rate(n);
            if let Some(s) = joined {
                if lambda > 0.0 {
                    let to = space.arrival(id, n, s).expect("routed to a feasible system");
                    targets.push(to as u32);
                    rates.push(lambda);
                    out += lambda;
                }
            }
        }
        for s in 0..systems {
            for n in 0..classes {
                if let Some(to) = space.departure(id, n, s) {
                    let rate = space.count(id, n, s) as f64 * mu;
                    targets.push(to as u32);
                    rates.push(rate);
                    out += rate;
                }
            }
        }
        diagonal.push(-out);
    }
    row_start.push(targets.len());

    Generator {
        classes,
        row_start,
        targets,
        rates,
        diagonal,
        admitted,
    }
}

impl Generator {
    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    /// Off-diagonal `(target, rate)` pairs of row `id`.
    pub fn row(&self, id: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_start[id]..self.row_start[id + 1];
        self.targets[range.clone()]
            .iter()
            .zip(&self.rates[range])
            .map(|(&t, &r)| (t as usize, r))
    }

    pub fn diagonal(&self, id: usize) -> f64 {
        self.diagonal[id]
    }

    /// System joined by a class-`n` arrival in state `id`, if admitted.
    #[inline]
    pub fn admitted(&self, id: usize, n: usize) -> Option<usize> {
        self.admitted[id * self.classes + n].map(|s| s as usize)
    }

    /// Largest total exit rate of any state.
    pub fn max_exit_rate(&self) -> f64 {
        self.diagonal.iter().fold(0.0, |m, d| m.max(-d))
    }

    pub fn row_sum(&self, id: usize) -> f64 {
        self.row(id).map(|(_, r)| r).sum::<f64>() + self.diagonal[id]
    }

    /// All entries including the diagonal, as `(row, col, rate)`.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.rates.len() + self.len());
        for id in 0..self.len() {
            let mut row: Vec<(usize, f64)> = self.row(id).collect();
            row.push((id, self.diagonal[id]));
            row.sort_by_key(|&(c, _)| c);
            out.extend(row.into_iter().map(|(c, r)| (id, c, r)));
        }
        out
    }

    /// Max-norm of `π Q`.
    pub fn residual(&self, pi: &[f64]) -> f64 {
        let mut acc = vec![0.0; self.len()];
        for (id, &p) in pi.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            acc[id] += p * self.diagonal[id];
            for (to, rate) in self.row(id) {
                acc[to] += p * rate;
            }
        }
        acc.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// States reachable from `start`, in increasing id order.
    pub fn reachable_from(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(id) = queue.pop_front() {
            for (to, rate) in self.row(id) {
                if rate > 0.0 && !seen[to] {
                    seen[to] = true;
                    queue.push_back(to);
                }
            }
        }
        (0..self.len()).filter(|&i| seen[i]).collect()
    }
}

/// Stationary distribution over all state ids.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pi: Vec<f64>,
    residual: f64,
}

impl SteadyState {
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn prob(&self, id: usize) -> f64 {
        self.pi[id]
    }

    /// `‖πQ‖∞` measured after the solve.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Stationary mass of each label.
    pub fn label_masses(&self, labeling: &Labeling) -> Vec<f64> {
        let mut mass = vec![0.0; labeling.count()];
        for (id, &p) in self.pi.iter().enumerate() {
            mass[labeling.label(id)] += p;
        }
        mass
    }

    pub(crate) fn from_parts(pi: Vec<f64>, residual: f64) -> Self {
        SteadyState { pi, residual }
    }
}

/// Solves `πQ = 0, Σπ = 1`.
///
/// Every feasible state drains to the empty state, so the states reachable
/// from it form the unique closed class; π is zero elsewhere. The balance
/// equation of the empty state is replaced by the normalization row and the
/// reduced system is solved directly.
pub fn solve_steady_state(gen: &Generator) -> Result<SteadyState> {
    let live = gen.reachable_from(0);
    let size = live.len();
    let mut local = vec![usize::MAX; gen.len()];
    for (i, &id) in live.iter().enumerate() {
        local[id] = i;
    }

    // Column j of Q becomes row j of the system.
    let mut a = DMatrix::<f64>::zeros(size, size);
    for (i, &id) in live.iter().enumerate() {
        a[(i, i)] = gen.diagonal(id);
        for (to, rate) in gen.row(id) {
            let j = local[to];
            debug_assert!(j != usize::MAX, "closed class leaks");
            a[(j, i)] += rate;
        }
    }
    for i in 0..size {
        a[(0, i)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(size);
    b[0] = 1.0;
    let x = lu_solve(a, b, "stationary distribution")?;

    let mut pi = vec![0.0; gen.len()];
    for (i, &id) in live.iter().enumerate() {
        // Round-off can leave tiny negatives on very unlikely states.
        pi[id] = x[i].max(0.0);
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);

    let residual = gen.residual(&pi);
    let tolerance = RESIDUAL_TOLERANCE * gen.max_exit_rate().max(1.0);
    if !(residual <= tolerance) {
        return Err(Error::Residual {
            residual,
            tolerance,
        });
    }
    Ok(SteadyState { pi, residual })
}

/// How the numerator of the per-label blocking ratio is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockingNumerator {
    /// Blocking states inside the label only: a conditional probability.
    #[default]
    LabelRestricted,
    /// All blocking states regardless of label, as the formula is printed.
    Unrestricted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelBlocking {
    /// `b_n(l)`; zero on empty labels.
    pub values: Vec<f64>,
    /// Labels with zero stationary mass.
    pub empty: Vec<bool>,
}

/// Blocking probability of class `n` conditioned on each label.
pub fn blocking_by_label(
    space: &StateSpace,
    labeling: &Labeling,
    ss: &SteadyState,
    n: usize,
    numerator: BlockingNumerator,
) -> LabelBlocking {
    let mass = ss.label_masses(labeling);
    let mut blocked = vec![0.0; labeling.count()];
    let mut blocked_anywhere = 0.0;
    for id in 0..space.len() {
        if space.is_blocking(id, n) {
            blocked[labeling.label(id)] += ss.prob(id);
            blocked_anywhere += ss.prob(id);
        }
    }
    let empty: Vec<bool> = mass.iter().map(|&m| m <= 0.0).collect();
    let values = (0..labeling.count())
        .map(|l| {
            if empty[l] {
                return 0.0;
            }
            let num = match numerator {
                BlockingNumerator::LabelRestricted => blocked[l],
                BlockingNumerator::Unrestricted => blocked_anywhere,
            };
            num / mass[l]
        })
        .collect();
    LabelBlocking { values, empty }
}

/// Stationary probability that a class-`n` arrival finds every system full.
pub fn class_blocking(space: &StateSpace, ss: &SteadyState, n: usize) -> f64 {
    (0..space.len())
        .filter(|&id| space.is_blocking(id, n))
        .map(|id| ss.prob(id))
        .sum()
}

/// Arrival-weighted blocking over all classes.
pub fn overall_blocking(space: &StateSpace, ss: &SteadyState) -> f64 {
    let config = space.config();
    (0..space.classes())
        .map(|n| config.class_weight(n) * class_blocking(space, ss, n))
        .sum::<f64>()
        .min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::AggregationScheme;
    use crate::fixtures::*;
    use crate::rule::{Baseline, Policy};
    use crate::state_space::NetworkState;

    fn erlang() -> (StateSpace, Generator) {
        let space = StateSpace::enumerate(&erlang_fixture()).unwrap();
        let rule = AssignmentRule::Baseline(Baseline::PeakRate);
        let gen = build_generator(&space, &rule, &Labeling::single(&space), AdmissionMode::Redirect);
        (space, gen)
    }

    #[test]
    fn erlang_generator_is_birth_death() {
        let (_, gen) = erlang();
        let q = gen.triplets();
        assert_eq!(
            q,
            vec![
                (0, 0, -1.0),
                (0, 1, 1.0),
                (1, 0, 1.0),
                (1, 1, -2.0),
                (1, 2, 1.0),
                (2, 1, 2.0),
                (2, 2, -2.0),
            ]
        );
        for id in 0..gen.len() {
            assert_eq!(gen.row_sum(id), 0.0);
        }
    }

    #[test]
    fn erlang_stationary_distribution() {
        let (space, gen) = erlang();
        let ss = solve_steady_state(&gen).unwrap();
        for (got, want) in ss.pi().iter().zip([0.4, 0.4, 0.2]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!(ss.residual() <= 1e-10);
        let b = blocking_by_label(&space, &Labeling::single(&space), &ss, 0, BlockingNumerator::LabelRestricted);
        assert!((b.values[0] - 0.2).abs() < 1e-12);
        assert!((overall_blocking(&space, &ss) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn light_traffic_concentrates_on_empty_state() {
        let space = StateSpace::enumerate(&single(2.0, 1.0, 2.0, 1e-9, 1.0)).unwrap();
        let rule = AssignmentRule::Baseline(Baseline::PeakRate);
        let gen = build_generator(&space, &rule, &Labeling::single(&space), AdmissionMode::Redirect);
        let ss = solve_steady_state(&gen).unwrap();
        assert!((ss.prob(0) - 1.0).abs() < 1e-8);
        assert!(overall_blocking(&space, &ss) < 1e-16);
    }

    #[test]
    fn saturated_preference_is_redirected() {
        let cfg = twin_systems(1, 2.0);
        let space = StateSpace::enumerate(&cfg).unwrap();
        let labeling = Labeling::single(&space);
        let rule = AssignmentRule::Policy(Policy::constant(1, 1, 0));
        let gen = build_generator(&space, &rule, &labeling, AdmissionMode::Redirect);
        let full_first = space.id_of(&NetworkState::from_counts(1, vec![2, 0])).unwrap();
        let target = space.id_of(&NetworkState::from_counts(1, vec![2, 1])).unwrap();
        assert!(gen.row(full_first).any(|(to, r)| to == target && r == 1.0));
        assert_eq!(gen.admitted(full_first, 0), Some(1));

        let strict = build_generator(&space, &rule, &labeling, AdmissionMode::Strict);
        assert!(!strict.row(full_first).any(|(to, _)| to == target));
        assert_eq!(strict.admitted(full_first, 0), None);

        let both_full = space.id_of(&NetworkState::from_counts(1, vec![2, 2])).unwrap();
        assert_eq!(gen.admitted(both_full, 0), None);
        assert!(gen.row(both_full).all(|(to, _)| space.state(to).total() < 4));
    }

    #[test]
    fn strict_mode_leaves_unreached_states_at_zero() {
        let cfg = twin_systems(1, 2.0);
        let space = StateSpace::enumerate(&cfg).unwrap();
        let labeling = Labeling::single(&space);
        let rule = AssignmentRule::Policy(Policy::constant(1, 1, 0));
        let gen = build_generator(&space, &rule, &labeling, AdmissionMode::Strict);
        let ss = solve_steady_state(&gen).unwrap();
        for (id, m) in space.states().iter().enumerate() {
            if m.get(0, 1) > 0 {
                assert_eq!(ss.prob(id), 0.0);
            }
        }
        // Only system 1 is used: an Erlang loss system of size 2.
        let zero = space.id_of(&NetworkState::from_counts(1, vec![0, 0])).unwrap();
        assert!((ss.prob(zero) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn independent_systems_give_product_form() {
        // Class 1 only uses system 1, class 2 only system 2.
        let mut cfg = twin_systems(2, 2.0);
        cfg.classes[1].arrival_rate = 0.5;
        let space = StateSpace::enumerate(&cfg).unwrap();
        let rule = AssignmentRule::Policy(Policy::from_choices(2, 1, vec![0, 1]).unwrap());
        let gen = build_generator(&space, &rule, &Labeling::single(&space), AdmissionMode::Strict);
        let ss = solve_steady_state(&gen).unwrap();
        let marginal = |rho: f64| {
            let w = [1.0, rho, rho * rho / 2.0];
            let z: f64 = w.iter().sum();
            w.map(|x| x / z)
        };
        let (p1, p2) = (marginal(1.0), marginal(0.5));
        for (id, m) in space.states().iter().enumerate() {
            let expected = if m.get(1, 0) == 0 && m.get(0, 1) == 0 {
                p1[m.get(0, 0) as usize] * p2[m.get(1, 1) as usize]
            } else {
                0.0
            };
            assert!((ss.prob(id) - expected).abs() < 1e-10, "{m}");
        }
    }

    #[test]
    fn empty_labels_are_flagged() {
        let cfg = erlang_fixture();
        let space = StateSpace::enumerate(&cfg).unwrap();
        // (0.6, 0.9): loads 0, 0.5 -> Low, load 1 -> High; Medium holds nothing.
        let scheme = AggregationScheme::uniform(1, 0.6, 0.9).unwrap();
        let labeling = Labeling::from_scheme(&space, &scheme);
        let rule = AssignmentRule::Policy(Policy::constant(1, 3, 0));
        let gen = build_generator(&space, &rule, &labeling, AdmissionMode::Redirect);
        let ss = solve_steady_state(&gen).unwrap();
        let b = blocking_by_label(&space, &labeling, &ss, 0, BlockingNumerator::LabelRestricted);
        assert_eq!(b.empty, vec![false, true, false]);
        assert_eq!(b.values[0], 0.0);
        assert_eq!(b.values[1], 0.0);
        assert!((b.values[2] - 1.0).abs() < 1e-12);
        let verbatim = blocking_by_label(&space, &labeling, &ss, 0, BlockingNumerator::Unrestricted);
        assert!((verbatim.values[0] - 0.2 / 0.8).abs() < 1e-12);
    }
}
