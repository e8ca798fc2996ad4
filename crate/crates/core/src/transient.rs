//! Expected volume delivered by a tagged user until the end of the call.
//!
//! For a class-`n` user in system `s` the chain is restricted to states with
//! `M_n^s > 0` and an absorbing state is added, entered at rate μ (the
//! tagged call ends). The remaining `(n, s)` departures happen at
//! `(M_n^s − 1) μ`; every other rate, including the diagonal, is the
//! rule's. The volume `I` then solves `Σ_M' q̃(M, M') I(M') = −t_n^s(M)`.

use nalgebra::{DMatrix, DVector};

use crate::ctmc::Generator;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::lu_solve;
use crate::state_space::StateSpace;

/// Absorbing chain following one tagged `(n, s)` user.
#[derive(Debug, Clone)]
pub struct TaggedGenerator {
    class: usize,
    system: usize,
    states: Vec<usize>,
    local: Vec<usize>,
    rows: Vec<Vec<(usize, f64)>>,
    diagonal: Vec<f64>,
    absorption: f64,
}

pub fn build_tagged_generator(space: &StateSpace, gen: &Generator, n: usize, s: usize) -> TaggedGenerator {
    let mu = space.config().service_rate;
    let states: Vec<usize> = (0..space.len()).filter(|&id| space.count(id, n, s) > 0).collect();
    let mut local = vec![usize::MAX; space.len()];
    for (i, &id) in states.iter().enumerate() {
        local[id] = i;
    }
    let mut rows = Vec::with_capacity(states.len());
    let mut diagonal = Vec::with_capacity(states.len());
    for &id in &states {
        let own_departure = space.departure(id, n, s);
        let row: Vec<(usize, f64)> = gen
            .row(id)
            .filter_map(|(to, rate)| {
                let rate = if Some(to) == own_departure { rate - mu } else { rate };
                if rate <= 0.0 {
                    return None;
                }
                debug_assert!(local[to] != usize::MAX, "tagged chain leaves its states");
                Some((local[to], rate))
            })
            .collect();
        rows.push(row);
        diagonal.push(gen.diagonal(id));
    }
    TaggedGenerator {
        class: n,
        system: s,
        states,
        local,
        rows,
        diagonal,
        absorption: mu,
    }
}

impl TaggedGenerator {
    pub fn class(&self) -> usize {
        self.class
    }

    pub fn system(&self) -> usize {
        self.system
    }

    /// Global ids of the transient states, increasing.
    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn local_index(&self, id: usize) -> Option<usize> {
        match self.local.get(id) {
            Some(&i) if i != usize::MAX => Some(i),
            _ => None,
        }
    }

    /// Off-diagonal rates among transient states, local indices.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.diagonal[i]
    }

    /// Rate into the absorbing state from any transient state.
    pub fn absorption(&self) -> f64 {
        self.absorption
    }

    /// Row sum including the absorbing column.
    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, r)| r).sum::<f64>() + self.absorption + self.diagonal[i]
    }
}

/// Expected megabits sent by a tagged `(n, s)` user from each state, by
/// direct solve. Entries for states without such a user are zero.
pub fn solve_volume(space: &StateSpace, gen: &Generator, n: usize, s: usize) -> Result<Vec<f64>> {
    let tagged = build_tagged_generator(space, gen, n, s);
    let size = tagged.states.len();
    let mut out = vec![0.0; space.len()];
    if size == 0 {
        return Ok(out);
    }
    let mut a = DMatrix::<f64>::zeros(size, size);
    let mut b = DVector::<f64>::zeros(size);
    for (i, &id) in tagged.states.iter().enumerate() {
        a[(i, i)] = tagged.diagonal[i];
        for &(j, rate) in &tagged.rows[i] {
            a[(i, j)] += rate;
        }
        b[i] = -space.throughput(id, n, s);
    }
    let x = lu_solve(a, b, &format!("volume of class {} in system {}", n + 1, s + 1))?;
    for (i, &id) in tagged.states.iter().enumerate() {
        out[id] = x[i];
    }
    Ok(out)
}

/// Same quantity by Gauss–Seidel sweeps of the first-step equations
/// `I(M) = [t(M) + Σ_{M'≠M} q̃(M, M') I(M')] / (−q̃(M, M))`.
///
/// Converges because every state is absorbed at rate μ > 0. Used as an
/// independent route when certifying results.
pub fn solve_volume_iterative(space: &StateSpace, gen: &Generator, n: usize, s: usize) -> Result<Vec<f64>> {
    const MAX_SWEEPS: usize = 1_000_000;
    let tagged = build_tagged_generator(space, gen, n, s);
    let size = tagged.states.len();
    let rhs: Vec<f64> = tagged.states.iter().map(|&id| space.throughput(id, n, s)).collect();
    let mut x = vec![0.0; size];
    for _ in 0..MAX_SWEEPS {
        let mut change: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..size {
            let inflow: f64 = tagged.rows[i].iter().map(|&(j, r)| r * x[j]).sum();
            let next = (rhs[i] + inflow) / -tagged.diagonal[i];
            change = change.max((next - x[i]).abs());
            scale = scale.max(next.abs());
            x[i] = next;
        }
        if change <= 1e-15 * scale.max(1.0) {
            let mut out = vec![0.0; space.len()];
            for (i, &id) in tagged.states.iter().enumerate() {
                out[id] = x[i];
            }
            return Ok(out);
        }
    }
    Err(Error::Singular {
        context: format!("volume iteration for class {} in system {} did not settle", n + 1, s + 1),
    })
}

/// Volumes `I_n^s` for every `(n, s)` under one rule.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityTable {
    classes: usize,
    // [s * N + n][id]
    volumes: Vec<Vec<f64>>,
}

impl UtilityTable {
    pub fn solve(space: &StateSpace, gen: &Generator, exec: Exec) -> Result<Self> {
        Self::solve_with(space, gen, exec, solve_volume)
    }

    pub fn solve_iterative(space: &StateSpace, gen: &Generator, exec: Exec) -> Result<Self> {
        Self::solve_with(space, gen, exec, solve_volume_iterative)
    }

    fn solve_with<F>(space: &StateSpace, gen: &Generator, exec: Exec, solver: F) -> Result<Self>
    where
        F: Fn(&StateSpace, &Generator, usize, usize) -> Result<Vec<f64>> + Sync + Send,
    {
        let classes = space.classes();
        let slots = (classes * space.systems()) as u64;
        let volumes = exec.try_map_range(0..slots, |slot| {
            let slot = slot as usize;
            solver(space, gen, slot % classes, slot / classes)
        })?;
        Ok(UtilityTable { classes, volumes })
    }

    /// `I_n^s(M)` for a state holding at least one `(n, s)` user.
    pub fn volume(&self, space: &StateSpace, id: usize, n: usize, s: usize) -> Option<f64> {
        (space.count(id, n, s) > 0).then(|| self.volumes[s * self.classes + n][id])
    }

    /// Raw volume vector for `(n, s)` over all ids.
    pub fn volumes(&self, n: usize, s: usize) -> &[f64] {
        &self.volumes[s * self.classes + n]
    }

    /// `u_n^s(M) = I_n^s(G_n^s(M))`: utility of joining `s` from state `id`.
    pub fn arrival_utility(&self, space: &StateSpace, id: usize, n: usize, s: usize) -> Result<f64> {
        let to = space.arrival(id, n, s).ok_or(Error::InfeasibleTarget {
            class: n + 1,
            system: s + 1,
            state: id,
        })?;
        Ok(self.volumes[s * self.classes + n][to])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::Labeling;
    use crate::ctmc::build_generator;
    use crate::fixtures::*;
    use crate::rule::{AdmissionMode, AssignmentRule, Baseline};

    fn setup(cfg: &crate::NetworkConfig) -> (StateSpace, Generator) {
        let space = StateSpace::enumerate(cfg).unwrap();
        let rule = AssignmentRule::Baseline(Baseline::PeakRate);
        let gen = build_generator(&space, &rule, &Labeling::single(&space), AdmissionMode::Redirect);
        (space, gen)
    }

    #[test]
    fn erlang_tagged_chain() {
        let (space, gen) = setup(&erlang_fixture());
        let t = build_tagged_generator(&space, &gen, 0, 0);
        assert_eq!(t.states(), &[1, 2]);
        // 1 -> 2 at λ = 1, 1 -> own departure removed, 1 -> A at 1.
        assert_eq!(t.row(0), &[(1, 1.0)]);
        // 2 -> 1 at (2 - 1) μ = 1, 2 -> A at 1.
        assert_eq!(t.row(1), &[(0, 1.0)]);
        assert_eq!(t.absorption(), 1.0);
        for i in 0..2 {
            assert_eq!(t.row_sum(i), gen.row_sum(t.states()[i]));
        }
    }

    #[test]
    fn erlang_volumes_match_hand_solution() {
        let (space, gen) = setup(&erlang_fixture());
        let v = solve_volume(&space, &gen, 0, 0).unwrap();
        assert!((v[1] - 5.0 / 3.0).abs() < 1e-12);
        assert!((v[2] - 4.0 / 3.0).abs() < 1e-12);
        let it = solve_volume_iterative(&space, &gen, 0, 0).unwrap();
        assert!((it[1] - v[1]).abs() < 1e-12 && (it[2] - v[2]).abs() < 1e-12);

        let table = UtilityTable::solve(&space, &gen, Exec::Sequential).unwrap();
        assert!((table.arrival_utility(&space, 0, 0, 0).unwrap() - 5.0 / 3.0).abs() < 1e-12);
        assert!((table.arrival_utility(&space, 1, 0, 0).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert!(matches!(
            table.arrival_utility(&space, 2, 0, 0),
            Err(Error::InfeasibleTarget { .. })
        ));
        assert_eq!(table.volume(&space, 0, 0, 0), None);
    }

    #[test]
    fn lone_user_without_arrivals_sends_rate_times_duration() {
        let (space, gen) = setup(&single(2.0, 1.0, 2.0, 0.0 + 1e-300, 0.5));
        let v = solve_volume(&space, &gen, 0, 0).unwrap();
        assert!((v[1] - 2.0 / 0.5).abs() < 1e-9);
    }

    #[test]
    fn single_user_state_has_no_own_departure() {
        let (space, gen) = setup(&small_hetnet());
        for n in 0..2 {
            for s in 0..2 {
                let t = build_tagged_generator(&space, &gen, n, s);
                for (i, &id) in t.states().iter().enumerate() {
                    if space.count(id, n, s) == 1 {
                        let dep = space.departure(id, n, s).unwrap();
                        assert!(t.local_index(dep).is_none());
                    }
                    assert!((t.row_sum(i) - gen.row_sum(id)).abs() < 1e-12);
                }
            }
        }
    }
}
