//! Invariant checks shared by the property tests and the acceptance run.

use super::{swap_classes, swap_systems, MAX_STATES};
use hetassoc::game::PolicySpace;
use hetassoc::transient::solve_volume_iterative;
use hetassoc::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), TestCaseError>;

pub fn space_of(cfg: &NetworkConfig) -> StateSpace {
    cfg.validate().unwrap();
    StateSpace::enumerate_with_cap(cfg, MAX_STATES).unwrap()
}

pub fn random_policy(space: &StateSpace, labeling: &Labeling, seed: u64) -> Policy {
    let ps = PolicySpace::new(space.classes(), space.systems(), labeling);
    ps.random(&mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn rules(space: &StateSpace, scheme: &AggregationScheme, seed: u64) -> Vec<(AssignmentRule, Labeling)> {
    let labeling = Labeling::from_scheme(space, scheme);
    let policy = random_policy(space, &labeling, seed);
    vec![
        (AssignmentRule::Policy(policy), labeling),
        (AssignmentRule::Baseline(Baseline::PeakRate), Labeling::single(space)),
        (AssignmentRule::Baseline(Baseline::InstantaneousRate), Labeling::per_state(space)),
    ]
}

pub fn mode(strict: bool) -> AdmissionMode {
    if strict {
        AdmissionMode::Strict
    } else {
        AdmissionMode::Redirect
    }
}

pub fn sequential() -> GameOptions {
    GameOptions {
        exec: Exec::Sequential,
        ..GameOptions::default()
    }
}

pub fn generator_rows_sum_to_zero(cfg: NetworkConfig, seed: u64, strict: bool) -> Check {
    let space = space_of(&cfg);
    let scheme = AggregationScheme::from_config(&cfg);
    for (rule, labeling) in rules(&space, &scheme, seed) {
        let gen = build_generator(&space, &rule, &labeling, mode(strict));
        for id in 0..gen.len() {
            prop_assert!(gen.row_sum(id).abs() <= 1e-12, "row {} sums to {}", id, gen.row_sum(id));
            prop_assert!(gen.row(id).all(|(_, r)| r > 0.0));
        }
    }
    Ok(())
}

pub fn steady_state_is_a_distribution_with_small_residual(cfg: NetworkConfig, seed: u64, strict: bool) -> Check {
    let space = space_of(&cfg);
    let scheme = AggregationScheme::from_config(&cfg);
    for (rule, labeling) in rules(&space, &scheme, seed) {
        let gen = build_generator(&space, &rule, &labeling, mode(strict));
        let ss = solve_steady_state(&gen).unwrap();
        prop_assert!(ss.residual() <= 1e-10, "residual {}", ss.residual());
        prop_assert!((ss.pi().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(ss.pi().iter().all(|&p| p >= -1e-14));
        let b = overall_blocking(&space, &ss);
        prop_assert!((0.0..=1.0).contains(&b));
    }
    Ok(())
}

pub fn state_space_is_closed_under_departures(cfg: NetworkConfig) -> Check {
    let space = space_of(&cfg);
    prop_assert_eq!(space.state(space.zero_id()).total(), 0);
    for (id, state) in space.states().iter().enumerate() {
        prop_assert!(is_feasible(&cfg, state));
        prop_assert_eq!(space.id_of(state), Some(id));
        for n in 0..space.classes() {
            for s in 0..space.systems() {
                match state.with_departure(n, s) {
                    Some(prev) => {
                        let dep = space.departure(id, n, s);
                        prop_assert!(dep.is_some(), "{} loses a ({}, {}) user outside the space", state, n, s);
                        prop_assert_eq!(space.state(dep.unwrap()), &prev);
                    }
                    None => prop_assert_eq!(space.departure(id, n, s), None),
                }
                let next = state.with_arrival(n, s);
                prop_assert_eq!(space.arrival(id, n, s).is_some(), is_feasible(&cfg, &next));
            }
        }
    }
    Ok(())
}

pub fn every_state_gets_exactly_one_label(cfg: NetworkConfig, seed: u64) -> Check {
    let space = space_of(&cfg);
    let scheme = AggregationScheme::from_config(&cfg);
    let labeling = Labeling::from_scheme(&space, &scheme);
    prop_assert_eq!(labeling.count(), 3usize.pow(space.systems() as u32));
    prop_assert_eq!(labeling.labels().len(), space.len());
    for (id, state) in space.states().iter().enumerate() {
        let l = labeling.label(id);
        prop_assert!(l < labeling.count());
        prop_assert_eq!(label_of(&scheme, &cfg, state).index(), l);
    }
    let policy = random_policy(&space, &labeling, seed);
    let gen = build_generator(&space, &AssignmentRule::Policy(policy), &labeling, AdmissionMode::Redirect);
    let masses = solve_steady_state(&gen).unwrap().label_masses(&labeling);
    prop_assert!((masses.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    let empty = labeling.structurally_empty();
    for (l, m) in masses.iter().enumerate() {
        if empty[l] {
            prop_assert_eq!(*m, 0.0);
        }
    }
    Ok(())
}

pub fn volumes_satisfy_first_step_equations(cfg: NetworkConfig, seed: u64) -> Check {
    let space = space_of(&cfg);
    let scheme = AggregationScheme::from_config(&cfg);
    let mu = cfg.service_rate;
    for (rule, labeling) in rules(&space, &scheme, seed) {
        let gen = build_generator(&space, &rule, &labeling, AdmissionMode::Redirect);
        for n in 0..space.classes() {
            for s in 0..space.systems() {
                let v = solve_volume(&space, &gen, n, s).unwrap();
                let it = solve_volume_iterative(&space, &gen, n, s).unwrap();
                for id in (0..space.len()).filter(|&id| space.count(id, n, s) > 0) {
                    // The tagged call ends at rate μ; the other (n, s)
                    // users leave at (M - 1) μ; every other move is the
                    // chain's own.
                    let own = space.departure(id, n, s);
                    let mut inflow = 0.0;
                    for (to, rate) in gen.row(id) {
                        let rate = if Some(to) == own { rate - mu } else { rate };
                        if space.count(to, n, s) > 0 {
                            inflow += rate * v[to];
                        }
                    }
                    let lhs = -gen.diagonal(id) * v[id];
                    let rhs = space.throughput(id, n, s) + inflow;
                    prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0), "{} vs {}", lhs, rhs);
                    prop_assert!((v[id] - it[id]).abs() <= 1e-9 * v[id].abs().max(1.0));
                    prop_assert!(v[id] > 0.0);
                    // A call never sends more than t_max for its expected duration.
                    prop_assert!(v[id] <= cfg.t_max / mu * (1.0 + 1e-12));
                }
            }
        }
    }
    Ok(())
}

pub fn config_round_trips_through_json(cfg: NetworkConfig) -> Check {
    let back = load_config(&cfg.to_json()).unwrap();
    prop_assert_eq!(back, cfg);
    Ok(())
}

pub fn swapping_systems_relabels_the_game(cfg: NetworkConfig, seed: u64) -> Check {
    let space = space_of(&cfg);
    let swapped_cfg = swap_systems(&cfg);
    let swapped = space_of(&swapped_cfg);
    prop_assert_eq!(space.len(), swapped.len());

    let n_classes = space.classes();
    let mirror = |state: &NetworkState| {
        let mut counts = vec![0u32; state.counts().len()];
        for n in 0..n_classes {
            counts[n] = state.get(n, 1);
            counts[n_classes + n] = state.get(n, 0);
        }
        NetworkState::from_counts(n_classes, counts)
    };
    let mirror_label = |l: usize| (l % 3) * 3 + l / 3;

    let scheme = AggregationScheme::from_config(&cfg);
    let game = Game::new(&space, &scheme, sequential()).unwrap();
    let swapped_game = Game::new(&swapped, &AggregationScheme::from_config(&swapped_cfg), sequential()).unwrap();

    let policy = game.policy_space().random(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut image = Policy::constant(n_classes, 9, 0);
    for n in 0..n_classes {
        for l in 0..9 {
            image.set(n, mirror_label(l), 1 - policy.get(n, l));
        }
    }
    let a = game.evaluate(&policy).unwrap();
    let b = swapped_game.evaluate(&image).unwrap();

    prop_assert!((a.global_utility - b.global_utility).abs() <= 1e-9 * a.global_utility.abs().max(1.0));
    prop_assert!((a.overall_blocking - b.overall_blocking).abs() <= 1e-10);
    for (id, state) in space.states().iter().enumerate() {
        let j = swapped.id_of(&mirror(state)).unwrap();
        prop_assert!((a.steady.prob(id) - b.steady.prob(j)).abs() <= 1e-10);
    }
    for n in 0..n_classes {
        for l in 0..9 {
            for s in 0..2 {
                match (a.individual(n, l, s), b.individual(n, mirror_label(l), 1 - s)) {
                    (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0)),
                    (x, y) => prop_assert!(x.is_none() && y.is_none(), "{:?} vs {:?}", x, y),
                }
            }
        }
    }
    prop_assert!((a.max_regret() - b.max_regret()).abs() <= 1e-9 * a.global_utility.abs().max(1.0));
    Ok(())
}

pub fn swapping_classes_relabels_the_game(cfg: NetworkConfig, seed: u64) -> Check {
    let space = space_of(&cfg);
    let swapped_cfg = swap_classes(&cfg);
    let swapped = space_of(&swapped_cfg);
    prop_assert_eq!(space.len(), swapped.len());
    let scheme = AggregationScheme::from_config(&cfg);
    let labels = scheme.label_count();
    let game = Game::new(&space, &scheme, sequential()).unwrap();
    let swapped_game = Game::new(&swapped, &scheme, sequential()).unwrap();

    let policy = game.policy_space().random(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut image = Policy::constant(2, labels, 0);
    for l in 0..labels {
        image.set(0, l, policy.get(1, l));
        image.set(1, l, policy.get(0, l));
    }
    let a = game.evaluate(&policy).unwrap();
    let b = swapped_game.evaluate(&image).unwrap();
    prop_assert!((a.global_utility - b.global_utility).abs() <= 1e-9 * a.global_utility.abs().max(1.0));
    prop_assert!((a.overall_blocking - b.overall_blocking).abs() <= 1e-10);
    prop_assert!((a.class_blocking[0] - b.class_blocking[1]).abs() <= 1e-10);
    prop_assert_eq!(a.is_nash(1e-9), b.is_nash(1e-9));
    Ok(())
}

/// Every best-response equilibrium is one of the exhaustive ones, and best
/// response finds at least one whenever one exists.
pub fn modes_agree(game: &Game) -> Check {
    let set = |s: &NashSearch| s.equilibria.iter().map(|e| e.policy.clone()).collect::<std::collections::BTreeSet<_>>();
    let all = set(&game.find_nash(NashMode::Exhaustive).unwrap());
    let found = set(&game.find_nash(NashMode::BestResponse).unwrap());
    prop_assert!(found.is_subset(&all), "best response returned a non-equilibrium");
    prop_assert_eq!(all.is_empty(), found.is_empty(), "{} exhaustive vs {} found", all.len(), found.len());
    Ok(())
}
