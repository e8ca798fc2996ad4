mod common;

use common::{instance_with, props};
use hetassoc::game::ResponseOutcome;
use hetassoc::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn options() -> GameOptions {
    GameOptions {
        exec: Exec::Sequential,
        restarts: 16,
        ..GameOptions::default()
    }
}

#[test]
fn modes_agree_on_fixtures() {
    for cfg in [
        fixtures::erlang_fixture(),
        fixtures::twin_systems(1, 1.0),
        fixtures::twin_systems(1, 2.0),
        fixtures::twin_systems(1, 3.0),
        fixtures::two_class_one_system(2.0, 3.0),
    ] {
        let space = StateSpace::enumerate(&cfg).unwrap();
        let game = Game::new(&space, &AggregationScheme::from_config(&cfg), options()).unwrap();
        assert!(game.policy_space().size() <= 1 << 12);
        props::modes_agree(&game).unwrap();
    }
}

#[test]
fn equilibria_survive_independent_certification() {
    let cfg = fixtures::small_hetnet();
    let space = StateSpace::enumerate(&cfg).unwrap();
    let game = Game::new(&space, &AggregationScheme::from_config(&cfg), options()).unwrap();
    let nash = game.find_nash(NashMode::BestResponse).unwrap();
    assert!(!nash.equilibria.is_empty());
    let optimum = game.optimal_policy().unwrap();
    for eq in &nash.equilibria {
        let cert = game.certify(&eq.policy).unwrap();
        assert!(cert.holds, "{} regret {}", eq.policy, cert.max_regret);
        assert!(optimum.best.global_utility >= eq.global_utility - 1e-9);
    }
}

#[test]
fn search_is_deterministic() {
    let cfg = fixtures::small_hetnet();
    let space = StateSpace::enumerate(&cfg).unwrap();
    let scheme = AggregationScheme::from_config(&cfg);
    let run = |exec| {
        let game = Game::new(&space, &scheme, GameOptions { exec, ..options() }).unwrap();
        let nash = game.find_nash(NashMode::BestResponse).unwrap();
        nash.equilibria
            .iter()
            .map(|e| (e.policy.to_string(), e.global_utility.to_bits()))
            .collect::<Vec<_>>()
    };
    let first = run(Exec::Sequential);
    assert_eq!(first, run(Exec::Sequential));
    assert_eq!(first, run(Exec::Parallel));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn best_response_steps_strictly_improve(cfg in instance_with(2..=2, 1..=2), seed in any::<u64>()) {
        let space = StateSpace::enumerate(&cfg).unwrap();
        let game = Game::new(&space, &AggregationScheme::from_config(&cfg), options()).unwrap();
        let start = game.policy_space().random(&mut ChaCha8Rng::seed_from_u64(seed));
        let run = game.best_response_run(start.clone()).unwrap();
        let mut p = start;
        for step in &run.steps {
            prop_assert_eq!(p.get(step.class, step.label), step.from);
            let eval = game.evaluate(&p).unwrap();
            if eval.empty[step.label] {
                prop_assert_eq!(step.to, 0);
            } else {
                let payoff = |s| eval.individual(step.class, step.label, s).unwrap_or(0.0);
                prop_assert!(step.payoff_to > step.payoff_from + game.options().epsilon);
                prop_assert_eq!(payoff(step.from), step.payoff_from);
                prop_assert_eq!(payoff(step.to), step.payoff_to);
            }
            p.set(step.class, step.label, step.to);
        }
        if let ResponseOutcome::Converged(end) = &run.outcome {
            prop_assert_eq!(end, &p);
            prop_assert!(game.evaluate(end).unwrap().is_nash(game.options().epsilon));
        }
    }

    #[test]
    fn modes_agree_on_small_policy_spaces(cfg in instance_with(2..=2, 1..=2)) {
        let space = StateSpace::enumerate(&cfg).unwrap();
        let game = Game::new(&space, &AggregationScheme::from_config(&cfg), options()).unwrap();
        prop_assume!(game.policy_space().size() <= 1 << 12);
        props::modes_agree(&game)?;
    }
}
