use chase_core::model::{
    reference_aggressive_row, BallOutcome, BattingAction, Bounds, MatchState, OutcomeDistribution,
    RewardSpec, TransitionModel,
};
use chase_core::rl::{
    greedy_policy_from, mc_evaluate, q_learn, sarsa, td_zero_evaluate, ChaseEnv, LearnConfig,
    QTable, Schedule, StartRule,
};
use chase_core::solver::{evaluate_policy, solve_chase, PolicyTable};
use proptest::prelude::*;

fn default_env(bounds: Bounds) -> ChaseEnv {
    ChaseEnv::new(
        TransitionModel::default_chase(),
        RewardSpec::default(),
        bounds,
        StartRule::ExploringStarts,
    )
    .unwrap()
}

#[test]
fn greedy_on_policy_equals_off_policy() {
    let greedy = LearnConfig {
        episodes: 20_000,
        epsilon: Schedule::Constant { value: 0.0 },
        seed: 17,
        ..LearnConfig::default()
    };
    let point = ChaseEnv::new(
        TransitionModel::single_action(OutcomeDistribution::point_mass(BallOutcome::Two)),
        RewardSpec::default(),
        Bounds::new(8, 5, 2),
        StartRule::ExploringStarts,
    )
    .unwrap();
    for env in [point, default_env(Bounds::new(8, 5, 2))] {
        let (q, _) = q_learn(&env, &greedy, None).unwrap();
        let (s, _) = sarsa(&env, &greedy, None).unwrap();
        assert_eq!(q, s);
    }
}

#[test]
fn learning_is_deterministic_per_seed() {
    let env = default_env(Bounds::new(8, 5, 2));
    let cfg = LearnConfig {
        episodes: 20_000,
        seed: 3,
        ..LearnConfig::default()
    };
    assert_eq!(q_learn(&env, &cfg, None).unwrap(), q_learn(&env, &cfg, None).unwrap());
    assert_eq!(sarsa(&env, &cfg, None).unwrap(), sarsa(&env, &cfg, None).unwrap());
    let other = LearnConfig { seed: 4, ..cfg };
    assert_ne!(q_learn(&env, &cfg, None).unwrap().0, q_learn(&env, &other, None).unwrap().0);
}

#[test]
fn q_learning_greedy_policy_is_near_optimal() {
    let bounds = Bounds::new(10, 6, 2);
    let model = TransitionModel::default_chase();
    let reward = RewardSpec::default();
    let exact = solve_chase(&model, &reward, bounds).unwrap();
    let env = default_env(bounds);
    let cfg = LearnConfig {
        episodes: 5_000_000,
        seed: 1,
        checkpoint_every: 1_000_000,
        ..LearnConfig::default()
    };
    let (q, curve) = q_learn(&env, &cfg, Some(&exact.values)).unwrap();
    let v = evaluate_policy(&model, &reward, &greedy_policy_from(&q)).unwrap();
    let worst = v.max_abs_diff(&exact.values).unwrap();
    assert!(worst <= 0.05, "greedy value gap {worst}");

    let eps: Vec<u64> = curve.checkpoints.iter().map(|c| c.episode).collect();
    assert_eq!(eps, vec![0, 1_000_000, 2_000_000, 3_000_000, 4_000_000, 5_000_000]);
    let first = curve.checkpoints[0].max_q_error.unwrap();
    let last = curve.checkpoints.last().unwrap().max_q_error.unwrap();
    assert!(last < first);
    assert!(curve.to_csv().lines().count() == 7);
}

#[test]
fn sarsa_with_decayed_exploration_is_near_optimal() {
    let bounds = Bounds::new(10, 6, 2);
    let model = TransitionModel::default_chase();
    let reward = RewardSpec::default();
    let exact = solve_chase(&model, &reward, bounds).unwrap();
    let cfg = LearnConfig {
        episodes: 5_000_000,
        epsilon: Schedule::Linear {
            start: 0.3,
            end: 0.0,
            fraction: 0.8,
        },
        seed: 2,
        ..LearnConfig::default()
    };
    let (q, _) = sarsa(&default_env(bounds), &cfg, None).unwrap();
    let v = evaluate_policy(&model, &reward, &greedy_policy_from(&q)).unwrap();
    assert!(v.max_abs_diff(&exact.values).unwrap() <= 0.05);
}

#[test]
fn monte_carlo_one_ball_value() {
    let bounds = Bounds::new(1, 1, 1);
    let env = ChaseEnv::new(
        TransitionModel::single_action(reference_aggressive_row()),
        RewardSpec::default(),
        bounds,
        StartRule::Fixed {
            state: MatchState::new(1, 1, 1),
        },
    )
    .unwrap();
    let policy = PolicyTable::constant(bounds, BattingAction::Aggressive);
    let est = mc_evaluate(&env, &policy, 100_000, 8).unwrap()[&MatchState::new(1, 1, 1)];
    assert_eq!(est.visits, 100_000);
    assert!((est.value - 0.65).abs() <= 3.0 * est.standard_error());
}

#[test]
fn td_zero_matches_exact_policy_values() {
    let bounds = Bounds::new(8, 5, 2);
    let model = TransitionModel::default_chase();
    let reward = RewardSpec::default();
    let policy = PolicyTable::from_fn(bounds, |s| {
        BattingAction::ALL[(s.runs_needed + s.wickets_in_hand) as usize % 5]
    });
    let exact = evaluate_policy(&model, &reward, &policy).unwrap();
    let cfg = LearnConfig {
        episodes: 5_000_000,
        seed: 5,
        ..LearnConfig::default()
    };
    let td = td_zero_evaluate(&default_env(bounds), &policy, &cfg).unwrap();
    for (s, e) in td {
        assert!((e.value - exact.get(s).unwrap()).abs() <= 0.02, "{s}");
    }
}

#[test]
fn penalty_rewards_reach_the_learner() {
    let bounds = Bounds::new(4, 3, 2);
    let reward = RewardSpec {
        per_wicket_penalty: 0.1,
        ..RewardSpec::default()
    };
    let env = ChaseEnv::new(
        TransitionModel::single_action(OutcomeDistribution::point_mass(BallOutcome::Wicket)),
        reward,
        bounds,
        StartRule::Fixed {
            state: MatchState::new(4, 3, 2),
        },
    )
    .unwrap();
    let policy = PolicyTable::constant(bounds, BattingAction::Balanced);
    let v = mc_evaluate(&env, &policy, 3, 0).unwrap();
    assert!((v[&MatchState::new(4, 3, 2)].value + 0.2).abs() < 1e-15);
    assert!((v[&MatchState::new(4, 2, 1)].value + 0.1).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn q_values_stay_in_unit_interval(seed in any::<u64>(), init in 0.0f64..=1.0, sarsa_run in any::<bool>()) {
        let env = default_env(Bounds::new(6, 4, 2));
        let cfg = LearnConfig { episodes: 3000, seed, initial_q: init, ..LearnConfig::default() };
        let (q, _) = if sarsa_run { sarsa(&env, &cfg, None) } else { q_learn(&env, &cfg, None) }.unwrap();
        for (_, _, v, _) in q.entries() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn greedy_policy_ignores_constant_shifts(
        values in prop::collection::vec(prop::sample::select(vec![0.0, 0.25, 0.5, 0.75]), 4 * 3 * 2 * 5),
        shift in -10.0f64..10.0,
    ) {
        let bounds = Bounds::new(3, 2, 1);
        let mut q = QTable::new(bounds, 0.0);
        let mut shifted = QTable::new(bounds, 0.0);
        let mut it = values.iter();
        for s in bounds.states() {
            for a in BattingAction::ALL {
                let v = *it.next().unwrap();
                if !s.is_terminal() {
                    q.set(s, a, v);
                    shifted.set(s, a, v + shift);
                }
            }
        }
        prop_assert_eq!(greedy_policy_from(&q), greedy_policy_from(&shifted));
    }
}
