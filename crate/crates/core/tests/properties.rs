//! Property suites over the environment, network and plasticity invariants.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use npsp_core::behavior::{novelty_score, BehaviorTrace};
use npsp_core::maze::{Action, DistanceField, EnvState, MazeMap, Position, SensorReading};
use npsp_core::plasticity::{apply_npsp, binarize, Nat, NatSet, NpspRule};
use npsp_core::rnn::{
    forward_step, select_action, NetworkState, NetworkTopology, NetworkWeights, NUM_OUTPUTS,
};

fn corpus_maps() -> Vec<MazeMap> {
    npsp_core::corpus::ALL
        .iter()
        .map(|(_, doc)| MazeMap::parse(doc).unwrap())
        .collect()
}

fn action_strategy() -> impl Strategy<Value = Action> {
    prop_oneof![
        Just(Action::Stop),
        Just(Action::Left),
        Just(Action::Right),
        Just(Action::Straight),
        Just(Action::Press),
    ]
}

proptest! {
    #[test]
    fn agent_never_enters_blocking_cells(
        map_idx in 0usize..5,
        start in 0usize..2,
        actions in proptest::collection::vec(action_strategy(), 1..300),
    ) {
        let maps = corpus_maps();
        let map = &maps[map_idx];
        let start = start % map.starts().len();
        let mut state = EnvState::new(map, start);
        for action in actions {
            state.step(action);
            prop_assert!(!map.blocks(state.agent_pos, state.door_open));
            prop_assert!(!map.blocks(state.agent_pos, true));
        }
    }

    #[test]
    fn door_stays_open_once_opened(
        map_idx in 0usize..5,
        actions in proptest::collection::vec(action_strategy(), 1..300),
    ) {
        let maps = corpus_maps();
        let mut state = EnvState::new(&maps[map_idx], 0);
        let mut was_open = false;
        for action in actions {
            state.step(action);
            if was_open {
                prop_assert!(state.door_open);
            }
            was_open = state.door_open;
        }
    }

    #[test]
    fn successful_straight_lands_on_sensed_front(
        map_idx in 0usize..5,
        actions in proptest::collection::vec(action_strategy(), 1..200),
    ) {
        let maps = corpus_maps();
        let map = &maps[map_idx];
        let mut state = EnvState::new(map, 0);
        for action in actions {
            let before = state.agent_pos;
            let front_free = state.sense().front == 1;
            state.step(action);
            if action == Action::Straight {
                if front_free {
                    prop_assert_ne!(state.agent_pos, before);
                } else {
                    prop_assert_eq!(state.agent_pos, before);
                }
            }
        }
    }

    #[test]
    fn distance_field_steps_by_at_most_one(map_idx in 0usize..5) {
        let maps = corpus_maps();
        let map = &maps[map_idx];
        let field = DistanceField::compute(map).unwrap();
        for y in 0..map.height() {
            for x in 0..map.width() {
                let d = field.at(Position::new(x, y));
                if d < 0 {
                    continue;
                }
                if x + 1 < map.width() {
                    let n = field.at(Position::new(x + 1, y));
                    if n >= 0 {
                        prop_assert!((d - n).abs() <= 1);
                    }
                }
                if y + 1 < map.height() {
                    let n = field.at(Position::new(x, y + 1));
                    if n >= 0 {
                        prop_assert!((d - n).abs() <= 1);
                    }
                }
            }
        }
    }

    #[test]
    fn activations_stay_binary_over_long_runs(
        seed in any::<u64>(),
        hidden in prop_oneof![Just(0usize), Just(5), Just(15)],
        sensors in proptest::collection::vec((0u8..=1, 0u8..=1, 0u8..=1), 1..100),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = NetworkWeights::<f64>::init_random(hidden, &mut rng);
        let top = if hidden == 0 {
            NetworkTopology::direct(0.8)
        } else {
            NetworkTopology::layered(hidden, 0.6, 0.4)
        };
        let mut state = NetworkState::reset(hidden);
        for (l, f, r) in sensors {
            state = forward_step(&weights, &top, &state, SensorReading { left: l, front: f, right: r });
            prop_assert!(state.outputs.iter().all(|&a| a <= 1));
            prop_assert!(state.hidden.iter().all(|&a| a <= 1));
        }
    }

    #[test]
    fn zero_scales_make_layered_network_feedforward(
        seed in any::<u64>(),
        history in proptest::collection::vec((0u8..=1, 0u8..=1, 0u8..=1), 0..30),
        probe in (0u8..=1, 0u8..=1, 0u8..=1),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = NetworkWeights::<f64>::init_random(5, &mut rng);
        let top = NetworkTopology::layered(5, 0.0, 0.0);
        // run an arbitrary history, then probe: the response must match a
        // fresh network's response to the same probe
        let mut state = NetworkState::reset(5);
        for (l, f, r) in history {
            state = forward_step(&weights, &top, &state, SensorReading { left: l, front: f, right: r });
        }
        let probe_reading = SensorReading { left: probe.0, front: probe.1, right: probe.2 };
        let seasoned = forward_step(&weights, &top, &state, probe_reading);
        let fresh = forward_step(&weights, &top, &NetworkState::reset(5), probe_reading);
        prop_assert_eq!(select_action(&seasoned), select_action(&fresh));
        prop_assert_eq!(seasoned.outputs, fresh.outputs);
    }

    #[test]
    fn action_selection_invariant_under_monotone_transform(
        net in proptest::array::uniform5(-10.0f64..10.0),
    ) {
        let mut state = NetworkState::<f64>::reset(0);
        state.net_outputs = net;
        let base = select_action(&state);
        let mut scaled = state.clone();
        for v in &mut scaled.net_outputs {
            *v = v.exp(); // strictly increasing
        }
        prop_assert_eq!(select_action(&scaled), base);
        let mut shifted = state;
        for v in &mut shifted.net_outputs {
            *v = 3.0 * *v + 7.0;
        }
        prop_assert_eq!(select_action(&shifted), base);
    }

    #[test]
    fn binarize_selects_exactly_one_index(
        counts in proptest::array::uniform4(0u32..50),
        theta in 0.0f64..=1.0,
    ) {
        let nat = Nat { counts };
        let steps = counts.iter().sum::<u32>().max(1);
        let index = binarize(&nat, steps, theta).unwrap();
        prop_assert!(index < 16);
    }

    #[test]
    fn plasticity_update_restores_unit_norms(
        seed in any::<u64>(),
        hidden in prop_oneof![Just(0usize), Just(5)],
        table in proptest::array::uniform16(-1i8..=1),
        eta in 0.0f64..=1.0,
        theta in 0.0f64..=1.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = NetworkWeights::<f64>::init_random(hidden, &mut rng);
        let rule = NpspRule {
            table,
            eta,
            theta,
            alpha_h: (hidden > 0).then_some(0.5),
            alpha_o: 0.5,
        };
        let top = if hidden == 0 {
            NetworkTopology::direct(rule.alpha_o)
        } else {
            NetworkTopology::layered(hidden, 0.5, 0.5)
        };
        let mut nats = NatSet::new(&weights);
        let mut state = NetworkState::reset(hidden);
        for _ in 0..20 {
            let next = forward_step(&weights, &top, &state, SensorReading {
                left: rng.random_range(0..=1),
                front: rng.random_range(0..=1),
                right: rng.random_range(0..=1),
            });
            nats.record_step(&weights, &state, &next);
            state = next;
        }
        let stats = apply_npsp(&mut weights, &nats, &rule).unwrap();
        let mut checked = 0;
        for post_hidden in [true, false] {
            let rows = if post_hidden { hidden } else { NUM_OUTPUTS };
            for r in 0..rows {
                let mut sq = 0.0;
                for g in weights.groups() {
                    if g.kind.post_is_hidden() == post_hidden {
                        for c in 0..g.mat.cols() {
                            sq += g.mat.get(r, c) * g.mat.get(r, c);
                        }
                    }
                }
                if sq == 0.0 {
                    checked += 1; // zero vector left alone, counted below
                } else {
                    prop_assert!((sq.sqrt() - 1.0).abs() < 1e-9);
                }
            }
        }
        prop_assert_eq!(stats.zero_rows, checked);
    }

    #[test]
    fn rule_file_round_trips_for_random_rules(
        table in proptest::array::uniform16(-1i8..=1),
        eta in 0.0f64..=1.0,
        theta in 0.0f64..=1.0,
        alpha_h in proptest::option::of(0.0f64..=1.0),
        alpha_o in 0.0f64..=1.0,
    ) {
        let rule = NpspRule { table, eta, theta, alpha_h, alpha_o };
        let text = rule.to_file_string();
        let back = NpspRule::<f64>::parse(&text).unwrap();
        prop_assert_eq!(rule, back);
    }

    #[test]
    fn behavior_strings_never_repeat_adjacent_tokens(
        events in proptest::collection::vec((1usize..20, any::<bool>()), 0..100),
    ) {
        let mut trace = BehaviorTrace::new();
        for (region, press) in events {
            if press {
                trace.press_in_region(region);
            } else {
                trace.enter_region(region);
            }
        }
        let s = trace.to_string();
        let tokens: Vec<&str> = s.split('-').filter(|t| !t.is_empty()).collect();
        for pair in tokens.windows(2) {
            prop_assert_ne!(pair[0], pair[1]);
        }
    }

    #[test]
    fn novelty_is_permutation_invariant(
        mut behaviors in proptest::collection::vec("[a-c]{1,3}", 1..50),
        swap in any::<u64>(),
    ) {
        let n = behaviors.len();
        let before: f64 = novelty_score(&behaviors, n);
        let mut rng = ChaCha8Rng::seed_from_u64(swap);
        for i in (1..behaviors.len()).rev() {
            behaviors.swap(i, rng.random_range(0..=i));
        }
        let after: f64 = novelty_score(&behaviors, n);
        prop_assert_eq!(before, after);
    }
}
