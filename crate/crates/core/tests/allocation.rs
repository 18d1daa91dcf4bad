mod common;

use common::*;
use proptest::prelude::*;
use twinarm::allocation::{
    brute_force_allocate, count_turn_takings, random_allocate, replay_feasible, search_allocate,
    AllocError, BRUTE_FORCE_MAX_K,
};
use twinarm::bench::generate_instance;
use twinarm::scene::{ObjectId, RobotId, SceneParams};
use twinarm::traversability::{accessible, plans_for_both, RelocationPlan, SceneState};
use twinarm::{distance_allocate, greedy_allocate};

/// Depth-first minimum number of same-robot repeats over every feasible
/// assignment of `plan`, or `None` if no assignment is feasible.
fn min_repeats(state: &SceneState<'_>, plan: &[ObjectId], last: Option<RobotId>) -> Option<u32> {
    let Some((&first, rest)) = plan.split_first() else {
        return Some(0);
    };
    let mut best = None;
    for robot in state.scene().robot_ids() {
        if !accessible(state, robot, first) {
            continue;
        }
        let mut next = state.clone();
        next.remove(first);
        if let Some(r) = min_repeats(&next, rest, Some(robot)) {
            let cost = r + u32::from(last == Some(robot));
            best = Some(best.map_or(cost, |b: u32| b.min(cost)));
        }
    }
    best
}

fn oracle_penalty(state: &SceneState<'_>, plans: &[RelocationPlan]) -> Option<u32> {
    plans
        .iter()
        .filter_map(|p| min_repeats(state, p.sequence(), None))
        .min()
}

#[test]
fn search_penalty_matches_exhaustive_oracle() {
    for n in [8, 12] {
        let params = SceneParams::with_objects(n);
        for rep in 0..40 {
            let scene = generate_instance(&params, 11, rep).unwrap();
            let state = SceneState::new(&scene);
            let plans = plans_for_both(&state);
            let oracle = oracle_penalty(&state, &plans);
            match search_allocate(&state, &plans, usize::MAX) {
                Ok(out) => {
                    assert_eq!(Some(out.allocation.penalty()), oracle, "n {n} rep {rep}");
                    assert!(replay_feasible(
                        &state,
                        out.allocation.plan(),
                        out.allocation.assignees()
                    ));
                    assert!(plans.contains(out.allocation.plan()));
                }
                Err(AllocError::NoFeasibleAllocation { partial, .. }) => {
                    assert_eq!(oracle, None, "n {n} rep {rep}");
                    let partial = partial.expect("first plan object is accessible to its owner");
                    assert!(!partial.assignees.is_empty());
                }
                Err(e) => panic!("n {n} rep {rep}: {e}"),
            }
            if let Ok(b) = brute_force_allocate(&state, &plans) {
                assert_eq!(Some(b.penalty()), oracle);
            }
        }
    }
}

#[test]
fn search_pops_in_cost_then_generation_order() {
    for rep in 0..30 {
        let scene = generate_instance(&SceneParams::with_objects(12), 3, rep).unwrap();
        let state = SceneState::new(&scene);
        let plans = plans_for_both(&state);
        let Ok(out) = search_allocate(&state, &plans, usize::MAX) else {
            continue;
        };
        for w in out.trace.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            assert!(
                a.g < b.g || (a.g == b.g && a.gen_index < b.gen_index),
                "rep {rep}: {a} then {b}"
            );
        }
        assert_eq!(out.trace.len(), out.expansions + 1);
        assert_eq!(out.trace.last().unwrap().g, out.allocation.penalty());
    }
}

#[test]
fn budget_exhaustion_is_reported() {
    let scene = alternation_trap_scene();
    let state = SceneState::new(&scene);
    let plans = [plan(R1, &[1, 3, 0]), plan(R2, &[4, 6, 3, 0])];
    assert_eq!(
        search_allocate(&state, &plans, 3).unwrap_err(),
        AllocError::ExhaustedBudget { budget: 3 }
    );
    assert!(search_allocate(&state, &plans, 9).is_ok());
    assert_eq!(
        search_allocate(&state, &[], 10).unwrap_err(),
        AllocError::NoPlan
    );
}

#[test]
fn brute_force_refuses_long_plans() {
    let n = BRUTE_FORCE_MAX_K as u32 + 1;
    let centers: Vec<(u32, f64, f64)> = (0..=n)
        .map(|i| {
            (
                i,
                60.0 + 75.0 * f64::from(i % 14),
                60.0 + 80.0 * f64::from(i / 14),
            )
        })
        .collect();
    let scene = disc_scene(&centers);
    let state = SceneState::new(&scene);
    let ids: Vec<u32> = (1..=n).chain([0]).collect();
    let long = plan(R1, &ids);
    assert!(matches!(
        brute_force_allocate(&state, &[long]),
        Err(AllocError::InstanceTooLarge {
            cap: BRUTE_FORCE_MAX_K,
            ..
        })
    ));
}

#[test]
fn turn_taking_counts() {
    assert_eq!(count_turn_takings(&[R1, R2, R1]), (2, Some(100.0)));
    assert_eq!(count_turn_takings(&[R1, R2, R2]), (1, Some(50.0)));
    assert_eq!(count_turn_takings(&[R1]), (0, None));
}

#[test]
fn online_policies_produce_replayable_chains() {
    for rep in 0..30 {
        let scene = generate_instance(&SceneParams::with_objects(16), 5, rep).unwrap();
        let state = SceneState::new(&scene);
        let plans = plans_for_both(&state);
        let chains = [
            greedy_allocate(&scene, &plans).collect::<Result<Vec<_>, _>>(),
            distance_allocate(&scene, &plans).collect::<Result<Vec<_>, _>>(),
            random_allocate(&scene, &plans, rep as u64).collect::<Result<Vec<_>, _>>(),
        ];
        for chain in chains {
            let chain = chain.unwrap();
            let mut replay = SceneState::new(&scene);
            for step in &chain {
                assert!(accessible(&replay, step.robot, step.object), "rep {rep}");
                replay.remove(step.object);
            }
            assert_eq!(chain.last().unwrap().object, scene.target());
            assert!(chain.len() <= scene.len());
        }
    }
}

#[test]
fn distance_prefers_nearer_mount_when_both_can_reach() {
    for rep in 0..30 {
        let scene = generate_instance(&SceneParams::with_objects(12), 9, rep).unwrap();
        let plans = plans_for_both(&SceneState::new(&scene));
        let mut replay = SceneState::new(&scene);
        for step in distance_allocate(&scene, &plans) {
            let step = step.unwrap();
            let both = scene
                .robot_ids()
                .iter()
                .all(|&r| accessible(&replay, r, step.object));
            if both {
                let c = scene.object(step.object).unwrap().footprint.center;
                let d = |r: RobotId| scene.robot(r).unwrap().mount.distance(c);
                let other = scene
                    .robot_ids()
                    .into_iter()
                    .find(|&r| r != step.robot)
                    .unwrap();
                assert!(d(step.robot) <= d(other));
            }
            replay.remove(step.object);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_policy_is_seed_deterministic(rep in 0usize..50, seed in any::<u64>()) {
        let scene = generate_instance(&SceneParams::with_objects(12), 2, rep).unwrap();
        let plans = plans_for_both(&SceneState::new(&scene));
        let a: Vec<_> = random_allocate(&scene, &plans, seed).collect();
        let b: Vec<_> = random_allocate(&scene, &plans, seed).collect();
        prop_assert_eq!(a, b);
    }
}
