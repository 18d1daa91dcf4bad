//! One line per acceptance criterion. Run with
//! `cargo test -p twinarm --test acceptance`.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use common::*;
use twinarm::allocation::greedy_allocate;
use twinarm::bench::{generate_instance, run_bench, BenchConfig, BenchReport};
use twinarm::execution::replay;
use twinarm::scene::{generate_scene, SceneParams};
use twinarm::sequencing::{sequence_tasks, ActionKind};
use twinarm::traversability::{accessible, build_tgraph, orp_plan, plans_for_both, SceneState};
use twinarm::verify::{replay_makespan, suite_scenes, verify_scenes};
use twinarm::{
    count_turn_takings, search_allocate, FeasibilityOracle, Method, MissionConfig, ObjectId,
    RobotId, Scene,
};

enum Verdict {
    Pass(String),
    Warn(String),
    Fail(String),
}

fn report(n: usize, verdict: Verdict) -> bool {
    match verdict {
        Verdict::Pass(d) => {
            println!("criterion {n}: PASS {d}");
            true
        }
        Verdict::Warn(d) => {
            println!("criterion {n}: PASS (warning) {d}");
            true
        }
        Verdict::Fail(d) => {
            println!("criterion {n}: FAIL {d}");
            false
        }
    }
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn search_optimality() -> Verdict {
    let start = Instant::now();
    let scenes = suite_scenes(&[8, 12], 100, 0).expect("suite generates");
    let report = verify_scenes(&scenes);
    let elapsed = start.elapsed();
    let check = &report.checks[0];
    verdict(
        check.total == 200 && check.ok() && elapsed < Duration::from_secs(60),
        format!("{check} in {:.1} s", elapsed.as_secs_f64()),
    )
}

fn figure_replicas() -> Verdict {
    let mut wrong = Vec::new();

    let fig3 = two_paths_scene();
    let state = SceneState::new(&fig3);
    let p1 = orp_plan(&build_tgraph(&state, R1), TARGET).map(|p| ids(p.sequence()));
    let p2 = orp_plan(&build_tgraph(&state, R2), TARGET).map(|p| ids(p.sequence()));
    if p1 != Some(vec![1, 3, 0]) || p2 != Some(vec![4, 6, 3, 0]) {
        wrong.push(format!("two-path plans {p1:?} {p2:?}"));
    }

    let trap = alternation_trap_scene();
    let plans = [plan(R1, &[1, 3, 0]), plan(R2, &[4, 6, 3, 0])];
    let greedy: Vec<RobotId> = greedy_allocate(&trap, &plans)
        .map(|s| s.map(|s| s.robot))
        .collect::<Result<_, _>>()
        .unwrap_or_default();
    if greedy != [R1, R2, R2] {
        wrong.push(format!("greedy on trap {greedy:?}"));
    }
    let search = search_allocate(&SceneState::new(&trap), &plans, 100_000)
        .map(|o| o.allocation.assignees().to_vec());
    if search.as_deref() != Ok(&[R2, R1, R2][..]) {
        wrong.push(format!("search on trap {search:?}"));
    }

    let corridor = shared_corridor_scene();
    let alternating = search_allocate(&SceneState::new(&corridor), &[plan(R1, &[1, 3, 0])], 1000)
        .map(|o| o.allocation.turn_takings());
    if alternating != Ok(2) {
        wrong.push(format!("shared corridor turn-takings {alternating:?}"));
    }

    verdict(
        wrong.is_empty(),
        if wrong.is_empty() {
            "plans (1,3,t) and (4,6,3,t); greedy (r1,r2,r2); search (r2,r1,r2)".into()
        } else {
            wrong.join("; ")
        },
    )
}

fn sequencing_invariants() -> Verdict {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut bad = 0;
    for i in 0..1000u64 {
        let scene = generate_scene(5000 + i, &SceneParams::with_objects(12)).expect("scene");
        let mut objects: Vec<ObjectId> = scene
            .objects()
            .iter()
            .map(|o| o.id)
            .filter(|&o| o != scene.target())
            .collect();
        objects.shuffle(&mut rng);
        objects.truncate(rng.random_range(0..=8));
        objects.push(scene.target());
        let robots = scene.robot_ids();
        let tasks: Vec<(ObjectId, RobotId)> = objects
            .into_iter()
            .map(|o| (o, robots[rng.random_range(0..2)]))
            .collect();
        let tl = sequence_tasks(&scene, &tasks);

        let mut intervals: BTreeMap<RobotId, Vec<(f64, f64)>> = BTreeMap::new();
        for slot in &tl.slots {
            for a in &slot.actions {
                intervals
                    .entry(a.robot)
                    .or_default()
                    .push((slot.start, slot.start + a.duration));
            }
        }
        let overlaps = intervals
            .values()
            .any(|v| v.windows(2).any(|w| w[0].1 > w[1].0 + 1e-12));
        let paired_ok = tl.slots.iter().filter(|s| s.is_paired()).all(|s| {
            let (a, b) = (&s.actions[0], &s.actions[1]);
            a.robot != b.robot && a.object.is_some() && b.object.is_some() && a.object != b.object
        });
        let assignees: Vec<RobotId> = tasks.iter().map(|t| t.1).collect();
        let t = count_turn_takings(&assignees).0;
        let places = tl
            .actions()
            .filter(|(_, a)| a.kind == ActionKind::Place)
            .count();
        let replayed = replay_makespan(&tl.export());
        let ok = !overlaps
            && paired_ok
            && tl.paired_slots() as u32 == t
            && places == tasks.len()
            && tl.makespan <= tl.serial_makespan() + 1e-9
            && (replayed - tl.makespan).abs() <= 1e-9;
        if !ok {
            bad += 1;
        }
    }
    verdict(
        bad == 0,
        format!("{}/1000 allocations hold every invariant", 1000 - bad),
    )
}

fn corridor_agreement() -> Verdict {
    let scenes: Vec<Scene> = (0..50)
        .map(|i| generate_scene(900 + i, &SceneParams::with_objects(16)).expect("scene"))
        .collect();
    let report = verify_scenes(&scenes);
    let check = &report.checks[1];
    verdict(check.ok(), format!("{check} node pairs outside the band"))
}

fn completeness() -> Verdict {
    let mut problems = Vec::new();
    let mut successes = 0;
    let mut replans = 0;
    let mut blacklist_successes = 0;
    for rep in 0..100 {
        let n = [8, 12, 16, 20][rep % 4];
        let scene = generate_instance(&SceneParams::with_objects(n), 31, rep).expect("instance");
        let log = twinarm::run_mission(&scene, &MissionConfig::new(Method::Search));
        if log.success && log.relocations.len() <= scene.len() && replay(&scene, &log).is_ok() {
            successes += 1;
        } else {
            problems.push(format!("rep {rep} {:?}", log.failure));
        }

        let plans = plans_for_both(&SceneState::new(&scene));
        let pairs: BTreeSet<(RobotId, ObjectId)> =
            plans.iter().map(|p| (p.robot(), p.sequence()[0])).collect();
        for method in Method::ALL {
            let config = MissionConfig {
                oracle: FeasibilityOracle::Blacklist {
                    pairs: pairs.clone(),
                },
                random_seed: rep as u64,
                ..MissionConfig::new(method)
            };
            let log = twinarm::run_mission(&scene, &config);
            replans += log.replanning_count;
            let encountered = log.failures.len();
            if log.replanning_count != encountered {
                problems.push(format!(
                    "{method} rep {rep}: {} replans, {encountered} failures",
                    log.replanning_count
                ));
            }
            if log.success {
                blacklist_successes += 1;
                let mut state = SceneState::new(&scene);
                for (i, r) in log.relocations.iter().enumerate() {
                    for f in log.failures.iter().filter(|f| f.after == i) {
                        state.invalidate(f.robot, f.object);
                    }
                    if !accessible(&state, r.robot, r.object)
                        || !config.oracle.feasible(r.robot, r.object, &state)
                    {
                        problems.push(format!("{method} rep {rep}: unsound relocation {i}"));
                    }
                    state.remove(r.object);
                }
            }
        }
    }
    verdict(
        problems.is_empty() && successes == 100,
        format!(
            "{successes}/100 always-feasible successes; {blacklist_successes} blacklist successes replayed, {replans} replans{}",
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join(", ")) }
        ),
    )
}

/// Many small discs: most objects are reachable and accessible.
fn dense_scene(n: usize, seed: u64) -> Scene {
    let params = SceneParams {
        radius_range: (12.0, 16.0),
        gripper_radius: 14.0,
        ..SceneParams::with_objects(n)
    };
    generate_instance(&params, seed, 0).expect("dense instance")
}

fn median_greedy_time(scenes: &[Scene]) -> Duration {
    let mut samples: Vec<Duration> = Vec::new();
    for _ in 0..5 {
        let start = Instant::now();
        for scene in scenes {
            let plans = plans_for_both(&SceneState::new(scene));
            let steps = greedy_allocate(scene, &plans).count();
            std::hint::black_box(steps);
        }
        samples.push(start.elapsed());
    }
    samples.sort();
    samples[samples.len() / 2]
}

fn complexity(bench: &BenchReport) -> Verdict {
    let small: Vec<Scene> = (0..10).map(|s| dense_scene(40, s)).collect();
    let large: Vec<Scene> = (0..10).map(|s| dense_scene(80, s)).collect();
    let ratio = median_greedy_time(&large).as_secs_f64() / median_greedy_time(&small).as_secs_f64();

    let search: Vec<_> = bench
        .runs
        .iter()
        .filter(|r| r.method == Method::Search && r.n <= 20)
        .collect();
    let within = search
        .iter()
        .filter(|r| r.log.success && r.log.expansions <= 100_000)
        .count();
    let share = 100.0 * within as f64 / search.len() as f64;
    verdict(
        ratio <= 10.0 && share >= 93.0,
        format!("greedy time ratio N=80/N=40 {ratio:.2}; search within budget in {within}/{} runs ({share:.1}%)", search.len()),
    )
}

fn rate_trend(bench: &BenchReport) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [12, 16, 20] {
        let rate = |m| bench.row(m, n).expect("row").rate.mean;
        let (s, g, d) = (
            rate(Method::Search),
            rate(Method::Greedy),
            rate(Method::Distance),
        );
        ok &= s - d >= 20.0 && g > d;
        parts.push(format!("N={n} search {s:.1} greedy {g:.1} distance {d:.1}"));
    }
    verdict(ok, parts.join("; "))
}

fn makespan_trend(bench: &BenchReport) -> Verdict {
    let m = |method| bench.row(method, 20).expect("row").makespan.mean;
    let (s, d) = (m(Method::Search), m(Method::Distance));
    let reduction = 100.0 * (d - s) / d;
    let detail = format!("N=20 search {s:.2} s vs distance {d:.2} s, {reduction:.1}% reduction");
    if s >= d {
        Verdict::Fail(detail)
    } else if reduction < 10.0 {
        Verdict::Warn(format!("{detail}, below the 10% gap"))
    } else {
        Verdict::Pass(detail)
    }
}

fn main() {
    let bench = run_bench(&BenchConfig::default()).expect("default bench runs");
    let results = [
        report(1, search_optimality()),
        report(2, figure_replicas()),
        report(3, sequencing_invariants()),
        report(4, corridor_agreement()),
        report(5, completeness()),
        report(6, complexity(&bench)),
        report(7, rate_trend(&bench)),
        report(8, makespan_trend(&bench)),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} passed, {failed} failed", results.len() - failed);
}
