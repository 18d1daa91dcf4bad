//! Cross-checks of the planners against slow reference computations, as
//! run by `twinarm verify`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::fmt;

use crate::allocation::{brute_force_allocate, search_allocate, AllocError};
use crate::bench::generate_instance;
use crate::execution::{run_mission, Method, MissionConfig};
use crate::geometry::{swept_clearance, Point};
use crate::scene::{ObjectId, RobotId, Scene, SceneParams};
use crate::sequencing::{sequence_tasks, TimelineExport};
use crate::traversability::{corridor_free, plans_for_both, SceneState};
use crate::Result;

/// Samples per segment for the dense corridor check.
pub const CORRIDOR_SAMPLES: usize = 2_000;
/// Cases whose analytic clearance lies within this band of zero are not
/// compared (mm).
pub const CLEARANCE_BAND: f64 = 0.5;
pub const MAKESPAN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    /// First few mismatch descriptions.
    pub failures: Vec<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            passed: 0,
            total: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else if self.failures.len() < 5 {
            self.failures.push(describe());
        }
    }

    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}/{}", self.name, self.passed, self.total)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(Check::ok)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
            for failure in &c.failures {
                writeln!(f, "  mismatch: {failure}")?;
            }
        }
        Ok(())
    }
}

/// The verification suite: `per_n` solvable instances for each N.
pub fn suite_scenes(n_values: &[usize], per_n: usize, seed_base: u64) -> Result<Vec<Scene>> {
    let mut scenes = Vec::new();
    for &n in n_values {
        let params = SceneParams::with_objects(n);
        for rep in 0..per_n {
            scenes.push(generate_instance(&params, seed_base, rep)?);
        }
    }
    Ok(scenes)
}

fn search_vs_brute(scene: &Scene, check: &mut Check) {
    let state = SceneState::new(scene);
    let plans = plans_for_both(&state);
    let search = search_allocate(&state, &plans, usize::MAX).map(|o| o.allocation.penalty());
    let brute = brute_force_allocate(&state, &plans).map(|a| a.penalty());
    let agree = match (&search, &brute) {
        (Ok(a), Ok(b)) => a == b,
        (
            Err(AllocError::NoFeasibleAllocation { .. }),
            Err(AllocError::NoFeasibleAllocation { .. }),
        ) => true,
        (Err(AllocError::NoPlan), Err(AllocError::NoPlan)) => true,
        _ => false,
    };
    check.record(agree, || {
        format!("search {search:?} vs exhaustive {brute:?}")
    });
}

/// Minimum clearance over evenly spaced disc positions, and whether every
/// sampled centre stays inside the workspace extended through its front.
fn sampled_clearance(
    state: &SceneState<'_>,
    from: Point,
    to: Point,
    moving_radius: f64,
    ignore: &[ObjectId],
) -> (f64, bool) {
    let ws = state.scene().workspace;
    let mut min = f64::INFINITY;
    let mut inside = true;
    for i in 0..CORRIDOR_SAMPLES {
        let t = i as f64 / (CORRIDOR_SAMPLES - 1) as f64;
        let p = from.lerp(to, t);
        inside &= p.x >= 0.0 && p.x <= ws.width && p.y <= ws.height;
        for o in state.scene().objects() {
            if !state.is_present(o.id) || ignore.contains(&o.id) {
                continue;
            }
            let gap = p.distance(o.footprint.center) - moving_radius - o.footprint.radius;
            min = min.min(gap);
        }
    }
    (min, inside)
}

fn corridor_pairs(scene: &Scene, check: &mut Check) {
    let state = SceneState::new(scene);
    let gripper = scene.gripper_radius;
    let mut segments: Vec<(Point, Point, f64, Vec<ObjectId>)> = Vec::new();
    for robot in scene.robots() {
        for o in scene.objects() {
            segments.push((robot.mount, o.footprint.center, gripper, vec![o.id]));
        }
    }
    let objects = scene.objects();
    for (i, a) in objects.iter().enumerate() {
        for b in &objects[i + 1..] {
            let radius = gripper + a.footprint.radius.max(b.footprint.radius);
            segments.push((
                a.footprint.center,
                b.footprint.center,
                radius,
                vec![a.id, b.id],
            ));
        }
    }
    for (from, to, radius, ignore) in segments {
        let analytic = scene
            .objects()
            .iter()
            .filter(|o| !ignore.contains(&o.id))
            .map(|o| swept_clearance(from, to, radius, &o.footprint))
            .fold(f64::INFINITY, f64::min);
        if analytic.abs() <= CLEARANCE_BAND {
            continue;
        }
        let fast = corridor_free(&state, from, to, radius, &ignore);
        let (sampled, inside) = sampled_clearance(&state, from, to, radius, &ignore);
        let slow = inside && sampled >= 0.0;
        check.record(fast == slow, || {
            format!("segment {from:?}-{to:?} radius {radius}: checker {fast}, sampling {slow} (clearance {analytic:.3})")
        });
    }
}

/// Event-driven replay of a timeline. Each robot works through its own
/// queue of actions; a slot starts once it heads the queue of every robot
/// taking part and all of them are idle.
pub fn replay_makespan(timeline: &TimelineExport) -> f64 {
    let mut queues: BTreeMap<RobotId, VecDeque<usize>> = BTreeMap::new();
    for (i, slot) in timeline.slots.iter().enumerate() {
        for a in &slot.actions {
            queues.entry(a.robot).or_default().push_back(i);
        }
    }
    let mut busy_until: BTreeMap<RobotId, f64> = BTreeMap::new();
    let mut completions: BinaryHeap<Reverse<u64>> = BinaryHeap::new();
    let mut now = 0.0_f64;
    let mut last_end = 0.0_f64;
    let mut started = 0;
    while started < timeline.slots.len() {
        let ready = timeline.slots.iter().enumerate().find(|(i, slot)| {
            slot.actions.iter().all(|a| {
                queues[&a.robot].front() == Some(i)
                    && busy_until.get(&a.robot).is_none_or(|&t| t <= now)
            })
        });
        match ready {
            Some((i, slot)) => {
                for a in &slot.actions {
                    let end = now + a.duration;
                    busy_until.insert(a.robot, end);
                    completions.push(Reverse(end.to_bits()));
                    last_end = last_end.max(end);
                    queues.get_mut(&a.robot).expect("queued").pop_front();
                }
                debug_assert!(queues.values().all(|q| q.front() != Some(&i)));
                started += 1;
            }
            None => {
                let Some(Reverse(t)) = completions.pop() else {
                    break;
                };
                now = now.max(f64::from_bits(t));
            }
        }
    }
    last_end
}

fn makespan_vs_replay(scene: &Scene, check: &mut Check) {
    let log = run_mission(scene, &MissionConfig::new(Method::Search));
    let timeline = sequence_tasks(scene, &log.tasks());
    let replayed = replay_makespan(&timeline.export());
    check.record(
        (replayed - timeline.makespan).abs() <= MAKESPAN_TOLERANCE,
        || format!("makespan {} vs replay {replayed}", timeline.makespan),
    );
}

/// Runs all three comparisons over `scenes`.
pub fn verify_scenes(scenes: &[Scene]) -> VerifyReport {
    let mut search = Check::new("search=oracle");
    let mut corridor = Check::new("corridor=sampling");
    let mut makespan = Check::new("makespan=replay");
    for scene in scenes {
        search_vs_brute(scene, &mut search);
        corridor_pairs(scene, &mut corridor);
        makespan_vs_replay(scene, &mut makespan);
    }
    VerifyReport {
        checks: vec![search, corridor, makespan],
    }
}
