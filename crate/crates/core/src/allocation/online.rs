//! Step-at-a-time allocation: the turn-taking greedy rule and the distance
//! and random baselines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::AllocError;
use crate::scene::{ObjectId, RobotId, Scene};
use crate::traversability::{accessible, plans_for_both, RelocationPlan, SceneState};

/// Which rule produced a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// First task of the mission: the accessible robot with the nearer mount.
    Nearest,
    /// The robot that did not act last.
    Alternate,
    /// Only the robot that acted last can access the object.
    Repeat,
    /// Neither robot can access the planned object; the closest accessible
    /// (robot, object) pair is relocated instead and the plan recomputed.
    Detour,
    /// No plan reaches the target; the closest accessible pair is relocated
    /// to open up the clutter.
    Clearing,
    /// Baselines: exactly one robot can access the object.
    OnlyAccessible,
    /// Baselines: both robots can access the object.
    BothAccessible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub object: ObjectId,
    pub robot: RobotId,
    pub rule: StepRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Relocate(Step),
    /// The planned object is inaccessible; the plan must be recomputed.
    Replan,
}

#[derive(Debug, Clone)]
pub enum Policy {
    Greedy,
    /// Nearer mount when both robots can access the object.
    Distance,
    /// Fair coin when both robots can access the object.
    Random(Box<ChaCha8Rng>),
}

impl Policy {
    pub fn random(seed: u64) -> Self {
        Policy::Random(Box::new(ChaCha8Rng::seed_from_u64(seed)))
    }
}

/// Picks the plan an online policy follows: fewest relocations, then the
/// robot whose mount is nearer its plan's first object, then robot order.
pub fn select_plan<'p>(scene: &Scene, plans: &'p [RelocationPlan]) -> Option<&'p RelocationPlan> {
    plans
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            let da = first_distance(scene, a);
            let db = first_distance(scene, b);
            a.k().cmp(&b.k()).then(da.total_cmp(&db)).then(i.cmp(j))
        })
        .map(|(_, p)| p)
}

fn first_distance(scene: &Scene, plan: &RelocationPlan) -> f64 {
    let robot = scene.robot(plan.robot()).expect("plan robot in scene");
    let object = scene
        .object(plan.sequence()[0])
        .expect("plan object in scene");
    robot.mount.distance(object.footprint.center)
}

fn mount_distance(scene: &Scene, robot: RobotId, object: ObjectId) -> f64 {
    scene.robot(robot).expect("robot in scene").mount.distance(
        scene
            .object(object)
            .expect("object in scene")
            .footprint
            .center,
    )
}

/// Stateful online allocator. It follows a relocation plan, asks
/// [`decide`](Self::decide) for the next step on the current scene state
/// and must be told about each executed step.
#[derive(Debug, Clone)]
pub struct OnlineAllocator {
    policy: Policy,
    plan: Option<RelocationPlan>,
    cursor: usize,
    fresh: bool,
    last: Option<RobotId>,
    accessibility_checks: u64,
}

impl OnlineAllocator {
    pub fn new(policy: Policy) -> Self {
        Self {
            policy,
            plan: None,
            cursor: 0,
            fresh: false,
            last: None,
            accessibility_checks: 0,
        }
    }

    /// Starts from the preferred plan among `plans` instead of computing one.
    pub fn with_plans(mut self, scene: &Scene, plans: &[RelocationPlan]) -> Self {
        self.plan = select_plan(scene, plans).cloned();
        self.cursor = 0;
        self.fresh = true;
        self
    }

    pub fn plan(&self) -> Option<&RelocationPlan> {
        self.plan.as_ref()
    }

    pub fn accessibility_checks(&self) -> u64 {
        self.accessibility_checks
    }

    /// Drops the current plan; the next decision recomputes it.
    pub fn invalidate_plan(&mut self) {
        self.plan = None;
    }

    fn check(&mut self, state: &SceneState<'_>, robot: RobotId, object: ObjectId) -> bool {
        self.accessibility_checks += 1;
        accessible(state, robot, object)
    }

    fn ensure_plan(&mut self, state: &SceneState<'_>) -> Result<ObjectId, AllocError> {
        let stale = match &self.plan {
            None => true,
            Some(p) => p
                .sequence()
                .get(self.cursor)
                .is_none_or(|&o| !state.is_present(o)),
        };
        if stale {
            let plans = plans_for_both(state);
            self.plan = Some(
                select_plan(state.scene(), &plans)
                    .ok_or(AllocError::NoPlan)?
                    .clone(),
            );
            self.cursor = 0;
            self.fresh = true;
        }
        Ok(self.plan.as_ref().expect("plan present").sequence()[self.cursor])
    }

    pub fn decide(&mut self, state: &SceneState<'_>) -> Result<Decision, AllocError> {
        let object = match self.ensure_plan(state) {
            Ok(object) => object,
            Err(AllocError::NoPlan) => {
                // only the turn-taking policy cares who acted last
                let avoid = match self.policy {
                    Policy::Greedy => self.last,
                    _ => None,
                };
                let (pair, checks) = clearing_move(state, avoid);
                self.accessibility_checks += checks;
                let (object, robot) = pair.ok_or(AllocError::NoAccessibleObject)?;
                return Ok(Decision::Relocate(Step {
                    object,
                    robot,
                    rule: StepRule::Clearing,
                }));
            }
            Err(e) => return Err(e),
        };
        let robots = state.scene().robot_ids();
        let access = [
            self.check(state, robots[0], object),
            self.check(state, robots[1], object),
        ];
        let accessible_robots: Vec<RobotId> = robots
            .iter()
            .zip(access)
            .filter(|(_, a)| *a)
            .map(|(&r, _)| r)
            .collect();

        if matches!(self.policy, Policy::Greedy) {
            return self.decide_greedy(state, object, &accessible_robots);
        }

        let step = |robot, rule| {
            Ok(Decision::Relocate(Step {
                object,
                robot,
                rule,
            }))
        };
        match accessible_robots.as_slice() {
            [only] => step(*only, StepRule::OnlyAccessible),
            [a, b] => {
                let robot = match &mut self.policy {
                    Policy::Random(rng) => {
                        if rng.random_bool(0.5) {
                            *a
                        } else {
                            *b
                        }
                    }
                    _ => nearer(state.scene(), *a, *b, object),
                };
                step(robot, StepRule::BothAccessible)
            }
            _ => {
                if self.fresh {
                    // a freshly computed plan starts with an object its owner can reach
                    return Err(AllocError::NoAccessibleObject);
                }
                self.plan = None;
                Ok(Decision::Replan)
            }
        }
    }

    fn decide_greedy(
        &mut self,
        state: &SceneState<'_>,
        object: ObjectId,
        accessible_robots: &[RobotId],
    ) -> Result<Decision, AllocError> {
        let step = |robot, rule| {
            Ok(Decision::Relocate(Step {
                object,
                robot,
                rule,
            }))
        };
        match (self.last, accessible_robots) {
            (_, []) => self.detour(state),
            (None, [only]) => step(*only, StepRule::Nearest),
            (None, [a, b, ..]) => step(nearer(state.scene(), *a, *b, object), StepRule::Nearest),
            (Some(last), robots) => match robots.iter().find(|&&r| r != last) {
                Some(&other) => step(other, StepRule::Alternate),
                None => step(last, StepRule::Repeat),
            },
        }
    }

    fn detour(&mut self, state: &SceneState<'_>) -> Result<Decision, AllocError> {
        let scene = state.scene();
        let target = scene.target();
        let mut best: Option<(f64, Step)> = None;
        let candidates: Vec<ObjectId> = state.remaining().filter(|&o| o != target).collect();
        for robot in scene.robot_ids() {
            for &object in &candidates {
                if !self.check(state, robot, object) {
                    continue;
                }
                let d = mount_distance(scene, robot, object);
                if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    best = Some((
                        d,
                        Step {
                            object,
                            robot,
                            rule: StepRule::Detour,
                        },
                    ));
                }
            }
        }
        match best {
            Some((_, step)) => Ok(Decision::Relocate(step)),
            None if !self.fresh => {
                // the current plan may be stale; one recomputation before giving up
                self.plan = None;
                let object = self.ensure_plan(state)?;
                let robots = scene.robot_ids();
                let reachable: Vec<RobotId> = robots
                    .into_iter()
                    .filter(|&r| self.check(state, r, object))
                    .collect();
                if reachable.is_empty() {
                    return Err(AllocError::NoAccessibleObject);
                }
                self.decide_greedy(state, object, &reachable)
            }
            None => Err(AllocError::NoAccessibleObject),
        }
    }

    /// Records that `step` was carried out.
    pub fn executed(&mut self, step: &Step) {
        self.last = Some(step.robot);
        self.fresh = false;
        let planned = self
            .plan
            .as_ref()
            .and_then(|p| p.sequence().get(self.cursor))
            .copied();
        if matches!(step.rule, StepRule::Detour | StepRule::Clearing)
            || planned != Some(step.object)
        {
            self.plan = None;
        } else {
            self.cursor += 1;
        }
    }
}

/// The accessible (object, robot) pair with the shortest mount distance
/// among non-target objects, ties going to the first robot and then the
/// smaller object id. Pairs for a robot other than `avoid` win whenever one
/// exists. Also returns the number of accessibility checks.
pub fn clearing_move(
    state: &SceneState<'_>,
    avoid: Option<RobotId>,
) -> (Option<(ObjectId, RobotId)>, u64) {
    let scene = state.scene();
    let target = scene.target();
    let mut checks = 0;
    let mut best: Option<(bool, f64, ObjectId, RobotId)> = None;
    for robot in scene.robot_ids() {
        let repeat = avoid == Some(robot);
        for object in state.remaining().filter(|&o| o != target) {
            checks += 1;
            if !accessible(state, robot, object) {
                continue;
            }
            let d = mount_distance(scene, robot, object);
            if best.is_none_or(|(br, bd, _, _)| (repeat, d) < (br, bd)) {
                best = Some((repeat, d, object, robot));
            }
        }
    }
    (best.map(|(_, _, o, r)| (o, r)), checks)
}

fn nearer(scene: &Scene, a: RobotId, b: RobotId, object: ObjectId) -> RobotId {
    if mount_distance(scene, b, object) < mount_distance(scene, a, object) {
        b
    } else {
        a
    }
}

/// Iterator over the steps of an online policy, executing each step on its
/// own copy of the scene state (every motion assumed to succeed). Ends after
/// the target is relocated or on the first error.
#[derive(Debug, Clone)]
pub struct OnlineSteps<'a> {
    state: SceneState<'a>,
    allocator: OnlineAllocator,
    done: bool,
}

impl<'a> OnlineSteps<'a> {
    pub fn new(state: SceneState<'a>, allocator: OnlineAllocator) -> Self {
        Self {
            state,
            allocator,
            done: false,
        }
    }

    pub fn state(&self) -> &SceneState<'a> {
        &self.state
    }

    pub fn allocator(&self) -> &OnlineAllocator {
        &self.allocator
    }
}

impl Iterator for OnlineSteps<'_> {
    type Item = Result<Step, AllocError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            match self.allocator.decide(&self.state) {
                Ok(Decision::Replan) => continue,
                Ok(Decision::Relocate(step)) => {
                    self.state.remove(step.object);
                    self.allocator.executed(&step);
                    self.done = step.object == self.state.scene().target();
                    return Some(Ok(step));
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            }
        }
    }
}

pub fn greedy_allocate<'a>(scene: &'a Scene, plans: &[RelocationPlan]) -> OnlineSteps<'a> {
    OnlineSteps::new(
        SceneState::new(scene),
        OnlineAllocator::new(Policy::Greedy).with_plans(scene, plans),
    )
}

pub fn distance_allocate<'a>(scene: &'a Scene, plans: &[RelocationPlan]) -> OnlineSteps<'a> {
    OnlineSteps::new(
        SceneState::new(scene),
        OnlineAllocator::new(Policy::Distance).with_plans(scene, plans),
    )
}

pub fn random_allocate<'a>(
    scene: &'a Scene,
    plans: &[RelocationPlan],
    seed: u64,
) -> OnlineSteps<'a> {
    OnlineSteps::new(
        SceneState::new(scene),
        OnlineAllocator::new(Policy::random(seed)).with_plans(scene, plans),
    )
}
