//! Turns an allocation into a synchronized two-robot action timeline.
//!
//! Every relocation task expands to `pick`, `standby`, `place`. When two
//! consecutive tasks go to different robots, the first robot's `place` and
//! the second robot's `pick` share a slot and start together. A robot always
//! passes through its standby pose (its mount) between a pick and a place.

use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::geometry::Point;
use crate::scene::{ObjectId, RobotId, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Pick,
    Place,
    Standby,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub kind: ActionKind,
    pub robot: RobotId,
    pub location: Point,
    pub object: Option<ObjectId>,
    pub duration: f64,
}

/// One or two actions, by different robots, starting at the same time.
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub start: f64,
    pub actions: Vec<Action>,
}

impl Slot {
    pub fn is_paired(&self) -> bool {
        self.actions.len() == 2
    }

    pub fn end(&self) -> f64 {
        self.actions
            .iter()
            .map(|a| self.start + a.duration)
            .fold(self.start, f64::max)
    }
}

/// Slots in causal order. Start times are not necessarily monotone: a
/// robot returning to standby may overlap later slots of the other robot.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub slots: Vec<Slot>,
    pub makespan: f64,
}

impl Timeline {
    pub fn paired_slots(&self) -> usize {
        self.slots.iter().filter(|s| s.is_paired()).count()
    }

    pub fn actions(&self) -> impl Iterator<Item = (f64, &Action)> {
        self.slots
            .iter()
            .flat_map(|s| s.actions.iter().map(move |a| (s.start, a)))
    }

    /// Sum of all action durations: the makespan if nothing ran in parallel.
    pub fn serial_makespan(&self) -> f64 {
        self.actions().map(|(_, a)| a.duration).sum()
    }

    pub fn export(&self) -> TimelineExport {
        TimelineExport {
            makespan: self.makespan,
            slots: self
                .slots
                .iter()
                .map(|s| SlotExport {
                    start: s.start,
                    actions: s
                        .actions
                        .iter()
                        .map(|a| ActionExport {
                            robot: a.robot,
                            kind: a.kind,
                            object: a.object,
                            duration: a.duration,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        self.export().to_json()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionExport {
    pub robot: RobotId,
    pub kind: ActionKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub object: Option<ObjectId>,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotExport {
    pub start: f64,
    pub actions: Vec<ActionExport>,
}

/// Text form of a timeline, as written by the CLI and read by the renderer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineExport {
    pub makespan: f64,
    pub slots: Vec<SlotExport>,
}

impl TimelineExport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("timeline serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Travel time at the robot's speed plus the fixed time of the primitive.
pub fn action_duration(
    scene: &Scene,
    robot: RobotId,
    from: Point,
    to: Point,
    kind: ActionKind,
) -> f64 {
    let spec = scene.robot(robot).expect("robot in scene");
    let fixed = match kind {
        ActionKind::Pick => spec.grasp_time,
        ActionKind::Place => spec.release_time,
        ActionKind::Standby => spec.standby_time,
    };
    from.distance(to) / spec.speed + fixed
}

struct Builder<'s> {
    scene: &'s Scene,
    free: [f64; 2],
    position: [Point; 2],
    at_standby: [bool; 2],
    slots: Vec<Slot>,
}

impl<'s> Builder<'s> {
    fn new(scene: &'s Scene) -> Self {
        let mounts = scene.robots().map(|r| r.mount);
        Self {
            scene,
            free: [0.0; 2],
            position: mounts,
            at_standby: [true; 2],
            slots: Vec::new(),
        }
    }

    fn slot_of(&self, robot: RobotId) -> usize {
        self.scene.robot_slot(robot).expect("robot in scene")
    }

    fn action(
        &self,
        robot: RobotId,
        kind: ActionKind,
        object: Option<ObjectId>,
        to: Point,
    ) -> Action {
        let from = self.position[self.slot_of(robot)];
        Action {
            kind,
            robot,
            location: to,
            object,
            duration: action_duration(self.scene, robot, from, to, kind),
        }
    }

    fn pick(&self, robot: RobotId, object: ObjectId) -> Action {
        let center = self
            .scene
            .object(object)
            .expect("object in scene")
            .footprint
            .center;
        self.action(robot, ActionKind::Pick, Some(object), center)
    }

    fn place(&self, robot: RobotId, object: ObjectId) -> Action {
        let dropoff = self.scene.robot(robot).expect("robot in scene").dropoff;
        self.action(robot, ActionKind::Place, Some(object), dropoff)
    }

    fn emit(&mut self, actions: Vec<Action>) {
        let start = actions
            .iter()
            .map(|a| self.free[self.slot_of(a.robot)])
            .fold(0.0, f64::max);
        for a in &actions {
            let s = self.slot_of(a.robot);
            self.free[s] = start + a.duration;
            self.position[s] = a.location;
            self.at_standby[s] = a.kind == ActionKind::Standby;
        }
        self.slots.push(Slot { start, actions });
    }

    fn ensure_standby(&mut self, robot: RobotId) {
        let s = self.slot_of(robot);
        if !self.at_standby[s] {
            let mount = self.scene.robots()[s].mount;
            let standby = self.action(robot, ActionKind::Standby, None, mount);
            self.emit(vec![standby]);
        }
    }

    fn finish(self) -> Timeline {
        let makespan = self.free.iter().copied().fold(0.0, f64::max);
        Timeline {
            slots: self.slots,
            makespan,
        }
    }
}

/// Sequences `(object, robot)` tasks executed in the given order.
pub fn sequence_tasks(scene: &Scene, tasks: &[(ObjectId, RobotId)]) -> Timeline {
    let mut b = Builder::new(scene);
    let mut pending: Option<(ObjectId, RobotId)> = None;
    for &(object, robot) in tasks {
        match pending.take() {
            Some((prev_object, prev_robot)) if prev_robot != robot => {
                b.ensure_standby(robot);
                let place = b.place(prev_robot, prev_object);
                let pick = b.pick(robot, object);
                b.emit(vec![place, pick]);
            }
            Some((prev_object, prev_robot)) => {
                let place = b.place(prev_robot, prev_object);
                b.emit(vec![place]);
                b.ensure_standby(robot);
                let pick = b.pick(robot, object);
                b.emit(vec![pick]);
            }
            None => {
                b.ensure_standby(robot);
                let pick = b.pick(robot, object);
                b.emit(vec![pick]);
            }
        }
        b.ensure_standby(robot);
        pending = Some((object, robot));
    }
    if let Some((object, robot)) = pending {
        let place = b.place(robot, object);
        b.emit(vec![place]);
    }
    b.finish()
}

pub fn sequence_actions(scene: &Scene, allocation: &Allocation) -> Timeline {
    sequence_tasks(scene, &allocation.tasks())
}

/// Makespan of the same actions executed one after another with no pairing.
pub fn serialize_baseline_makespan(scene: &Scene, allocation: &Allocation) -> f64 {
    sequence_actions(scene, allocation).serial_makespan()
}
