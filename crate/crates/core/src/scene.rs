//! World model: disc objects on a shelf, two robot arms in front of it.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Disc, Point, Workspace};

/// Slack (mm) applied when checking that two footprints do not overlap.
pub const OVERLAP_SLACK: f64 = 1e-9;

/// Consecutive rejected samples after which generation gives up.
pub const MAX_CONSECUTIVE_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RobotId(pub u32);

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectSpec {
    pub id: ObjectId,
    pub footprint: Disc,
    pub is_target: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotSpec {
    pub id: RobotId,
    /// Base position on the open front edge; also the standby pose.
    pub mount: Point,
    pub reach_radius: f64,
    /// Where relocated objects are put down, outside the workspace.
    pub dropoff: Point,
    /// End-effector speed in mm/s.
    pub speed: f64,
    pub grasp_time: f64,
    pub release_time: f64,
    pub standby_time: f64,
}

impl RobotSpec {
    /// Default robot pair: mounts at 1/4 and 3/4 of the front edge, drop-off
    /// zones 200 mm in front of the shelf and 200 mm to the outer side.
    pub fn default_pair(workspace: &Workspace) -> [RobotSpec; 2] {
        let make = |id: u32, x: f64, side: f64| RobotSpec {
            id: RobotId(id),
            mount: Point::new(x, 0.0),
            reach_radius: 850.0,
            dropoff: Point::new(x + side * 200.0, -200.0),
            speed: 100.0,
            grasp_time: 2.0,
            release_time: 2.0,
            standby_time: 1.0,
        };
        [
            make(1, workspace.width * 0.25, -1.0),
            make(2, workspace.width * 0.75, 1.0),
        ]
    }

    pub fn reaches(&self, p: Point) -> bool {
        self.mount.distance(p) <= self.reach_radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub workspace: Workspace,
    pub gripper_radius: f64,
    objects: Vec<ObjectSpec>,
    robots: [RobotSpec; 2],
    index: HashMap<ObjectId, usize>,
}

impl Scene {
    /// Builds a scene and checks every scene invariant.
    pub fn new(
        workspace: Workspace,
        gripper_radius: f64,
        objects: Vec<ObjectSpec>,
        robots: [RobotSpec; 2],
    ) -> Result<Self> {
        let index = objects
            .iter()
            .enumerate()
            .map(|(i, o)| (o.id, i))
            .collect::<HashMap<_, _>>();
        if index.len() != objects.len() {
            return Err(Error::InvariantViolation("duplicate object id".into()));
        }
        let scene = Self {
            workspace,
            gripper_radius,
            objects,
            robots,
            index,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn objects(&self) -> &[ObjectSpec] {
        &self.objects
    }

    pub fn robots(&self) -> &[RobotSpec; 2] {
        &self.robots
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn object_index(&self, id: ObjectId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn object(&self, id: ObjectId) -> Option<&ObjectSpec> {
        self.object_index(id).map(|i| &self.objects[i])
    }

    pub fn target_index(&self) -> usize {
        self.objects
            .iter()
            .position(|o| o.is_target)
            .expect("validated scene has a target")
    }

    pub fn target(&self) -> ObjectId {
        self.objects[self.target_index()].id
    }

    /// Position (0 or 1) of a robot in the scene's robot pair.
    pub fn robot_slot(&self, id: RobotId) -> Option<usize> {
        self.robots.iter().position(|r| r.id == id)
    }

    pub fn robot(&self, id: RobotId) -> Option<&RobotSpec> {
        self.robot_slot(id).map(|s| &self.robots[s])
    }

    pub fn robot_ids(&self) -> [RobotId; 2] {
        [self.robots[0].id, self.robots[1].id]
    }

    fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvariantViolation(msg));
        if !(self.gripper_radius > 0.0 && self.gripper_radius.is_finite()) {
            return fail("gripper radius must be positive".into());
        }
        if !(self.workspace.width > 0.0 && self.workspace.height > 0.0) {
            return fail("workspace must have positive extent".into());
        }
        if self.objects.len() < 2 {
            return fail("at least two objects".into());
        }
        let targets = self.objects.iter().filter(|o| o.is_target).count();
        if targets != 1 {
            return fail(format!("exactly one target (found {targets})"));
        }
        for o in &self.objects {
            let d = &o.footprint;
            if !(d.radius > 0.0 && d.radius.is_finite()) {
                return fail(format!("radius must be positive ({})", o.id));
            }
            if !d.center.is_finite() {
                return fail(format!("center must be finite ({})", o.id));
            }
            if !self.workspace.contains(d.center) {
                return fail(format!("object center outside workspace ({})", o.id));
            }
        }
        for (i, a) in self.objects.iter().enumerate() {
            for b in &self.objects[i + 1..] {
                if a.footprint.overlaps(&b.footprint, OVERLAP_SLACK) {
                    return fail(format!("overlap between {} and {}", a.id, b.id));
                }
            }
        }
        if self.robots[0].id == self.robots[1].id {
            return fail("duplicate robot id".into());
        }
        for r in &self.robots {
            if r.reach_radius.is_nan() || r.reach_radius <= 0.0 {
                return fail(format!("reach must be positive ({})", r.id));
            }
            if !r.mount.is_finite()
                || r.mount.y != 0.0
                || r.mount.x < 0.0
                || r.mount.x > self.workspace.width
            {
                return fail(format!("mount must lie on the front edge ({})", r.id));
            }
            if !r.dropoff.is_finite() || !self.workspace.strictly_outside(r.dropoff) {
                return fail(format!("dropoff must be outside the workspace ({})", r.id));
            }
            for (name, v) in [
                ("speed", r.speed),
                ("grasp_time", r.grasp_time),
                ("release_time", r.release_time),
                ("standby_time", r.standby_time),
            ] {
                if !(v > 0.0 && v.is_finite()) {
                    return fail(format!("{name} must be positive ({})", r.id));
                }
            }
        }
        let target = &self.objects[self.target_index()];
        if !self
            .robots
            .iter()
            .all(|r| r.reaches(target.footprint.center))
        {
            return fail("target outside the reach of both robots".into());
        }
        Ok(())
    }
}

/// Inputs to [`generate_scene`].
#[derive(Debug, Clone, PartialEq)]
pub struct SceneParams {
    pub n_objects: usize,
    pub radius_range: (f64, f64),
    pub workspace: Workspace,
    pub gripper_radius: f64,
    pub robots: [RobotSpec; 2],
}

impl SceneParams {
    pub fn with_objects(n_objects: usize) -> Self {
        let workspace = Workspace::default();
        Self {
            n_objects,
            radius_range: (25.0, 45.0),
            workspace,
            gripper_radius: 40.0,
            robots: RobotSpec::default_pair(&workspace),
        }
    }
}

/// Samples a random scene. Object centres are uniform over the part of the
/// workspace where the whole footprint fits, overlapping samples are
/// rejected, and the target is drawn uniformly among objects both robots
/// can reach. Object ids are `1..=n` in sampling order.
pub fn generate_scene(seed: u64, params: &SceneParams) -> Result<Scene> {
    let (rmin, rmax) = params.radius_range;
    if params.n_objects < 2 {
        return Err(Error::InvalidParameters(
            "n_objects must be at least 2".into(),
        ));
    }
    if !(rmin > 0.0 && rmin <= rmax && rmax.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "radius range ({rmin}, {rmax}) must satisfy 0 < min <= max"
        )));
    }
    let ws = params.workspace;
    if 2.0 * rmax > ws.width || 2.0 * rmax > ws.height {
        return Err(Error::InvalidParameters(
            "largest object does not fit in the workspace".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut discs: Vec<Disc> = Vec::with_capacity(params.n_objects);
    let mut rejections = 0;
    while discs.len() < params.n_objects {
        let radius = if rmin == rmax {
            rmin
        } else {
            rng.random_range(rmin..=rmax)
        };
        let center = Point::new(
            rng.random_range(radius..=ws.width - radius),
            rng.random_range(radius..=ws.height - radius),
        );
        let candidate = Disc::new(center, radius);
        if discs.iter().any(|d| d.overlaps(&candidate, OVERLAP_SLACK)) {
            rejections += 1;
            if rejections >= MAX_CONSECUTIVE_REJECTIONS {
                return Err(Error::GenerationFailure(format!(
                    "{MAX_CONSECUTIVE_REJECTIONS} consecutive rejections after placing {} objects",
                    discs.len()
                )));
            }
            continue;
        }
        rejections = 0;
        discs.push(candidate);
    }

    let candidates: Vec<usize> = discs
        .iter()
        .enumerate()
        .filter(|(_, d)| params.robots.iter().all(|r| r.reaches(d.center)))
        .map(|(i, _)| i)
        .collect();
    if candidates.is_empty() {
        return Err(Error::GenerationFailure(
            "no object lies within reach of both robots".into(),
        ));
    }
    let target = candidates[rng.random_range(0..candidates.len())];

    let objects = discs
        .into_iter()
        .enumerate()
        .map(|(i, footprint)| ObjectSpec {
            id: ObjectId(i as u32 + 1),
            footprint,
            is_target: i == target,
        })
        .collect();
    Scene::new(ws, params.gripper_radius, objects, params.robots)
}

// Wire format. Field order here is the serialized order.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkspaceWire {
    w: f64,
    h: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectWire {
    id: ObjectId,
    x: f64,
    y: f64,
    r: f64,
    target: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotWire {
    id: RobotId,
    mount: [f64; 2],
    reach: f64,
    dropoff: [f64; 2],
    speed: f64,
    grasp_time: f64,
    release_time: f64,
    standby_time: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneWire {
    workspace: WorkspaceWire,
    gripper_radius: f64,
    objects: Vec<ObjectWire>,
    robots: Vec<RobotWire>,
}

/// Serializes a scene to its JSON text form (byte-stable, trailing newline).
pub fn save_scene(scene: &Scene) -> String {
    let wire = SceneWire {
        workspace: WorkspaceWire {
            w: scene.workspace.width,
            h: scene.workspace.height,
        },
        gripper_radius: scene.gripper_radius,
        objects: scene
            .objects
            .iter()
            .map(|o| ObjectWire {
                id: o.id,
                x: o.footprint.center.x,
                y: o.footprint.center.y,
                r: o.footprint.radius,
                target: o.is_target,
            })
            .collect(),
        robots: scene
            .robots
            .iter()
            .map(|r| RobotWire {
                id: r.id,
                mount: [r.mount.x, r.mount.y],
                reach: r.reach_radius,
                dropoff: [r.dropoff.x, r.dropoff.y],
                speed: r.speed,
                grasp_time: r.grasp_time,
                release_time: r.release_time,
                standby_time: r.standby_time,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&wire).expect("scene serializes");
    text.push('\n');
    text
}

/// Parses and validates a scene.
pub fn load_scene(text: &str) -> Result<Scene> {
    let wire: SceneWire = serde_json::from_str(text)?;
    let robots: [RobotWire; 2] = wire.robots.try_into().map_err(|v: Vec<RobotWire>| {
        Error::InvariantViolation(format!("exactly two robots (found {})", v.len()))
    })?;
    let robots = robots.map(|r| RobotSpec {
        id: r.id,
        mount: Point::new(r.mount[0], r.mount[1]),
        reach_radius: r.reach,
        dropoff: Point::new(r.dropoff[0], r.dropoff[1]),
        speed: r.speed,
        grasp_time: r.grasp_time,
        release_time: r.release_time,
        standby_time: r.standby_time,
    });
    let objects = wire
        .objects
        .into_iter()
        .map(|o| ObjectSpec {
            id: o.id,
            footprint: Disc::new(Point::new(o.x, o.y), o.r),
            is_target: o.target,
        })
        .collect();
    Scene::new(
        Workspace {
            width: wire.workspace.w,
            height: wire.workspace.h,
        },
        wire.gripper_radius,
        objects,
        robots,
    )
}
