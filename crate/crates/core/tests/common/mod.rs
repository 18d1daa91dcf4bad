#![allow(dead_code)]

use twinarm::geometry::{Disc, Point, Workspace};
use twinarm::scene::{ObjectId, ObjectSpec, RobotId, RobotSpec, Scene};
use twinarm::RelocationPlan;

pub const TARGET: ObjectId = ObjectId(0);
pub const R1: RobotId = RobotId(1);
pub const R2: RobotId = RobotId(2);

/// Builds a scene of equal 35 mm discs with the default robot pair; object
/// 0 is the target.
pub fn disc_scene(centers: &[(u32, f64, f64)]) -> Scene {
    let ws = Workspace::default();
    let objects = centers
        .iter()
        .map(|&(id, x, y)| ObjectSpec {
            id: ObjectId(id),
            footprint: Disc::new(Point::new(x, y), 35.0),
            is_target: id == 0,
        })
        .collect();
    Scene::new(ws, 40.0, objects, RobotSpec::default_pair(&ws)).expect("valid replica scene")
}

/// Two-path scene: the left arm digs straight in, the right arm detours
/// through the right-hand cluster.
pub fn two_paths_scene() -> Scene {
    disc_scene(&[
        (0, 356.0, 460.0),
        (1, 518.0, 109.0),
        (2, 344.0, 134.0),
        (3, 612.0, 290.0),
        (4, 990.0, 340.0),
        (5, 371.0, 212.0),
        (6, 784.0, 330.0),
        (7, 769.0, 89.0),
        (8, 805.0, 186.0),
    ])
}

/// Scene whose accessibility pattern makes naive alternation get stuck.
pub fn alternation_trap_scene() -> Scene {
    disc_scene(&[
        (0, 450.0, 430.0),
        (1, 450.0, 110.0),
        (2, 327.0, 129.0),
        (3, 607.0, 209.0),
        (4, 886.0, 88.0),
        (5, 371.0, 236.0),
        (6, 1000.0, 250.0),
    ])
}

/// Short corridor towards a rear target with both arms reaching every step.
pub fn shared_corridor_scene() -> Scene {
    disc_scene(&[
        (0, 358.0, 461.0),
        (1, 329.0, 361.0),
        (2, 473.0, 80.0),
        (3, 581.0, 301.0),
    ])
}

pub fn plan(robot: RobotId, ids: &[u32]) -> RelocationPlan {
    RelocationPlan::new(robot, ids.iter().map(|&i| ObjectId(i)).collect(), TARGET).unwrap()
}

pub fn ids(seq: &[ObjectId]) -> Vec<u32> {
    seq.iter().map(|o| o.0).collect()
}
