//! Two-arm retrieval of a target object from planar clutter.
//!
//! A [`Scene`] holds discs on a table and two fixed-base arms. The
//! traversability graph of each arm yields a relocation plan, the
//! allocation module assigns each relocation to an arm, and sequencing
//! turns the assignment into a timed, partly parallel action schedule.

pub mod allocation;
pub mod bench;
pub mod error;
pub mod execution;
pub mod geometry;
pub mod render;
pub mod scene;
pub mod sequencing;
pub mod traversability;
pub mod verify;

pub use allocation::{
    brute_force_allocate, count_turn_takings, distance_allocate, greedy_allocate, random_allocate,
    search_allocate, AllocError, Allocation, SearchOutcome,
};
pub use error::{Error, Result};
pub use execution::{run_mission, FeasibilityOracle, Method, MissionConfig, MissionLog};
pub use geometry::{Disc, Point, Workspace};
pub use scene::{
    generate_scene, load_scene, save_scene, ObjectId, RobotId, RobotSpec, Scene, SceneParams,
};
pub use sequencing::{sequence_actions, sequence_tasks, Timeline, TimelineExport};
pub use traversability::{
    build_tgraph, orp_plan, plans_for_both, RelocationPlan, SceneState, TGraph,
};
