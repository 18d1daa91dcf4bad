//! Swept-corridor collision checking, per-robot traversability graphs and
//! shortest relocation plans.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{swept_clearance, Point};
use crate::scene::{ObjectId, RobotId, RobotSpec, Scene};

/// A scene with some objects already relocated and some robot-object edges
/// invalidated after failed motion attempts.
#[derive(Debug, Clone)]
pub struct SceneState<'a> {
    scene: &'a Scene,
    removed: Vec<bool>,
    invalid: BTreeSet<(RobotId, ObjectId)>,
}

impl<'a> SceneState<'a> {
    pub fn new(scene: &'a Scene) -> Self {
        Self {
            scene,
            removed: vec![false; scene.len()],
            invalid: BTreeSet::new(),
        }
    }

    pub fn with_removed(scene: &'a Scene, removed: impl IntoIterator<Item = ObjectId>) -> Self {
        let mut state = Self::new(scene);
        for id in removed {
            state.remove(id);
        }
        state
    }

    pub fn scene(&self) -> &'a Scene {
        self.scene
    }

    pub fn is_present(&self, id: ObjectId) -> bool {
        self.scene
            .object_index(id)
            .is_some_and(|i| !self.removed[i])
    }

    /// Marks an object as relocated out of the workspace. Panics on an
    /// unknown id.
    pub fn remove(&mut self, id: ObjectId) {
        let i = self
            .scene
            .object_index(id)
            .expect("object id belongs to scene");
        self.removed[i] = true;
    }

    pub fn removed(&self) -> Vec<ObjectId> {
        self.scene
            .objects()
            .iter()
            .zip(&self.removed)
            .filter(|(_, r)| **r)
            .map(|(o, _)| o.id)
            .collect()
    }

    /// Ids of objects still on the shelf, in scene order.
    pub fn remaining(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.scene
            .objects()
            .iter()
            .zip(&self.removed)
            .filter(|(_, r)| !**r)
            .map(|(o, _)| o.id)
    }

    pub fn invalidate(&mut self, robot: RobotId, object: ObjectId) {
        self.invalid.insert((robot, object));
    }

    pub fn is_invalidated(&self, robot: RobotId, object: ObjectId) -> bool {
        self.invalid.contains(&(robot, object))
    }

    pub fn invalidated(&self) -> &BTreeSet<(RobotId, ObjectId)> {
        &self.invalid
    }

    fn center(&self, id: ObjectId) -> Point {
        self.scene
            .object(id)
            .expect("known object")
            .footprint
            .center
    }

    fn radius(&self, id: ObjectId) -> f64 {
        self.scene
            .object(id)
            .expect("known object")
            .footprint
            .radius
    }
}

/// True iff a disc of `moving_radius` swept along `from`-`to` touches no
/// remaining object outside `ignore`, and the path stays within the
/// workspace (open towards the front).
pub fn corridor_free(
    state: &SceneState<'_>,
    from: Point,
    to: Point,
    moving_radius: f64,
    ignore: &[ObjectId],
) -> bool {
    let ws = &state.scene.workspace;
    if !(ws.admits_through_front(from) && ws.admits_through_front(to)) {
        return false;
    }
    state
        .scene
        .objects()
        .iter()
        .zip(&state.removed)
        .filter(|(o, removed)| !**removed && !ignore.contains(&o.id))
        .all(|(o, _)| swept_clearance(from, to, moving_radius, &o.footprint) >= 0.0)
}

fn robot_edge(state: &SceneState<'_>, robot: &RobotSpec, object: ObjectId) -> bool {
    if state.is_invalidated(robot.id, object) {
        return false;
    }
    let center = state.center(object);
    robot.reaches(center)
        && corridor_free(
            state,
            robot.mount,
            center,
            state.scene.gripper_radius,
            &[object],
        )
}

fn object_edge(state: &SceneState<'_>, a: ObjectId, b: ObjectId) -> bool {
    let carried = state.radius(a).max(state.radius(b));
    corridor_free(
        state,
        state.center(a),
        state.center(b),
        state.scene.gripper_radius + carried,
        &[a, b],
    )
}

/// Whether `robot` can reach `object` straight from its mount on the current
/// state, i.e. the robot-object edge of its traversability graph exists.
pub fn accessible(state: &SceneState<'_>, robot: RobotId, object: ObjectId) -> bool {
    let Some(spec) = state.scene.robot(robot) else {
        return false;
    };
    state.is_present(object) && robot_edge(state, spec, object)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Robot(RobotId),
    Object(ObjectId),
}

impl std::fmt::Display for Node {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Node::Robot(r) => r.fmt(f),
            Node::Object(o) => o.fmt(f),
        }
    }
}

/// Traversability graph of one robot. Node 0 is the robot; object nodes
/// follow in ascending id order.
#[derive(Debug, Clone, PartialEq)]
pub struct TGraph {
    robot: RobotId,
    nodes: Vec<Node>,
    adjacency: Vec<Vec<usize>>,
}

impl TGraph {
    pub fn robot(&self) -> RobotId {
        self.robot
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_index(&self, node: Node) -> Option<usize> {
        match node {
            Node::Robot(r) if r == self.robot => Some(0),
            Node::Robot(_) => None,
            Node::Object(_) => self.nodes[1..].binary_search(&node).ok().map(|i| i + 1),
        }
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn has_edge(&self, a: Node, b: Node) -> bool {
        match (self.node_index(a), self.node_index(b)) {
            (Some(i), Some(j)) => self.adjacency[i].binary_search(&j).is_ok(),
            _ => false,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as node pairs with the lower index first.
    pub fn edges(&self) -> impl Iterator<Item = (Node, Node)> + '_ {
        self.adjacency.iter().enumerate().flat_map(move |(i, adj)| {
            adj.iter()
                .filter(move |&&j| j > i)
                .map(move |&j| (self.nodes[i], self.nodes[j]))
        })
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Entry {
            node: String,
            neighbors: Vec<String>,
        }
        #[derive(Serialize)]
        struct Wire {
            robot: RobotId,
            adjacency: Vec<Entry>,
        }
        let wire = Wire {
            robot: self.robot,
            adjacency: self
                .nodes
                .iter()
                .zip(&self.adjacency)
                .map(|(n, adj)| Entry {
                    node: n.to_string(),
                    neighbors: adj.iter().map(|&j| self.nodes[j].to_string()).collect(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&wire).expect("graph serializes");
        s.push('\n');
        s
    }
}

/// Builds the traversability graph of `robot` over the remaining objects.
///
/// Robot-object edges need the object within reach and a gripper-wide
/// corridor from the mount. Object-object edges need a corridor wide enough
/// for the gripper carrying the larger of the two objects. Invalidated
/// robot-object pairs have no edge.
pub fn build_tgraph(state: &SceneState<'_>, robot: RobotId) -> TGraph {
    let spec = state.scene.robot(robot).expect("robot id belongs to scene");
    let mut objects: Vec<ObjectId> = state.remaining().collect();
    objects.sort_unstable();
    let mut nodes = Vec::with_capacity(objects.len() + 1);
    nodes.push(Node::Robot(robot));
    nodes.extend(objects.iter().map(|&o| Node::Object(o)));

    let mut adjacency = vec![Vec::new(); nodes.len()];
    for (i, &a) in objects.iter().enumerate() {
        if robot_edge(state, spec, a) {
            adjacency[0].push(i + 1);
            adjacency[i + 1].push(0);
        }
        for (j, &b) in objects.iter().enumerate().skip(i + 1) {
            if object_edge(state, a, b) {
                adjacency[i + 1].push(j + 1);
                adjacency[j + 1].push(i + 1);
            }
        }
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    TGraph {
        robot,
        nodes,
        adjacency,
    }
}

/// Ordered objects one robot relocates to free the target; the target is
/// last.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelocationPlan {
    robot: RobotId,
    sequence: Vec<ObjectId>,
}

impl RelocationPlan {
    pub fn new(robot: RobotId, sequence: Vec<ObjectId>, target: ObjectId) -> Result<Self> {
        let fail = |m: &str| Err(Error::InvariantViolation(format!("relocation plan: {m}")));
        if sequence.last() != Some(&target) {
            return fail("must end with the target");
        }
        let distinct: BTreeSet<_> = sequence.iter().collect();
        if distinct.len() != sequence.len() {
            return fail("object ids must be distinct");
        }
        Ok(Self { robot, sequence })
    }

    pub fn robot(&self) -> RobotId {
        self.robot
    }

    pub fn sequence(&self) -> &[ObjectId] {
        &self.sequence
    }

    pub fn k(&self) -> usize {
        self.sequence.len()
    }

    pub fn target(&self) -> ObjectId {
        *self.sequence.last().expect("non-empty plan")
    }
}

/// Fewest-relocations plan: hop-shortest path from the robot node to the
/// target, choosing the lexicographically smallest object sequence among
/// equally short paths. `None` when the target is disconnected.
pub fn orp_plan(graph: &TGraph, target: ObjectId) -> Option<RelocationPlan> {
    let t = graph.node_index(Node::Object(target))?;
    let n = graph.nodes.len();
    let mut dist = vec![usize::MAX; n];
    dist[t] = 0;
    let mut queue = VecDeque::from([t]);
    while let Some(u) = queue.pop_front() {
        for &v in &graph.adjacency[u] {
            // paths may not pass through the robot node
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                if v != 0 {
                    queue.push_back(v);
                }
            }
        }
    }
    if dist[0] == usize::MAX {
        return None;
    }
    let mut sequence = Vec::with_capacity(dist[0]);
    let mut cur = 0;
    while cur != t {
        // adjacency is sorted by node index, which follows object id order
        cur = *graph.adjacency[cur]
            .iter()
            .find(|&&v| v != 0 && dist[v].checked_add(1) == Some(dist[cur]))
            .expect("BFS predecessor exists");
        match graph.nodes[cur] {
            Node::Object(o) => sequence.push(o),
            Node::Robot(_) => unreachable!(),
        }
    }
    Some(RelocationPlan {
        robot: graph.robot,
        sequence,
    })
}

/// ORP plans of both robots on `state`, in robot order.
pub fn plans_for_both(state: &SceneState<'_>) -> Vec<RelocationPlan> {
    let target = state.scene.target();
    state
        .scene
        .robot_ids()
        .iter()
        .filter_map(|&r| orp_plan(&build_tgraph(state, r), target))
        .collect()
}

/// Whether the target can ever be retrieved from `state` when every motion
/// succeeds. Removing objects never blocks a corridor, so greedily clearing
/// whatever is accessible decides this exactly.
pub fn retrievable(state: &SceneState<'_>) -> bool {
    let scene = state.scene;
    let target = scene.target();
    let robots = scene.robot_ids();
    let mut state = state.clone();
    loop {
        if robots.iter().any(|&r| accessible(&state, r, target)) {
            return true;
        }
        let next = state
            .remaining()
            .filter(|&o| o != target)
            .find(|&o| robots.iter().any(|&r| accessible(&state, r, o)));
        match next {
            Some(o) => state.remove(o),
            None => return false,
        }
    }
}
