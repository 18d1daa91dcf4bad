use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{AllocError, Allocation, PartialAllocation};
use crate::scene::{ObjectId, RobotId};
use crate::traversability::{accessible, RelocationPlan, SceneState};

/// A node of the allocation search tree.
///
/// The root has depth 0 and is not stored; its children (depth 1) pick one
/// of the input plans without relocating anything. Each deeper level
/// relocates the next object of the chosen plan, so `depth == prefix.len() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchNode {
    pub plan_choice: usize,
    pub depth: usize,
    pub prefix: Vec<RobotId>,
    /// Accumulated penalty: adjacent equal assignees in `prefix`.
    pub g: u32,
    pub gen_index: u64,
}

impl SearchNode {
    /// Objects already relocated at this node.
    pub fn removed<'p>(&self, plans: &'p [RelocationPlan]) -> &'p [ObjectId] {
        &plans[self.plan_choice].sequence()[..self.prefix.len()]
    }
}

/// One line of the expansion log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEntry {
    pub gen_index: u64,
    pub depth: usize,
    pub g: u32,
}

impl std::fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {}", self.gen_index, self.depth, self.g)
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub allocation: Allocation,
    /// Nodes chosen for expansion, the goal node excluded.
    pub expansions: usize,
    pub generated: u64,
    pub accessibility_checks: u64,
    pub trace: Vec<TraceEntry>,
}

/// Uniform-cost search for the assignment with the fewest consecutive
/// same-robot relocations.
///
/// The frontier pops the lowest `g`, ties going to the node generated
/// first. A node is recognised as the goal only when popped. `budget` caps
/// the number of expansions.
pub fn search_allocate(
    state: &SceneState<'_>,
    plans: &[RelocationPlan],
    budget: usize,
) -> Result<SearchOutcome, AllocError> {
    search_allocate_after(state, plans, budget, None)
}

/// [`search_allocate`] continuing a mission whose last relocation was made
/// by `previous`: assigning the first task to that robot again costs one.
pub fn search_allocate_after(
    state: &SceneState<'_>,
    plans: &[RelocationPlan],
    budget: usize,
    previous: Option<RobotId>,
) -> Result<SearchOutcome, AllocError> {
    if plans.is_empty() {
        return Err(AllocError::NoPlan);
    }
    let robots = state.scene().robot_ids();
    let mut nodes: Vec<SearchNode> = Vec::new();
    let mut frontier: BinaryHeap<Reverse<(u32, u64, usize)>> = BinaryHeap::new();
    let mut generated: u64 = 0;

    // gen_index 0 is the root
    for (i, _) in plans.iter().enumerate() {
        generated += 1;
        nodes.push(SearchNode {
            plan_choice: i,
            depth: 1,
            prefix: Vec::new(),
            g: 0,
            gen_index: generated,
        });
        frontier.push(Reverse((0, generated, nodes.len() - 1)));
    }

    let mut trace = Vec::new();
    let mut expansions = 0;
    let mut accessibility_checks = 0;
    while let Some(Reverse((_, _, id))) = frontier.pop() {
        let node = nodes[id].clone();
        let plan = &plans[node.plan_choice];
        let is_goal = node.prefix.len() == plan.k();
        if !is_goal && expansions >= budget {
            return Err(AllocError::ExhaustedBudget { budget });
        }
        trace.push(TraceEntry {
            gen_index: node.gen_index,
            depth: node.depth,
            g: node.g,
        });
        if is_goal {
            return Ok(SearchOutcome {
                allocation: Allocation::new(plan.clone(), node.prefix),
                expansions,
                generated,
                accessibility_checks,
                trace,
            });
        }
        expansions += 1;

        let mut local = state.clone();
        for &o in node.removed(plans) {
            local.remove(o);
        }
        let next = plan.sequence()[node.prefix.len()];
        for &robot in &robots {
            accessibility_checks += 1;
            if !accessible(&local, robot, next) {
                continue;
            }
            let last = node.prefix.last().copied().or(previous);
            let step = u32::from(last == Some(robot));
            let mut prefix = node.prefix.clone();
            prefix.push(robot);
            generated += 1;
            nodes.push(SearchNode {
                plan_choice: node.plan_choice,
                depth: node.depth + 1,
                prefix,
                g: node.g + step,
                gen_index: generated,
            });
            frontier.push(Reverse((node.g + step, generated, nodes.len() - 1)));
        }
    }

    let partial = nodes
        .iter()
        .filter(|n| !n.prefix.is_empty())
        .min_by_key(|n| (Reverse(n.prefix.len()), n.g, n.gen_index))
        .map(|n| PartialAllocation {
            plan: plans[n.plan_choice].clone(),
            assignees: n.prefix.clone(),
        });
    Err(AllocError::NoFeasibleAllocation {
        partial,
        expansions,
        accessibility_checks,
    })
}
