//! Assigning each relocation of a plan to one of the two robots.
//!
//! [`search_allocate`] is the optimal uniform-cost search over assignment
//! prefixes; [`brute_force_allocate`] enumerates every assignment string and
//! serves as its oracle. The online policies in [`online`] decide one step
//! at a time: the turn-taking greedy rule and the distance and random
//! baselines.

mod brute;
pub mod online;
mod search;

use serde::Serialize;
use thiserror::Error;

pub use brute::{brute_force_allocate, replay_feasible, BRUTE_FORCE_MAX_K};
pub use online::{
    clearing_move, distance_allocate, greedy_allocate, random_allocate, select_plan, Decision,
    OnlineAllocator, OnlineSteps, Policy, Step, StepRule,
};
pub use search::{search_allocate, search_allocate_after, SearchNode, SearchOutcome, TraceEntry};

use crate::scene::RobotId;
pub use crate::traversability::accessible;
use crate::traversability::RelocationPlan;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllocError {
    #[error("search budget of {budget} expansions exhausted")]
    ExhaustedBudget { budget: usize },
    #[error("no feasible allocation for any plan")]
    NoFeasibleAllocation {
        partial: Option<PartialAllocation>,
        expansions: usize,
        accessibility_checks: u64,
    },
    #[error("plan of length {k} exceeds the enumeration cap of {cap}")]
    InstanceTooLarge { k: usize, cap: usize },
    #[error("no robot can access any remaining object")]
    NoAccessibleObject,
    #[error("no relocation plan reaches the target")]
    NoPlan,
}

/// Deepest assignment prefix reached by a search that found no complete
/// allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialAllocation {
    pub plan: RelocationPlan,
    pub assignees: Vec<RobotId>,
}

/// Number of adjacent pairs handled by different robots, and that count as
/// a percentage of the `k - 1` opportunities (`None` when `k = 1`).
pub fn count_turn_takings(assignees: &[RobotId]) -> (u32, Option<f64>) {
    let t = assignees.windows(2).filter(|w| w[0] != w[1]).count() as u32;
    let rate = (assignees.len() >= 2).then(|| 100.0 * t as f64 / (assignees.len() - 1) as f64);
    (t, rate)
}

/// A plan together with the robot relocating each of its objects.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    plan: RelocationPlan,
    assignees: Vec<RobotId>,
    penalty: u32,
    turn_takings: u32,
}

impl Allocation {
    /// Panics if `assignees` does not cover the plan exactly.
    pub fn new(plan: RelocationPlan, assignees: Vec<RobotId>) -> Self {
        assert_eq!(plan.k(), assignees.len(), "one assignee per planned object");
        let (turn_takings, _) = count_turn_takings(&assignees);
        let penalty = (assignees.len() as u32 - 1) - turn_takings;
        Self {
            plan,
            assignees,
            penalty,
            turn_takings,
        }
    }

    pub fn plan(&self) -> &RelocationPlan {
        &self.plan
    }

    pub fn assignees(&self) -> &[RobotId] {
        &self.assignees
    }

    pub fn penalty(&self) -> u32 {
        self.penalty
    }

    pub fn turn_takings(&self) -> u32 {
        self.turn_takings
    }

    pub fn rate(&self) -> Option<f64> {
        count_turn_takings(&self.assignees).1
    }

    /// `(object, robot)` pairs in execution order.
    pub fn tasks(&self) -> Vec<(crate::scene::ObjectId, RobotId)> {
        self.plan
            .sequence()
            .iter()
            .copied()
            .zip(self.assignees.iter().copied())
            .collect()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Wire<'a> {
            plan: &'a [crate::scene::ObjectId],
            assignees: &'a [RobotId],
            penalty: u32,
            turn_takings: u32,
            rate: Option<f64>,
        }
        let mut s = serde_json::to_string_pretty(&Wire {
            plan: self.plan.sequence(),
            assignees: &self.assignees,
            penalty: self.penalty,
            turn_takings: self.turn_takings,
            rate: self.rate(),
        })
        .expect("allocation serializes");
        s.push('\n');
        s
    }
}
