use super::{AllocError, Allocation};
use crate::scene::RobotId;
use crate::traversability::{accessible, RelocationPlan, SceneState};

/// Longest plan [`brute_force_allocate`] will enumerate.
pub const BRUTE_FORCE_MAX_K: usize = 12;

/// Replays an assignment on `state`: each robot must be able to access its
/// object once all earlier objects are gone.
pub fn replay_feasible(
    state: &SceneState<'_>,
    plan: &RelocationPlan,
    assignees: &[RobotId],
) -> bool {
    let mut local = state.clone();
    for (&object, &robot) in plan.sequence().iter().zip(assignees) {
        if !accessible(&local, robot, object) {
            return false;
        }
        local.remove(object);
    }
    true
}

/// Enumerates all `2^k` assignment strings of every plan and returns a
/// feasible one with minimum penalty. Ties go to the earlier plan, then to
/// the lexicographically smaller string with the first robot first.
pub fn brute_force_allocate(
    state: &SceneState<'_>,
    plans: &[RelocationPlan],
) -> Result<Allocation, AllocError> {
    if plans.is_empty() {
        return Err(AllocError::NoPlan);
    }
    if let Some(p) = plans.iter().find(|p| p.k() > BRUTE_FORCE_MAX_K) {
        return Err(AllocError::InstanceTooLarge {
            k: p.k(),
            cap: BRUTE_FORCE_MAX_K,
        });
    }
    let robots = state.scene().robot_ids();
    let mut best: Option<Allocation> = None;
    for plan in plans {
        let k = plan.k();
        for mask in 0u32..(1 << k) {
            let assignees: Vec<RobotId> = (0..k)
                .map(|i| robots[((mask >> (k - 1 - i)) & 1) as usize])
                .collect();
            if !replay_feasible(state, plan, &assignees) {
                continue;
            }
            let candidate = Allocation::new(plan.clone(), assignees);
            if best
                .as_ref()
                .is_none_or(|b| candidate.penalty() < b.penalty())
            {
                best = Some(candidate);
            }
        }
    }
    best.ok_or(AllocError::NoFeasibleAllocation {
        partial: None,
        expansions: 0,
        accessibility_checks: 0,
    })
}
