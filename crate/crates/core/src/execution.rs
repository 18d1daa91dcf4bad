//! The mission loop, which interleaves planning with execution and replans
//! after motion failures.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::allocation::{
    clearing_move, online::StepRule, search_allocate_after, AllocError, Allocation, Decision,
    OnlineAllocator, Policy,
};
use crate::scene::{ObjectId, RobotId, Scene};
use crate::sequencing::sequence_tasks;
use crate::traversability::{accessible, plans_for_both, RelocationPlan, SceneState};

/// Allocation method driving a mission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Search,
    Greedy,
    Distance,
    Random,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Search,
        Method::Greedy,
        Method::Distance,
        Method::Random,
    ];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Search => "search",
            Method::Greedy => "greedy",
            Method::Distance => "distance",
            Method::Random => "random",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "search" => Ok(Method::Search),
            "greedy" => Ok(Method::Greedy),
            "distance" => Ok(Method::Distance),
            "random" => Ok(Method::Random),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

/// Stand-in for motion planning: decides whether a robot's attempt to
/// relocate an object succeeds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum FeasibilityOracle {
    #[default]
    AlwaysFeasible,
    Blacklist {
        pairs: BTreeSet<(RobotId, ObjectId)>,
    },
    SeededRandom {
        p_fail: f64,
        seed: u64,
    },
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl FeasibilityOracle {
    /// Deterministic in `(robot, object, removed set)` for a given oracle.
    pub fn feasible(&self, robot: RobotId, object: ObjectId, state: &SceneState<'_>) -> bool {
        match self {
            FeasibilityOracle::AlwaysFeasible => true,
            FeasibilityOracle::Blacklist { pairs } => !pairs.contains(&(robot, object)),
            FeasibilityOracle::SeededRandom { p_fail, seed } => {
                let mut h = splitmix64(*seed ^ (u64::from(robot.0) << 32) ^ u64::from(object.0));
                for removed in state.removed() {
                    h = splitmix64(h ^ u64::from(removed.0));
                }
                let u = (h >> 11) as f64 / (1u64 << 53) as f64;
                u >= *p_fail
            }
        }
    }
}

impl FromStr for FeasibilityOracle {
    type Err = String;

    /// `always`, `blacklist:R-O,R-O,...` or `random:P_FAIL:SEED`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || {
            format!("invalid oracle `{s}` (expected always | blacklist:R-O,... | random:P:SEED)")
        };
        match s.split_once(':') {
            None if s == "always" => Ok(FeasibilityOracle::AlwaysFeasible),
            Some(("blacklist", list)) => {
                let mut pairs = BTreeSet::new();
                for item in list.split(',').filter(|i| !i.is_empty()) {
                    let (r, o) = item.split_once('-').ok_or_else(bad)?;
                    let r = r.trim_start_matches('r').parse().map_err(|_| bad())?;
                    let o = o.trim_start_matches('o').parse().map_err(|_| bad())?;
                    pairs.insert((RobotId(r), ObjectId(o)));
                }
                Ok(FeasibilityOracle::Blacklist { pairs })
            }
            Some(("random", rest)) => {
                let (p, seed) = rest.split_once(':').ok_or_else(bad)?;
                let p_fail: f64 = p.parse().map_err(|_| bad())?;
                if !(0.0..=1.0).contains(&p_fail) {
                    return Err(bad());
                }
                Ok(FeasibilityOracle::SeededRandom {
                    p_fail,
                    seed: seed.parse().map_err(|_| bad())?,
                })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionConfig {
    pub method: Method,
    pub oracle: FeasibilityOracle,
    /// Cap on search node expansions over the whole mission.
    pub budget: usize,
    /// Seed of the random baseline's coin.
    pub random_seed: u64,
}

impl MissionConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            oracle: FeasibilityOracle::AlwaysFeasible,
            budget: 100_000,
            random_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "kebab-case")]
pub enum FailureReason {
    InfeasibleInstance(String),
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Relocation {
    pub object: ObjectId,
    pub robot: RobotId,
}

/// A motion failure reported by the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FailedAttempt {
    pub robot: RobotId,
    pub object: ObjectId,
    /// Relocations completed before the attempt.
    pub after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissionLog {
    pub success: bool,
    pub failure: Option<FailureReason>,
    pub relocations: Vec<Relocation>,
    pub failures: Vec<FailedAttempt>,
    pub replanning_count: usize,
    /// Plan recomputations not caused by motion failures.
    pub plan_refreshes: usize,
    /// Relocations made while no plan reached the target.
    pub clearing_moves: usize,
    pub makespan: f64,
    pub expansions: usize,
    pub oracle_calls: usize,
    pub accessibility_checks: u64,
    /// Owner of the last adopted relocation plan.
    pub plan_owner: Option<RobotId>,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl MissionLog {
    fn new() -> Self {
        Self {
            success: false,
            failure: None,
            relocations: Vec::new(),
            failures: Vec::new(),
            replanning_count: 0,
            plan_refreshes: 0,
            clearing_moves: 0,
            makespan: 0.0,
            expansions: 0,
            oracle_calls: 0,
            accessibility_checks: 0,
            plan_owner: None,
            wall_time_s: 0.0,
        }
    }

    pub fn tasks(&self) -> Vec<(ObjectId, RobotId)> {
        self.relocations
            .iter()
            .map(|r| (r.object, r.robot))
            .collect()
    }

    pub fn assignees(&self) -> Vec<RobotId> {
        self.relocations.iter().map(|r| r.robot).collect()
    }

    /// Machine-independent planning effort: search expansions, accessibility
    /// evaluations and oracle queries.
    pub fn planning_work(&self) -> u64 {
        self.expansions as u64 + self.accessibility_checks + self.oracle_calls as u64
    }

    /// The executed relocation chain as an allocation (successful missions).
    pub fn allocation(&self, scene: &Scene) -> Option<Allocation> {
        if !self.success {
            return None;
        }
        let plan = RelocationPlan::new(
            self.plan_owner?,
            self.relocations.iter().map(|r| r.object).collect(),
            scene.target(),
        )
        .ok()?;
        Some(Allocation::new(plan, self.assignees()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("log serializes");
        s.push('\n');
        s
    }
}

enum Attempt {
    Done,
    Failed,
}

fn attempt(
    log: &mut MissionLog,
    state: &mut SceneState<'_>,
    oracle: &FeasibilityOracle,
    object: ObjectId,
    robot: RobotId,
) -> Option<Attempt> {
    log.oracle_calls += 1;
    if !oracle.feasible(robot, object, state) {
        log.failures.push(FailedAttempt {
            robot,
            object,
            after: log.relocations.len(),
        });
        log.replanning_count += 1;
        state.invalidate(robot, object);
        return Some(Attempt::Failed);
    }
    state.remove(object);
    log.relocations.push(Relocation { object, robot });
    (object == state.scene().target()).then_some(Attempt::Done)
}

/// Runs one retrieval mission to completion or failure.
pub fn run_mission(scene: &Scene, config: &MissionConfig) -> MissionLog {
    let started = Instant::now();
    let mut log = MissionLog::new();
    let mut state = SceneState::new(scene);
    let outcome = match config.method {
        Method::Search => run_search(&mut log, &mut state, config),
        Method::Greedy => run_online(&mut log, &mut state, config, Policy::Greedy),
        Method::Distance => run_online(&mut log, &mut state, config, Policy::Distance),
        Method::Random => run_online(
            &mut log,
            &mut state,
            config,
            Policy::random(config.random_seed),
        ),
    };
    match outcome {
        Ok(()) => log.success = true,
        Err(reason) => log.failure = Some(reason),
    }
    log.makespan = sequence_tasks(scene, &log.tasks()).makespan;
    log.wall_time_s = started.elapsed().as_secs_f64();
    log
}

fn infeasible(e: impl fmt::Display) -> FailureReason {
    FailureReason::InfeasibleInstance(e.to_string())
}

fn last_robot(log: &MissionLog) -> Option<RobotId> {
    log.relocations.last().map(|r| r.robot)
}

fn run_search(
    log: &mut MissionLog,
    state: &mut SceneState<'_>,
    config: &MissionConfig,
) -> Result<(), FailureReason> {
    'replan: loop {
        let plans = plans_for_both(state);
        if plans.is_empty() {
            // the target is cut off; relocate something reachable and retry
            let (pair, checks) = clearing_move(state, last_robot(log));
            log.accessibility_checks += checks;
            let (object, robot) = pair.ok_or_else(|| infeasible(AllocError::NoAccessibleObject))?;
            log.clearing_moves += 1;
            attempt(log, state, &config.oracle, object, robot);
            continue;
        }
        let remaining = config.budget.saturating_sub(log.expansions);
        let (owner, tasks) = match search_allocate_after(state, &plans, remaining, last_robot(log))
        {
            Ok(out) => {
                log.expansions += out.expansions;
                log.accessibility_checks += out.accessibility_checks;
                (out.allocation.plan().robot(), out.allocation.tasks())
            }
            Err(AllocError::ExhaustedBudget { .. }) => {
                log.expansions = config.budget;
                return Err(FailureReason::BudgetExhausted);
            }
            Err(AllocError::NoFeasibleAllocation {
                partial: Some(partial),
                expansions,
                accessibility_checks,
            }) => {
                // execute the reachable prefix, then plan again on the emptier scene
                log.expansions += expansions;
                log.accessibility_checks += accessibility_checks;
                log.plan_refreshes += 1;
                let tasks = partial
                    .plan
                    .sequence()
                    .iter()
                    .copied()
                    .zip(partial.assignees.iter().copied())
                    .collect();
                (partial.plan.robot(), tasks)
            }
            Err(e) => return Err(infeasible(e)),
        };
        log.plan_owner = Some(owner);
        for (object, robot) in tasks {
            match attempt(log, state, &config.oracle, object, robot) {
                Some(Attempt::Done) => return Ok(()),
                Some(Attempt::Failed) => continue 'replan,
                None => {}
            }
        }
    }
}

fn run_online(
    log: &mut MissionLog,
    state: &mut SceneState<'_>,
    config: &MissionConfig,
    policy: Policy,
) -> Result<(), FailureReason> {
    let mut allocator = OnlineAllocator::new(policy);
    let result = loop {
        match allocator.decide(state) {
            Ok(Decision::Replan) => log.plan_refreshes += 1,
            Ok(Decision::Relocate(step)) => {
                if step.rule == StepRule::Clearing {
                    log.clearing_moves += 1;
                }
                log.plan_owner = allocator.plan().map(|p| p.robot()).or(log.plan_owner);
                match attempt(log, state, &config.oracle, step.object, step.robot) {
                    Some(Attempt::Done) => break Ok(()),
                    Some(Attempt::Failed) => allocator.invalidate_plan(),
                    None => allocator.executed(&step),
                }
            }
            Err(e) => break Err(infeasible(e)),
        }
    };
    log.accessibility_checks += allocator.accessibility_checks();
    result
}

/// Re-executes a log on a fresh copy of the scene, applying each recorded
/// failure as an edge invalidation at the point it happened, and checks
/// that every relocation was accessible when executed. Returns the objects
/// removed at the end.
pub fn replay(scene: &Scene, log: &MissionLog) -> Result<BTreeSet<ObjectId>, String> {
    let mut state = SceneState::new(scene);
    let mut failures = log.failures.iter().peekable();
    for (i, r) in log.relocations.iter().enumerate() {
        while let Some(f) = failures.next_if(|f| f.after <= i) {
            state.invalidate(f.robot, f.object);
        }
        if !accessible(&state, r.robot, r.object) {
            return Err(format!(
                "relocation {i}: {} cannot access {}",
                r.robot, r.object
            ));
        }
        state.remove(r.object);
    }
    if log.success && log.relocations.last().map(|r| r.object) != Some(scene.target()) {
        return Err("successful log does not end with the target".into());
    }
    Ok(state.removed().into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_parsing() {
        assert_eq!(
            "always".parse::<FeasibilityOracle>().unwrap(),
            FeasibilityOracle::AlwaysFeasible
        );
        let b: FeasibilityOracle = "blacklist:r1-o3,2-5".parse().unwrap();
        assert_eq!(
            b,
            FeasibilityOracle::Blacklist {
                pairs: [(RobotId(1), ObjectId(3)), (RobotId(2), ObjectId(5))].into()
            }
        );
        assert_eq!(
            "random:0.2:9".parse::<FeasibilityOracle>().unwrap(),
            FeasibilityOracle::SeededRandom {
                p_fail: 0.2,
                seed: 9
            }
        );
        assert!("random:1.5:9".parse::<FeasibilityOracle>().is_err());
        assert!("sometimes".parse::<FeasibilityOracle>().is_err());
    }

    #[test]
    fn method_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
    }
}
