use crate::geometry::Vec3;
use crate::scenario::{Controller, EndBehavior, PedestrianSpec, Scenario};
use rand::Rng;
use serde::Serialize;

/// A pedestrian counts as arrived when within this distance of its goal.
/// Must exceed the largest per-tick displacement.
pub const ARRIVAL_RADIUS: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum GoalRef {
    /// Index into `Scenario::target_points`.
    Target(usize),
    /// Vertex index on the followed path.
    PathVertex(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ControllerState {
    Random {
        current_goal: usize,
    },
    /// `cursor` indexes the pedestrian's owned goals sorted by creation index.
    Customized {
        cursor: usize,
        direction: i8,
    },
    FollowPath {
        vertex: usize,
        direction: i8,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PedestrianState {
    pub name: String,
    pub position: Vec3,
    /// Yaw toward the active goal, radians from north.
    pub heading: f64,
    pub controller: ControllerState,
    /// Set once a `stop` controller has run out of goals; position is held.
    pub terminal: bool,
    /// Goal reached during the most recent step, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reached: Option<GoalRef>,
}

impl PedestrianState {
    /// The goal currently walked toward.
    pub fn active_goal(&self, spec: &PedestrianSpec, scenario: &Scenario) -> GoalRef {
        match &self.controller {
            ControllerState::Random { current_goal } => GoalRef::Target(*current_goal),
            ControllerState::Customized { cursor, .. } => GoalRef::Target(scenario.owned_goals(&spec.name)[*cursor]),
            ControllerState::FollowPath { vertex, .. } => GoalRef::PathVertex(*vertex),
        }
    }
}

fn goal_position(goal: GoalRef, spec: &PedestrianSpec, scenario: &Scenario) -> Vec3 {
    match goal {
        GoalRef::Target(i) => scenario.target_points[i].position,
        GoalRef::PathVertex(v) => {
            let Controller::FollowPath { path, .. } = &spec.controller else {
                unreachable!("path vertex goal on a non-path controller")
            };
            scenario.path(path).expect("validated path").vertices[v]
        }
    }
}

/// Uniform choice among `candidates`, skipping `exclude` when another
/// option exists.
pub fn select_random_goal<R: Rng + ?Sized>(candidates: &[usize], exclude: Option<usize>, rng: &mut R) -> usize {
    let eligible: Vec<usize> = candidates.iter().copied().filter(|&c| Some(c) != exclude).collect();
    if eligible.is_empty() {
        return candidates[0];
    }
    eligible[rng.random_range(0..eligible.len())]
}

/// Next index in a sequence of `len` goals. `None` means the sequence ended
/// with `stop`.
fn advance(index: usize, direction: i8, len: usize, end: EndBehavior) -> Option<(usize, i8)> {
    let next = index as isize + direction as isize;
    if (0..len as isize).contains(&next) {
        return Some((next as usize, direction));
    }
    match end {
        EndBehavior::Loop => Some((if direction > 0 { 0 } else { len - 1 }, direction)),
        EndBehavior::Reverse => {
            let flipped = -direction;
            let back = index as isize + flipped as isize;
            if (0..len as isize).contains(&back) {
                Some((back as usize, flipped))
            } else {
                Some((index, flipped))
            }
        }
        EndBehavior::Stop => None,
    }
}

fn yaw_toward(from: &Vec3, to: &Vec3, fallback: f64) -> f64 {
    let d = to - from;
    if d.x == 0.0 && d.y == 0.0 {
        fallback
    } else {
        d.y.atan2(d.x)
    }
}

fn path_end_behavior(spec: &PedestrianSpec, scenario: &Scenario) -> (usize, EndBehavior) {
    let Controller::FollowPath { path, end_behavior } = &spec.controller else {
        unreachable!()
    };
    let path = scenario.path(path).expect("validated path");
    (path.vertices.len(), end_behavior.unwrap_or(path.end_behavior))
}

/// Initial state at the spawn point. Random controllers draw their first
/// goal from `rng`.
pub fn init_pedestrian<R: Rng + ?Sized>(spec: &PedestrianSpec, scenario: &Scenario, rng: &mut R) -> PedestrianState {
    let controller = match &spec.controller {
        Controller::Random { area } => ControllerState::Random {
            current_goal: select_random_goal(&scenario.area_goals(area), None, rng),
        },
        Controller::Customized { .. } => ControllerState::Customized {
            cursor: 0,
            direction: 1,
        },
        Controller::FollowPath { .. } => ControllerState::FollowPath {
            vertex: 0,
            direction: 1,
        },
    };
    let mut state = PedestrianState {
        name: spec.name.clone(),
        position: spec.spawn,
        heading: 0.0,
        controller,
        terminal: false,
        reached: None,
    };
    let goal = goal_position(state.active_goal(spec, scenario), spec, scenario);
    state.heading = yaw_toward(&state.position, &goal, 0.0);
    state
}

/// Advances one pedestrian by `dt` seconds.
///
/// A pedestrian within [`ARRIVAL_RADIUS`] of its goal selects the next goal
/// and does not move this tick; otherwise it walks straight toward the goal
/// by at most `speed * dt`.
pub fn step_pedestrian<R: Rng + ?Sized>(
    state: &PedestrianState,
    spec: &PedestrianSpec,
    scenario: &Scenario,
    dt: f64,
    rng: &mut R,
) -> PedestrianState {
    let mut next = state.clone();
    next.reached = None;
    if state.terminal {
        return next;
    }
    let goal = state.active_goal(spec, scenario);
    let target = goal_position(goal, spec, scenario);
    let offset = target - state.position;
    let distance = offset.norm();

    if distance <= ARRIVAL_RADIUS {
        next.reached = Some(goal);
        match (&state.controller, &spec.controller) {
            (ControllerState::Random { current_goal }, Controller::Random { area }) => {
                next.controller = ControllerState::Random {
                    current_goal: select_random_goal(&scenario.area_goals(area), Some(*current_goal), rng),
                };
            }
            (ControllerState::Customized { cursor, direction }, Controller::Customized { end_behavior }) => {
                let len = scenario.owned_goals(&spec.name).len();
                match advance(*cursor, *direction, len, *end_behavior) {
                    Some((cursor, direction)) => next.controller = ControllerState::Customized { cursor, direction },
                    None => next.terminal = true,
                }
            }
            (ControllerState::FollowPath { vertex, direction }, Controller::FollowPath { .. }) => {
                let (len, end) = path_end_behavior(spec, scenario);
                match advance(*vertex, *direction, len, end) {
                    Some((vertex, direction)) => next.controller = ControllerState::FollowPath { vertex, direction },
                    None => next.terminal = true,
                }
            }
            _ => unreachable!("controller state does not match its spec"),
        }
        if !next.terminal {
            let new_goal = goal_position(next.active_goal(spec, scenario), spec, scenario);
            next.heading = yaw_toward(&next.position, &new_goal, state.heading);
        }
        return next;
    }

    let step = (spec.speed * dt).min(distance);
    next.position = state.position + offset * (step / distance);
    next.heading = yaw_toward(&state.position, &target, state.heading);
    next
}
