//! Fixed-timestep simulation producing a [`SimTrace`].
//!
//! Each tick advances every pedestrian and then poses every camera, so
//! egocentric cameras see the current-tick pedestrian pose. Tick 0 records
//! the initial state. Random controllers draw from per-pedestrian streams
//! keyed by `(seed, name)`.

mod camera;
mod pedestrian;

pub use camera::{egocentric_pose, step_camera};
pub use pedestrian::{
    init_pedestrian, select_random_goal, step_pedestrian, ControllerState, GoalRef, PedestrianState, ARRIVAL_RADIUS,
};

use crate::geometry::Pose;
use crate::rng::pedestrian_stream;
use crate::scenario::Scenario;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub frame: u32,
    pub timestamp_s: f64,
    /// In scenario pedestrian order.
    pub pedestrians: Vec<PedestrianState>,
    /// `(camera id, pose)` in scenario camera order.
    pub cameras: Vec<(String, Pose)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub scenario: String,
    pub fps: f64,
    pub seed: u64,
    pub ticks: Vec<TickRecord>,
}

impl SimTrace {
    pub fn camera_pose(&self, tick: usize, camera_id: &str) -> Option<&Pose> {
        self.ticks[tick]
            .cameras
            .iter()
            .find(|(id, _)| id == camera_id)
            .map(|(_, p)| p)
    }
}

/// Runs a validated scenario for `duration_frames` ticks.
pub fn run_simulation(scenario: &Scenario) -> SimTrace {
    let dt = scenario.dt();
    let mut rngs: Vec<_> = scenario
        .pedestrians
        .iter()
        .map(|p| pedestrian_stream(scenario.seed, &p.name))
        .collect();
    let mut states: Vec<PedestrianState> = scenario
        .pedestrians
        .iter()
        .zip(rngs.iter_mut())
        .map(|(spec, rng)| init_pedestrian(spec, scenario, rng))
        .collect();

    let mut ticks = Vec::with_capacity(scenario.duration_frames as usize);
    for frame in 0..scenario.duration_frames {
        if frame > 0 {
            for ((state, spec), rng) in states.iter_mut().zip(&scenario.pedestrians).zip(rngs.iter_mut()) {
                *state = step_pedestrian(state, spec, scenario, dt, rng);
            }
        }
        let t = f64::from(frame) / scenario.fps;
        let cameras = scenario
            .cameras
            .iter()
            .map(|c| (c.id.clone(), step_camera(&c.mount, t, &states)))
            .collect();
        ticks.push(TickRecord {
            frame,
            timestamp_s: t,
            pedestrians: states.clone(),
            cameras,
        });
    }

    SimTrace {
        scenario: scenario.name.clone(),
        fps: scenario.fps,
        seed: scenario.seed,
        ticks,
    }
}

#[derive(Serialize)]
struct TraceTickRecord<'a> {
    frame: u32,
    timestamp_s: f64,
    pedestrians: &'a [PedestrianState],
    cameras: Vec<(&'a str, Pose)>,
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    format_version: u32,
    scenario: &'a str,
    fps: f64,
    seed: u64,
    ticks: Vec<TraceTickRecord<'a>>,
}

/// Diagnostics dump of a trace as JSON.
pub fn trace_to_json(trace: &SimTrace) -> String {
    let record = TraceRecord {
        format_version: 1,
        scenario: &trace.scenario,
        fps: trace.fps,
        seed: trace.seed,
        ticks: trace
            .ticks
            .iter()
            .map(|t| TraceTickRecord {
                frame: t.frame,
                timestamp_s: t.timestamp_s,
                pedestrians: &t.pedestrians,
                cameras: t.cameras.iter().map(|(id, p)| (id.as_str(), *p)).collect(),
            })
            .collect(),
    };
    serde_json::to_string(&record).expect("trace serializes")
}
