use super::PedestrianState;
use crate::geometry::{Pose, Vec3};
use crate::scenario::{CameraMount, Waypoint};
use nalgebra::UnitQuaternion;

/// Pose of a camera mount at time `t` (seconds).
///
/// `pedestrians` is the current-tick world state; it is only consulted for
/// egocentric mounts, whose pedestrian is looked up by name.
pub fn step_camera(mount: &CameraMount, t: f64, pedestrians: &[PedestrianState]) -> Pose {
    match mount {
        CameraMount::Static { .. } => mount.static_pose().expect("static mount"),
        CameraMount::Drone { waypoints, speed } => drone_pose(waypoints, *speed, t),
        CameraMount::Egocentric { pedestrian, eye_offset } => {
            let ped = pedestrians
                .iter()
                .find(|p| &p.name == pedestrian)
                .expect("validated egocentric pedestrian");
            egocentric_pose(ped, eye_offset)
        }
    }
}

pub fn egocentric_pose(ped: &PedestrianState, eye_offset: &Vec3) -> Pose {
    let body = Pose::from_ypr(ped.position, ped.heading, 0.0, 0.0);
    body.compose(&Pose::new(*eye_offset, UnitQuaternion::identity()))
}

/// Constant-speed flight along the waypoint polyline, held at the last
/// waypoint. The aim comes from the waypoint being flown toward: either a
/// look-at point or a fixed pitch with yaw along the direction of travel.
fn drone_pose(waypoints: &[Waypoint], speed: f64, t: f64) -> Pose {
    let mut remaining = (speed * t).max(0.0);
    let last = waypoints.len() - 1;
    let mut segment = last - 1;
    let mut position = waypoints[last].position;
    for i in 0..last {
        let a = waypoints[i].position;
        let b = waypoints[i + 1].position;
        let len = (b - a).norm();
        if remaining <= len {
            segment = i;
            position = a + (b - a) * (remaining / len);
            break;
        }
        remaining -= len;
    }
    let destination = &waypoints[segment + 1];
    match (destination.look_at, destination.pitch_deg) {
        (Some(target), _) => Pose::looking_at(position, target),
        (None, pitch) => {
            let d = destination.position - waypoints[segment].position;
            let yaw = d.y.atan2(d.x);
            Pose::from_ypr(position, yaw, pitch.unwrap_or(0.0).to_radians(), 0.0)
        }
    }
}
