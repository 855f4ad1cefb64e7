//! Per-camera ground truth: boxes, visibility, 3D positions and instance
//! masks, plus the JSON annotation file.
//!
//! Pedestrian ids are the 1-based ordinal of the sorted pedestrian names, so
//! they agree across every frame and camera of a scenario. Entries whose
//! visibility is zero are left out of a frame's list. An egocentric camera
//! never annotates (or is occluded by) the pedestrian carrying it.

mod mask;
mod project;
mod raycast;

pub use mask::{render_instance_mask, InstanceMask, LabelOverflow};
pub use project::{
    compute_visibility, cylinder_samples, project_pedestrian, rim_azimuths, BodySample, Occluders,
    PedestrianProjection, RIM_SAMPLES, SAMPLE_COUNT,
};
pub use raycast::{Aabb, Cylinder};

use crate::bbox::BBox2D;
use crate::geometry::{relative_to_initial, CameraIntrinsics, Pose};
use crate::scenario::{CameraMount, CameraSpec, Scenario};
use crate::sim::{PedestrianState, SimTrace};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PedestrianAnnotation {
    pub id: u32,
    pub name: String,
    /// Feet position in world coordinates.
    pub position_3d: [f64; 3],
    pub distance_m: f64,
    pub bbox: BBox2D,
    pub visibility: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameAnnotation {
    pub frame: u32,
    pub timestamp_s: f64,
    pub camera_pose_world: Pose,
    pub camera_pose_relative_initial: Pose,
    pub pedestrians: Vec<PedestrianAnnotation>,
}

/// Intrinsics as written to disk, with the derived focal lengths and
/// principal point spelled out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntrinsicsRecord {
    width: u32,
    height: u32,
    hfov_rad: f64,
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
}

impl From<CameraIntrinsics> for IntrinsicsRecord {
    fn from(k: CameraIntrinsics) -> Self {
        Self {
            width: k.width,
            height: k.height,
            hfov_rad: k.hfov_rad,
            fx: k.fx(),
            fy: k.fy(),
            cx: k.cx(),
            cy: k.cy(),
        }
    }
}

impl TryFrom<IntrinsicsRecord> for CameraIntrinsics {
    type Error = String;

    fn try_from(r: IntrinsicsRecord) -> Result<Self, String> {
        let k = CameraIntrinsics::new(r.width, r.height, r.hfov_rad);
        if !k.is_valid() {
            return Err(format!(
                "invalid intrinsics {}x{} hfov {}",
                r.width, r.height, r.hfov_rad
            ));
        }
        let derived = [k.fx(), k.fy(), k.cx(), k.cy()];
        let stored = [r.fx, r.fy, r.cx, r.cy];
        if derived
            .iter()
            .zip(&stored)
            .any(|(a, b)| (a - b).abs() > 1e-6 * a.abs().max(1.0))
        {
            return Err("fx/fy/cx/cy disagree with width, height and hfov_rad".into());
        }
        Ok(k)
    }
}

/// One camera's annotations for a whole scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationFile {
    pub format_version: u32,
    pub scenario: String,
    pub camera_id: String,
    pub fps: f64,
    pub seed: u64,
    #[serde(with = "intrinsics_record")]
    pub intrinsics: CameraIntrinsics,
    pub frames: Vec<FrameAnnotation>,
}

mod intrinsics_record {
    use super::IntrinsicsRecord;
    use crate::geometry::CameraIntrinsics;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(k: &CameraIntrinsics, s: S) -> Result<S::Ok, S::Error> {
        IntrinsicsRecord::from(*k).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CameraIntrinsics, D::Error> {
        IntrinsicsRecord::deserialize(d)?.try_into().map_err(D::Error::custom)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AnnotationError {
    #[error("unknown camera '{0}'")]
    UnknownCamera(String),
    #[error("malformed annotation file: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported annotation format_version {0}")]
    UnsupportedFormat(u32),
}

impl AnnotationFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("annotations serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, AnnotationError> {
        let file: AnnotationFile = serde_json::from_str(text)?;
        if file.format_version != FORMAT_VERSION {
            return Err(AnnotationError::UnsupportedFormat(file.format_version));
        }
        Ok(file)
    }

    /// Frame indices covered by the file, `None` if it has no frames.
    pub fn frame_range(&self) -> Option<(u32, u32)> {
        Some((self.frames.first()?.frame, self.frames.last()?.frame))
    }
}

/// Name of the pedestrian carrying the camera, if any.
fn camera_owner(cam: &CameraSpec) -> Option<&str> {
    match &cam.mount {
        CameraMount::Egocentric { pedestrian, .. } => Some(pedestrian),
        _ => None,
    }
}

fn body_of(state: &PedestrianState, scenario: &Scenario, index: usize) -> Cylinder {
    let spec = &scenario.pedestrians[index];
    Cylinder {
        base: state.position,
        height: spec.height,
        radius: spec.radius,
    }
}

/// Obstacles plus every pedestrian body of one tick, minus `exclude`.
pub fn frame_occluders(scenario: &Scenario, pedestrians: &[PedestrianState], exclude: Option<&str>) -> Occluders {
    let ids = scenario.pedestrian_ids();
    Occluders {
        obstacles: scenario.obstacles.iter().map(Aabb::from).collect(),
        bodies: pedestrians
            .iter()
            .enumerate()
            .filter(|(_, p)| Some(p.name.as_str()) != exclude)
            .map(|(i, p)| (ids[i], body_of(p, scenario, i)))
            .collect(),
    }
}

/// Annotates one tick as seen from `cam` at `pose`.
pub fn annotate_pedestrians(
    scenario: &Scenario,
    pedestrians: &[PedestrianState],
    cam: &CameraSpec,
    pose: &Pose,
) -> Vec<PedestrianAnnotation> {
    let k = cam.intrinsics();
    let ids = scenario.pedestrian_ids();
    let owner = camera_owner(cam);
    let occluders = frame_occluders(scenario, pedestrians, owner);
    let mut out: Vec<PedestrianAnnotation> = pedestrians
        .iter()
        .enumerate()
        .filter(|(_, p)| Some(p.name.as_str()) != owner)
        .filter_map(|(i, p)| {
            let proj = project_pedestrian(&body_of(p, scenario, i), pose, &k);
            let visibility = compute_visibility(&proj, &pose.position, &occluders, ids[i]);
            let bbox = proj.bbox.filter(|_| visibility > 0.0)?;
            Some(PedestrianAnnotation {
                id: ids[i],
                name: p.name.clone(),
                position_3d: p.position.into(),
                distance_m: (p.position - pose.position).norm(),
                bbox,
                visibility,
                truncated: proj.truncated,
            })
        })
        .collect();
    out.sort_by_key(|a| a.id);
    out
}

/// Ground truth for every tick of `trace` from camera `camera_id`.
pub fn annotate_trace(
    trace: &SimTrace,
    scenario: &Scenario,
    camera_id: &str,
) -> Result<AnnotationFile, AnnotationError> {
    let cam = scenario
        .camera(camera_id)
        .ok_or_else(|| AnnotationError::UnknownCamera(camera_id.to_owned()))?;
    let initial = trace
        .ticks
        .first()
        .and_then(|_| trace.camera_pose(0, camera_id))
        .copied()
        .unwrap_or_else(Pose::identity);
    let frames = trace
        .ticks
        .iter()
        .enumerate()
        .map(|(i, tick)| {
            let pose = *trace.camera_pose(i, camera_id).expect("camera posed every tick");
            FrameAnnotation {
                frame: tick.frame,
                timestamp_s: tick.timestamp_s,
                camera_pose_world: pose,
                camera_pose_relative_initial: relative_to_initial(&pose, &initial),
                pedestrians: annotate_pedestrians(scenario, &tick.pedestrians, cam, &pose),
            }
        })
        .collect();
    Ok(AnnotationFile {
        format_version: FORMAT_VERSION,
        scenario: trace.scenario.clone(),
        camera_id: camera_id.to_owned(),
        fps: trace.fps,
        seed: trace.seed,
        intrinsics: cam.intrinsics(),
        frames,
    })
}

/// Instance mask of tick `tick` from camera `camera_id`, rendered at the
/// camera resolution divided by `divisor` (rounded up, at least 1 px).
pub fn render_tick_mask(
    trace: &SimTrace,
    scenario: &Scenario,
    camera_id: &str,
    tick: usize,
    divisor: u32,
) -> Result<InstanceMask, AnnotationError> {
    let cam = scenario
        .camera(camera_id)
        .ok_or_else(|| AnnotationError::UnknownCamera(camera_id.to_owned()))?;
    let k = cam.intrinsics();
    let pose = trace.camera_pose(tick, camera_id).expect("camera posed every tick");
    let occluders = frame_occluders(scenario, &trace.ticks[tick].pedestrians, camera_owner(cam));
    let divisor = divisor.max(1);
    Ok(render_instance_mask(
        &occluders,
        pose,
        &k,
        k.width.div_ceil(divisor),
        k.height.div_ceil(divisor),
    ))
}

/// Mask file name for a frame.
pub fn mask_file_name(scenario: &str, camera_id: &str, frame: u32) -> String {
    format!("{scenario}_{camera_id}_{frame:06}.pgm")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{parse_scenario, shipped_scenario};
    use crate::sim::run_simulation;

    const TINY: &str = r#"
format = 1
name = "tiny"
duration_frames = 20
seed = 3

[[target_points]]
id = "a"
position = [6, 0, 0]
area = "x"
owner = "near"
creation_index = 0

[[target_points]]
id = "b"
position = [6, 1, 0]
area = "x"
owner = "near"
creation_index = 1

[[target_points]]
id = "c"
position = [-30, 0, 0]
area = "x"
owner = "far"
creation_index = 0

[[target_points]]
id = "d"
position = [-30, 1, 0]
area = "x"
owner = "far"
creation_index = 1

[[pedestrians]]
name = "near"
spawn = [6, 0, 0]
height = 1.8
controller = { mode = "customized" }

[[pedestrians]]
name = "far"
spawn = [-30, 0, 0]
height = 1.8
controller = { mode = "customized" }

[[cameras]]
id = "cam"
width = 640
height = 480
hfov_deg = 90
mount = { kind = "static", position = [0, 0, -1.5] }
"#;

    #[test]
    fn unknown_camera() {
        let s = parse_scenario(TINY).unwrap();
        let t = run_simulation(&s);
        assert!(matches!(
            annotate_trace(&t, &s, "nope"),
            Err(AnnotationError::UnknownCamera(_))
        ));
    }

    #[test]
    fn off_screen_pedestrian_is_omitted() {
        let s = parse_scenario(TINY).unwrap();
        let t = run_simulation(&s);
        let a = annotate_trace(&t, &s, "cam").unwrap();
        assert_eq!(a.frames.len(), 20);
        for f in &a.frames {
            let names: Vec<&str> = f.pedestrians.iter().map(|p| p.name.as_str()).collect();
            assert_eq!(names, ["near"]);
            // sorted names: far = 1, near = 2
            assert_eq!(f.pedestrians[0].id, 2);
        }
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let s = shipped_scenario("street_day").unwrap().unwrap();
        let t = run_simulation(&s);
        let a = annotate_trace(&t, &s, &s.cameras[0].id).unwrap();
        assert_eq!(a.frames.len(), 500);
        let text = a.to_json();
        assert_eq!(text, annotate_trace(&t, &s, &s.cameras[0].id).unwrap().to_json());
        let back = AnnotationFile::from_json(&text).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn boxes_inside_image_and_visibility_in_range() {
        let s = shipped_scenario("street_moving").unwrap().unwrap();
        let t = run_simulation(&s);
        let a = annotate_trace(&t, &s, &s.cameras[0].id).unwrap();
        let (w, h) = (f64::from(a.intrinsics.width), f64::from(a.intrinsics.height));
        for p in a.frames.iter().flat_map(|f| &f.pedestrians) {
            assert!(p.bbox.is_valid());
            assert!(p.bbox.x_min >= 0.0 && p.bbox.y_min >= 0.0 && p.bbox.x_max <= w && p.bbox.y_max <= h);
            assert!(p.visibility > 0.0 && p.visibility <= 1.0);
        }
    }

    #[test]
    fn relative_pose_starts_at_identity() {
        let s = shipped_scenario("street_moving").unwrap().unwrap();
        let t = run_simulation(&s);
        let a = annotate_trace(&t, &s, &s.cameras[0].id).unwrap();
        let r0 = a.frames[0].camera_pose_relative_initial;
        assert!(r0.position.norm() < 1e-12);
        assert!(r0.orientation.angle() < 1e-12);
        let r1 = a.frames[100].camera_pose_relative_initial;
        assert!(r1.position.norm() > 1.0);
    }

    #[test]
    fn rejects_wrong_version_and_bad_quaternion() {
        let s = parse_scenario(TINY).unwrap();
        let a = annotate_trace(&run_simulation(&s), &s, "cam").unwrap();
        let v2 = a
            .to_json()
            .replacen("\"format_version\": 1", "\"format_version\": 2", 1);
        assert!(matches!(
            AnnotationFile::from_json(&v2),
            Err(AnnotationError::UnsupportedFormat(2))
        ));
        let mut v: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
        v["frames"][0]["camera_pose_world"]["quaternion"][0] = 3.0.into();
        let bad_q = v.to_string();
        assert!(matches!(
            AnnotationFile::from_json(&bad_q),
            Err(AnnotationError::Malformed(_))
        ));
    }

    #[test]
    fn mask_file_names() {
        assert_eq!(mask_file_name("street_day", "cam0", 42), "street_day_cam0_000042.pgm");
    }
}
