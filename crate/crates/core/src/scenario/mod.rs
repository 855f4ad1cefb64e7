//! Declarative scenario description.
//!
//! Scenarios are TOML documents whose first key is `format = 1`. Fields are
//! deserialized into the types below and then checked by
//! [`validate_scenario`], which reports every violation it finds rather than
//! stopping at the first one. [`to_canonical_text`] writes fields in
//! declaration order, so `parse(canonical(s)) == s`.

mod builtin;
mod validate;

pub use builtin::{shipped_scenario, SHIPPED_SCENARIOS};
pub use validate::{validate_scenario, Violation};

use crate::geometry::{CameraIntrinsics, Pose, Vec3};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_FPS: f64 = 30.0;
pub const DEFAULT_RADIUS: f64 = 0.30;
pub const DEFAULT_SPEED: f64 = 1.4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub format: u32,
    pub name: String,
    pub duration_frames: u32,
    #[serde(default = "default_fps")]
    pub fps: f64,
    pub seed: u64,
    #[serde(default)]
    pub degradation: DegradationSpec,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    #[serde(default)]
    pub paths: Vec<ContinuousPath>,
    #[serde(default)]
    pub target_points: Vec<TargetPoint>,
    #[serde(default)]
    pub pedestrians: Vec<PedestrianSpec>,
    #[serde(default)]
    pub cameras: Vec<CameraSpec>,
}

fn default_fps() -> f64 {
    DEFAULT_FPS
}

fn default_radius() -> f64 {
    DEFAULT_RADIUS
}

fn default_speed() -> f64 {
    DEFAULT_SPEED
}

/// Axis-aligned box obstacle, world frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub id: String,
    pub min: Vec3,
    pub max: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndBehavior {
    #[default]
    Loop,
    Reverse,
    Stop,
}

/// Polyline a pedestrian is forced to walk along.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousPath {
    pub id: String,
    pub vertices: Vec<Vec3>,
    #[serde(default)]
    pub end_behavior: EndBehavior,
}

/// Goal position. `owner` tags it to one pedestrian's customized list;
/// `area` groups it for random selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetPoint {
    pub id: String,
    pub position: Vec3,
    pub area: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<String>,
    #[serde(default)]
    pub creation_index: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Controller {
    /// Pick goals uniformly from an area, excluding the one just reached.
    Random { area: String },
    /// Visit owned target points by ascending creation index.
    Customized {
        #[serde(default)]
        end_behavior: EndBehavior,
    },
    /// Walk a continuous path vertex by vertex. `end_behavior` overrides
    /// the path's own setting.
    FollowPath {
        path: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        end_behavior: Option<EndBehavior>,
    },
}

/// Pedestrian body is a vertical cylinder standing on `spawn`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PedestrianSpec {
    pub name: String,
    pub spawn: Vec3,
    pub height: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_speed")]
    pub speed: f64,
    pub controller: Controller,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub position: Vec3,
    /// Point the camera keeps centered while flying toward this waypoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub look_at: Option<Vec3>,
    /// Fixed pitch, with yaw following the direction of travel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CameraMount {
    Static {
        position: Vec3,
        #[serde(default)]
        yaw_deg: f64,
        #[serde(default)]
        pitch_deg: f64,
        #[serde(default)]
        roll_deg: f64,
    },
    Drone {
        waypoints: Vec<Waypoint>,
        speed: f64,
    },
    /// Rigidly attached to a pedestrian; `eye_offset` is in the pedestrian's
    /// forward-right-down body frame relative to its feet.
    Egocentric {
        pedestrian: String,
        eye_offset: Vec3,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSpec {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub hfov_deg: f64,
    pub mount: CameraMount,
}

impl CameraSpec {
    pub fn intrinsics(&self) -> CameraIntrinsics {
        CameraIntrinsics::new(self.width, self.height, self.hfov_deg.to_radians())
    }

    pub fn is_dynamic(&self) -> bool {
        !matches!(self.mount, CameraMount::Static { .. })
    }
}

impl CameraMount {
    /// Pose of a static mount; `None` for moving mounts.
    pub fn static_pose(&self) -> Option<Pose> {
        match self {
            CameraMount::Static {
                position,
                yaw_deg,
                pitch_deg,
                roll_deg,
            } => Some(Pose::from_ypr(
                *position,
                yaw_deg.to_radians(),
                pitch_deg.to_radians(),
                roll_deg.to_radians(),
            )),
            _ => None,
        }
    }
}

/// Detector degradation parameters. The default is the identity model:
/// every visible pedestrian is detected with its exact box and no clutter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DegradationSpec {
    /// Fog extinction coefficient, 1/m.
    pub fog_extinction: f64,
    pub base_detect_prob: f64,
    pub night_factor: f64,
    /// Box jitter std-dev as a fraction of box width/height.
    pub bbox_noise_sigma: f64,
    /// Mean false positives per frame.
    pub false_positive_rate: f64,
    pub visibility_exponent: f64,
}

impl Default for DegradationSpec {
    fn default() -> Self {
        Self {
            fog_extinction: 0.0,
            base_detect_prob: 1.0,
            night_factor: 1.0,
            bbox_noise_sigma: 0.0,
            false_positive_rate: 0.0,
            visibility_exponent: 0.0,
        }
    }
}

impl Scenario {
    pub fn pedestrian(&self, name: &str) -> Option<&PedestrianSpec> {
        self.pedestrians.iter().find(|p| p.name == name)
    }

    pub fn camera(&self, id: &str) -> Option<&CameraSpec> {
        self.cameras.iter().find(|c| c.id == id)
    }

    pub fn path(&self, id: &str) -> Option<&ContinuousPath> {
        self.paths.iter().find(|p| p.id == id)
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.fps
    }

    /// Indices into `target_points` of an area's goals, in file order.
    pub fn area_goals(&self, area: &str) -> Vec<usize> {
        self.target_points
            .iter()
            .enumerate()
            .filter(|(_, t)| t.area == area)
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices into `target_points` owned by `name`, oldest first.
    pub fn owned_goals(&self, name: &str) -> Vec<usize> {
        let mut owned: Vec<usize> = self
            .target_points
            .iter()
            .enumerate()
            .filter(|(_, t)| t.owner.as_deref() == Some(name))
            .map(|(i, _)| i)
            .collect();
        owned.sort_by_key(|&i| (self.target_points[i].creation_index, i));
        owned
    }

    /// Stable annotation id (1-based ordinal of the sorted name) for every
    /// pedestrian, in `pedestrians` order.
    pub fn pedestrian_ids(&self) -> Vec<u32> {
        let mut names: Vec<&str> = self.pedestrians.iter().map(|p| p.name.as_str()).collect();
        names.sort_unstable();
        self.pedestrians
            .iter()
            .map(|p| names.binary_search(&p.name.as_str()).map(|i| i as u32 + 1).unwrap_or(0))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("scenario is invalid ({} violation(s))", .0.len())]
    Invalid(Vec<Violation>),
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| syntax_error(text, &e))?;
    let violations = validate_scenario(&scenario);
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(ParseError::Invalid(violations))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    format: u32,
    degradation: DegradationSpec,
}

/// Parses a standalone detector profile: `format = 1` and a
/// `[degradation]` table.
pub fn parse_degradation_profile(text: &str) -> Result<DegradationSpec, ParseError> {
    let file: ProfileFile = toml::from_str(text).map_err(|e| syntax_error(text, &e))?;
    let mut violations = Vec::new();
    if file.format != FORMAT_VERSION {
        violations.push(Violation::UnsupportedFormat(file.format));
    }
    validate::validate_degradation(&file.degradation, &mut violations);
    if violations.is_empty() {
        Ok(file.degradation)
    } else {
        Err(ParseError::Invalid(violations))
    }
}

fn syntax_error(text: &str, e: &toml::de::Error) -> ParseError {
    let (line, column) = e.span().map(|span| line_column(text, span.start)).unwrap_or((1, 1));
    ParseError::Syntax {
        line,
        column,
        message: e.message().to_string(),
    }
}

/// Canonical text form; stable key order, exact float round trip.
pub fn to_canonical_text(scenario: &Scenario) -> Result<String, toml::ser::Error> {
    toml::to_string(scenario)
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
    (line, column)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
format = 1
name = "mini"
duration_frames = 10
seed = 3

[[target_points]]
id = "a"
position = [0, 0, 0]
area = "plaza"

[[target_points]]
id = "b"
position = [5, 0, 0]
area = "plaza"

[[pedestrians]]
name = "p1"
spawn = [1, 1, 0]
height = 1.75
controller = { mode = "random", area = "plaza" }

[[cameras]]
id = "cam0"
width = 640
height = 480
hfov_deg = 90
mount = { kind = "static", position = [-5, 0, -2] }
"#;

    #[test]
    fn minimal_parses_with_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.fps, 30.0);
        assert_eq!(s.pedestrians[0].radius, 0.30);
        assert_eq!(s.pedestrians[0].speed, 1.4);
        assert_eq!(s.degradation, DegradationSpec::default());
        assert!(validate_scenario(&s).is_empty());
    }

    #[test]
    fn canonical_round_trip() {
        let s = parse_scenario(MINIMAL).unwrap();
        let text = to_canonical_text(&s).unwrap();
        assert!(text.starts_with("format = 1\n"), "{text}");
        let again = parse_scenario(&text).unwrap();
        assert_eq!(again, s);
        assert_eq!(to_canonical_text(&again).unwrap(), text);
    }

    #[test]
    fn syntax_error_reports_position() {
        let text = "format = 1\nname = \"x\"\nduration_frames = = 3\n";
        match parse_scenario(text) {
            Err(ParseError::Syntax { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 1);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn dangling_path_is_named() {
        let text = MINIMAL.replace(
            r#"controller = { mode = "random", area = "plaza" }"#,
            r#"controller = { mode = "follow_path", path = "missing" }"#,
        );
        let Err(ParseError::Invalid(v)) = parse_scenario(&text) else {
            panic!("expected semantic error");
        };
        assert!(v.iter().any(|x| x.to_string().contains("\"missing\"")), "{v:?}");
    }

    #[test]
    fn ids_follow_name_order() {
        let mut s = parse_scenario(MINIMAL).unwrap();
        let mut b = s.pedestrians[0].clone();
        b.name = "a0".into();
        s.pedestrians.push(b);
        assert_eq!(s.pedestrian_ids(), vec![2, 1]);
    }

    #[test]
    fn line_column_math() {
        assert_eq!(line_column("ab\ncd", 0), (1, 1));
        assert_eq!(line_column("ab\ncd", 4), (2, 2));
    }
}
