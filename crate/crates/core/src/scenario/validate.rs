use super::{CameraMount, Controller, DegradationSpec, Scenario, FORMAT_VERSION};
use crate::geometry::Vec3;
use std::collections::{BTreeMap, BTreeSet};

/// Minimum separation between consecutive path vertices or waypoints, m.
const MIN_VERTEX_SEPARATION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    UnsupportedFormat(u32),
    #[error("duplicate {kind} name {name:?}")]
    DuplicateName { kind: &'static str, name: String },
    #[error("{kind} name {name:?} must be non-empty and use only [A-Za-z0-9_-]")]
    InvalidIdentifier { kind: &'static str, name: String },
    #[error("{field}: {message}")]
    OutOfRange { field: String, message: String },
    #[error("pedestrian {pedestrian:?} follows unknown path {path:?}")]
    DanglingPath { pedestrian: String, path: String },
    #[error("customized pedestrian {pedestrian:?} owns no target points")]
    NoCustomizedGoals { pedestrian: String },
    #[error("random pedestrian {pedestrian:?}: area {area:?} has {found} target point(s), needs at least 2")]
    InsufficientGoals {
        pedestrian: String,
        area: String,
        found: usize,
    },
    #[error("target point {target:?} is owned by unknown pedestrian {owner:?}")]
    UnknownOwner { target: String, owner: String },
    #[error("pedestrian {owner:?} owns several target points with creation_index {index}")]
    DuplicateCreationIndex { owner: String, index: u32 },
    #[error("camera {camera:?} is attached to unknown pedestrian {pedestrian:?}")]
    UnknownPedestrian { camera: String, pedestrian: String },
    #[error("{what}: consecutive points {index} and {} are closer than 1 cm", index + 1)]
    CoincidentVertices { what: String, index: usize },
}

fn out_of_range(field: impl Into<String>, message: impl Into<String>) -> Violation {
    Violation::OutOfRange {
        field: field.into(),
        message: message.into(),
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn finite(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

fn check_unique<'a>(
    kind: &'static str,
    names: impl Iterator<Item = &'a str>,
    identifiers: bool,
    out: &mut Vec<Violation>,
) {
    let mut seen = BTreeSet::new();
    let mut reported = BTreeSet::new();
    for name in names {
        if identifiers && !is_identifier(name) {
            out.push(Violation::InvalidIdentifier {
                kind,
                name: name.to_string(),
            });
        }
        if !seen.insert(name) && reported.insert(name) {
            out.push(Violation::DuplicateName {
                kind,
                name: name.to_string(),
            });
        }
    }
}

fn check_polyline<'a>(what: &str, points: impl Iterator<Item = &'a Vec3>, out: &mut Vec<Violation>) {
    let points: Vec<&Vec3> = points.collect();
    for (i, w) in points.windows(2).enumerate() {
        if (w[1] - w[0]).norm() <= MIN_VERTEX_SEPARATION {
            out.push(Violation::CoincidentVertices {
                what: what.to_string(),
                index: i,
            });
        }
    }
    if points.iter().any(|p| !finite(p)) {
        out.push(out_of_range(what, "coordinates must be finite"));
    }
}

fn unit_interval(field: &str, value: f64, out: &mut Vec<Violation>) {
    if !(0.0..=1.0).contains(&value) {
        out.push(out_of_range(field, format!("{value} not in [0, 1]")));
    }
}

fn non_negative(field: &str, value: f64, out: &mut Vec<Violation>) {
    if value.is_nan() || value < 0.0 {
        out.push(out_of_range(field, format!("{value} must be >= 0")));
    }
}

/// Every invariant violation, in a fixed order: header, names, world,
/// pedestrians, cameras, degradation.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();

    if s.format != FORMAT_VERSION {
        out.push(Violation::UnsupportedFormat(s.format));
    }
    if !is_identifier(&s.name) {
        out.push(Violation::InvalidIdentifier {
            kind: "scenario",
            name: s.name.clone(),
        });
    }
    if s.duration_frames == 0 {
        out.push(out_of_range("duration_frames", "must be positive"));
    }
    if !(s.fps.is_finite() && s.fps > 0.0) {
        out.push(out_of_range("fps", format!("{} must be positive", s.fps)));
    }
    if s.seed > i64::MAX as u64 {
        out.push(out_of_range("seed", "must fit in a signed 64-bit integer"));
    }

    check_unique(
        "pedestrian",
        s.pedestrians.iter().map(|p| p.name.as_str()),
        true,
        &mut out,
    );
    check_unique("camera", s.cameras.iter().map(|c| c.id.as_str()), true, &mut out);
    check_unique("obstacle", s.obstacles.iter().map(|o| o.id.as_str()), false, &mut out);
    check_unique("path", s.paths.iter().map(|p| p.id.as_str()), false, &mut out);
    check_unique(
        "target point",
        s.target_points.iter().map(|t| t.id.as_str()),
        false,
        &mut out,
    );

    for o in &s.obstacles {
        let ordered = (0..3).all(|k| o.min[k] < o.max[k]);
        if !ordered || !finite(&o.min) || !finite(&o.max) {
            out.push(out_of_range(
                format!("obstacle {:?}", o.id),
                "min must be strictly below max on every axis",
            ));
        }
    }

    for p in &s.paths {
        let what = format!("path {:?}", p.id);
        if p.vertices.len() < 2 {
            out.push(out_of_range(&what, "needs at least 2 vertices"));
        }
        check_polyline(&what, p.vertices.iter(), &mut out);
    }

    let mut creation: BTreeMap<&str, BTreeSet<u32>> = BTreeMap::new();
    for t in &s.target_points {
        if !finite(&t.position) {
            out.push(out_of_range(
                format!("target point {:?}", t.id),
                "position must be finite",
            ));
        }
        if let Some(owner) = &t.owner {
            if s.pedestrian(owner).is_none() {
                out.push(Violation::UnknownOwner {
                    target: t.id.clone(),
                    owner: owner.clone(),
                });
            }
            if !creation.entry(owner).or_default().insert(t.creation_index) {
                out.push(Violation::DuplicateCreationIndex {
                    owner: owner.clone(),
                    index: t.creation_index,
                });
            }
        }
    }

    for p in &s.pedestrians {
        let what = format!("pedestrian {:?}", p.name);
        if !finite(&p.spawn) {
            out.push(out_of_range(&what, "spawn must be finite"));
        }
        if !(1.4..=2.1).contains(&p.height) {
            out.push(out_of_range(
                format!("{what}.height"),
                format!("{} not in [1.4, 2.1]", p.height),
            ));
        }
        if !(p.radius > 0.0 && p.radius.is_finite()) {
            out.push(out_of_range(format!("{what}.radius"), "must be positive"));
        }
        if !(p.speed > 0.0 && p.speed.is_finite()) {
            out.push(out_of_range(format!("{what}.speed"), "must be positive"));
        }
        match &p.controller {
            Controller::Random { area } => {
                let found = s.area_goals(area).len();
                if found < 2 {
                    out.push(Violation::InsufficientGoals {
                        pedestrian: p.name.clone(),
                        area: area.clone(),
                        found,
                    });
                }
            }
            Controller::Customized { .. } => {
                if s.owned_goals(&p.name).is_empty() {
                    out.push(Violation::NoCustomizedGoals {
                        pedestrian: p.name.clone(),
                    });
                }
            }
            Controller::FollowPath { path, .. } => {
                if s.path(path).is_none() {
                    out.push(Violation::DanglingPath {
                        pedestrian: p.name.clone(),
                        path: path.clone(),
                    });
                }
            }
        }
    }

    for c in &s.cameras {
        let what = format!("camera {:?}", c.id);
        if !c.intrinsics().is_valid() {
            out.push(out_of_range(
                &what,
                "width and height must be positive and hfov_deg in (0, 180)",
            ));
        }
        match &c.mount {
            CameraMount::Static {
                position,
                yaw_deg,
                pitch_deg,
                roll_deg,
            } => {
                if !finite(position) || ![yaw_deg, pitch_deg, roll_deg].iter().all(|a| a.is_finite()) {
                    out.push(out_of_range(&what, "static pose must be finite"));
                }
            }
            CameraMount::Drone { waypoints, speed } => {
                if waypoints.len() < 2 {
                    out.push(out_of_range(&what, "drone needs at least 2 waypoints"));
                }
                if !(*speed > 0.0 && speed.is_finite()) {
                    out.push(out_of_range(format!("{what}.speed"), "must be positive"));
                }
                check_polyline(&what, waypoints.iter().map(|w| &w.position), &mut out);
                for (i, w) in waypoints.iter().enumerate() {
                    if w.look_at.is_some() == w.pitch_deg.is_some() {
                        out.push(out_of_range(
                            format!("{what}.waypoints[{i}]"),
                            "set exactly one of look_at or pitch_deg",
                        ));
                    }
                }
            }
            CameraMount::Egocentric { pedestrian, eye_offset } => {
                if s.pedestrian(pedestrian).is_none() {
                    out.push(Violation::UnknownPedestrian {
                        camera: c.id.clone(),
                        pedestrian: pedestrian.clone(),
                    });
                }
                if !finite(eye_offset) {
                    out.push(out_of_range(&what, "eye_offset must be finite"));
                }
            }
        }
    }

    validate_degradation(&s.degradation, &mut out);
    out
}

pub(crate) fn validate_degradation(d: &DegradationSpec, out: &mut Vec<Violation>) {
    non_negative("degradation.fog_extinction", d.fog_extinction, out);
    unit_interval("degradation.base_detect_prob", d.base_detect_prob, out);
    unit_interval("degradation.night_factor", d.night_factor, out);
    non_negative("degradation.bbox_noise_sigma", d.bbox_noise_sigma, out);
    non_negative("degradation.false_positive_rate", d.false_positive_rate, out);
    non_negative("degradation.visibility_exponent", d.visibility_exponent, out);
}
