//! World frame, rigid poses and the pinhole camera model.
//!
//! The world frame is North-East-Down (x north, y east, z down) with its
//! origin at the scenario origin. Bodies (pedestrians, cameras) use the
//! aerospace Forward-Right-Down body convention, so an identity orientation
//! faces north. The camera optical frame is x right, y down, z forward and is
//! obtained from the body frame by the fixed permutation
//! `optical = (body.y, body.z, body.x)`.

use nalgebra::{Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

/// A point or direction in meters.
pub type Vec3 = Vector3<f64>;

/// Points closer than this to the image plane are treated as behind the camera.
pub const DEFAULT_Z_NEAR: f64 = 0.01;

/// Rotation from body (forward, right, down) coordinates to optical
/// (right, down, forward) coordinates.
pub fn body_to_optical(v: &Vec3) -> Vec3 {
    Vec3::new(v.y, v.z, v.x)
}

/// Inverse of [`body_to_optical`].
pub fn optical_to_body(v: &Vec3) -> Vec3 {
    Vec3::new(v.z, v.x, v.y)
}

/// Rigid world-from-body transform.
///
/// Serialized as `{"position": [n, e, d], "quaternion": [w, x, y, z]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "PoseRecord", try_from = "PoseRecord")]
pub struct Pose {
    pub position: Vec3,
    pub orientation: UnitQuaternion<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            position: Vec3::zeros(),
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn new(position: Vec3, orientation: UnitQuaternion<f64>) -> Self {
        Self { position, orientation }
    }

    /// Pose from yaw/pitch/roll (radians), applied in Z-Y-X order. Positive
    /// pitch raises the nose, positive yaw turns from north toward east.
    pub fn from_ypr(position: Vec3, yaw: f64, pitch: f64, roll: f64) -> Self {
        Self::new(position, UnitQuaternion::from_euler_angles(roll, pitch, yaw))
    }

    /// Pose at `position` whose forward axis points at `target` with zero roll.
    /// Falls back to identity orientation when the two points coincide.
    pub fn looking_at(position: Vec3, target: Vec3) -> Self {
        let d = target - position;
        let horizontal = d.x.hypot(d.y);
        if horizontal == 0.0 && d.z == 0.0 {
            return Self::new(position, UnitQuaternion::identity());
        }
        let yaw = d.y.atan2(d.x);
        let pitch = (-d.z).atan2(horizontal);
        Self::from_ypr(position, yaw, pitch, 0.0)
    }

    /// Maps a body-frame point into the world frame.
    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.orientation * p + self.position
    }

    /// Maps a world-frame point into the body frame.
    pub fn inverse_transform_point(&self, p: &Vec3) -> Vec3 {
        self.orientation.inverse_transform_vector(&(p - self.position))
    }

    /// `self ∘ other`: the pose of `other` (expressed in `self`'s frame) in
    /// the world.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            position: self.transform_point(&other.position),
            orientation: self.orientation * other.orientation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let orientation = self.orientation.inverse();
        Pose {
            position: -(orientation * self.position),
            orientation,
        }
    }

    /// Forward (body x) axis in world coordinates.
    pub fn forward(&self) -> Vec3 {
        self.orientation * Vec3::x()
    }

    /// Yaw angle of the forward axis, radians.
    pub fn yaw(&self) -> f64 {
        self.orientation.euler_angles().2
    }

    pub fn is_valid(&self) -> bool {
        self.position.iter().all(|c| c.is_finite()) && (self.orientation.as_ref().norm() - 1.0).abs() <= 1e-9
    }

    /// Quaternion components as `[w, x, y, z]`.
    pub fn quaternion_wxyz(&self) -> [f64; 4] {
        let q = self.orientation.as_ref();
        [q.w, q.i, q.j, q.k]
    }

    /// Builds a pose from `[n, e, d]` and `[w, x, y, z]` arrays, renormalizing
    /// the quaternion.
    pub fn from_arrays(position: [f64; 3], wxyz: [f64; 4]) -> Self {
        let q = nalgebra::Quaternion::new(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
        Self::new(Vec3::from(position), Unit::new_normalize(q))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseRecord {
    pub position: [f64; 3],
    pub quaternion: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("pose quaternion is not unit length (norm {0})")]
pub struct NonUnitQuaternion(pub f64);

impl From<Pose> for PoseRecord {
    fn from(p: Pose) -> Self {
        Self {
            position: p.position.into(),
            quaternion: p.quaternion_wxyz(),
        }
    }
}

impl TryFrom<PoseRecord> for Pose {
    type Error = NonUnitQuaternion;

    /// Keeps the stored quaternion bits as-is so that write/read/write is
    /// byte-stable; only the norm is checked.
    fn try_from(r: PoseRecord) -> Result<Self, Self::Error> {
        let [w, x, y, z] = r.quaternion;
        let q = nalgebra::Quaternion::new(w, x, y, z);
        let norm = q.norm();
        let unit = (norm - 1.0).abs() <= 1e-6;
        if !unit || !r.position.iter().all(|c| c.is_finite()) {
            return Err(NonUnitQuaternion(norm));
        }
        Ok(Self::new(Vec3::from(r.position), Unit::new_unchecked(q)))
    }
}

/// Transform between two named frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTransform {
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vec3,
    /// Frame the input points are expressed in.
    pub source: String,
    /// Frame the output points are expressed in.
    pub target: String,
}

impl FrameTransform {
    /// Transform taking body-frame points of `pose` into the world frame.
    pub fn from_pose(pose: &Pose, source: impl Into<String>, target: impl Into<String>) -> Self {
        Self {
            rotation: pose.orientation,
            translation: pose.position,
            source: source.into(),
            target: target.into(),
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn inverse(&self) -> Self {
        let rotation = self.rotation.inverse();
        Self {
            translation: -(rotation * self.translation),
            rotation,
            source: self.target.clone(),
            target: self.source.clone(),
        }
    }

    /// `self` after `first`: maps `first.source` into `self.target`.
    /// Returns `None` when the frame tags do not chain.
    pub fn after(&self, first: &FrameTransform) -> Option<Self> {
        if first.target != self.source {
            return None;
        }
        Some(Self {
            rotation: self.rotation * first.rotation,
            translation: self.rotation * first.translation + self.translation,
            source: first.source.clone(),
            target: self.target.clone(),
        })
    }
}

/// Pinhole intrinsics with square pixels and a centered principal point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub width: u32,
    pub height: u32,
    pub hfov_rad: f64,
}

impl CameraIntrinsics {
    pub fn new(width: u32, height: u32, hfov_rad: f64) -> Self {
        Self {
            width,
            height,
            hfov_rad,
        }
    }

    pub fn fx(&self) -> f64 {
        f64::from(self.width) / (2.0 * (self.hfov_rad / 2.0).tan())
    }

    pub fn fy(&self) -> f64 {
        self.fx()
    }

    pub fn cx(&self) -> f64 {
        f64::from(self.width) / 2.0
    }

    pub fn cy(&self) -> f64 {
        f64::from(self.height) / 2.0
    }

    pub fn is_valid(&self) -> bool {
        self.width > 0
            && self.height > 0
            && self.hfov_rad.is_finite()
            && self.hfov_rad > 0.0
            && self.hfov_rad < std::f64::consts::PI
    }

    /// Whether a pixel coordinate lies within `[0, W] x [0, H]`.
    pub fn contains(&self, px: &PixelPoint) -> bool {
        px.u >= 0.0 && px.u <= f64::from(self.width) && px.v >= 0.0 && px.v <= f64::from(self.height)
    }

    /// Unnormalized optical-frame ray through pixel `(u, v)`.
    pub fn unproject(&self, u: f64, v: f64) -> Vec3 {
        Vec3::new((u - self.cx()) / self.fx(), (v - self.cy()) / self.fy(), 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelPoint {
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("point is behind the camera")]
pub struct BehindCamera;

/// Expresses a world point in the optical frame of a camera at `cam_pose`.
pub fn world_to_camera(p: &Vec3, cam_pose: &Pose) -> Vec3 {
    body_to_optical(&cam_pose.inverse_transform_point(p))
}

/// Inverse of [`world_to_camera`].
pub fn camera_to_world(p_cam: &Vec3, cam_pose: &Pose) -> Vec3 {
    cam_pose.transform_point(&optical_to_body(p_cam))
}

pub fn project(p_cam: &Vec3, k: &CameraIntrinsics) -> Result<PixelPoint, BehindCamera> {
    project_with_near(p_cam, k, DEFAULT_Z_NEAR)
}

pub fn project_with_near(p_cam: &Vec3, k: &CameraIntrinsics, z_near: f64) -> Result<PixelPoint, BehindCamera> {
    if p_cam.z <= z_near {
        return Err(BehindCamera);
    }
    Ok(PixelPoint {
        u: k.fx() * p_cam.x / p_cam.z + k.cx(),
        v: k.fy() * p_cam.y / p_cam.z + k.cy(),
    })
}

/// Pose of `current` expressed in the frame anchored at `initial`.
pub fn relative_to_initial(current: &Pose, initial: &Pose) -> Pose {
    Pose {
        position: initial.inverse_transform_point(&current.position),
        orientation: initial.orientation.inverse() * current.orientation,
    }
}
