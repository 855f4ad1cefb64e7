//! Sampled cylinder projection and occlusion-aware visibility.
//!
//! A pedestrian is represented by 34 surface samples: 16 rim points on the
//! base circle, the same 16 on the top circle, and the two axis end points.
//! Rim azimuths are spaced every 22.5 degrees starting at the bearing toward
//! the camera; the pair closest to the horizontal silhouette tangents is
//! moved onto the tangents, so the sampled box spans the silhouette exactly
//! for level cameras. The same samples drive both the box and visibility.

use super::raycast::{Aabb, Cylinder};
use crate::bbox::BBox2D;
use crate::geometry::{project, world_to_camera, CameraIntrinsics, PixelPoint, Pose, Vec3};
use std::f64::consts::PI;

pub const RIM_SAMPLES: usize = 16;
pub const SAMPLE_COUNT: usize = 2 * RIM_SAMPLES + 2;

/// Ray parameters this close to the segment ends are not occlusions.
const OCCLUSION_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodySample {
    pub world: Vec3,
    /// Projection when in front of the camera (may be off-image).
    pub pixel: Option<PixelPoint>,
    pub in_frustum: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PedestrianProjection {
    /// Clamped to the image; `None` if no sample is in the frustum.
    pub bbox: Option<BBox2D>,
    /// Extent of all samples in front of the camera, before clamping.
    pub unclamped: Option<BBox2D>,
    pub truncated: bool,
    pub samples: Vec<BodySample>,
}

/// Rim azimuths (radians, from north) for a cylinder seen from `camera`.
pub fn rim_azimuths(body: &Cylinder, camera: &Vec3) -> [f64; RIM_SAMPLES] {
    let dx = camera.x - body.base.x;
    let dy = camera.y - body.base.y;
    let horizontal = dx.hypot(dy);
    let bearing = if horizontal > 0.0 { dy.atan2(dx) } else { 0.0 };
    let step = 2.0 * PI / RIM_SAMPLES as f64;
    let mut az: [f64; RIM_SAMPLES] = std::array::from_fn(|k| bearing + k as f64 * step);
    if horizontal > body.radius {
        let tangent = (body.radius / horizontal).acos();
        let k = ((tangent / step).round() as usize).clamp(1, RIM_SAMPLES / 4);
        az[k] = bearing + tangent;
        az[RIM_SAMPLES - k] = bearing - tangent;
    }
    az
}

/// The 34 body samples: base rim, top rim, base center, top center.
pub fn cylinder_samples(body: &Cylinder, camera: &Vec3) -> [Vec3; SAMPLE_COUNT] {
    let az = rim_azimuths(body, camera);
    let mut out = [Vec3::zeros(); SAMPLE_COUNT];
    for (k, a) in az.iter().enumerate() {
        let rim = Vec3::new(body.radius * a.cos(), body.radius * a.sin(), 0.0);
        out[k] = body.base + rim;
        out[RIM_SAMPLES + k] = body.top_center() + rim;
    }
    out[2 * RIM_SAMPLES] = body.base;
    out[2 * RIM_SAMPLES + 1] = body.top_center();
    out
}

pub fn project_pedestrian(body: &Cylinder, cam: &Pose, k: &CameraIntrinsics) -> PedestrianProjection {
    let samples: Vec<BodySample> = cylinder_samples(body, &cam.position)
        .iter()
        .map(|w| {
            let pixel = project(&world_to_camera(w, cam), k).ok();
            BodySample {
                world: *w,
                pixel,
                in_frustum: pixel.is_some_and(|p| k.contains(&p)),
            }
        })
        .collect();

    let mut projected = samples.iter().filter_map(|s| s.pixel).peekable();
    let unclamped = projected.peek().is_some().then(|| {
        projected.fold(
            BBox2D::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |b, p| BBox2D::new(b.x_min.min(p.u), b.y_min.min(p.v), b.x_max.max(p.u), b.y_max.max(p.v)),
        )
    });
    let any_in_frustum = samples.iter().any(|s| s.in_frustum);
    let bbox = unclamped
        .filter(|_| any_in_frustum)
        .map(|b| b.clamp_to(f64::from(k.width), f64::from(k.height)));
    let behind = samples.iter().any(|s| s.pixel.is_none());
    let truncated = match (bbox, unclamped) {
        (Some(c), Some(u)) => c != u || behind,
        _ => false,
    };
    PedestrianProjection {
        bbox,
        unclamped,
        truncated,
        samples,
    }
}

/// Geometry that can hide a pedestrian from a camera.
#[derive(Debug, Clone, Default)]
pub struct Occluders {
    pub obstacles: Vec<Aabb>,
    /// `(pedestrian id, body)` for every other pedestrian in the frame.
    pub bodies: Vec<(u32, Cylinder)>,
}

impl Occluders {
    /// Whether the open segment `from -> to` passes through any obstacle or
    /// any body other than `skip_id`.
    pub fn blocks(&self, from: &Vec3, to: &Vec3, skip_id: u32) -> bool {
        let dir = to - from;
        let (lo, hi) = (OCCLUSION_EPS, 1.0 - OCCLUSION_EPS);
        self.obstacles.iter().any(|b| b.hit(from, &dir, lo, hi).is_some())
            || self
                .bodies
                .iter()
                .any(|(id, c)| *id != skip_id && c.hit(from, &dir, lo, hi).is_some())
    }
}

/// Fraction of all samples that are in the frustum and not occluded.
pub fn compute_visibility(
    projection: &PedestrianProjection,
    camera_position: &Vec3,
    occluders: &Occluders,
    self_id: u32,
) -> f64 {
    let visible = projection
        .samples
        .iter()
        .filter(|s| s.in_frustum && !occluders.blocks(camera_position, &s.world, self_id))
        .count();
    visible as f64 / projection.samples.len() as f64
}
