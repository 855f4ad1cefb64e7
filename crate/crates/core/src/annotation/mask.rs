use super::project::Occluders;
use super::raycast::Aabb;
use crate::geometry::{optical_to_body, project, world_to_camera, CameraIntrinsics, Pose, Vec3};

/// Per-pixel instance labels: 0 for background or obstacles, otherwise the
/// pedestrian id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceMask {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("label {0} does not fit in an 8-bit mask")]
pub struct LabelOverflow(pub u32);

impl InstanceMask {
    pub fn get(&self, x: u32, y: u32) -> u32 {
        self.labels[(y * self.width + x) as usize]
    }

    /// Camera-pixel coordinates of the center of raster cell `(x, y)`.
    pub fn pixel_center(&self, x: u32, y: u32, k: &CameraIntrinsics) -> (f64, f64) {
        (
            (f64::from(x) + 0.5) * f64::from(k.width) / f64::from(self.width),
            (f64::from(y) + 0.5) * f64::from(k.height) / f64::from(self.height),
        )
    }

    /// Binary PGM (P5), 8-bit labels.
    pub fn to_pgm(&self) -> Result<Vec<u8>, LabelOverflow> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(self.labels.len());
        for &l in &self.labels {
            out.push(u8::try_from(l).map_err(|_| LabelOverflow(l))?);
        }
        Ok(out)
    }
}

/// Conservative pixel bound of a convex object whose bounding box is fully
/// in front of the camera; `None` means "test every pixel".
fn screen_bound(b: &Aabb, cam: &Pose, k: &CameraIntrinsics) -> Option<(f64, f64, f64, f64)> {
    let mut bound = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in b.corners() {
        let p = project(&world_to_camera(&c, cam), k).ok()?;
        bound = (bound.0.min(p.u), bound.1.min(p.v), bound.2.max(p.u), bound.3.max(p.v));
    }
    Some(bound)
}

/// Casts one ray through each raster cell center and labels the nearest hit.
///
/// The raster may be coarser than the camera resolution; cell centers are
/// mapped onto camera pixel coordinates.
pub fn render_instance_mask(
    occluders: &Occluders,
    cam: &Pose,
    k: &CameraIntrinsics,
    width: u32,
    height: u32,
) -> InstanceMask {
    let mut mask = InstanceMask {
        width,
        height,
        labels: vec![0; (width * height) as usize],
    };
    let n = (width * height) as usize;
    let mut depth = vec![f64::INFINITY; n];
    let rays: Vec<Vec3> = (0..height)
        .flat_map(|y| (0..width).map(move |x| (x, y)))
        .map(|(x, y)| {
            let (u, v) = mask.pixel_center(x, y, k);
            cam.orientation * optical_to_body(&k.unproject(u, v))
        })
        .collect();

    let sx = f64::from(width) / f64::from(k.width);
    let sy = f64::from(height) / f64::from(k.height);
    let cells = |bound: Option<(f64, f64, f64, f64)>| -> (u32, u32, u32, u32) {
        match bound {
            None => (0, 0, width, height),
            Some((u0, v0, u1, v1)) => {
                let x0 = ((u0 * sx).floor() - 1.0).clamp(0.0, f64::from(width)) as u32;
                let y0 = ((v0 * sy).floor() - 1.0).clamp(0.0, f64::from(height)) as u32;
                let x1 = ((u1 * sx).ceil() + 1.0).clamp(0.0, f64::from(width)) as u32;
                let y1 = ((v1 * sy).ceil() + 1.0).clamp(0.0, f64::from(height)) as u32;
                (x0, y0, x1, y1)
            }
        }
    };

    let origin = cam.position;
    let mut splat = |bound, label: u32, hit: &dyn Fn(&Vec3) -> Option<f64>| {
        let (x0, y0, x1, y1) = cells(bound);
        for y in y0..y1 {
            for x in x0..x1 {
                let i = (y * width + x) as usize;
                if let Some(t) = hit(&rays[i]) {
                    if t < depth[i] {
                        depth[i] = t;
                        mask.labels[i] = label;
                    }
                }
            }
        }
    };

    for b in &occluders.obstacles {
        splat(screen_bound(b, cam, k), 0, &|d| b.hit(&origin, d, 0.0, f64::INFINITY));
    }
    for (id, c) in &occluders.bodies {
        splat(screen_bound(&c.bounding_box(), cam, k), *id, &|d| {
            c.hit(&origin, d, 0.0, f64::INFINITY)
        });
    }
    mask
}
