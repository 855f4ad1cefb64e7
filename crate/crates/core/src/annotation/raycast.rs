//! Ray intersection against axis-aligned boxes and vertical cylinders.

use crate::geometry::Vec3;
use crate::scenario::Obstacle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl From<&Obstacle> for Aabb {
    fn from(o: &Obstacle) -> Self {
        Self { min: o.min, max: o.max }
    }
}

impl Aabb {
    pub fn corners(&self) -> [Vec3; 8] {
        let (a, b) = (self.min, self.max);
        [
            Vec3::new(a.x, a.y, a.z),
            Vec3::new(b.x, a.y, a.z),
            Vec3::new(a.x, b.y, a.z),
            Vec3::new(b.x, b.y, a.z),
            Vec3::new(a.x, a.y, b.z),
            Vec3::new(b.x, a.y, b.z),
            Vec3::new(a.x, b.y, b.z),
            Vec3::new(b.x, b.y, b.z),
        ]
    }

    /// Parameter interval `[t_enter, t_exit]` of `origin + t * dir` inside
    /// the box, or `None` when the line misses it.
    pub fn slab(&self, origin: &Vec3, dir: &Vec3) -> Option<(f64, f64)> {
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for k in 0..3 {
            if dir[k] == 0.0 {
                if origin[k] < self.min[k] || origin[k] > self.max[k] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / dir[k];
            let (mut a, mut b) = ((self.min[k] - origin[k]) * inv, (self.max[k] - origin[k]) * inv);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }

    /// Nearest `t` in `(t_min, t_max)` where the ray is inside the box.
    pub fn hit(&self, origin: &Vec3, dir: &Vec3, t_min: f64, t_max: f64) -> Option<f64> {
        let (t0, t1) = self.slab(origin, dir)?;
        let t = t0.max(t_min);
        (t < t_max && t1 > t_min && t <= t1).then_some(t)
    }
}

/// Vertical cylinder standing on `base` (NED, so the top is at
/// `base.z - height`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub base: Vec3,
    pub height: f64,
    pub radius: f64,
}

impl Cylinder {
    pub fn top_z(&self) -> f64 {
        self.base.z - self.height
    }

    pub fn top_center(&self) -> Vec3 {
        Vec3::new(self.base.x, self.base.y, self.top_z())
    }

    pub fn bounding_box(&self) -> Aabb {
        Aabb {
            min: Vec3::new(self.base.x - self.radius, self.base.y - self.radius, self.top_z()),
            max: Vec3::new(self.base.x + self.radius, self.base.y + self.radius, self.base.z),
        }
    }

    /// Nearest `t` in `(t_min, t_max)` where the ray meets the solid
    /// cylinder (side or caps).
    pub fn hit(&self, origin: &Vec3, dir: &Vec3, t_min: f64, t_max: f64) -> Option<f64> {
        let (z_lo, z_hi) = (self.top_z(), self.base.z);
        let mut best: Option<f64> = None;
        let mut consider = |t: f64| {
            if t > t_min && t < t_max && best.is_none_or(|b| t < b) {
                best = Some(t);
            }
        };

        let fx = origin.x - self.base.x;
        let fy = origin.y - self.base.y;
        let a = dir.x * dir.x + dir.y * dir.y;
        let c = fx * fx + fy * fy - self.radius * self.radius;
        if a > 0.0 {
            let b = 2.0 * (dir.x * fx + dir.y * fy);
            let disc = b * b - 4.0 * a * c;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                    let z = origin.z + t * dir.z;
                    if z >= z_lo && z <= z_hi {
                        consider(t);
                    }
                }
            }
        }
        if dir.z != 0.0 {
            for plane in [z_lo, z_hi] {
                let t = (plane - origin.z) / dir.z;
                let x = fx + t * dir.x;
                let y = fy + t * dir.y;
                if x * x + y * y <= self.radius * self.radius {
                    consider(t);
                }
            }
        }
        // origin inside the solid: the ray starts occluded
        if c <= 0.0 && origin.z >= z_lo && origin.z <= z_hi {
            consider(t_min.max(0.0) + f64::EPSILON);
        }
        best
    }
}
