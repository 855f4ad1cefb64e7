//! Ground truth degraded into detections.
//!
//! Each annotated pedestrian is kept with probability
//! `base * night * visibility^exponent * exp(-fog * distance)` and its box is
//! jittered per coordinate with Gaussian noise proportional to the box size.
//! Clutter boxes are added per frame. Frame `f` draws from its own stream, so
//! frames are independent of each other and of processing order.

use super::Detection;
use crate::annotation::AnnotationFile;
use crate::bbox::BBox2D;
use crate::rng::stream;
use crate::scenario::{parse_degradation_profile, DegradationSpec, ParseError};
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

pub const PROFILE_NAMES: [&str; 5] = ["clear", "fog-light", "fog", "fog-dense", "night"];

/// False-positive heights are log-uniform in this range; width is 0.4 h.
const FP_HEIGHT_PX: (f64, f64) = (16.0, 256.0);
const FP_ASPECT: f64 = 0.4;
const FP_SCORE: (f64, f64) = (0.05, 0.5);

/// Named degradation presets. `clear` is the identity model; `fog` is an
/// alias of `fog-dense`.
pub fn profile(name: &str) -> Option<DegradationSpec> {
    let fog = |fog_extinction| DegradationSpec {
        fog_extinction,
        base_detect_prob: 0.95,
        night_factor: 1.0,
        bbox_noise_sigma: 0.03,
        false_positive_rate: 0.2,
        visibility_exponent: 1.0,
    };
    match name {
        "clear" => Some(DegradationSpec::default()),
        "fog-light" => Some(fog(0.015)),
        "fog" | "fog-dense" => Some(fog(0.045)),
        "night" => Some(DegradationSpec {
            fog_extinction: 0.0,
            base_detect_prob: 0.95,
            night_factor: 0.65,
            bbox_noise_sigma: 0.06,
            false_positive_rate: 0.5,
            visibility_exponent: 1.5,
        }),
        _ => None,
    }
}

/// Profile file text: `format = 1` and a `[degradation]` table.
pub fn parse_profile(text: &str) -> Result<DegradationSpec, ParseError> {
    parse_degradation_profile(text)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    pub degradation: DegradationSpec,
    pub seed: u64,
}

/// Detection probability, clamped to `[0, 1]`; undefined products (such as
/// infinite fog at zero distance) count as 0.
pub fn detection_probability(d: &DegradationSpec, visibility: f64, distance_m: f64) -> f64 {
    let p = d.base_detect_prob
        * d.night_factor
        * visibility.powf(d.visibility_exponent)
        * (-d.fog_extinction * distance_m).exp();
    if p.is_nan() {
        0.0
    } else {
        p.clamp(0.0, 1.0)
    }
}

fn jitter(b: &BBox2D, sigma: f64, normals: [f64; 4], width: f64, height: f64) -> BBox2D {
    let (sx, sy) = (sigma * b.width(), sigma * b.height());
    let j = BBox2D::new(
        b.x_min + sx * normals[0],
        b.y_min + sy * normals[1],
        b.x_max + sx * normals[2],
        b.y_max + sy * normals[3],
    )
    .clamp_to(width, height);
    BBox2D::new(
        j.x_min.min(j.x_max),
        j.y_min.min(j.y_max),
        j.x_min.max(j.x_max),
        j.y_min.max(j.y_max),
    )
}

/// Detections for every frame of one camera's annotations, sorted by frame.
pub fn synthesize_detections(ann: &AnnotationFile, model: &DetectorModel) -> Vec<Detection> {
    let d = &model.degradation;
    let (w, h) = (f64::from(ann.intrinsics.width), f64::from(ann.intrinsics.height));
    let clutter = (d.false_positive_rate > 0.0 && d.false_positive_rate.is_finite())
        .then(|| Poisson::new(d.false_positive_rate).expect("positive finite rate"));
    let mut out = Vec::new();
    for frame in &ann.frames {
        let mut rng = stream(model.seed, "detector", &ann.camera_id, u64::from(frame.frame));
        for ped in &frame.pedestrians {
            // fixed draw count per pedestrian keeps the stream aligned
            let u: f64 = rng.random();
            let normals: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let p = detection_probability(d, ped.visibility, ped.distance_m);
            if u < p {
                out.push(Detection {
                    frame: frame.frame,
                    bbox: jitter(&ped.bbox, d.bbox_noise_sigma, normals, w, h),
                    score: p,
                });
            }
        }
        let count = clutter.map_or(0, |c| c.sample(&mut rng) as u64);
        for _ in 0..count {
            let bh = (rng.random_range(FP_HEIGHT_PX.0.ln()..FP_HEIGHT_PX.1.ln()))
                .exp()
                .min(h);
            let bw = (FP_ASPECT * bh).min(w);
            let x = rng.random_range(0.0..=(w - bw));
            let y = rng.random_range(0.0..=(h - bh));
            out.push(Detection {
                frame: frame.frame,
                bbox: BBox2D::from_xywh(x, y, bw, bh),
                score: rng.random_range(FP_SCORE.0..FP_SCORE.1),
            });
        }
    }
    out
}
