//! Constant-velocity Kalman tracker with optimal assignment.
//!
//! State is `[cx, cy, s, r, vx, vy, vs]` where `s` is box area and `r` the
//! aspect ratio `w / h`; the aspect ratio has no velocity term.

use super::{frames_of, Detection, Emitter, TrackSet};
use crate::bbox::BBox2D;
use crate::eval::hungarian;
use nalgebra::{DMatrix, SMatrix, SVector};

type State = SVector<f64, 7>;
type Cov = SMatrix<f64, 7, 7>;
type Meas = SVector<f64, 4>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanTrackerParams {
    pub iou_min: f64,
    pub max_age: u32,
    pub min_hits: u32,
    /// Multiplies the process noise covariance.
    pub process_noise: f64,
    /// Multiplies the measurement noise covariance.
    pub measurement_noise: f64,
    /// Report predicted boxes of confirmed tracks on frames they miss.
    pub emit_predictions: bool,
}

impl Default for KalmanTrackerParams {
    fn default() -> Self {
        Self {
            iou_min: 0.3,
            max_age: 30,
            min_hits: 3,
            process_noise: 1.0,
            measurement_noise: 1.0,
            emit_predictions: false,
        }
    }
}

fn to_z(b: &BBox2D) -> Meas {
    let (cx, cy) = b.center();
    let (w, h) = (b.width(), b.height());
    let r = if h > 0.0 { w / h } else { 0.0 };
    Meas::new(cx, cy, w * h, r)
}

fn to_box(x: &State) -> Option<BBox2D> {
    let (s, r) = (x[2], x[3]);
    if !(s > 0.0 && r > 0.0) {
        return None;
    }
    let w = (s * r).sqrt();
    let h = s / w;
    Some(BBox2D::new(
        x[0] - w / 2.0,
        x[1] - h / 2.0,
        x[0] + w / 2.0,
        x[1] + h / 2.0,
    ))
}

/// Kalman filter over one box.
#[derive(Debug, Clone)]
pub struct BoxKalman {
    x: State,
    p: Cov,
    q: Cov,
    r: SMatrix<f64, 4, 4>,
}

impl BoxKalman {
    pub fn new(b: &BBox2D, process_noise: f64, measurement_noise: f64) -> Self {
        let z = to_z(b);
        let mut x = State::zeros();
        x.fixed_rows_mut::<4>(0).copy_from(&z);
        let p = Cov::from_diagonal(&SVector::from([10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4]));
        let q = Cov::from_diagonal(&SVector::from([1.0, 1.0, 1.0, 1.0, 1e-2, 1e-2, 1e-4])) * process_noise;
        let r = SMatrix::<f64, 4, 4>::from_diagonal(&SVector::from([1.0, 1.0, 10.0, 10.0])) * measurement_noise;
        Self { x, p, q, r }
    }

    fn transition() -> Cov {
        let mut f = Cov::identity();
        f[(0, 4)] = 1.0;
        f[(1, 5)] = 1.0;
        f[(2, 6)] = 1.0;
        f
    }

    /// Advances one frame; returns the predicted box if it is well formed.
    pub fn predict(&mut self) -> Option<BBox2D> {
        if self.x[2] + self.x[6] <= 0.0 {
            self.x[6] = 0.0;
        }
        let f = Self::transition();
        self.x = f * self.x;
        self.p = f * self.p * f.transpose() + self.q;
        self.current()
    }

    pub fn update(&mut self, b: &BBox2D) {
        let h = SMatrix::<f64, 4, 7>::identity();
        let y = to_z(b) - h * self.x;
        let s = h * self.p * h.transpose() + self.r;
        let Some(s_inv) = s.try_inverse() else { return };
        let k = self.p * h.transpose() * s_inv;
        self.x += k * y;
        self.p = (Cov::identity() - k * h) * self.p;
    }

    pub fn current(&self) -> Option<BBox2D> {
        to_box(&self.x)
    }
}

struct Live {
    filter: BoxKalman,
    predicted: Option<BBox2D>,
    since_update: u32,
    streak: u32,
    id: Option<u32>,
}

/// Tracks detections with per-track Kalman prediction and Hungarian
/// association on `1 - IoU`, gated at `iou_min`.
///
/// Every frame between the first and last detection is stepped. A track is
/// dropped once it has gone more than `max_age` frames without a match.
pub fn track_kalman(dets: &[Detection], params: &KalmanTrackerParams) -> TrackSet {
    let mut live: Vec<Live> = Vec::new();
    let mut em = Emitter::default();
    for (frame, fdets) in frames_of(dets) {
        for t in &mut live {
            t.predicted = t.filter.predict();
            if t.since_update > 0 {
                t.streak = 0;
            }
            t.since_update += 1;
        }

        let cost = DMatrix::from_fn(live.len(), fdets.len(), |i, j| {
            let iou = live[i].predicted.map_or(0.0, |p| p.iou(&fdets[j].bbox));
            if iou >= params.iou_min && iou > 0.0 {
                1.0 - iou
            } else {
                f64::INFINITY
            }
        });
        let mut det_used = vec![false; fdets.len()];
        for (ti, di) in hungarian(&cost).pairs {
            det_used[di] = true;
            let t = &mut live[ti];
            t.filter.update(&fdets[di].bbox);
            t.since_update = 0;
            t.streak += 1;
            if t.id.is_some() || t.streak >= params.min_hits {
                let id = em.confirm(&mut t.id);
                em.emit(id, frame, fdets[di].bbox);
            }
        }

        for (di, d) in fdets.iter().enumerate() {
            if det_used[di] {
                continue;
            }
            let mut t = Live {
                filter: BoxKalman::new(&d.bbox, params.process_noise, params.measurement_noise),
                predicted: None,
                since_update: 0,
                streak: 1,
                id: None,
            };
            if params.min_hits <= 1 {
                let id = em.confirm(&mut t.id);
                em.emit(id, frame, d.bbox);
            }
            live.push(t);
        }

        live.retain(|t| t.since_update <= params.max_age);
        if params.emit_predictions {
            for t in &live {
                if let (Some(id), true, Some(p)) = (t.id, t.since_update > 0, t.predicted) {
                    em.emit(id, frame, p);
                }
            }
        }
    }
    em.finish()
}
