//! Greedy frame-to-frame IoU association.

use super::{frames_of, Detection, Emitter, TrackSet};
use crate::bbox::BBox2D;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IouTrackerParams {
    pub iou_min: f64,
    /// Frames a track may go unmatched and still be extended.
    pub max_age: u32,
    pub min_hits: u32,
}

impl Default for IouTrackerParams {
    fn default() -> Self {
        Self {
            iou_min: 0.3,
            max_age: 10,
            min_hits: 2,
        }
    }
}

struct Live {
    last_box: BBox2D,
    last_frame: u32,
    streak: u32,
    id: Option<u32>,
}

/// Links each detection to the live track whose last box overlaps it most.
///
/// Candidate pairs are taken in order of decreasing IoU (ties: lower track
/// index, then lower detection index). Output boxes are the input
/// detection boxes.
pub fn track_iou(dets: &[Detection], params: &IouTrackerParams) -> TrackSet {
    let mut live: Vec<Live> = Vec::new();
    let mut em = Emitter::default();
    for (frame, fdets) in frames_of(dets) {
        live.retain(|t| frame - t.last_frame - 1 <= params.max_age);
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (ti, t) in live.iter().enumerate() {
            for (di, d) in fdets.iter().enumerate() {
                let iou = t.last_box.iou(&d.bbox);
                if iou >= params.iou_min && iou > 0.0 {
                    pairs.push((iou, ti, di));
                }
            }
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut track_used = vec![false; live.len()];
        let mut det_used = vec![false; fdets.len()];
        for (_, ti, di) in pairs {
            if track_used[ti] || det_used[di] {
                continue;
            }
            track_used[ti] = true;
            det_used[di] = true;
            let t = &mut live[ti];
            t.streak = if t.last_frame + 1 == frame { t.streak + 1 } else { 1 };
            t.last_frame = frame;
            t.last_box = fdets[di].bbox;
        }
        for (di, d) in fdets.iter().enumerate() {
            if !det_used[di] {
                live.push(Live {
                    last_box: d.bbox,
                    last_frame: frame,
                    streak: 1,
                    id: None,
                });
            }
        }
        for t in live.iter_mut().filter(|t| t.last_frame == frame) {
            if t.id.is_some() || t.streak >= params.min_hits {
                let id = em.confirm(&mut t.id);
                em.emit(id, frame, t.last_box);
            }
        }
    }
    em.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(frame: u32, x: f64) -> Detection {
        Detection {
            frame,
            bbox: BBox2D::from_xywh(x, 100.0, 40.0, 100.0),
            score: 1.0,
        }
    }

    #[test]
    fn stationary_box_is_one_track() {
        let dets: Vec<_> = (0..50).map(|f| det(f, 10.0)).collect();
        let p = IouTrackerParams::default();
        let t = track_iou(&dets, &p);
        assert_eq!(t.tracks.len(), 1);
        let frames: Vec<u32> = t.tracks[0].entries.iter().map(|e| e.0).collect();
        assert_eq!(frames, ((p.min_hits - 1)..50).collect::<Vec<_>>());
        assert_eq!(t.tracks[0].id, 1);
    }

    #[test]
    fn disjoint_boxes_fragment() {
        // alternating far-apart positions never overlap
        let dets: Vec<_> = (0..6).map(|f| det(f, if f % 2 == 0 { 0.0 } else { 500.0 })).collect();
        let p = IouTrackerParams {
            min_hits: 1,
            max_age: 0,
            ..Default::default()
        };
        assert_eq!(track_iou(&dets, &p).tracks.len(), 6);
        // the default min_hits suppresses every singleton
        let p = IouTrackerParams {
            max_age: 0,
            ..Default::default()
        };
        assert!(track_iou(&dets, &p).tracks.is_empty());
    }

    #[test]
    fn gap_beyond_max_age_starts_new_track() {
        let p = IouTrackerParams::default();
        let mut dets: Vec<_> = (0..10).map(|f| det(f, 10.0)).collect();
        let resume = 10 + p.max_age + 10;
        dets.extend((resume..resume + 10).map(|f| det(f, 10.0)));
        let t = track_iou(&dets, &p);
        assert_eq!(t.tracks.len(), 2);

        // a gap within max_age keeps the identity
        let mut dets: Vec<_> = (0..10).map(|f| det(f, 10.0)).collect();
        dets.extend((15..25).map(|f| det(f, 10.0)));
        assert_eq!(track_iou(&dets, &p).tracks.len(), 1);
    }

    #[test]
    fn output_boxes_are_inputs_and_empty_is_empty() {
        assert!(track_iou(&[], &IouTrackerParams::default()).tracks.is_empty());
        let dets: Vec<_> = (0..20)
            .flat_map(|f| [det(f, f64::from(f)), det(f, 400.0 - f64::from(f))])
            .collect();
        let t = track_iou(&dets, &IouTrackerParams::default());
        assert_eq!(t.tracks.len(), 2);
        for (frame, boxes) in t.by_frame() {
            for (_, b) in boxes {
                assert!(dets.iter().any(|d| d.frame == frame && d.bbox == b));
            }
        }
    }
}
