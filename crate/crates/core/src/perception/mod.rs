//! Synthetic detector and baseline trackers.
//!
//! Frame indices are 0-based in memory and 1-based in MOT text files.

mod detector;
mod iou_tracker;
mod kalman;
mod mot;

pub use detector::{
    detection_probability, parse_profile, profile, synthesize_detections, DetectorModel, PROFILE_NAMES,
};
pub use iou_tracker::{track_iou, IouTrackerParams};
pub use kalman::{track_kalman, BoxKalman, KalmanTrackerParams};
pub use mot::{read_mot, write_mot, MotParseError, MotRow};

use crate::bbox::BBox2D;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub frame: u32,
    pub bbox: BBox2D,
    pub score: f64,
}

/// Detections sorted by frame.
pub type DetectionSet = Vec<Detection>;

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u32,
    /// Strictly increasing frames, one box each.
    pub entries: Vec<(u32, BBox2D)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrackSet {
    /// Sorted by id.
    pub tracks: Vec<Track>,
}

impl TrackSet {
    /// `frame -> [(track id, box)]`, ids ascending within a frame.
    pub fn by_frame(&self) -> BTreeMap<u32, Vec<(u32, BBox2D)>> {
        let mut out: BTreeMap<u32, Vec<(u32, BBox2D)>> = BTreeMap::new();
        for t in &self.tracks {
            for &(f, b) in &t.entries {
                out.entry(f).or_default().push((t.id, b));
            }
        }
        for v in out.values_mut() {
            v.sort_by_key(|e| e.0);
        }
        out
    }

    pub fn box_count(&self) -> usize {
        self.tracks.iter().map(|t| t.entries.len()).sum()
    }

    /// Builds a set from `(frame, id, box)` triples; fails on a repeated
    /// `(frame, id)` pair.
    pub fn from_entries(entries: impl IntoIterator<Item = (u32, u32, BBox2D)>) -> Result<Self, (u32, u32)> {
        let mut by_id: BTreeMap<u32, BTreeMap<u32, BBox2D>> = BTreeMap::new();
        for (frame, id, b) in entries {
            if by_id.entry(id).or_default().insert(frame, b).is_some() {
                return Err((frame, id));
            }
        }
        Ok(Self {
            tracks: by_id
                .into_iter()
                .map(|(id, frames)| Track {
                    id,
                    entries: frames.into_iter().collect(),
                })
                .collect(),
        })
    }

    /// Keeps entries with `first <= frame <= last`; returns the number of
    /// entries removed.
    pub fn retain_frames(&mut self, first: u32, last: u32) -> usize {
        let before = self.box_count();
        for t in &mut self.tracks {
            t.entries.retain(|(f, _)| (first..=last).contains(f));
        }
        self.tracks.retain(|t| !t.entries.is_empty());
        before - self.box_count()
    }

    pub fn to_rows(&self) -> Vec<MotRow> {
        self.by_frame()
            .into_iter()
            .flat_map(|(frame, boxes)| {
                boxes.into_iter().map(move |(id, bbox)| MotRow {
                    frame,
                    id: i64::from(id),
                    bbox,
                    score: 1.0,
                })
            })
            .collect()
    }
}

pub fn detections_to_rows(dets: &[Detection]) -> Vec<MotRow> {
    dets.iter()
        .map(|d| MotRow {
            frame: d.frame,
            id: -1,
            bbox: d.bbox,
            score: d.score,
        })
        .collect()
}

/// Detections from parsed rows (ids are ignored), sorted by frame.
pub fn rows_to_detections(rows: &[MotRow]) -> DetectionSet {
    let mut dets: Vec<Detection> = rows
        .iter()
        .map(|r| Detection {
            frame: r.frame,
            bbox: r.bbox,
            score: r.score,
        })
        .collect();
    dets.sort_by_key(|d| d.frame);
    dets
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrackRowError {
    #[error("track id {id} on frame {frame} is negative")]
    NegativeId { frame: u32, id: i64 },
    #[error("track id {id} appears twice on frame {frame}")]
    Duplicate { frame: u32, id: u32 },
}

/// Tracks from parsed rows; ids must be non-negative and unique per frame.
pub fn rows_to_tracks(rows: &[MotRow]) -> Result<TrackSet, TrackRowError> {
    let mut entries = Vec::with_capacity(rows.len());
    for r in rows {
        let id = u32::try_from(r.id).map_err(|_| TrackRowError::NegativeId {
            frame: r.frame,
            id: r.id,
        })?;
        entries.push((r.frame, id, r.bbox));
    }
    TrackSet::from_entries(entries).map_err(|(frame, id)| TrackRowError::Duplicate { frame, id })
}

/// Lifecycle shared by both trackers: a track is confirmed after
/// `min_hits` consecutive matched frames and from then on reports every
/// matched frame. Ids are handed out at confirmation, starting at 1.
#[derive(Debug, Default)]
struct Emitter {
    next_id: u32,
    out: BTreeMap<u32, Vec<(u32, BBox2D)>>,
}

impl Emitter {
    fn confirm(&mut self, id: &mut Option<u32>) -> u32 {
        *id.get_or_insert_with(|| {
            self.next_id += 1;
            self.next_id
        })
    }

    fn emit(&mut self, id: u32, frame: u32, b: BBox2D) {
        self.out.entry(id).or_default().push((frame, b));
    }

    fn finish(self) -> TrackSet {
        TrackSet {
            tracks: self
                .out
                .into_iter()
                .map(|(id, entries)| Track { id, entries })
                .collect(),
        }
    }
}

/// Detections grouped by frame over `first..=last` of the input.
fn frames_of(dets: &[Detection]) -> Vec<(u32, Vec<Detection>)> {
    let mut map: BTreeMap<u32, Vec<Detection>> = BTreeMap::new();
    for d in dets {
        map.entry(d.frame).or_default().push(*d);
    }
    let (Some(&first), Some(&last)) = (map.keys().next(), map.keys().next_back()) else {
        return vec![];
    };
    (first..=last)
        .map(|f| (f, map.remove(&f).unwrap_or_default()))
        .collect()
}
