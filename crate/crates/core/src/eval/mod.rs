//! CLEAR MOT and identity metrics.
//!
//! Ground truth comes from annotation files, hypotheses from a [`TrackSet`].
//! Evaluation covers exactly the ground-truth frames; hypothesis boxes on
//! other frames are ignored.

mod hungarian;

pub use hungarian::{hungarian, Assignment};

use crate::annotation::AnnotationFile;
use crate::bbox::BBox2D;
use crate::perception::TrackSet;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtBox {
    pub id: u32,
    pub bbox: BBox2D,
    pub visibility: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    /// Every evaluated frame, including frames with no boxes.
    pub frames: BTreeMap<u32, Vec<GtBox>>,
}

impl GroundTruth {
    pub fn from_annotations(ann: &AnnotationFile) -> Self {
        Self {
            frames: ann
                .frames
                .iter()
                .map(|f| {
                    let boxes = f
                        .pedestrians
                        .iter()
                        .map(|p| GtBox {
                            id: p.id,
                            bbox: p.bbox,
                            visibility: p.visibility,
                        })
                        .collect();
                    (f.frame, boxes)
                })
                .collect(),
        }
    }

    /// Fully visible boxes from a track set, over `first..=last`.
    pub fn from_tracks(tracks: &TrackSet, first: u32, last: u32) -> Self {
        let mut frames: BTreeMap<u32, Vec<GtBox>> = (first..=last).map(|f| (f, vec![])).collect();
        for (f, boxes) in tracks.by_frame() {
            if let Some(v) = frames.get_mut(&f) {
                v.extend(boxes.into_iter().map(|(id, bbox)| GtBox {
                    id,
                    bbox,
                    visibility: 1.0,
                }));
            }
        }
        Self { frames }
    }

    /// Ground truth replayed as a perfect tracker's output.
    pub fn as_tracks(&self) -> TrackSet {
        TrackSet::from_entries(
            self.frames
                .iter()
                .flat_map(|(&f, boxes)| boxes.iter().map(move |b| (f, b.id, b.bbox))),
        )
        .expect("ground-truth ids are unique per frame")
    }

    pub fn box_count(&self) -> usize {
        self.frames.values().map(Vec::len).sum()
    }

    pub fn frame_range(&self) -> Option<(u32, u32)> {
        Some((*self.frames.keys().next()?, *self.frames.keys().next_back()?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Minimum IoU for a ground-truth/hypothesis pair to match.
    pub iou_threshold: f64,
    /// Ground-truth boxes less visible than this are ignored: they are
    /// neither misses nor do hypotheses covering them count as false
    /// positives.
    pub visibility_floor: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            visibility_floor: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("iou threshold must be in (0, 1], got {0}")]
    IouThreshold(f64),
    #[error("visibility floor must be in [0, 1), got {0}")]
    VisibilityFloor(f64),
    #[error("ground truth has no boxes to evaluate against")]
    EmptyGroundTruth,
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if !(self.iou_threshold > 0.0 && self.iou_threshold <= 1.0) {
            return Err(EvalError::IouThreshold(self.iou_threshold));
        }
        if !(self.visibility_floor >= 0.0 && self.visibility_floor < 1.0) {
            return Err(EvalError::VisibilityFloor(self.visibility_floor));
        }
        Ok(())
    }
}

/// One frame's boxes after filtering: `(id, box)` pairs.
struct FramePair {
    frame: u32,
    gt: Vec<(u32, BBox2D)>,
    hyp: Vec<(u32, BBox2D)>,
}

fn iou_cost(gt: &[(u32, BBox2D)], hyp: &[(u32, BBox2D)], threshold: f64) -> DMatrix<f64> {
    DMatrix::from_fn(gt.len(), hyp.len(), |i, j| {
        let iou = gt[i].1.iou(&hyp[j].1);
        if iou >= threshold {
            1.0 - iou
        } else {
            f64::INFINITY
        }
    })
}

/// Aligns hypotheses with ground-truth frames and removes ignored ground
/// truth together with the hypotheses matched to it.
fn prepare(gt: &GroundTruth, hyp: &TrackSet, cfg: &EvalConfig) -> Result<Vec<FramePair>, EvalError> {
    cfg.validate()?;
    let mut hyp_frames = hyp.by_frame();
    let pairs: Vec<FramePair> = gt
        .frames
        .iter()
        .map(|(&frame, boxes)| {
            let all_gt: Vec<(u32, BBox2D)> = boxes.iter().map(|b| (b.id, b.bbox)).collect();
            let mut hyps = hyp_frames.remove(&frame).unwrap_or_default();
            let ignored: Vec<bool> = boxes.iter().map(|b| b.visibility < cfg.visibility_floor).collect();
            if ignored.iter().any(|&x| x) {
                let mut drop = vec![false; hyps.len()];
                for (i, j) in hungarian(&iou_cost(&all_gt, &hyps, cfg.iou_threshold)).pairs {
                    drop[j] = ignored[i];
                }
                let mut k = 0;
                hyps.retain(|_| {
                    k += 1;
                    !drop[k - 1]
                });
            }
            let kept = all_gt
                .into_iter()
                .zip(&ignored)
                .filter(|(_, &ig)| !ig)
                .map(|(g, _)| g)
                .collect();
            FramePair {
                frame,
                gt: kept,
                hyp: hyps,
            }
        })
        .collect();
    if pairs.iter().all(|p| p.gt.is_empty()) {
        return Err(EvalError::EmptyGroundTruth);
    }
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameLog {
    pub frame: u32,
    pub gt: usize,
    pub matches: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub idsw: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClearMot {
    pub mota: f64,
    pub motp: f64,
    pub fp: usize,
    pub fn_: usize,
    pub idsw: usize,
    pub gt: usize,
    pub matches: usize,
    pub per_frame: Vec<FrameLog>,
}

fn clear_mot_prepared(frames: &[FramePair], cfg: &EvalConfig) -> ClearMot {
    let mut last_match: HashMap<u32, u32> = HashMap::new();
    let (mut fp, mut fn_, mut idsw, mut gt_total, mut matches) = (0, 0, 0, 0, 0);
    let mut iou_sum = 0.0;
    let mut per_frame = Vec::with_capacity(frames.len());
    for f in frames {
        let mut gt_used = vec![false; f.gt.len()];
        let mut hyp_used = vec![false; f.hyp.len()];
        let mut matched: Vec<(usize, usize)> = Vec::new();

        // keep last pairings that still overlap enough
        for (gi, (gid, gb)) in f.gt.iter().enumerate() {
            let Some(&hid) = last_match.get(gid) else { continue };
            if let Some(hj) = f.hyp.iter().position(|(h, _)| *h == hid) {
                if !hyp_used[hj] && gb.iou(&f.hyp[hj].1) >= cfg.iou_threshold {
                    gt_used[gi] = true;
                    hyp_used[hj] = true;
                    matched.push((gi, hj));
                }
            }
        }

        let free_gt: Vec<usize> = (0..f.gt.len()).filter(|&i| !gt_used[i]).collect();
        let free_hyp: Vec<usize> = (0..f.hyp.len()).filter(|&j| !hyp_used[j]).collect();
        let g: Vec<(u32, BBox2D)> = free_gt.iter().map(|&i| f.gt[i]).collect();
        let h: Vec<(u32, BBox2D)> = free_hyp.iter().map(|&j| f.hyp[j]).collect();
        let mut frame_idsw = 0;
        for (a, b) in hungarian(&iou_cost(&g, &h, cfg.iou_threshold)).pairs {
            let (gi, hj) = (free_gt[a], free_hyp[b]);
            let (gid, hid) = (f.gt[gi].0, f.hyp[hj].0);
            if last_match.get(&gid).is_some_and(|&prev| prev != hid) {
                frame_idsw += 1;
            }
            matched.push((gi, hj));
        }
        for &(gi, hj) in &matched {
            last_match.insert(f.gt[gi].0, f.hyp[hj].0);
            iou_sum += f.gt[gi].1.iou(&f.hyp[hj].1);
        }

        let log = FrameLog {
            frame: f.frame,
            gt: f.gt.len(),
            matches: matched.len(),
            fp: f.hyp.len() - matched.len(),
            fn_: f.gt.len() - matched.len(),
            idsw: frame_idsw,
        };
        fp += log.fp;
        fn_ += log.fn_;
        idsw += log.idsw;
        gt_total += log.gt;
        matches += log.matches;
        per_frame.push(log);
    }
    ClearMot {
        mota: 1.0 - (fn_ + fp + idsw) as f64 / gt_total as f64,
        motp: if matches > 0 { iou_sum / matches as f64 } else { 0.0 },
        fp,
        fn_,
        idsw,
        gt: gt_total,
        matches,
        per_frame,
    }
}

/// CLEAR MOT: per frame, previous pairings that still pass the IoU gate are
/// kept, the rest are matched by minimum total `1 - IoU`, and a ground-truth
/// id matched to a different hypothesis id than its last match is an
/// identity switch.
pub fn clear_mot(gt: &GroundTruth, hyp: &TrackSet, cfg: &EvalConfig) -> Result<ClearMot, EvalError> {
    Ok(clear_mot_prepared(&prepare(gt, hyp, cfg)?, cfg))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityMetrics {
    pub idf1: f64,
    pub idp: f64,
    pub idr: f64,
    pub idtp: usize,
    pub idfp: usize,
    pub idfn: usize,
    /// Total cost of the optimal trajectory assignment, `idfp + idfn`.
    pub assignment_cost: usize,
}

/// Per-trajectory lengths and pairwise agreement counts.
struct TrajectoryOverlap {
    gt_len: Vec<usize>,
    hyp_len: Vec<usize>,
    /// `agree[i][j]`: frames where gt trajectory i and hyp trajectory j
    /// overlap at or above the IoU gate.
    agree: Vec<Vec<usize>>,
}

fn trajectory_overlap(frames: &[FramePair], cfg: &EvalConfig) -> TrajectoryOverlap {
    let mut gt_index: BTreeMap<u32, usize> = BTreeMap::new();
    let mut hyp_index: BTreeMap<u32, usize> = BTreeMap::new();
    for f in frames {
        for (id, _) in &f.gt {
            let n = gt_index.len();
            gt_index.entry(*id).or_insert(n);
        }
        for (id, _) in &f.hyp {
            let n = hyp_index.len();
            hyp_index.entry(*id).or_insert(n);
        }
    }
    let mut gt_len = vec![0; gt_index.len()];
    let mut hyp_len = vec![0; hyp_index.len()];
    let mut agree = vec![vec![0; hyp_index.len()]; gt_index.len()];
    for f in frames {
        for (gid, gb) in &f.gt {
            let i = gt_index[gid];
            gt_len[i] += 1;
            for (hid, hb) in &f.hyp {
                if gb.iou(hb) >= cfg.iou_threshold {
                    agree[i][hyp_index[hid]] += 1;
                }
            }
        }
        for (hid, _) in &f.hyp {
            hyp_len[hyp_index[hid]] += 1;
        }
    }
    TrajectoryOverlap { gt_len, hyp_len, agree }
}

/// Identity cost matrix over `G + H` nodes: ground-truth trajectories and
/// dummy rows versus hypothesis trajectories and dummy columns.
fn identity_cost_matrix(o: &TrajectoryOverlap) -> DMatrix<f64> {
    let (g, h) = (o.gt_len.len(), o.hyp_len.len());
    let n = g + h;
    DMatrix::from_fn(n, n, |r, c| {
        let cost = match (r < g, c < h) {
            (true, true) => o.gt_len[r] + o.hyp_len[c] - 2 * o.agree[r][c],
            // ground truth left unmatched: every frame is a miss
            (true, false) => {
                if c - h == r {
                    o.gt_len[r]
                } else {
                    return f64::INFINITY;
                }
            }
            // hypothesis left unmatched: every frame is a false positive
            (false, true) => {
                if r - g == c {
                    o.hyp_len[c]
                } else {
                    return f64::INFINITY;
                }
            }
            (false, false) => 0,
        };
        cost as f64
    })
}

fn identity_prepared(frames: &[FramePair], cfg: &EvalConfig) -> IdentityMetrics {
    let o = trajectory_overlap(frames, cfg);
    let (g, h) = (o.gt_len.len(), o.hyp_len.len());
    let a = hungarian(&identity_cost_matrix(&o));
    let idtp: usize = a
        .pairs
        .iter()
        .filter(|&&(r, c)| r < g && c < h)
        .map(|&(r, c)| o.agree[r][c])
        .sum();
    let gt_total: usize = o.gt_len.iter().sum();
    let hyp_total: usize = o.hyp_len.iter().sum();
    let (idfn, idfp) = (gt_total - idtp, hyp_total - idtp);
    let ratio = |num: usize, den: usize| if den > 0 { num as f64 / den as f64 } else { 0.0 };
    IdentityMetrics {
        idf1: ratio(2 * idtp, 2 * idtp + idfp + idfn),
        idp: ratio(idtp, idtp + idfp),
        idr: ratio(idtp, idtp + idfn),
        idtp,
        idfp,
        idfn,
        assignment_cost: a.cost as usize,
    }
}

/// Identity metrics from the single best one-to-one assignment between
/// ground-truth and hypothesis trajectories.
pub fn identity_metrics(gt: &GroundTruth, hyp: &TrackSet, cfg: &EvalConfig) -> Result<IdentityMetrics, EvalError> {
    Ok(identity_prepared(&prepare(gt, hyp, cfg)?, cfg))
}

/// Machine-readable evaluation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalReport {
    pub mota: f64,
    pub motp: f64,
    pub idf1: f64,
    pub idp: f64,
    pub idr: f64,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub idsw: usize,
    /// Ground-truth boxes evaluated.
    pub gt: usize,
    /// Frames evaluated.
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: EvalReport,
    pub clear: ClearMot,
    pub identity: IdentityMetrics,
}

pub fn eval_report(gt: &GroundTruth, hyp: &TrackSet, cfg: &EvalConfig) -> Result<Evaluation, EvalError> {
    let frames = prepare(gt, hyp, cfg)?;
    let clear = clear_mot_prepared(&frames, cfg);
    let identity = identity_prepared(&frames, cfg);
    let report = EvalReport {
        mota: clear.mota,
        motp: clear.motp,
        idf1: identity.idf1,
        idp: identity.idp,
        idr: identity.idr,
        fp: clear.fp,
        fn_: clear.fn_,
        idsw: clear.idsw,
        gt: clear.gt,
        frames: frames.len(),
    };
    Ok(Evaluation {
        report,
        clear,
        identity,
    })
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Aligned plain-text table, percentages for the ratio columns.
    pub fn to_table(&self) -> String {
        let header = ["MOTA", "MOTP", "IDF1", "IDP", "IDR", "FP", "FN", "IDSW", "GT", "Frames"];
        let pct = |v: f64| format!("{:.1}", 100.0 * v);
        let cells = [
            pct(self.mota),
            pct(self.motp),
            pct(self.idf1),
            pct(self.idp),
            pct(self.idr),
            self.fp.to_string(),
            self.fn_.to_string(),
            self.idsw.to_string(),
            self.gt.to_string(),
            self.frames.to_string(),
        ];
        let widths: Vec<usize> = header.iter().zip(&cells).map(|(h, c)| h.len().max(c.len())).collect();
        let mut out = String::new();
        for row in [header.map(String::from).to_vec(), cells.to_vec()] {
            let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            writeln!(out, "{}", line.join("  ")).expect("write to String");
        }
        out
    }
}
