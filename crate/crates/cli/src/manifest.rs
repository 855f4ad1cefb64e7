//! Reproducibility manifest written by `pipeline`.
//!
//! It embeds the scenario text and every resolved parameter, so a re-run
//! needs nothing else. No timestamps or absolute paths are recorded; two
//! runs with the same manifest write identical bytes.

use crate::output::{user, CliResult};
use crate::TrackerKind;
use pedsim_core::eval::EvalConfig;
use pedsim_core::perception::{IouTrackerParams, KalmanTrackerParams};
use pedsim_core::scenario::DegradationSpec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerRecord {
    pub kind: TrackerKind,
    pub iou_min: f64,
    pub max_age: u32,
    pub min_hits: u32,
    pub process_noise: f64,
    pub measurement_noise: f64,
    pub emit_predictions: bool,
}

impl TrackerRecord {
    pub fn iou_params(&self) -> IouTrackerParams {
        IouTrackerParams {
            iou_min: self.iou_min,
            max_age: self.max_age,
            min_hits: self.min_hits,
        }
    }

    pub fn kalman_params(&self) -> KalmanTrackerParams {
        KalmanTrackerParams {
            iou_min: self.iou_min,
            max_age: self.max_age,
            min_hits: self.min_hits,
            process_noise: self.process_noise,
            measurement_noise: self.measurement_noise,
            emit_predictions: self.emit_predictions,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if !(0.0..=1.0).contains(&self.iou_min) {
            return Err(user(format!("--iou-min must be in [0, 1], got {}", self.iou_min)));
        }
        for (flag, v) in [
            ("--process-noise", self.process_noise),
            ("--measurement-noise", self.measurement_noise),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(user(format!("{flag} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalRecord {
    pub iou_threshold: f64,
    pub visibility_floor: f64,
}

impl From<EvalRecord> for EvalConfig {
    fn from(r: EvalRecord) -> Self {
        EvalConfig {
            iou_threshold: r.iou_threshold,
            visibility_floor: r.visibility_floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub tool_version: String,
    pub scenario: String,
    pub scenario_sha256: String,
    pub scenario_text: String,
    pub seed: u64,
    /// Profile name, or the file name of a profile file.
    pub profile: String,
    pub degradation: DegradationSpec,
    pub tracker: TrackerRecord,
    pub eval: EvalRecord,
    /// Output file name to SHA-256 of its contents.
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| user(format!("malformed manifest: {e}")))?;
        if m.format_version != MANIFEST_VERSION {
            return Err(user(format!(
                "unsupported manifest format_version {}",
                m.format_version
            )));
        }
        Ok(m)
    }
}
