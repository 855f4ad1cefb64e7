//! Headless pedestrian-scenario simulation with automatic ground truth,
//! synthetic detections under weather degradation, baseline trackers and
//! CLEAR MOT / identity evaluation.

pub mod annotation;
pub mod bbox;
pub mod eval;
pub mod geometry;
pub mod perception;
pub mod rng;
pub mod scenario;
pub mod sim;

pub use annotation::{annotate_trace, AnnotationFile, FrameAnnotation, PedestrianAnnotation};
pub use bbox::BBox2D;
pub use eval::{eval_report, EvalConfig, EvalReport, GroundTruth};
pub use geometry::{CameraIntrinsics, Pose, Vec3};
pub use perception::{Detection, DetectorModel, Track, TrackSet};
pub use scenario::{parse_scenario, DegradationSpec, Scenario};
pub use sim::{run_simulation, SimTrace};
