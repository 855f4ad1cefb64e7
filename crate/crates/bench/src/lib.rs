//! Inputs shared by the benchmarks.

use nalgebra::DMatrix;
use pedsim_core::annotation::annotate_trace;
use pedsim_core::perception::{profile, synthesize_detections, Detection, DetectorModel};
use pedsim_core::rng::stream;
use pedsim_core::scenario::shipped_scenario;
use pedsim_core::sim::run_simulation;
use pedsim_core::AnnotationFile;
use rand::Rng;

/// Dense `n x n` cost matrix with entries in [0, 1).
pub fn random_costs(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = stream(seed, "bench", "costs", n as u64);
    DMatrix::from_fn(n, n, |_, _| rng.random::<f64>())
}

/// Ground truth for the first camera of a shipped scenario.
pub fn shipped_annotations(name: &str) -> AnnotationFile {
    let scenario = shipped_scenario(name)
        .expect("shipped scenario")
        .expect("shipped scenarios parse");
    let trace = run_simulation(&scenario);
    annotate_trace(&trace, &scenario, &scenario.cameras[0].id).expect("camera exists")
}

pub fn detections(ann: &AnnotationFile, profile_name: &str) -> Vec<Detection> {
    let model = DetectorModel {
        degradation: profile(profile_name).expect("known profile"),
        seed: ann.seed,
    };
    synthesize_detections(ann, &model)
}
