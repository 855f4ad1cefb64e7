use crate::manifest::{EvalRecord, Manifest, TrackerRecord, MANIFEST_FILE, MANIFEST_VERSION};
use crate::output::{emit, ensure_dir, read_text, sha256_hex, user, write_atomic, CliError, CliResult};
use crate::{DetectArgs, EvalArgs, EvalFlags, PipelineArgs, SimulateArgs, TrackArgs, TrackerFlags, TrackerKind};
use pedsim_core::annotation::{annotate_trace, mask_file_name, render_tick_mask, AnnotationFile};
use pedsim_core::eval::{eval_report, EvalConfig, EvalReport, GroundTruth};
use pedsim_core::perception::{
    detections_to_rows, parse_profile, profile, read_mot, rows_to_detections, rows_to_tracks, synthesize_detections,
    track_iou, track_kalman, write_mot, Detection, DetectorModel, TrackSet, PROFILE_NAMES,
};
use pedsim_core::scenario::{parse_scenario, DegradationSpec, ParseError, Scenario};
use pedsim_core::sim::{run_simulation, trace_to_json};
use std::collections::BTreeMap;
use std::path::Path;

fn load_scenario(label: &str, text: &str) -> CliResult<Scenario> {
    parse_scenario(text).map_err(|e| match e {
        ParseError::Syntax { line, column, message } => {
            user(format!("{label}: line {line}, column {column}: {message}"))
        }
        ParseError::Invalid(violations) => {
            let mut msg = format!("{label}: {} violation(s)", violations.len());
            for v in violations {
                msg.push_str(&format!("\n  - {v}"));
            }
            user(msg)
        }
    })
}

fn load_annotations(path: &Path) -> CliResult<AnnotationFile> {
    AnnotationFile::from_json(&read_text(path)?).map_err(|e| user(format!("{}: {e}", path.display())))
}

/// Resolves `--profile` to a label for the manifest and its parameters.
fn resolve_profile(name: &str, scenario: Option<&Scenario>) -> CliResult<(String, DegradationSpec)> {
    if name == "scenario" {
        return scenario
            .map(|s| (name.to_owned(), s.degradation))
            .ok_or_else(|| user("profile 'scenario' needs a scenario; use a named profile or a profile file"));
    }
    if let Some(d) = profile(name) {
        return Ok((name.to_owned(), d));
    }
    let path = Path::new(name);
    if path.is_file() {
        let d = parse_profile(&read_text(path)?).map_err(|e| user(format!("{name}: {e}")))?;
        let label = path
            .file_name()
            .map_or(name.into(), |f| f.to_string_lossy().into_owned());
        return Ok((label, d));
    }
    let mut available: Vec<&str> = PROFILE_NAMES.to_vec();
    if scenario.is_some() {
        available.push("scenario");
    }
    Err(user(format!(
        "unknown profile '{name}'; available: {}, or a profile file",
        available.join(", ")
    )))
}

fn resolve_tracker(f: &TrackerFlags) -> CliResult<TrackerRecord> {
    let (max_age, min_hits) = match f.tracker {
        TrackerKind::Iou => (10, 2),
        TrackerKind::Kalman => (30, 3),
    };
    let rec = TrackerRecord {
        kind: f.tracker,
        iou_min: f.iou_min.unwrap_or(0.3),
        max_age: f.max_age.unwrap_or(max_age),
        min_hits: f.min_hits.unwrap_or(min_hits),
        process_noise: f.process_noise,
        measurement_noise: f.measurement_noise,
        emit_predictions: f.emit_predictions,
    };
    rec.validate()?;
    Ok(rec)
}

fn resolve_eval(f: &EvalFlags) -> CliResult<EvalRecord> {
    let rec = EvalRecord {
        iou_threshold: f.iou_threshold,
        visibility_floor: f.visibility_floor,
    };
    EvalConfig::from(rec).validate().map_err(|e| user(e.to_string()))?;
    Ok(rec)
}

fn run_tracker(rec: &TrackerRecord, dets: &[Detection]) -> TrackSet {
    match rec.kind {
        TrackerKind::Iou => track_iou(dets, &rec.iou_params()),
        TrackerKind::Kalman => track_kalman(dets, &rec.kalman_params()),
    }
}

fn parse_detections(label: &str, text: &str) -> CliResult<Vec<Detection>> {
    let rows = read_mot(text).map_err(|e| user(format!("{label}: {e}")))?;
    Ok(rows_to_detections(&rows))
}

fn parse_tracks(label: &str, text: &str) -> CliResult<TrackSet> {
    let rows = read_mot(text).map_err(|e| user(format!("{label}: {e}")))?;
    rows_to_tracks(&rows).map_err(|e| user(format!("{label}: {e}")))
}

/// Evaluates over the ground-truth frames, warning about hypothesis rows
/// outside them.
fn evaluate(ann: &AnnotationFile, mut tracks: TrackSet, cfg: &EvalConfig) -> CliResult<EvalReport> {
    let (first, last) = ann.frame_range().ok_or_else(|| user("annotations contain no frames"))?;
    let dropped = tracks.retain_frames(first, last);
    if dropped > 0 {
        eprintln!(
            "warning: {dropped} track row(s) outside annotated frames {}..{} ignored",
            first + 1,
            last + 1
        );
    }
    let gt = GroundTruth::from_annotations(ann);
    eval_report(&gt, &tracks, cfg)
        .map(|e| e.report)
        .map_err(|e| user(e.to_string()))
}

pub fn simulate(a: SimulateArgs) -> CliResult<()> {
    let label = a.scenario.display().to_string();
    let mut scenario = load_scenario(&label, &read_text(&a.scenario)?)?;
    if let Some(seed) = a.seed {
        scenario.seed = seed;
    }
    ensure_dir(&a.out_dir)?;
    let trace = run_simulation(&scenario);
    if a.trace {
        let path = a.out_dir.join(format!("{}_trace.json", scenario.name));
        write_atomic(&path, trace_to_json(&trace).as_bytes())?;
    }
    for cam in &scenario.cameras {
        let ann = annotate_trace(&trace, &scenario, &cam.id).map_err(|e| user(e.to_string()))?;
        let path = a.out_dir.join(format!("{}_{}.json", scenario.name, cam.id));
        write_atomic(&path, ann.to_json().as_bytes())?;
        println!("{} ({} frames)", path.display(), ann.frames.len());
        if a.masks {
            for (i, tick) in trace.ticks.iter().enumerate() {
                let mask =
                    render_tick_mask(&trace, &scenario, &cam.id, i, a.mask_divisor).map_err(|e| user(e.to_string()))?;
                let pgm = mask.to_pgm().map_err(|e| user(e.to_string()))?;
                let name = mask_file_name(&scenario.name, &cam.id, tick.frame);
                write_atomic(&a.out_dir.join(name), &pgm)?;
            }
        }
    }
    Ok(())
}

pub fn detect(a: DetectArgs) -> CliResult<()> {
    let ann = load_annotations(&a.annotations)?;
    let (_, degradation) = resolve_profile(&a.profile, None)?;
    let model = DetectorModel {
        degradation,
        seed: a.seed.unwrap_or(ann.seed),
    };
    let dets = synthesize_detections(&ann, &model);
    emit(a.out.as_deref(), &write_mot(&detections_to_rows(&dets)))
}

pub fn track(a: TrackArgs) -> CliResult<()> {
    let rec = resolve_tracker(&a.tracker)?;
    let label = a.detections.display().to_string();
    let dets = parse_detections(&label, &read_text(&a.detections)?)?;
    let tracks = run_tracker(&rec, &dets);
    emit(a.out.as_deref(), &write_mot(&tracks.to_rows()))
}

pub fn eval(a: EvalArgs) -> CliResult<()> {
    let cfg = EvalConfig::from(resolve_eval(&a.eval)?);
    let ann = load_annotations(&a.annotations)?;
    let label = a.tracks.display().to_string();
    let tracks = parse_tracks(&label, &read_text(&a.tracks)?)?;
    let report = evaluate(&ann, tracks, &cfg)?;
    print!("{}", report.to_table());
    match &a.out {
        Some(p) => write_atomic(p, report.to_json().as_bytes()),
        None => emit(None, &report.to_json()),
    }
}

pub fn pipeline(a: PipelineArgs) -> CliResult<()> {
    let mut m = match &a.manifest {
        Some(path) => {
            let m = Manifest::from_json(&read_text(path)?)?;
            if sha256_hex(m.scenario_text.as_bytes()) != m.scenario_sha256 {
                return Err(user(format!(
                    "{}: scenario_sha256 does not match scenario_text",
                    path.display()
                )));
            }
            if m.tool_version != env!("CARGO_PKG_VERSION") {
                eprintln!(
                    "warning: manifest written by version {}, running {}",
                    m.tool_version,
                    env!("CARGO_PKG_VERSION")
                );
            }
            m
        }
        None => {
            let path = a
                .scenario
                .as_deref()
                .expect("clap requires a scenario without --manifest");
            let text = read_text(path)?;
            let scenario = load_scenario(&path.display().to_string(), &text)?;
            let (profile, degradation) = resolve_profile(&a.profile, Some(&scenario))?;
            Manifest {
                format_version: MANIFEST_VERSION,
                tool_version: env!("CARGO_PKG_VERSION").to_owned(),
                scenario: scenario.name.clone(),
                scenario_sha256: sha256_hex(text.as_bytes()),
                seed: a.seed.unwrap_or(scenario.seed),
                scenario_text: text,
                profile,
                degradation,
                tracker: resolve_tracker(&a.tracker)?,
                eval: resolve_eval(&a.eval)?,
                outputs: BTreeMap::new(),
            }
        }
    };
    m.tracker.validate()?;
    let cfg = EvalConfig::from(m.eval);
    cfg.validate().map_err(|e| user(e.to_string()))?;

    let mut scenario = load_scenario(&m.scenario, &m.scenario_text)?;
    scenario.seed = m.seed;
    ensure_dir(&a.out_dir)?;
    let trace = run_simulation(&scenario);
    let model = DetectorModel {
        degradation: m.degradation,
        seed: m.seed,
    };
    let mut outputs = BTreeMap::new();
    let mut put = |name: String, text: &str| -> CliResult<()> {
        write_atomic(&a.out_dir.join(&name), text.as_bytes())?;
        outputs.insert(name, sha256_hex(text.as_bytes()));
        Ok(())
    };
    for cam in &scenario.cameras {
        let stem = format!("{}_{}", scenario.name, cam.id);
        let ann_json = annotate_trace(&trace, &scenario, &cam.id)
            .map_err(|e| user(e.to_string()))?
            .to_json();
        put(format!("{stem}.json"), &ann_json)?;
        // every stage reads what the previous stage wrote
        let ann = AnnotationFile::from_json(&ann_json).map_err(|e| CliError::User(e.to_string()))?;
        let det_text = write_mot(&detections_to_rows(&synthesize_detections(&ann, &model)));
        put(format!("{stem}_det.txt"), &det_text)?;
        let dets = parse_detections(&stem, &det_text)?;
        let track_text = write_mot(&run_tracker(&m.tracker, &dets).to_rows());
        put(format!("{stem}_tracks.txt"), &track_text)?;
        let report = evaluate(&ann, parse_tracks(&stem, &track_text)?, &cfg)?;
        put(format!("{stem}_report.json"), &report.to_json())?;
        println!("{stem}");
        print!("{}", report.to_table());
    }
    m.outputs = outputs;
    write_atomic(&a.out_dir.join(MANIFEST_FILE), m.to_json().as_bytes())
}
