//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use nalgebra::DMatrix;
use pedsim_core::annotation::{
    annotate_trace, compute_visibility, project_pedestrian, render_tick_mask, Aabb, AnnotationFile, Cylinder,
    Occluders, SAMPLE_COUNT,
};
use pedsim_core::eval::{clear_mot, eval_report, hungarian, identity_metrics, EvalConfig, GroundTruth, GtBox};
use pedsim_core::geometry::{CameraIntrinsics, Pose, Vec3};
use pedsim_core::perception::{
    detections_to_rows, profile, read_mot, synthesize_detections, track_kalman, write_mot, DetectorModel,
    KalmanTrackerParams, TrackSet,
};
use pedsim_core::rng::stream;
use pedsim_core::scenario::{parse_scenario, shipped_scenario, CameraMount, Scenario, SHIPPED_SCENARIOS};
use pedsim_core::sim::{run_simulation, select_random_goal, GoalRef, SimTrace};
use pedsim_core::BBox2D;
use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

struct ShippedRun {
    scenario: Scenario,
    trace: SimTrace,
    annotations: Vec<AnnotationFile>,
    elapsed: Duration,
}

/// Every shipped scenario simulated and annotated once.
fn shipped_runs() -> &'static [ShippedRun] {
    static RUNS: OnceLock<Vec<ShippedRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        SHIPPED_SCENARIOS
            .iter()
            .map(|(name, _)| {
                let start = Instant::now();
                let scenario = shipped_scenario(name).unwrap().unwrap();
                let trace = run_simulation(&scenario);
                let annotations = scenario
                    .cameras
                    .iter()
                    .map(|c| annotate_trace(&trace, &scenario, &c.id).unwrap())
                    .collect();
                ShippedRun {
                    scenario,
                    trace,
                    annotations,
                    elapsed: start.elapsed(),
                }
            })
            .collect()
    })
}

// ---------------------------------------------------------------- 1

fn lattice_box(k: u32) -> BBox2D {
    BBox2D::from_xywh(f64::from(k) * 4.0, 0.0, 20.0, 50.0)
}

/// Up to `max` trajectories over `frames` frames, each a contiguous span
/// with one lattice box per frame.
fn random_trajectories(rng: &mut impl Rng, min: u32, max: u32, frames: u32) -> Vec<(u32, u32, u32)> {
    let n = rng.random_range(min..=max);
    let mut out = Vec::new();
    for id in 1..=n {
        let a = rng.random_range(0..frames);
        let b = rng.random_range(a..frames);
        for f in a..=b {
            out.push((f, id, rng.random_range(0..10)));
        }
    }
    out
}

fn brute_min_cost(cost: &[Vec<i64>]) -> i64 {
    // rows <= cols: every row takes a distinct column
    fn go(cost: &[Vec<i64>], row: usize, used: &mut [bool]) -> i64 {
        if row == cost.len() {
            return 0;
        }
        let mut best = i64::MAX;
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                best = best.min(cost[row][j] + go(cost, row + 1, used));
                used[j] = false;
            }
        }
        best
    }
    go(cost, 0, &mut vec![false; cost.first().map_or(0, Vec::len)])
}

fn brute_max_agreement(agree: &[Vec<i64>], row: usize, used: &mut [bool]) -> i64 {
    if row == agree.len() {
        return 0;
    }
    let mut best = brute_max_agreement(agree, row + 1, used);
    for j in 0..used.len() {
        if !used[j] {
            used[j] = true;
            best = best.max(agree[row][j] + brute_max_agreement(agree, row + 1, used));
            used[j] = false;
        }
    }
    best
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = stream(1, "acceptance", "oracle", 0);
    for case in 0..500 {
        let frames = rng.random_range(1..=20);
        let g = random_trajectories(&mut rng, 1, 5, frames);
        let h = random_trajectories(&mut rng, 0, 5, frames);
        let mut gt = GroundTruth::default();
        for f in 0..frames {
            gt.frames.insert(f, vec![]);
        }
        for &(f, id, k) in &g {
            gt.frames.get_mut(&f).unwrap().push(GtBox {
                id,
                bbox: lattice_box(k),
                visibility: 1.0,
            });
        }
        let hyp = TrackSet::from_entries(h.iter().map(|&(f, id, k)| (f, id, lattice_box(k)))).unwrap();

        let gids: Vec<u32> = g.iter().map(|e| e.1).collect::<BTreeSet<_>>().into_iter().collect();
        let hids: Vec<u32> = h.iter().map(|e| e.1).collect::<BTreeSet<_>>().into_iter().collect();
        let len = |v: &[(u32, u32, u32)], id: u32| v.iter().filter(|e| e.1 == id).count() as i64;
        let agree: Vec<Vec<i64>> = gids
            .iter()
            .map(|&gi| {
                hids.iter()
                    .map(|&hi| {
                        g.iter()
                            .filter(|ge| ge.1 == gi)
                            .filter(|ge| {
                                h.iter().any(|he| {
                                    he.1 == hi && he.0 == ge.0 && lattice_box(ge.2).iou(&lattice_box(he.2)) >= 0.5
                                })
                            })
                            .count() as i64
                    })
                    .collect()
            })
            .collect();

        let best = brute_max_agreement(&agree, 0, &mut vec![false; hids.len()]);
        let m = identity_metrics(&gt, &hyp, &EvalConfig::default()).map_err(|e| e.to_string())?;
        let expected = g.len() as i64 + h.len() as i64 - 2 * best;
        ensure!(
            m.assignment_cost as i64 == expected,
            "case {case}: identity cost {} != brute force {expected}",
            m.assignment_cost
        );

        if !hids.is_empty() {
            // trajectory pair costs, transposed so rows <= cols for the oracle
            let pair = |i: usize, j: usize| len(&g, gids[i]) + len(&h, hids[j]) - 2 * agree[i][j];
            let (r, c) = (gids.len(), hids.len());
            let cost = DMatrix::from_fn(r, c, |i, j| pair(i, j) as f64);
            let table: Vec<Vec<i64>> = if r <= c {
                (0..r).map(|i| (0..c).map(|j| pair(i, j)).collect()).collect()
            } else {
                (0..c).map(|j| (0..r).map(|i| pair(i, j)).collect()).collect()
            };
            let a = hungarian(&cost);
            let oracle = brute_min_cost(&table);
            ensure!(
                a.cost == oracle as f64,
                "case {case}: hungarian {} != brute force {oracle}",
                a.cost
            );
            ensure!(a.pairs.len() == r.min(c), "case {case}: assignment not of maximum size");
        }
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(60), "took {t:?}");
    Ok(format!(
        "500 instances agree with exhaustive search in {:.2}s",
        t.as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Outcome {
    let mut notes = Vec::new();
    for run in shipped_runs() {
        for ann in &run.annotations {
            let start = Instant::now();
            let gt = GroundTruth::from_annotations(ann);
            let e = eval_report(&gt, &gt.as_tracks(), &EvalConfig::default()).map_err(|e| e.to_string())?;
            let t = run.elapsed + start.elapsed();
            let r = &e.report;
            ensure!(
                r.mota == 1.0 && r.idf1 == 1.0 && r.idsw == 0,
                "{}/{}: mota {} idf1 {} idsw {}",
                run.scenario.name,
                ann.camera_id,
                r.mota,
                r.idf1,
                r.idsw
            );
            ensure!(t < Duration::from_secs(30), "{} took {t:?}", run.scenario.name);
            notes.push(format!("{} {:.1}s", run.scenario.name, t.as_secs_f64()));
        }
    }
    Ok(notes.join(", "))
}

// ---------------------------------------------------------------- 3

fn fixture_gt(entries: &[(u32, u32, f64)], frames: u32) -> GroundTruth {
    let mut gt = GroundTruth::default();
    for f in 0..frames {
        gt.frames.insert(f, vec![]);
    }
    for &(f, id, x) in entries {
        gt.frames.get_mut(&f).unwrap().push(GtBox {
            id,
            bbox: BBox2D::from_xywh(x, 0.0, 20.0, 50.0),
            visibility: 1.0,
        });
    }
    gt
}

fn fixture_hyp(entries: &[(u32, u32, f64)]) -> TrackSet {
    TrackSet::from_entries(
        entries
            .iter()
            .map(|&(f, id, x)| (f, id, BBox2D::from_xywh(x, 0.0, 20.0, 50.0))),
    )
    .unwrap()
}

fn criterion_3() -> Outcome {
    // five frames, two objects: one miss in frame 3, one stray box in frame 4
    let gt_entries: Vec<_> = (0..5).flat_map(|f| [(f, 1, 0.0), (f, 2, 200.0)]).collect();
    let mut hyp: Vec<_> = gt_entries
        .iter()
        .copied()
        .filter(|&(f, id, _)| !(f == 3 && id == 2))
        .collect();
    hyp.push((4, 7, 600.0));
    let c = clear_mot(&fixture_gt(&gt_entries, 5), &fixture_hyp(&hyp), &EvalConfig::default())
        .map_err(|e| e.to_string())?;
    ensure!(
        (c.mota, c.fp, c.fn_, c.idsw, c.gt) == (0.8, 1, 1, 0, 10),
        "fixture A: mota {} fp {} fn {} idsw {}",
        c.mota,
        c.fp,
        c.fn_,
        c.idsw
    );

    // two tracks whose ids swap halfway through ten frames
    let gt_entries: Vec<_> = (0..10).flat_map(|f| [(f, 1, 0.0), (f, 2, 200.0)]).collect();
    let swapped: Vec<_> = (0..10u32)
        .flat_map(|f| {
            let (a, b) = if f < 5 { (1, 2) } else { (2, 1) };
            [(f, a, 0.0), (f, b, 200.0)]
        })
        .collect();
    let e = eval_report(
        &fixture_gt(&gt_entries, 10),
        &fixture_hyp(&swapped),
        &EvalConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    ensure!(
        e.report.idsw == 2 && e.report.mota == 0.9 && e.report.idf1 == 0.5,
        "fixture B: idsw {} mota {} idf1 {}",
        e.report.idsw,
        e.report.mota,
        e.report.idf1
    );
    Ok("MOTA 0.8 fixture and swap fixture (IDSW 2, MOTA 0.9, IDF1 0.5) exact".into())
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let k = CameraIntrinsics::new(1920, 1080, FRAC_PI_2);
    let (height, radius) = (1.8, 0.3);
    // level camera at the body's mid-height, looking north
    let cam = Pose::from_ypr(Vec3::new(0.0, 0.0, -height / 2.0), 0.0, 0.0, 0.0);
    let fx = f64::from(k.width) / 2.0 / (k.hfov_rad / 2.0).tan();
    let (cx, cy) = (f64::from(k.width) / 2.0, f64::from(k.height) / 2.0);
    let mut worst_width = 0.0f64;
    let mut worst_center = 0.0f64;
    for i in 0..10 {
        let d = 2.0 + 48.0 * f64::from(i) / 9.0;
        for j in 0..10 {
            let lateral = d * (-0.45 + 0.1 * f64::from(j));
            let body = Cylinder {
                base: Vec3::new(d, lateral, 0.0),
                height,
                radius,
            };
            let b = project_pedestrian(&body, &cam, &k)
                .unclamped
                .ok_or_else(|| format!("no box at d={d} lateral={lateral}"))?;
            // silhouette edges are the tangent lines from the camera to the circle
            let bearing = lateral.atan2(d);
            let half = (radius / d.hypot(lateral)).asin();
            let analytic = fx * ((bearing + half).tan() - (bearing - half).tan());
            worst_width = worst_width.max((b.width() - analytic).abs());
        }
        let on_axis = Cylinder {
            base: Vec3::new(d, 0.0, 0.0),
            height,
            radius,
        };
        let (u, v) = project_pedestrian(&on_axis, &cam, &k)
            .bbox
            .ok_or("on-axis box missing")?
            .center();
        worst_center = worst_center.max((u - cx).abs()).max((v - cy).abs());
    }
    ensure!(worst_width <= 2.0, "width error {worst_width:.3} px");
    ensure!(worst_center <= 1e-6, "center error {worst_center:e} px");
    Ok(format!(
        "100 cases, max width error {worst_width:.2e} px, max center error {worst_center:.1e} px"
    ))
}

// ---------------------------------------------------------------- 5

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/street_day.cfg");
    let run = |args: &[&str]| -> Result<(), String> {
        let o = Command::new(env!("CARGO_BIN_EXE_pedsim"))
            .args(args)
            .env_remove("PEDSIM_SEED")
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(
            o.status.success(),
            "pedsim {args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        Ok(())
    };
    let dirs: Vec<_> = ["first", "second", "third"]
        .iter()
        .map(|d| tmp.path().join(d))
        .collect();
    let s = |p: &Path| p.to_str().unwrap().to_owned();
    run(&["pipeline", &s(&cfg), "--out-dir", &s(&dirs[0]), "--profile", "fog"])?;
    let manifest = dirs[0].join("manifest.json");
    for d in &dirs[1..] {
        run(&["pipeline", "--manifest", &s(&manifest), "--out-dir", &s(d)])?;
    }
    let reference = dir_contents(&dirs[0]);
    for d in &dirs[1..] {
        ensure!(
            dir_contents(d) == reference,
            "{} differs from the first run",
            d.display()
        );
    }
    let kinds = [
        "street_day_cam0.json",
        "street_day_cam0_det.txt",
        "street_day_cam0_tracks.txt",
        "street_day_cam0_report.json",
    ];
    for k in kinds {
        ensure!(reference.contains_key(k), "missing {k}");
    }
    Ok(format!("{} files byte-identical across three runs", reference.len()))
}

// ---------------------------------------------------------------- 6

fn customized_case(rng: &mut impl Rng) -> (String, Vec<usize>) {
    let n = rng.random_range(2..=6);
    let mut points: Vec<(f64, f64)> = Vec::new();
    while points.len() < n + 1 {
        let p = (rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0));
        if points.iter().all(|q: &(f64, f64)| (p.0 - q.0).hypot(p.1 - q.1) > 2.0) {
            points.push(p);
        }
    }
    let mut creation: Vec<u32> = (0..100).collect();
    creation.shuffle(rng);
    creation.truncate(n);
    let mut loop_length = 0.0;
    for w in points.windows(2).chain(std::iter::once(&[points[n], points[1]][..])) {
        loop_length += (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
    }
    let frames = (loop_length / 1.4 * 30.0 * 2.2) as u32 + 60;
    let mut text = format!("format = 1\nname = \"order\"\nduration_frames = {frames}\nseed = 1\n");
    for (i, c) in creation.iter().enumerate() {
        let (x, y) = points[i + 1];
        text += &format!(
            "[[target_points]]\nid = \"t{i}\"\nposition = [{x}, {y}, 0]\narea = \"own\"\nowner = \"walker\"\ncreation_index = {c}\n"
        );
    }
    let (sx, sy) = points[0];
    text += &format!(
        "[[pedestrians]]\nname = \"walker\"\nspawn = [{sx}, {sy}, 0]\nheight = 1.7\ncontroller = {{ mode = \"customized\", end_behavior = \"loop\" }}\n"
    );
    text += "[[cameras]]\nid = \"c\"\nwidth = 64\nheight = 48\nhfov_deg = 90\nmount = { kind = \"static\", position = [-30, 0, -2] }\n";
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| creation[i]);
    (text, order)
}

fn criterion_6() -> Outcome {
    let mut rng = stream(6, "acceptance", "customized", 0);
    for case in 0..100 {
        let (text, order) = customized_case(&mut rng);
        let scenario = parse_scenario(&text).map_err(|e| format!("case {case}: {e}"))?;
        let trace = run_simulation(&scenario);
        let reached: Vec<usize> = trace
            .ticks
            .iter()
            .filter_map(|t| match t.pedestrians[0].reached {
                Some(GoalRef::Target(i)) => Some(i),
                _ => None,
            })
            .collect();
        ensure!(
            reached.len() > order.len(),
            "case {case}: only {} arrivals",
            reached.len()
        );
        for (i, r) in reached.iter().enumerate() {
            ensure!(
                *r == order[i % order.len()],
                "case {case}: visit {i} went to {r}, expected {}",
                order[i % order.len()]
            );
        }
    }

    // random mode: uniform over the area's goals other than the one just reached
    let candidates = [0, 1, 2, 3, 4];
    let mut counts = [0u32; 5];
    let mut rng = stream(6, "acceptance", "random", 0);
    let draws = 10_000;
    for _ in 0..draws {
        counts[select_random_goal(&candidates, Some(2), &mut rng)] += 1;
    }
    ensure!(counts[2] == 0, "excluded goal chosen {} times", counts[2]);
    let expected = f64::from(draws) / 4.0;
    let chi2: f64 = [0, 1, 3, 4]
        .iter()
        .map(|&i| (f64::from(counts[i]) - expected).powi(2) / expected)
        .sum();
    let p = 1.0 - ChiSquared::new(3.0).unwrap().cdf(chi2);
    ensure!(p > 0.001, "chi-square {chi2:.2}, p = {p:.2e}");

    let mut steps = 0usize;
    for run in shipped_runs() {
        let dt = run.scenario.dt();
        for w in run.trace.ticks.windows(2) {
            for (i, spec) in run.scenario.pedestrians.iter().enumerate() {
                let moved = (w[1].pedestrians[i].position - w[0].pedestrians[i].position).norm();
                ensure!(
                    moved <= spec.speed * dt + 1e-9,
                    "{}: {} moved {moved} m in one tick",
                    run.scenario.name,
                    spec.name
                );
                steps += 1;
            }
            for (c, spec) in run.scenario.cameras.iter().enumerate() {
                if let CameraMount::Drone { speed, .. } = spec.mount {
                    let moved = (w[1].cameras[c].1.position - w[0].cameras[c].1.position).norm();
                    ensure!(
                        moved <= speed * dt + 1e-9,
                        "{}: drone {} moved {moved} m",
                        run.scenario.name,
                        spec.id
                    );
                }
            }
        }
    }
    Ok(format!(
        "100 customized goal sets in order; chi-square p = {p:.3}; {steps} pedestrian steps within speed"
    ))
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let k = CameraIntrinsics::new(1920, 1080, FRAC_PI_2);
    let cam = Pose::from_ypr(Vec3::new(0.0, 0.0, -0.9), 0.0, 0.0, 0.0);
    let body = Cylinder {
        base: Vec3::new(10.0, 0.0, 0.0),
        height: 1.8,
        radius: 0.3,
    };
    let proj = project_pedestrian(&body, &cam, &k);
    let wall = |top: f64| Occluders {
        obstacles: vec![Aabb {
            min: Vec3::new(5.0, -5.0, top),
            max: Vec3::new(5.2, 5.0, 0.0),
        }],
        bodies: vec![],
    };
    let open = compute_visibility(&proj, &cam.position, &Occluders::default(), 1);
    ensure!(open == 1.0, "unoccluded visibility {open}");
    let full = compute_visibility(&proj, &cam.position, &wall(-5.0), 1);
    ensure!(full == 0.0, "full wall visibility {full}");
    // low wall up to the camera height hides the lower half of the body
    let half = compute_visibility(&proj, &cam.position, &wall(-0.9), 1);
    let quantum = 1.0 / SAMPLE_COUNT as f64;
    ensure!((half - 0.5).abs() <= quantum, "half wall visibility {half}");

    let run = &shipped_runs()[0];
    ensure!(run.scenario.name == "street_day", "unexpected scenario order");
    let ids = run.scenario.pedestrian_ids();
    let mut labeled = 0usize;
    for cam_spec in &run.scenario.cameras {
        let k = cam_spec.intrinsics();
        for (t, tick) in run.trace.ticks.iter().enumerate() {
            let pose = run.trace.camera_pose(t, &cam_spec.id).unwrap();
            let boxes: BTreeMap<u32, Option<BBox2D>> = run
                .scenario
                .pedestrians
                .iter()
                .enumerate()
                .map(|(i, spec)| {
                    let body = Cylinder {
                        base: tick.pedestrians[i].position,
                        height: spec.height,
                        radius: spec.radius,
                    };
                    (ids[i], project_pedestrian(&body, pose, &k).unclamped)
                })
                .collect();
            let mask = render_tick_mask(&run.trace, &run.scenario, &cam_spec.id, t, 4).map_err(|e| e.to_string())?;
            for y in 0..mask.height {
                for x in 0..mask.width {
                    let label = mask.get(x, y);
                    if label == 0 {
                        continue;
                    }
                    labeled += 1;
                    let (u, v) = mask.pixel_center(x, y, &k);
                    let inside = boxes
                        .get(&label)
                        .copied()
                        .flatten()
                        .is_some_and(|b| b.dilate(1.0).contains_point(u, v));
                    ensure!(
                        inside,
                        "frame {}: pixel ({u}, {v}) labeled {label} outside its box",
                        tick.frame
                    );
                }
            }
        }
    }
    Ok(format!(
        "full wall 0.0, half wall {half:.4}; {labeled} labeled mask pixels inside their boxes over {} frames",
        run.trace.ticks.len()
    ))
}

// ---------------------------------------------------------------- 8

const PROFILES: [&str; 4] = ["clear", "fog-light", "fog-dense", "night"];

/// Mean MOTA per profile over 20 seeds, and the slowest single run.
fn font_family_mota(name: &str) -> Result<([f64; 4], Duration), String> {
    let base = shipped_scenario(name).unwrap().unwrap();
    let results: Vec<Result<([f64; 4], Duration), String>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..20u64)
            .map(|seed| {
                let base = &base;
                s.spawn(move || {
                    let start = Instant::now();
                    let mut scenario = base.clone();
                    scenario.seed = 1000 + seed;
                    let trace = run_simulation(&scenario);
                    let anns: Vec<_> = scenario
                        .cameras
                        .iter()
                        .map(|c| annotate_trace(&trace, &scenario, &c.id).unwrap())
                        .collect();
                    let shared = start.elapsed();
                    let mut mota = [0.0; 4];
                    let mut slowest = Duration::ZERO;
                    for (p, prof) in PROFILES.iter().enumerate() {
                        let t = Instant::now();
                        for ann in &anns {
                            let model = DetectorModel {
                                degradation: profile(prof).unwrap(),
                                seed: scenario.seed,
                            };
                            let dets = synthesize_detections(ann, &model);
                            let tracks = track_kalman(&dets, &KalmanTrackerParams::default());
                            let gt = GroundTruth::from_annotations(ann);
                            let r = eval_report(&gt, &tracks, &EvalConfig::default()).map_err(|e| e.to_string())?;
                            mota[p] += r.report.mota / anns.len() as f64;
                        }
                        slowest = slowest.max(shared + t.elapsed());
                    }
                    Ok((mota, slowest))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut mean = [0.0; 4];
    let mut slowest = Duration::ZERO;
    for r in results {
        let (m, t) = r?;
        for i in 0..4 {
            mean[i] += m[i] / 20.0;
        }
        slowest = slowest.max(t);
    }
    Ok((mean, slowest))
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    for name in ["font_midday", "font_fog", "font_moving"] {
        let ([clear, light, dense, night], slowest) = font_family_mota(name)?;
        let line = format!(
            "{name}: clear {clear:.3} fog-light {light:.3} fog-dense {dense:.3} night {night:.3}, slowest run {:.1}s",
            slowest.as_secs_f64()
        );
        ensure!(
            clear > light && light > dense && clear > night,
            "ordering violated: {line}"
        );
        ensure!(slowest < Duration::from_secs(60), "too slow: {line}");
        notes.push(line);
    }
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let table: [(&str, usize, u32, u32); 6] = [
        ("street_day", 500, 1920, 1080),
        ("street_night", 500, 1920, 1080),
        ("font_fog", 900, 1920, 1080),
        ("street_moving", 500, 1920, 1080),
        ("font_midday", 900, 1920, 1080),
        ("font_moving", 600, 640, 480),
    ];
    for (name, frames, w, h) in table {
        let run = shipped_runs()
            .iter()
            .find(|r| r.scenario.name == name)
            .ok_or_else(|| format!("{name} not shipped"))?;
        for ann in &run.annotations {
            ensure!(
                ann.frames.len() == frames && ann.intrinsics.width == w && ann.intrinsics.height == h,
                "{name}/{}: {} frames at {}x{}",
                ann.camera_id,
                ann.frames.len(),
                ann.intrinsics.width,
                ann.intrinsics.height
            );
        }
    }
    Ok("six configs parse and run with the tabulated lengths and resolutions".into())
}

// ---------------------------------------------------------------- 10

fn validator(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(name);
    let schema: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn criterion_10() -> Outcome {
    let ann_schema = validator("annotation.schema.json");
    let report_schema = validator("report.schema.json");
    let mut files = 0;
    for run in shipped_runs() {
        for ann in &run.annotations {
            let label = format!("{}/{}", run.scenario.name, ann.camera_id);
            let json = ann.to_json();
            let again = AnnotationFile::from_json(&json)
                .map_err(|e| format!("{label}: {e}"))?
                .to_json();
            ensure!(json == again, "{label}: annotation JSON not byte-stable");
            let value: serde_json::Value = serde_json::from_str(&json).unwrap();
            let errors: Vec<String> = ann_schema.iter_errors(&value).map(|e| e.to_string()).take(3).collect();
            ensure!(errors.is_empty(), "{label}: {errors:?}");

            let model = DetectorModel {
                degradation: profile("night").unwrap(),
                seed: 9,
            };
            let dets = synthesize_detections(ann, &model);
            let tracks = track_kalman(&dets, &KalmanTrackerParams::default());
            for text in [write_mot(&detections_to_rows(&dets)), write_mot(&tracks.to_rows())] {
                let rows = read_mot(&text).map_err(|e| format!("{label}: {e}"))?;
                ensure!(write_mot(&rows) == text, "{label}: MOT text not byte-stable");
            }
            let gt = GroundTruth::from_annotations(ann);
            let report = eval_report(&gt, &tracks, &EvalConfig::default())
                .map_err(|e| e.to_string())?
                .report;
            let value: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
            let errors: Vec<String> = report_schema.iter_errors(&value).map(|e| e.to_string()).collect();
            ensure!(errors.is_empty(), "{label} report: {errors:?}");
            files += 1;
        }
    }
    Ok(format!(
        "{files} annotation files, their detections, tracks and reports round-trip and validate"
    ))
}

fn main() {
    let criteria: [Check; 10] = [
        ("metrics oracle equivalence", criterion_1),
        ("perfect-tracker identity", criterion_2),
        ("CLEAR MOT hand fixtures", criterion_3),
        ("projection analytics", criterion_4),
        ("simulation determinism", criterion_5),
        ("controller semantics", criterion_6),
        ("occlusion correctness", criterion_7),
        ("degradation ordering", criterion_8),
        ("dataset structure", criterion_9),
        ("format round-trips", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
