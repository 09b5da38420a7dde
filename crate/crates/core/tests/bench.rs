use kinobench::bench::{
    read_runs_csv, run_benchmark, run_benchmark_with, summarize, BenchError, BenchmarkSpec, SceneRef, CSV_HEADER,
};
use kinobench::planners::PlannerKind;
use kinobench::scene::BuiltinScene;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

fn spec(out: &Path, scenes: &[BuiltinScene], planners: &[PlannerKind], runs: usize, timeout: f64) -> BenchmarkSpec {
    BenchmarkSpec {
        scenes: scenes.iter().map(|&b| SceneRef::Builtin(b)).collect(),
        planners: planners.to_vec(),
        runs_per_cell: runs,
        timeout,
        seed_base: 0,
        out_dir: out.to_path_buf(),
        profile: None,
    }
}

fn csv_without_time(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| *i != 5)
                .map(|(_, f)| f.to_string())
                .collect()
        })
        .collect()
}

#[test]
fn single_cell_writes_every_report() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(dir.path(), &[BuiltinScene::Scene1], &[PlannerKind::Rrt], 1, 60.0);
    let result = run_benchmark(&s, 1).unwrap();
    assert_eq!(result.records.len(), 1);
    assert_eq!(result.cells.len(), 1);
    assert_eq!(result.overall.len(), 1);
    for f in [
        "runs.csv",
        "summary.toml",
        "metadata.toml",
        "planning_time.svg",
        "success_rate.svg",
        "action.svg",
        "power.svg",
        "smoothness.svg",
    ] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let text = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn csv_reload_reproduces_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let planners = [PlannerKind::Rrt, PlannerKind::Kpiece];
    let scenes = [BuiltinScene::Scene1, BuiltinScene::Scene2];
    let s = spec(dir.path(), &scenes, &planners, 2, 60.0);
    let result = run_benchmark(&s, 1).unwrap();

    let rows = read_runs_csv(&dir.path().join("runs.csv")).unwrap();
    assert_eq!(rows.len(), result.records.len());
    for (row, rec) in rows.iter().zip(&result.records) {
        assert_eq!((&row.scene, row.planner, row.run, row.seed), (&rec.scene, rec.planner, rec.run, rec.seed));
        assert_eq!(row.report, rec.report);
    }
    let flat: Vec<_> = rows.iter().map(|r| (r.scene.clone(), r.planner, r.report)).collect();
    let ids: Vec<String> = scenes.iter().map(|b| b.name().to_string()).collect();
    let (cells, overall) = summarize(&flat, &ids, &planners, s.timeout).unwrap();
    assert_eq!(cells, result.cells);
    assert_eq!(overall, result.overall);

    let doc: toml::Value = toml::from_str(&std::fs::read_to_string(dir.path().join("summary.toml")).unwrap()).unwrap();
    let written = doc["cell"].as_array().unwrap();
    assert_eq!(written.len(), cells.len());
    for (w, c) in written.iter().zip(&cells) {
        assert_eq!(w["scene"].as_str().unwrap(), c.scene);
        assert_eq!(w["planner"].as_str().unwrap(), c.planner.name());
        assert_eq!(w["successes"].as_integer().unwrap() as usize, c.summary.successes);
        assert_eq!(w["planning_time_s"].as_float().unwrap(), c.summary.planning_time);
        assert_eq!(w["action"].as_float().unwrap(), c.summary.action);
        assert_eq!(w["power_w"].as_float().unwrap(), c.summary.power);
        assert_eq!(w["smoothness"].as_float().unwrap(), c.summary.smoothness);
    }
}

#[test]
fn failed_cells_carry_inf() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(dir.path(), &[BuiltinScene::Scene3], &[PlannerKind::Est], 2, 1e-9);
    let result = run_benchmark(&s, 1).unwrap();
    let cell = &result.cells[0].summary;
    assert_eq!(cell.successes, 0);
    assert_eq!(cell.planning_time, 1e-9);
    assert!(cell.action.is_infinite() && cell.power.is_infinite() && cell.smoothness.is_infinite());

    let text = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[4], "false");
        assert_eq!(&f[6..], ["inf", "inf", "inf"]);
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.toml")).unwrap();
    assert!(summary.contains("action = inf"));
    let rows = read_runs_csv(&dir.path().join("runs.csv")).unwrap();
    assert!(rows.iter().all(|r| r.report.smoothness == f64::INFINITY));
}

#[test]
fn unwritable_output_fails_before_any_run() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let s = spec(&blocker.join("out"), &[BuiltinScene::Scene1], &[PlannerKind::Rrt], 3, 60.0);
    let runs = AtomicUsize::new(0);
    let err = run_benchmark_with(&s, 1, |_| {
        runs.fetch_add(1, Ordering::Relaxed);
    })
    .unwrap_err();
    assert!(matches!(err, BenchError::Io { .. }), "{err}");
    assert_eq!(runs.load(Ordering::Relaxed), 0);
}

#[test]
fn reruns_match_except_for_timing() {
    let scenes = BuiltinScene::ALL;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_benchmark(&spec(a.path(), &scenes, &PlannerKind::ALL, 1, 60.0), 1).unwrap();
    run_benchmark(&spec(b.path(), &scenes, &PlannerKind::ALL, 1, 60.0), 2).unwrap();
    assert_eq!(csv_without_time(&a.path().join("runs.csv")), csv_without_time(&b.path().join("runs.csv")));
}

#[test]
fn parallel_runs_keep_canonical_order() {
    let dir = tempfile::tempdir().unwrap();
    let planners = [PlannerKind::Kpiece, PlannerKind::Rrt];
    let scenes = [BuiltinScene::Scene2, BuiltinScene::Scene1];
    let result = run_benchmark(&spec(dir.path(), &scenes, &planners, 3, 60.0), 3).unwrap();
    let order: Vec<(String, PlannerKind, usize)> =
        result.records.iter().map(|r| (r.scene.clone(), r.planner, r.run)).collect();
    let mut expected = Vec::new();
    for s in scenes {
        for p in planners {
            for run in 0..3 {
                expected.push((s.name().to_string(), p, run));
            }
        }
    }
    assert_eq!(order, expected);
}

#[test]
fn spec_files_resolve_scene_paths() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bench.toml"),
        "scenes = [\"builtin:scene1\"]\nplanners = [\"rrt\", \"est\"]\nruns_per_cell = 1\ntimeout = 30\nseed_base = 9\n",
    )
    .unwrap();
    let s = BenchmarkSpec::load(&dir.path().join("bench.toml")).unwrap();
    assert_eq!(s.planners, vec![PlannerKind::Rrt, PlannerKind::Est]);
    assert_eq!((s.runs_per_cell, s.timeout, s.seed_base), (1, 30.0, 9));
    assert_eq!(s.out_dir, PathBuf::from("bench-out"));
    assert!(matches!(
        BenchmarkSpec::load(&dir.path().join("missing.toml")),
        Err(BenchError::Io { .. })
    ));
    assert!(matches!(
        BenchmarkSpec::from_toml("scenes = [\"builtin:scene1\"]\nbogus = 1\n", dir.path()),
        Err(BenchError::Spec(_))
    ));
}
