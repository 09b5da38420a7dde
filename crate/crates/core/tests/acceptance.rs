mod common;

use common::{bit_identical, random_control, random_state};
use kinobench::bench::{run_benchmark, BenchmarkSpec, Metadata, Profile};
use kinobench::geom::{Rect, Vec2};
use kinobench::metrics::{action, power, smoothness, TrajectorySegment};
use kinobench::planners::{
    brute_force_interior, revalidate, solve, CellCoord, CellGrid, MilestoneSampler, PlannerConfig, PlannerKind,
};
use kinobench::scene::{builtin_scene, static_reachability, BuiltinScene, SceneBuilder};
use kinobench::statespace::GoalRegion;
use kinobench::syclop::{region_weight, select_region, Decomposition};
use kinobench::world::{audit_contacts, propagate, propagate_observed, BodyKind, Control, PushAxis, Shape, WorldState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn segment(force: Vec2, duration: f64, path_length: f64, displacement: Vec2, v: Vec<Vec2>) -> TrajectorySegment {
    TrajectorySegment {
        force,
        duration,
        path_length,
        displacement,
        velocity_trace: v,
    }
}

fn metric_oracles() -> Outcome {
    let t = Instant::now();
    let single = segment(Vec2::new(10.0, 0.0), 1.0, 2.0, Vec2::new(2.0, 0.0), vec![]);
    let a = action(&[single]);
    ensure(a == 10.0 * 1.0 * 2.0, || format!("action {a} != 20"))?;

    let push = segment(Vec2::new(3.0, 4.0), 0.5, 0.5, Vec2::new(0.3, 0.4), vec![]);
    let expected = (3.0 * 0.3 + 4.0 * 0.4) / 0.5;
    let p = power(&[push]);
    ensure((p - expected).abs() < 1e-12 && (p - 5.0).abs() < 1e-12, || format!("power {p} != 5.0"))?;

    let h = 0.007;
    let n = (2.0 * PI / h).round() as usize;
    let v: Vec<Vec2> = (0..=n).map(|k| Vec2::new((k as f64 * h).sin(), 0.0)).collect();
    let s = smoothness(&[segment(Vec2::ZERO, n as f64 * h, 0.0, Vec2::ZERO, v)], h);
    // jerk of x = -cos t is -sin t; its squared integral over one period
    let exact: f64 = (0..100_000)
        .map(|k| {
            let t = (k as f64 + 0.5) * (n as f64 * h) / 100_000.0;
            t.sin().powi(2) * (n as f64 * h) / 100_000.0
        })
        .sum();
    let rel = (s - exact).abs() / exact;
    ensure(rel < 0.02, || format!("smoothness {s} vs {exact} ({:.2}%)", rel * 100.0))?;

    let elapsed = t.elapsed().as_secs_f64();
    ensure(elapsed < 1.0, || format!("took {elapsed:.3} s"))?;
    Ok(format!("action 20, power 5 W, sinusoid off by {:.3}%, {:.1} ms", rel * 100.0, elapsed * 1e3))
}

fn physics_suite() -> Outcome {
    let scene = SceneBuilder::new(Rect::new(Vec2::ZERO, Vec2::new(10.0, 10.0)))
        .robot(0.5, 1.0, Vec2::new(2.0, 5.0), Vec2::new(9.0, 9.0))
        .mu(0.0)
        .body(
            "box",
            BodyKind::FreeManipulatable,
            Shape::Box {
                half_width: 0.25,
                half_height: 0.25,
            },
            Vec2::new(3.5, 5.0),
            Some(0.5),
            PushAxis::Any,
        )
        .build()
        .map_err(|e| e.to_string())?;
    let mut s0 = WorldState::initial(&scene);
    s0.robot_vel = Vec2::new(2.0, 0.0);
    let p0 = s0.momentum(&scene).x;
    let mut worst = 0.0f64;
    let r = propagate_observed(&s0, &Control::new(Vec2::ZERO, 0.7), &scene, |s, _| {
        worst = worst.max((s.momentum(&scene).x - p0).abs() / p0);
    })
    .map_err(|e| e.to_string())?;
    ensure(r.valid && worst <= 1e-6, || format!("momentum drift {worst:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let scenes: Vec<_> = BuiltinScene::ALL.iter().map(|&b| builtin_scene(b)).collect();
    for i in 0..600 {
        let sc = &scenes[i % 3];
        let s = random_state(&mut rng, sc, 2.0);
        let r = propagate(&s, &random_control(&mut rng, sc), sc).map_err(|e| e.to_string())?;
        for (k, b) in sc.bodies.iter().enumerate() {
            if b.is_fixed() {
                ensure(r.final_state.body_pos(sc, k) == b.pose, || format!("fixed body {} moved", b.id))?;
            }
        }
    }

    for i in 0..10_000 {
        let sc = &scenes[i % 3];
        let s = random_state(&mut rng, sc, 3.0);
        let mut c = random_control(&mut rng, sc);
        c.force = Vec2::ZERO;
        let mut last = s.kinetic_energy(sc);
        let mut rose = false;
        propagate_observed(&s, &c, sc, |st, _| {
            let e = st.kinetic_energy(sc);
            rose |= e > last * (1.0 + 1e-12) + 1e-12;
            last = e;
        })
        .map_err(|e| e.to_string())?;
        ensure(!rose, || format!("energy rose in propagation {i}"))?;
    }

    for i in 0..100 {
        let sc = &scenes[i % 3];
        let s = random_state(&mut rng, sc, 2.0);
        let c = random_control(&mut rng, sc);
        let a = propagate(&s, &c, sc).map_err(|e| e.to_string())?;
        let b = propagate(&s, &c, sc).map_err(|e| e.to_string())?;
        ensure(bit_identical(&a, &b), || format!("pair {i} differs"))?;
    }
    Ok(format!("momentum drift {worst:.1e}, fixed bodies exact, 10^4 energy checks, 100 bit-identical pairs"))
}

fn planner_correctness() -> Outcome {
    let scene = builtin_scene(BuiltinScene::Scene1);
    let goal = GoalRegion::of(&scene);
    let mut solved = 0;
    let mut per = Vec::new();
    for kind in PlannerKind::ALL {
        let mut k = 0;
        for run in 0..10 {
            let cfg = PlannerConfig::default().with_seed(1000 + run).with_budget(60.0);
            let out = solve(kind, &scene, &goal, &cfg).map_err(|e| e.to_string())?;
            match out.solution {
                Some(path) => {
                    revalidate(&path, &scene, &goal).map_err(|e| format!("{kind} run {run}: {e}"))?;
                    k += 1;
                }
                None => ensure(out.stats.wall_time >= 60.0, || format!("{kind} run {run} stopped early"))?,
            }
        }
        per.push(format!("{kind} {k}/10"));
        solved += k;
    }
    let rate = solved as f64 / 50.0;
    ensure(rate >= 0.6, || format!("combined success {rate:.2} < 0.60"))?;
    Ok(format!("combined success {rate:.2} ({})", per.join(", ")))
}

fn physics_necessity() -> Outcome {
    let open = static_reachability(&builtin_scene(BuiltinScene::Scene1), 0.05);
    ensure(open.goal_point_reachable, || "flood fill fails on scene1".into())?;
    let mut notes = Vec::new();
    for which in [BuiltinScene::Scene2, BuiltinScene::Scene3] {
        let scene = builtin_scene(which);
        let reach = static_reachability(&scene, 0.05);
        ensure(!reach.goal_region_reachable, || format!("{which} reachable without pushing"))?;
        let goal = GoalRegion::of(&scene);
        let mut solvers = Vec::new();
        for kind in PlannerKind::ALL {
            let cfg = PlannerConfig::default().with_seed(7).with_budget(120.0);
            let out = solve(kind, &scene, &goal, &cfg).map_err(|e| e.to_string())?;
            if let Some(path) = out.solution {
                revalidate(&path, &scene, &goal).map_err(|e| format!("{which} {kind}: {e}"))?;
                let audit = audit_contacts(path.start(), &path.controls(), &scene).map_err(|e| e.to_string())?;
                ensure(audit.disallowed == 0, || format!("{which} {kind}: {} disallowed contacts", audit.disallowed))?;
                solvers.push(kind.to_string());
            }
        }
        ensure(!solvers.is_empty(), || format!("no planner solved {which}"))?;
        notes.push(format!("{which} blocked statically, solved by {}", solvers.join("/")));
    }
    Ok(notes.join("; "))
}

fn protocol_fidelity() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let status = Command::new(env!("CARGO_BIN_EXE_kinobench"))
        .args(["bench", "--profile", "paper", "--dry-run", "--out"])
        .arg(dir.path())
        .env_remove("KINOBENCH_SEED")
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), || format!("bench exited with {status}"))?;
    let text = std::fs::read_to_string(dir.path().join("metadata.toml")).map_err(|e| e.to_string())?;
    let meta: Metadata = toml::from_str(&text).map_err(|e| e.to_string())?;
    ensure(meta.profile == "paper", || format!("profile {}", meta.profile))?;
    ensure(meta.runs_per_cell == 10, || format!("runs {}", meta.runs_per_cell))?;
    ensure(meta.timeout_s == 500.0, || format!("timeout {}", meta.timeout_s))?;
    ensure(meta.goal_bias == 0.05, || format!("goal bias {}", meta.goal_bias))?;
    ensure(meta.planners.len() == 5 && meta.scenes.len() == 3, || "matrix shape".into())?;
    for s in &meta.scenes {
        ensure(s.f_max_n == 10.0 && s.control_step_s == 0.07, || {
            format!("{}: f_max {} step {}", s.name, s.f_max_n, s.control_step_s)
        })?;
    }
    Ok("10 runs/cell, 500 s, goal bias 0.05, ±10 N, 0.07 s".into())
}

fn three_sigma(counts: &[u64], probs: &[f64], draws: u64) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for (i, (&c, &p)) in counts.iter().zip(probs).enumerate() {
        let mean = draws as f64 * p;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        let z = if sd > 0.0 { (c as f64 - mean).abs() / sd } else { (c as f64 - mean).abs() };
        ensure(z <= 3.0, || format!("bin {i}: {c} draws vs {mean:.1} expected"))?;
        worst = worst.max(z);
    }
    Ok(worst)
}

fn selection_distributions() -> Outcome {
    const DRAWS: u64 = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    let neighbours = [0u32, 1, 2, 3, 5, 8, 0, 13, 4, 1];
    let mut sampler = MilestoneSampler::new();
    for &n in &neighbours {
        sampler.push(n);
    }
    let w: Vec<f64> = neighbours.iter().map(|&n| 1.0 / (1.0 + n as f64)).collect();
    let total: f64 = w.iter().sum();
    let probs: Vec<f64> = w.iter().map(|x| x / total).collect();
    let mut counts = vec![0u64; neighbours.len()];
    for _ in 0..DRAWS {
        counts[sampler.sample(&mut rng).unwrap()] += 1;
    }
    let z_est = three_sigma(&counts, &probs, DRAWS).map_err(|e| format!("est: {e}"))?;

    let mut d = Decomposition::grid(Rect::new(Vec2::ZERO, Vec2::new(10.0, 10.0)), 5, 1);
    let fixture = [(1.0, 3, 0u64), (0.5, 1, 2), (0.8, 6, 1), (0.3, 0, 0), (0.9, 2, 4)];
    for (r, &(free, cov, sel)) in d.regions.iter_mut().zip(&fixture) {
        r.free_volume = free;
        r.coverage = cov;
        r.selections = sel;
    }
    let lead = [0, 1, 2, 3, 4];
    let w: Vec<f64> = fixture
        .iter()
        .map(|&(f, c, s)| if c > 0 { f * f / (1.0 + s as f64) } else { 0.0 })
        .collect();
    for (r, wi) in d.regions.iter().zip(&w) {
        if r.coverage > 0 {
            ensure((region_weight(r) - wi).abs() < 1e-15, || "region weight".into())?;
        }
    }
    let total: f64 = w.iter().sum();
    let probs: Vec<f64> = w.iter().map(|x| x / total).collect();
    let mut counts = vec![0u64; lead.len()];
    for _ in 0..DRAWS {
        let r = select_region(&lead, &mut d, &mut rng);
        d.regions[r].selections -= 1;
        counts[r] += 1;
    }
    let z_syclop = three_sigma(&counts, &probs, DRAWS).map_err(|e| format!("syclop: {e}"))?;

    let mut grids = 0;
    for _ in 0..300 {
        let nx = rng.random_range(1..=20);
        let ny = rng.random_range(1..=20);
        let density: f64 = rng.random_range(0.2..1.0);
        let mut grid = CellGrid::new(Vec2::ZERO, 0.5);
        let mut cells: BTreeSet<CellCoord> = BTreeSet::new();
        let mut order: Vec<CellCoord> = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                if rng.random::<f64>() < density {
                    order.push((i, j));
                }
            }
        }
        for k in (1..order.len()).rev() {
            order.swap(k, rng.random_range(0..=k));
        }
        for (t, &c) in order.iter().enumerate() {
            grid.instantiate(c, t as u64);
            cells.insert(c);
        }
        let truth = brute_force_interior(&cells);
        ensure(grid.interior_set() == truth, || format!("{nx}x{ny} grid disagrees"))?;
        let stats = grid.stats();
        ensure(stats.interior + stats.exterior == cells.len(), || "counts".into())?;
        grids += 1;
    }
    Ok(format!("est max |z| {z_est:.2}, syclop max |z| {z_syclop:.2}, {grids} kpiece grids match"))
}

fn csv_without_time(path: &Path) -> Result<Vec<String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    Ok(text
        .lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(5);
            f.join(",")
        })
        .collect())
}

fn benchmark_reproducibility() -> Outcome {
    let mut times = Vec::new();
    let mut csvs = Vec::new();
    let mut rate = 0.0;
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let spec = BenchmarkSpec::profile(Profile::Desk, dir.path().to_path_buf());
        let t = Instant::now();
        let result = run_benchmark(&spec, 1).map_err(|e| e.to_string())?;
        times.push(t.elapsed().as_secs_f64());
        ensure(result.records.len() == 150, || format!("{} records", result.records.len()))?;
        rate = result.records.iter().filter(|r| r.report.success).count() as f64 / 150.0;
        csvs.push(csv_without_time(&dir.path().join("runs.csv"))?);
    }
    ensure(csvs[0] == csvs[1], || "CSVs differ outside planning_time_s".into())?;
    let worst = times.iter().cloned().fold(0.0, f64::max);
    ensure(worst < 90.0 * 60.0, || format!("desk benchmark took {worst:.0} s"))?;
    Ok(format!("identical CSVs, desk run {worst:.1} s, success {rate:.2}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("metric oracles", metric_oracles),
        ("physics suite", physics_suite),
        ("planner correctness on scene1", planner_correctness),
        ("pushing is required and suffices", physics_necessity),
        ("paper profile metadata", protocol_fidelity),
        ("selection distributions", selection_distributions),
        ("benchmark reproducibility", benchmark_reproducibility),
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
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
