use clap::{Parser, Subcommand};
use kinobench::bench::{self, BenchError, BenchmarkSpec, Profile, SceneRef};
use kinobench::metrics::MetricsReport;
use kinobench::planners::PlannerKind;
use kinobench::scene::{builtin_scene, BuiltinScene, Scene, SceneError};
use kinobench::world::Control;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "kinobench", version, about = "Kinodynamic planning among pushable objects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan once and print the outcome.
    Plan {
        /// Scene file or `builtin:sceneN`.
        #[arg(long)]
        scene: String,
        #[arg(long)]
        planner: PlannerKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Wall-clock budget in seconds.
        #[arg(long, default_value_t = 60.0)]
        timeout: f64,
        /// Directory for `plan.toml`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark matrix.
    Bench {
        #[arg(long, conflicts_with = "profile", required_unless_present = "profile")]
        spec: Option<PathBuf>,
        #[arg(long)]
        profile: Option<Profile>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the run metadata and stop.
        #[arg(long)]
        dry_run: bool,
    },
    /// Scene utilities.
    Scene {
        #[command(subcommand)]
        command: SceneCommand,
    },
}

#[derive(Subcommand)]
enum SceneCommand {
    /// Load and validate a scene file.
    Validate { file: PathBuf },
    /// Print a built-in scene document.
    Show { which: BuiltinScene },
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<SceneError> for Failure {
    fn from(e: SceneError) -> Self {
        match e {
            SceneError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Io { .. } | BenchError::Format { .. } => Failure::Io(e.to_string()),
            BenchError::Scene(s) => s.into(),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

#[derive(Serialize)]
struct PlanDoc {
    scene: String,
    planner: String,
    seed: u64,
    timeout_s: f64,
    success: bool,
    planning_time_s: f64,
    action: f64,
    power_w: f64,
    smoothness: f64,
    iterations: u64,
    motions: usize,
    controls: Vec<Control>,
}

fn plan(scene: &str, planner: PlannerKind, seed: u64, timeout: f64, out: Option<&Path>) -> Result<bool, Failure> {
    if !(timeout > 0.0 && timeout.is_finite()) {
        return Err(Failure::Usage("--timeout must be a positive number of seconds".into()));
    }
    let loaded: Scene = SceneRef::parse(scene).map_err(Failure::Usage)?.load()?;
    let (report, stats, solution): (MetricsReport, _, _) =
        bench::run_once(&loaded, planner, seed, timeout).map_err(Failure::from)?;
    println!(
        "{} {} seed={} success={} time={:.3}s iterations={} motions={} action={} power={} smoothness={}",
        scene,
        planner,
        seed,
        report.success,
        report.planning_time,
        stats.iterations,
        stats.motions,
        report.action,
        report.power,
        report.smoothness
    );
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        let doc = PlanDoc {
            scene: scene.to_string(),
            planner: planner.to_string(),
            seed,
            timeout_s: timeout,
            success: report.success,
            planning_time_s: report.planning_time,
            action: report.action,
            power_w: report.power,
            smoothness: report.smoothness,
            iterations: stats.iterations,
            motions: stats.motions,
            controls: solution.as_ref().map(|p| p.controls()).unwrap_or_default(),
        };
        let path = dir.join("plan.toml");
        let text = toml::to_string(&doc).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        std::fs::write(&path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(report.success)
}

fn bench_cmd(
    spec: Option<PathBuf>,
    profile: Option<Profile>,
    jobs: usize,
    out: Option<PathBuf>,
    dry_run: bool,
) -> Result<(), Failure> {
    let mut spec = match (spec, profile) {
        (Some(path), _) => BenchmarkSpec::load(&path)?,
        (None, Some(p)) => BenchmarkSpec::profile(p, PathBuf::from("bench-out")),
        (None, None) => return Err(Failure::Usage("either --spec or --profile is required".into())),
    };
    if let Some(o) = out {
        spec.out_dir = o;
    }
    let spec = spec.with_env_seed()?;
    if dry_run {
        spec.validate()?;
        let scenes = bench::load_scenes(&spec)?;
        let path = bench::prepare_output(&spec, &scenes)?;
        println!("wrote {}", path.display());
        return Ok(());
    }
    let total = spec.scenes.len() * spec.planners.len() * spec.runs_per_cell;
    let done = std::sync::atomic::AtomicUsize::new(0);
    let result = bench::run_benchmark_with(&spec, jobs, |r| {
        let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
        eprintln!(
            "[{n}/{total}] {} {} run {} success={} time={:.2}s",
            r.scene, r.planner, r.run, r.report.success, r.report.planning_time
        );
    })?;
    for (planner, s) in &result.overall {
        println!(
            "{planner:<11} success={:.2} time={:.3}s action={} power={} smoothness={}",
            s.success_rate, s.planning_time, s.action, s.power, s.smoothness
        );
    }
    println!("reports in {}", spec.out_dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Plan {
            scene,
            planner,
            seed,
            timeout,
            out,
        } => {
            let solved = plan(&scene, planner, seed, timeout, out.as_deref())?;
            Ok(if solved { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Bench {
            spec,
            profile,
            jobs,
            out,
            dry_run,
        } => {
            bench_cmd(spec, profile, jobs, out, dry_run)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Scene { command } => {
            match command {
                SceneCommand::Validate { file } => {
                    let s = Scene::load(&file)?;
                    println!("{}: ok ({} bodies)", file.display(), s.bodies.len());
                }
                SceneCommand::Show { which } => print!("{}", builtin_scene(which).to_toml()),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
