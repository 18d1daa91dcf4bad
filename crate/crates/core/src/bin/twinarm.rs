use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use twinarm::bench::{emit_csv, run_bench, BenchConfig};
use twinarm::execution::{run_mission, FeasibilityOracle, Method, MissionConfig};
use twinarm::render::{render_gantt, render_scene};
use twinarm::scene::{generate_scene, load_scene, save_scene, RobotId, SceneParams};
use twinarm::sequencing::{sequence_tasks, TimelineExport};
use twinarm::traversability::{build_tgraph, orp_plan, SceneState};
use twinarm::verify::{suite_scenes, verify_scenes};
use twinarm::{Error, Result};

/// Environment variable that relocates every default or relative output path.
const OUT_DIR_ENV: &str = "TWINARM_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "twinarm",
    version,
    about = "Two-arm retrieval planning from planar clutter"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random scene
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        /// Scene file to write [default: scene.json]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one retrieval mission and write allocation, timeline and log
    Plan {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, value_parser = parse_method)]
        method: Method,
        /// always | blacklist:R-O,... | random:P_FAIL:SEED
        #[arg(long, default_value = "always", value_parser = parse_oracle)]
        oracle: FeasibilityOracle,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        /// Seed for the random method's coin
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory [default: current directory]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark sweep and write the metrics table
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "out-csv")]
        out_csv: Option<PathBuf>,
    },
    /// Compare search, corridor checks and makespans with reference oracles
    #[command(group(ArgGroup::new("input").required(true).args(["scene", "suite"])))]
    Verify {
        #[arg(long)]
        scene: Option<PathBuf>,
        /// The 200-scene suite (100 scenes each for N = 8 and N = 12)
        #[arg(long)]
        suite: bool,
    },
    /// Draw a scene (optionally with a robot's T-graph) or a timeline as SVG
    #[command(group(ArgGroup::new("input").required(true).args(["scene", "timeline"])))]
    Render {
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Robot whose T-graph and relocation plan are overlaid
        #[arg(long, requires = "scene", value_parser = parse_robot)]
        tgraph: Option<RobotId>,
        #[arg(long)]
        timeline: Option<PathBuf>,
        /// SVG file to write [default: scene.svg or timeline.svg]
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse()
}

fn parse_oracle(s: &str) -> std::result::Result<FeasibilityOracle, String> {
    s.parse()
}

fn parse_robot(s: &str) -> std::result::Result<RobotId, String> {
    s.trim_start_matches('r')
        .parse()
        .map(RobotId)
        .map_err(|_| format!("invalid robot `{s}`"))
}

fn output_path(given: Option<PathBuf>, default: &str) -> PathBuf {
    let path = given.unwrap_or_else(|| PathBuf::from(default));
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Gen { seed, n, out } => {
            let scene = generate_scene(seed, &SceneParams::with_objects(n))?;
            write(&output_path(out, "scene.json"), &save_scene(&scene))?;
            Ok(true)
        }
        Command::Plan {
            scene,
            method,
            oracle,
            budget,
            seed,
            out,
        } => {
            let scene = load_scene(&read(&scene)?)?;
            let config = MissionConfig {
                method,
                oracle,
                budget,
                random_seed: seed,
            };
            let log = run_mission(&scene, &config);
            let dir = output_path(out, ".");
            write(&dir.join("mission.json"), &log.to_json())?;
            let timeline = sequence_tasks(&scene, &log.tasks());
            write(&dir.join("timeline.json"), &timeline.to_json())?;
            match log.allocation(&scene) {
                Some(allocation) => {
                    write(&dir.join("allocation.json"), &allocation.to_json())?;
                    println!(
                        "{method}: {} relocations, {} turn-takings, makespan {:.2} s",
                        log.relocations.len(),
                        allocation.turn_takings(),
                        log.makespan
                    );
                    Ok(true)
                }
                None => {
                    eprintln!("mission failed: {:?}", log.failure);
                    Ok(false)
                }
            }
        }
        Command::Bench { config, out_csv } => {
            let config = match config {
                Some(path) => BenchConfig::from_toml(&read(&path)?)?,
                None => BenchConfig::default(),
            };
            let report = run_bench(&config)?;
            write(&output_path(out_csv, "bench.csv"), &emit_csv(&report.rows))?;
            Ok(true)
        }
        Command::Verify { scene, suite } => {
            let scenes = if suite {
                suite_scenes(&[8, 12], 100, 0)?
            } else {
                let path = scene.expect("clap enforces one input");
                vec![load_scene(&read(&path)?)?]
            };
            let report = verify_scenes(&scenes);
            print!("{report}");
            if !report.ok() {
                eprintln!("verification mismatch");
            }
            Ok(report.ok())
        }
        Command::Render {
            scene,
            tgraph,
            timeline,
            out,
        } => {
            if let Some(path) = timeline {
                let timeline = TimelineExport::from_json(&read(&path)?)?;
                write(&output_path(out, "timeline.svg"), &render_gantt(&timeline))?;
                return Ok(true);
            }
            let scene = load_scene(&read(&scene.expect("clap enforces one input"))?)?;
            let svg = match tgraph {
                Some(robot) => {
                    if scene.robot(robot).is_none() {
                        return Err(Error::InvalidParameters(format!(
                            "scene has no robot {robot}"
                        )));
                    }
                    let graph = build_tgraph(&SceneState::new(&scene), robot);
                    let plan = orp_plan(&graph, scene.target());
                    render_scene(&scene, Some(&graph), plan.as_ref())
                }
                None => render_scene(&scene, None, None),
            };
            write(&output_path(out, "scene.svg"), &svg)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
