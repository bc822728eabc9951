use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use brickplan_cli::bench::{run_suite, BenchOptions, Suite, DEFAULT_SEEDS, ORACLE_BUDGET};
use brickplan_cli::fixtures::{fixture_dir, resolve_wall};
use brickplan_cli::gantt::{render_gantt, GanttFormat};
use brickplan_cli::report::{ReportRow, RunReport, RunSample};
use brickplan_cli::{exit_code, exit};
use brickplan_core::baselines::exact_oracle;
use brickplan_core::grasp::{grasp_optimize_with_progress, GraspConfig};
use brickplan_core::milp::{build_milp, write_lp, MilpOptions, TimeWeight};
use brickplan_core::{
    baselines, generate_wall, Bond, BrickDimensions, ConcurrenceThreshold, Error, Instance, Plan,
    Result, Robot, WallBlueprint,
};

#[derive(Parser)]
#[command(name = "brickplan", version, about = "Multi-robot brick wall construction planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a stretcher running bond wall blueprint.
    Generate(GenerateArgs),
    /// Plan the construction of a wall.
    Plan(PlanArgs),
    /// Run a benchmark suite over the shipped fixtures.
    Bench(BenchArgs),
    /// Export the mixed-integer model of a wall in LP format.
    ExportMilp(ExportArgs),
    /// Render a plan file as a Gantt chart.
    Gantt(GanttArgs),
}

#[derive(clap::Args)]
struct GenerateArgs {
    /// Wall length in meters.
    #[arg(long)]
    length: f64,
    /// Wall height in meters.
    #[arg(long)]
    height: f64,
    /// Brick size as FULL_LENGTHxWIDTHxHEIGHT in meters.
    #[arg(long, default_value = "0.6x0.3x0.2")]
    dims: String,
    #[arg(long, default_value = "stretcher-running")]
    bond: String,
    /// Output file, or "-" for standard output.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Planner {
    Grasp,
    Naive,
    Oracle,
}

#[derive(clap::Args)]
struct TeamArgs {
    /// Wall file or fixture name.
    #[arg(long)]
    wall: String,
    /// Number of UAVs.
    #[arg(long, default_value_t = 3)]
    robots: usize,
    /// Number of additional, slower UGVs.
    #[arg(long, default_value_t = 0)]
    ugvs: usize,
    /// Absolute concurrence distance in meters.
    #[arg(long, conflicts_with = "dplace")]
    dmin: Option<f64>,
    /// Concurrence distance as a multiple of the smallest brick distance.
    #[arg(long)]
    dplace: Option<f64>,
}

impl TeamArgs {
    fn team(&self, battery: Option<(f64, f64)>) -> Vec<Robot> {
        let mut team: Vec<Robot> = (0..self.robots).map(Robot::uav).collect();
        team.extend((self.robots..self.robots + self.ugvs).map(Robot::ugv));
        if let Some((budget, swap)) = battery {
            team = team.into_iter().map(|r| r.with_battery(budget, swap)).collect();
        }
        team
    }

    fn threshold(&self) -> ConcurrenceThreshold {
        match (self.dmin, self.dplace) {
            (_, Some(f)) => ConcurrenceThreshold::Factor(f),
            (Some(d), None) => ConcurrenceThreshold::Distance(d),
            (None, None) => ConcurrenceThreshold::default(),
        }
    }

    fn instance(&self, battery: Option<(f64, f64)>) -> Result<Instance> {
        let blueprint = WallBlueprint::load(resolve_wall(&self.wall))?;
        Instance::new(blueprint, self.team(battery), self.threshold())
    }
}

#[derive(clap::Args)]
struct PlanArgs {
    #[command(flatten)]
    team: TeamArgs,
    #[arg(long, value_enum, default_value = "grasp")]
    planner: Planner,
    /// Master seed; drawn at random and printed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0.1)]
    upsilon: f64,
    #[arg(long, default_value_t = 1000)]
    kmax: usize,
    #[arg(long, default_value_t = 100)]
    kmax_not_improved: usize,
    /// Planning horizon in seconds; unbounded when omitted.
    #[arg(long)]
    tmax: Option<f64>,
    /// Duty seconds between battery swaps.
    #[arg(long)]
    battery_budget: Option<f64>,
    #[arg(long, default_value_t = 40.0)]
    battery_swap: f64,
    /// State budget of the exact oracle.
    #[arg(long, default_value_t = ORACLE_BUDGET)]
    oracle_budget: u64,
    /// Print one line per improvement to standard error.
    #[arg(long)]
    progress: bool,
    /// Plan output file, or "-" for standard output.
    #[arg(long, default_value = "-")]
    out: String,
    /// Also write a Gantt chart; SVG for ".svg" paths, text otherwise.
    #[arg(long)]
    gantt: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long, value_parser = parse_suite)]
    suite: Suite,
    #[arg(long, default_value_t = DEFAULT_SEEDS)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long)]
    upsilon: Option<f64>,
    /// Fixture directory; overrides the environment default.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Write the report as JSON lines to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Weight {
    Reciprocal,
    Horizon,
}

#[derive(clap::Args)]
struct ExportArgs {
    #[command(flatten)]
    team: TeamArgs,
    /// Planning horizon in seconds.
    #[arg(long)]
    tmax: f64,
    #[arg(long, value_enum, default_value = "reciprocal")]
    weight: Weight,
    /// Only connect start nodes to ground bricks and top bricks to the end.
    #[arg(long)]
    restrict_virtual_edges: bool,
    /// LP output file; the variable map goes next to it as .map.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Svg,
    Text,
}

#[derive(clap::Args)]
struct GanttArgs {
    /// Plan JSON file.
    #[arg(long)]
    plan: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long, default_value = "-")]
    out: String,
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn emit(out: &str, text: &str) -> Result<()> {
    if out == "-" {
        io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e))
    } else {
        write_file(Path::new(out), text)
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_dims(s: &str) -> Result<BrickDimensions> {
    let parts: Vec<f64> = s
        .split(['x', 'X', ','])
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Dimension(format!("cannot read brick size {s:?}")))?;
    match parts.as_slice() {
        &[full, width, height] => BrickDimensions::new(full, width, height),
        _ => Err(Error::Dimension(format!(
            "brick size {s:?} must be FULL_LENGTHxWIDTHxHEIGHT"
        ))),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let dims = parse_dims(&args.dims)?;
    let bond: Bond = args.bond.parse()?;
    let wall = generate_wall(args.length, args.height, dims, bond)?;
    emit(&args.out, &wall.to_json())?;
    if args.out != "-" {
        println!("{} bricks in {} layers -> {}", wall.len(), wall.layers.len(), args.out);
    }
    Ok(())
}

fn cmd_plan(args: PlanArgs) -> Result<()> {
    let battery = args.battery_budget.map(|b| (b, args.battery_swap));
    let inst = args.team.instance(battery)?;
    let seed = match (args.seed, args.planner) {
        (Some(s), _) => s,
        (None, Planner::Grasp) => {
            let s = rand::random::<u64>();
            eprintln!("seed: {s}");
            s
        }
        // Deterministic planners ignore the seed.
        (None, _) => 0,
    };

    let clock = Instant::now();
    let (name, plan): (&str, Plan) = match args.planner {
        Planner::Grasp => {
            let config = GraspConfig {
                k_max: args.kmax,
                k_max_not_improved: args.kmax_not_improved,
                upsilon: args.upsilon,
                seed,
                t_max: args.tmax,
            };
            let show = args.progress;
            let rec = grasp_optimize_with_progress(&inst, &config, |p| {
                if show {
                    eprintln!("{p}");
                }
            })?;
            ("grasp", rec.plan)
        }
        Planner::Naive => {
            if args.tmax.is_some() {
                return Err(Error::Config("the naive planner builds the whole wall; drop --tmax".into()));
            }
            ("naive", baselines::naive_plan(&inst)?)
        }
        Planner::Oracle => {
            if args.tmax.is_some() {
                return Err(Error::Config("the oracle builds the whole wall; drop --tmax".into()));
            }
            let res = exact_oracle(&inst, args.oracle_budget)?;
            if !res.certified {
                eprintln!(
                    "warning: state budget exhausted after {} states; plan is not proven optimal",
                    res.states_explored
                );
            }
            ("oracle", res.optimal_plan)
        }
    };
    let ms = clock.elapsed().as_secs_f64() * 1e3;

    emit(&args.out, &plan.to_json())?;
    if let Some(path) = &args.gantt {
        write_file(path, &render_gantt(&plan, GanttFormat::for_path(path)))?;
    }

    let sample = RunSample {
        seed,
        completion_time: plan.completion_time,
        reward: plan.reward,
        runtime_ms: ms,
        robots_used: plan.robots_used(),
        swaps: plan.swaps.len(),
    };
    let mut report = RunReport::new("plan");
    report.rows.push(ReportRow::from_runs(
        &args.team.wall,
        name,
        inst.robots.len(),
        inst.remaining_reward(),
        &[sample],
    ));
    let table = report.to_table();
    if args.out == "-" {
        eprint!("{table}");
    } else {
        print!("{table}");
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let dir = args.fixtures.unwrap_or_else(fixture_dir);
    let opts = BenchOptions {
        seeds: args.seeds,
        seed_base: args.seed_base,
        k_max: args.kmax,
        upsilon: args.upsilon,
    };
    let report = run_suite(args.suite, &dir, &opts)?;
    print!("{}", report.to_table());
    if let Some(path) = args.out {
        write_file(&path, &report.to_json_lines())?;
    }
    Ok(())
}

fn cmd_export(args: ExportArgs) -> Result<()> {
    let inst = args.team.instance(None)?;
    let options = MilpOptions {
        t_max: Some(args.tmax),
        weight: match args.weight {
            Weight::Reciprocal => TimeWeight::Reciprocal,
            Weight::Horizon => TimeWeight::Horizon,
        },
        restrict_virtual_edges: args.restrict_virtual_edges,
    };
    let model = build_milp(&inst, &options)?;
    write_lp(&model, &args.out)?;
    let map = args.out.with_extension("map.json");
    write_file(&map, &model.sidecar_json())?;
    println!(
        "{} variables ({} binary), {} rows -> {} (+ {})",
        model.variables.len(),
        model.binary_count(),
        model.rows.len(),
        args.out.display(),
        map.display()
    );
    Ok(())
}

fn cmd_gantt(args: GanttArgs) -> Result<()> {
    let text = fs::read_to_string(&args.plan).map_err(|e| Error::io(&args.plan, e))?;
    let plan = Plan::from_json(&text).map_err(|e| match e {
        Error::Parse { source, .. } => Error::Parse {
            path: args.plan.clone(),
            source,
        },
        other => other,
    })?;
    let format = match args.format {
        Format::Svg => GanttFormat::Svg,
        Format::Text => GanttFormat::Text,
    };
    emit(&args.out, &render_gantt(&plan, format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Plan(a) => cmd_plan(a),
        Command::Bench(a) => cmd_bench(a),
        Command::ExportMilp(a) => cmd_export(a),
        Command::Gantt(a) => cmd_gantt(a),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
