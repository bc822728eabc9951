//! Benchmark suites over the shipped fixtures.
//!
//! Seeds fan out over the rayon pool; rows are assembled in (instance,
//! robots, seed) order, so reports do not depend on scheduling.

use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use brickplan_core::baselines::{exact_oracle, naive_plan};
use brickplan_core::grasp::{grasp_optimize, GraspConfig};
use brickplan_core::{ConcurrenceThreshold, Error, Instance, Plan, Result, Robot, WallBlueprint};

use crate::fixtures::{load_fixture, set_names, TABLE5_WALLS};
use crate::report::{ReportRow, RunReport, RunSample};

pub const DEFAULT_SEEDS: usize = 30;
pub const ORACLE_BUDGET: u64 = 20_000_000;

/// Published CMCP results with 3 robots: (wall, T' s, runtime ms).
pub const TABLE5_CMCP: [(&str, f64, f64); 6] = [
    ("wall_5", 160.0, 35.69),
    ("wall_18", 353.0, 27.87),
    ("wall_39", 680.0, 39.49),
    ("wall_68", 1140.0, 58.55),
    ("wall_105", 1767.0, 377.94),
    ("wall_150", 2490.0, 821.45),
];

/// Published exact-solver results: (wall, T' s, progress %).
pub const TABLE5_EXACT: [(&str, Option<f64>, f64); 6] = [
    ("wall_5", Some(160.0), 100.0),
    ("wall_18", Some(360.0), 100.0),
    ("wall_39", Some(710.0), 100.0),
    ("wall_68", Some(1180.0), 100.0),
    ("wall_105", Some(1290.0), 41.0),
    ("wall_150", None, 0.0),
];

/// Published completion times on the ten small sets with 2 UAVs and 1 UGV:
/// CMCP, exact MILP, GPGP, Gurobi, Auction. Those planners are not part of
/// this toolkit; the numbers are shown for reference only.
pub const TABLE6: [[f64; 5]; 10] = [
    [120.0, 102.0, 193.0, 111.0, 115.0],
    [98.0, 103.0, 156.0, 107.0, 103.0],
    [109.0, 107.0, 157.0, 119.0, 107.0],
    [94.0, 102.0, 158.0, 107.0, 102.0],
    [80.0, 119.0, 158.0, 132.0, 118.0],
    [119.0, 105.0, 170.0, 125.0, 126.0],
    [103.0, 96.0, 119.0, 107.0, 96.0],
    [118.0, 102.0, 178.0, 129.0, 106.0],
    [87.0, 96.0, 144.0, 119.0, 98.0],
    [104.0, 87.0, 133.0, 107.0, 99.0],
];
pub const TABLE6_LABELS: [&str; 5] = ["CMCP", "MILP", "GPGP", "Gurobi", "Auction"];

/// Snapshot coefficient used for every wall of the table5 suite.
pub const TABLE5_UPSILON: f64 = 0.1;

pub const TABLE7_ROBOTS: [usize; 5] = [2, 4, 6, 8, 10];

/// Published (R_used, T') per robot count in `TABLE7_ROBOTS` order.
pub const TABLE7: [(&str, [(usize, f64); 5]); 5] = [
    ("wall_18", [(2, 440.0), (4, 340.0), (5, 320.0), (5, 320.0), (5, 320.0)]),
    ("wall_39", [(2, 990.0), (4, 580.0), (6, 520.0), (7, 520.0), (7, 520.0)]),
    ("wall_68", [(2, 1690.0), (4, 880.0), (6, 700.0), (8, 710.0), (10, 680.0)]),
    ("wall_105", [(2, 2640.0), (4, 1340.0), (6, 950.0), (8, 870.0), (10, 850.0)]),
    ("wall_150", [(2, 3740.0), (4, 1890.0), (6, 1300.0), (8, 1080.0), (10, 1050.0)]),
];

pub const BATTERY_BUDGET_S: f64 = 200.0;
pub const BATTERY_SWAP_S: f64 = 40.0;
pub const BATTERY_PUBLISHED_T: f64 = 390.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Table5,
    Table6,
    Table7,
    Battery,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table5" => Ok(Suite::Table5),
            "table6" => Ok(Suite::Table6),
            "table7" => Ok(Suite::Table7),
            "battery" => Ok(Suite::Battery),
            _ => Err(Error::Config(format!(
                "unknown suite {s:?}; expected table5, table6, table7 or battery"
            ))),
        }
    }
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Table5 => "table5",
            Suite::Table6 => "table6",
            Suite::Table7 => "table7",
            Suite::Battery => "battery",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchOptions {
    pub seeds: usize,
    /// First seed; runs use `seed_base..seed_base + seeds`.
    pub seed_base: u64,
    pub k_max: Option<usize>,
    /// Overrides the per-wall default snapshot coefficient.
    pub upsilon: Option<f64>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            seeds: DEFAULT_SEEDS,
            seed_base: 0,
            k_max: None,
            upsilon: None,
        }
    }
}

/// Snapshot at every count on small walls, a tenth of them on large ones.
pub fn default_upsilon(bricks: usize) -> f64 {
    if bricks <= 18 {
        1.0
    } else {
        0.1
    }
}

pub fn battery_team(n: usize) -> Vec<Robot> {
    (0..n)
        .map(|k| Robot::uav(k).with_battery(BATTERY_BUDGET_S, BATTERY_SWAP_S))
        .collect()
}

/// Two UAVs and one UGV.
pub fn mixed_team() -> Vec<Robot> {
    vec![Robot::uav(0), Robot::uav(1), Robot::ugv(2)]
}

fn sample(seed: u64, plan: &Plan, runtime_ms: f64) -> RunSample {
    RunSample {
        seed,
        completion_time: plan.completion_time,
        reward: plan.reward,
        runtime_ms,
        robots_used: plan.robots_used(),
        swaps: plan.swaps.len(),
    }
}

/// Runs GRASP once per seed in parallel; results come back in seed order.
pub fn grasp_runs(inst: &Instance, base: &GraspConfig, seeds: &[u64]) -> Result<Vec<(RunSample, Plan)>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let config = GraspConfig { seed, ..*base };
            let clock = Instant::now();
            let rec = grasp_optimize(inst, &config)?;
            let ms = clock.elapsed().as_secs_f64() * 1e3;
            Ok((sample(seed, &rec.plan, ms), rec.plan))
        })
        .collect()
}

fn timed<F: FnOnce() -> Result<Plan>>(f: F) -> Result<(RunSample, Plan)> {
    let clock = Instant::now();
    let plan = f()?;
    let ms = clock.elapsed().as_secs_f64() * 1e3;
    Ok((sample(0, &plan, ms), plan))
}

struct Job {
    wall: String,
    blueprint: WallBlueprint,
    robots: Vec<Robot>,
    upsilon: f64,
}

impl Job {
    fn instance(&self) -> Result<Instance> {
        Instance::new(self.blueprint.clone(), self.robots.clone(), ConcurrenceThreshold::default())
    }
}

fn grasp_row(job: &Job, opts: &BenchOptions) -> Result<ReportRow> {
    let inst = job.instance()?;
    let mut base = GraspConfig {
        upsilon: opts.upsilon.unwrap_or(job.upsilon),
        ..GraspConfig::default()
    };
    if let Some(k) = opts.k_max {
        base.k_max = k;
    }
    let seeds: Vec<u64> = (0..opts.seeds as u64).map(|k| opts.seed_base + k).collect();
    let runs: Vec<RunSample> = grasp_runs(&inst, &base, &seeds)?.into_iter().map(|(s, _)| s).collect();
    Ok(ReportRow::from_runs(
        &job.wall,
        "grasp",
        job.robots.len(),
        job.blueprint.remaining_reward(),
        &runs,
    ))
}

fn naive_row(job: &Job) -> Result<ReportRow> {
    let inst = job.instance()?;
    let (run, _) = timed(|| naive_plan(&inst))?;
    Ok(ReportRow::from_runs(&job.wall, "naive", job.robots.len(), job.blueprint.remaining_reward(), &[run]))
}

fn oracle_row(job: &Job) -> Result<ReportRow> {
    let inst = job.instance()?;
    let (run, _) = timed(|| exact_oracle(&inst, ORACLE_BUDGET).map(|o| o.optimal_plan))?;
    Ok(ReportRow::from_runs(&job.wall, "oracle", job.robots.len(), job.blueprint.remaining_reward(), &[run]))
}

fn job(dir: &Path, wall: &str, robots: Vec<Robot>) -> Result<Job> {
    let blueprint = load_fixture(dir, wall)?;
    let upsilon = default_upsilon(blueprint.len());
    Ok(Job {
        wall: wall.to_string(),
        blueprint,
        robots,
        upsilon,
    })
}

pub fn run_suite(suite: Suite, dir: &Path, opts: &BenchOptions) -> Result<RunReport> {
    if opts.seeds == 0 {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let mut report = RunReport::new(suite.name());
    match suite {
        Suite::Table5 => {
            for (k, wall) in TABLE5_WALLS.iter().enumerate() {
                let mut j = job(dir, wall, brickplan_core::uav_team(3))?;
                j.upsilon = TABLE5_UPSILON;
                let (_, t, ms) = TABLE5_CMCP[k];
                let mut row = grasp_row(&j, opts)?
                    .with_reference("published T'", t)
                    .with_reference("published ms", ms);
                if let (_, Some(exact), _) = TABLE5_EXACT[k] {
                    row = row.with_reference("exact T'", exact);
                }
                report.rows.push(row);
                report.rows.push(naive_row(&j)?);
                if j.blueprint.len() <= 18 {
                    report.rows.push(oracle_row(&j)?);
                }
            }
        }
        Suite::Table6 => {
            for (k, wall) in set_names().iter().enumerate() {
                let j = job(dir, wall, mixed_team())?;
                let mut row = grasp_row(&j, opts)?;
                for (label, value) in TABLE6_LABELS.iter().zip(TABLE6[k]) {
                    row = row.with_reference(label, value);
                }
                report.rows.push(row);
                report.rows.push(oracle_row(&j)?);
            }
        }
        Suite::Table7 => {
            for (wall, published) in TABLE7 {
                for (k, &r) in TABLE7_ROBOTS.iter().enumerate() {
                    let j = job(dir, wall, brickplan_core::uav_team(r))?;
                    let (used, t) = published[k];
                    report.rows.push(
                        grasp_row(&j, opts)?
                            .with_reference("published R_used", used as f64)
                            .with_reference("published T'", t),
                    );
                }
            }
        }
        Suite::Battery => {
            let j = job(dir, "wall_18", battery_team(3))?;
            report
                .rows
                .push(grasp_row(&j, opts)?.with_reference("published T'", BATTERY_PUBLISHED_T));
            report.rows.push(naive_row(&j)?);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Table5, Suite::Table6, Suite::Table7, Suite::Battery] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("table9".parse::<Suite>().is_err());
    }

    #[test]
    fn upsilon_defaults() {
        assert_eq!(default_upsilon(18), 1.0);
        assert_eq!(default_upsilon(150), 0.1);
    }
}
