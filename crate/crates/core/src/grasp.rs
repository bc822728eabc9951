//! GRASP optimizer over the construction engine.
//!
//! Every iteration runs one randomized greedy construction, capturing full
//! state snapshots at randomly drawn placement counts, then re-plans from
//! each snapshot and keeps the best plan seen. Iteration `k` draws from
//! stream `k` of a ChaCha8 generator seeded with the master seed, so runs are
//! reproducible across platforms.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constraints::ConcurrenceThreshold;
use crate::engine::{iterate_step, run_to_end, EngineConfig, Instance, Plan, PlanState, SelectionPolicy};
use crate::error::{Error, Result};
use crate::robot::Robot;
use crate::wall::WallBlueprint;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspConfig {
    pub k_max: usize,
    /// Stop after this many iterations without improvement.
    pub k_max_not_improved: usize,
    /// Fraction of placement counts at which snapshots are taken.
    pub upsilon: f64,
    pub seed: u64,
    pub t_max: Option<f64>,
}

impl Default for GraspConfig {
    fn default() -> Self {
        GraspConfig {
            k_max: 1000,
            k_max_not_improved: 100,
            upsilon: 0.1,
            seed: 0,
            t_max: None,
        }
    }
}

impl GraspConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::Config("k_max must be at least 1".into()));
        }
        if !(self.upsilon > 0.0 && self.upsilon <= 1.0) {
            return Err(Error::Config(format!(
                "upsilon must lie in (0, 1], got {}",
                self.upsilon
            )));
        }
        if let Some(t) = self.t_max {
            if !(t >= 0.0) {
                return Err(Error::Config(format!("t_max must be non-negative, got {t}")));
            }
        }
        Ok(())
    }

    fn engine(&self) -> EngineConfig {
        EngineConfig {
            t_max: self.t_max,
            policy: SelectionPolicy::RewardGreedy,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub state: PlanState,
    pub placed_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRecord {
    pub plan: Plan,
    pub reward: u32,
    pub completion_time: f64,
    pub iterations: usize,
}

impl SolutionRecord {
    fn new(plan: Plan, iterations: usize) -> Self {
        SolutionRecord {
            reward: plan.reward,
            completion_time: plan.completion_time,
            plan,
            iterations,
        }
    }
}

/// Reported whenever the incumbent improves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub iteration: usize,
    pub reward: u32,
    pub completion_time: f64,
}

impl fmt::Display for Progress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iter={} reward={} T={}",
            self.iteration, self.reward, self.completion_time
        )
    }
}

pub struct Construction {
    pub plan: Plan,
    pub snapshots: Vec<Snapshot>,
    /// State at termination; its generator continues the iteration's stream.
    pub final_state: PlanState,
}

/// Generator for stream `k` of the master seed.
pub fn stream_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Number of snapshot milestones: `upsilon * b_star_max` rounded half up,
/// at least 1 and at most `b_star_max`.
pub fn snapshot_count(b_star_max: usize, upsilon: f64) -> usize {
    if b_star_max == 0 {
        return 0;
    }
    let k = (upsilon * b_star_max as f64 + 0.5).floor() as usize;
    k.clamp(1, b_star_max)
}

/// Distinct placement counts drawn uniformly from `1..=b_star_max`.
pub fn draw_milestones(b_star_max: usize, upsilon: f64, rng: &mut ChaCha8Rng) -> BTreeSet<usize> {
    let k = snapshot_count(b_star_max, upsilon);
    sample(rng, b_star_max, k).into_iter().map(|i| i + 1).collect()
}

/// Runs the engine to completion from `initial`, keeping a copy of the state
/// each time the number of assigned bricks hits a milestone.
pub fn greedy_randomized_construction(
    inst: &Instance,
    mut state: PlanState,
    b_star_max: usize,
    upsilon: f64,
) -> Construction {
    let milestones = draw_milestones(b_star_max, upsilon, &mut state.rng);
    let mut snapshots = Vec::with_capacity(milestones.len());
    let mut last = state.assigned_count();
    while !state.is_finished() {
        iterate_step(&mut state, inst);
        let count = state.assigned_count();
        if count != last {
            last = count;
            if milestones.contains(&count) {
                snapshots.push(Snapshot {
                    state: state.clone(),
                    placed_count: count,
                });
            }
        }
    }
    Construction {
        plan: state.to_plan(inst),
        snapshots,
        final_state: state,
    }
}

/// Re-plans from every snapshot with fresh draws from `rng` and returns the
/// best of those plans and `plan` itself.
pub fn local_search(
    inst: &Instance,
    plan: Plan,
    snapshots: Vec<Snapshot>,
    rng: &mut ChaCha8Rng,
) -> Plan {
    let mut best = plan;
    for snap in snapshots {
        let mut state = snap.state;
        std::mem::swap(&mut state.rng, rng);
        run_to_end(&mut state, inst);
        std::mem::swap(&mut state.rng, rng);
        let candidate = state.to_plan(inst);
        if candidate.is_better_than(&best) {
            best = candidate;
        }
    }
    best
}

pub fn grasp_optimize(inst: &Instance, config: &GraspConfig) -> Result<SolutionRecord> {
    grasp_optimize_with_progress(inst, config, |_| {})
}

pub fn grasp_optimize_with_progress(
    inst: &Instance,
    config: &GraspConfig,
    mut on_improve: impl FnMut(&Progress),
) -> Result<SolutionRecord> {
    config.validate()?;
    let initial = PlanState::new(inst, config.engine(), stream_rng(config.seed, 0))?;

    let mut found_state = initial.clone();
    run_to_end(&mut found_state, inst);
    let found = found_state.to_plan(inst);

    let mut b_star_max = inst.unplaced_count();
    let mut best: Option<SolutionRecord> = None;
    let mut k_iter = 0;
    let mut k_not = 0;
    while k_iter < config.k_max && k_not < config.k_max_not_improved {
        k_iter += 1;
        let mut start = initial.clone();
        start.rng = stream_rng(config.seed, k_iter as u64);
        let Construction {
            plan,
            snapshots,
            mut final_state,
        } = greedy_randomized_construction(inst, start, b_star_max, config.upsilon);
        let plan = local_search(inst, plan, snapshots, &mut final_state.rng);

        let improved = best.as_ref().map_or(true, |b| plan.is_better_than(&b.plan));
        if improved {
            b_star_max = plan.placements.len();
            on_improve(&Progress {
                iteration: k_iter,
                reward: plan.reward,
                completion_time: plan.completion_time,
            });
            best = Some(SolutionRecord::new(plan, k_iter));
            k_not = 0;
        } else {
            k_not += 1;
        }
    }

    let mut best = best.expect("at least one iteration runs");
    best.iterations = k_iter;
    if found.reward >= best.reward && found.completion_time < best.completion_time {
        best = SolutionRecord::new(found, k_iter);
    }
    Ok(best)
}

/// Plans only the bricks not flagged as placed in `blueprint`.
pub fn replan_from_partial(
    blueprint: WallBlueprint,
    robots: Vec<Robot>,
    threshold: ConcurrenceThreshold,
    config: &GraspConfig,
) -> Result<SolutionRecord> {
    let inst = Instance::new(blueprint, robots, threshold)?;
    grasp_optimize(&inst, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robot::uav_team;
    use crate::wall::{generate_wall, Bond, BrickDimensions};

    fn instance(length: f64, height: f64, robots: usize) -> Instance {
        let w = generate_wall(length, height, BrickDimensions::default(), Bond::StretcherRunning)
            .unwrap();
        Instance::new(w, uav_team(robots), ConcurrenceThreshold::default()).unwrap()
    }

    #[test]
    fn milestone_sizes() {
        assert_eq!(snapshot_count(150, 0.1), 15);
        assert_eq!(snapshot_count(18, 1.0), 18);
        assert_eq!(snapshot_count(5, 0.1), 1);
        assert_eq!(snapshot_count(5, 0.3), 2);
        assert_eq!(snapshot_count(5, 0.5), 3);
        assert_eq!(snapshot_count(0, 0.5), 0);
        let mut rng = stream_rng(3, 1);
        let m = draw_milestones(18, 1.0, &mut rng);
        assert_eq!(m, (1..=18).collect());
    }

    #[test]
    fn rejects_bad_config() {
        let inst = instance(1.2, 0.4, 3);
        for config in [
            GraspConfig { k_max: 0, ..GraspConfig::default() },
            GraspConfig { upsilon: 0.0, ..GraspConfig::default() },
            GraspConfig { upsilon: 1.5, ..GraspConfig::default() },
        ] {
            assert!(matches!(grasp_optimize(&inst, &config), Err(Error::Config(_))));
        }
    }

    #[test]
    fn single_iteration_is_construction_plus_local_search() {
        let inst = instance(2.4, 0.8, 3);
        let config = GraspConfig {
            k_max: 1,
            upsilon: 1.0,
            seed: 9,
            ..GraspConfig::default()
        };
        let got = grasp_optimize(&inst, &config).unwrap();

        let engine = config.engine();
        let mut start = PlanState::new(&inst, engine, stream_rng(9, 1)).unwrap();
        start.rng = stream_rng(9, 1);
        let c = greedy_randomized_construction(&inst, start, 18, 1.0);
        let mut rng = c.final_state.rng.clone();
        let expect = local_search(&inst, c.plan, c.snapshots, &mut rng);
        let found = crate::engine::construct(&inst, engine, stream_rng(9, 0)).unwrap();
        let expect = if found.reward >= expect.reward && found.completion_time < expect.completion_time {
            found
        } else {
            expect
        };
        assert_eq!(got.plan, expect);
    }

    #[test]
    fn no_snapshots_keeps_plan() {
        let inst = instance(1.2, 0.4, 3);
        let plan = crate::engine::construct(&inst, EngineConfig::default(), stream_rng(0, 0)).unwrap();
        let mut rng = stream_rng(0, 1);
        assert_eq!(local_search(&inst, plan.clone(), Vec::new(), &mut rng), plan);
    }

    #[test]
    fn progress_lines() {
        let inst = instance(2.4, 0.8, 3);
        let mut lines = Vec::new();
        let config = GraspConfig {
            upsilon: 1.0,
            seed: 1,
            ..GraspConfig::default()
        };
        let rec = grasp_optimize_with_progress(&inst, &config, |p| lines.push(p.to_string())).unwrap();
        assert!(!lines.is_empty());
        assert!(lines[0].starts_with("iter=1 reward=32 T="));
        assert_eq!(rec.reward, 32);
    }
}
