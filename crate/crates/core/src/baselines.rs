//! Reference planners: the layer-by-layer naive plan and an exact
//! branch-and-bound oracle for small walls.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{construct, BatterySwap, EngineConfig, Instance, Placement, Plan, SelectionPolicy};
use crate::error::{Error, Result};

const EPS: f64 = 1e-9;

/// Lays bricks bottom layer first, left to right, handing each brick to the
/// first idle robot as soon as support and spacing allow. Deterministic.
pub fn naive_plan(inst: &Instance) -> Result<Plan> {
    let config = EngineConfig {
        t_max: None,
        policy: SelectionPolicy::LayerOrder,
    };
    construct(inst, config, ChaCha8Rng::seed_from_u64(0))
}

/// Relative distance between a bound and an incumbent, in percent.
pub fn gap(best_bound: f64, best_integer: f64) -> f64 {
    100.0 * (best_bound - best_integer).abs() / (best_integer.abs() + 1e-10)
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub optimal_t: f64,
    pub optimal_plan: Plan,
    pub states_explored: u64,
    /// False when the state budget ran out before the search space was closed.
    pub certified: bool,
}

/// Maximum number of unbuilt bricks the oracle accepts.
pub const ORACLE_MAX_BRICKS: usize = 64;

#[derive(Clone, Copy)]
struct RobotSlot {
    free: f64,
    duty: f64,
}

#[derive(Clone)]
struct Node {
    t: f64,
    started: u64,
    /// (local brick, landing time), sorted by brick.
    in_progress: Vec<(usize, f64)>,
    robots: Vec<RobotSlot>,
    /// Smallest brick that may still be started at `t`.
    min_next: usize,
}

#[derive(Hash, PartialEq, Eq)]
struct Key {
    started: u64,
    min_next: usize,
    in_progress: Vec<(usize, u64)>,
    robots: Vec<(usize, u64, u64)>,
}

struct Search<'a> {
    inst: &'a Instance,
    /// Blueprint index of each local brick.
    bricks: Vec<usize>,
    preds: Vec<u64>,
    partners: Vec<u64>,
    topo: Vec<usize>,
    /// `placement[r][b]` seconds.
    placement: Vec<Vec<f64>>,
    /// Robots with identical configuration share a class.
    class: Vec<usize>,
    all: u64,
    best_t: f64,
    best: Option<(Vec<Placement>, Vec<BatterySwap>)>,
    stack: Vec<Placement>,
    swaps: Vec<BatterySwap>,
    seen: HashMap<Key, f64>,
    states: u64,
    budget: u64,
    exhausted: bool,
}

fn bits(x: f64) -> u64 {
    // Times are sums of configured durations; round away float noise.
    (x * 1e6).round() as u64
}

impl Search<'_> {
    fn lower_bound(&self, node: &Node) -> f64 {
        let t = node.t;
        let mut lb = node.in_progress.iter().map(|&(_, e)| e).fold(t, f64::max);
        let remaining = (self.all & !node.started).count_ones() as usize;
        if remaining == 0 {
            return lb;
        }

        // Critical path ignoring robots.
        let mut land = vec![0.0f64; self.bricks.len()];
        for &(b, e) in &node.in_progress {
            land[b] = e;
        }
        for &b in &self.topo {
            if node.started & (1 << b) != 0 {
                continue;
            }
            let mut ready = t;
            let mut p = self.preds[b];
            while p != 0 {
                let q = p.trailing_zeros() as usize;
                p &= p - 1;
                ready = ready.max(land[q]);
            }
            let fastest = (0..self.placement.len())
                .map(|r| self.placement[r][b])
                .fold(f64::INFINITY, f64::min);
            land[b] = ready + fastest;
            lb = lb.max(land[b]);
        }

        // Robot capacity: the remaining bricks need `remaining` landings.
        let mut landings: Vec<f64> = Vec::with_capacity(remaining * node.robots.len());
        for (r, slot) in node.robots.iter().enumerate() {
            let p = (0..self.bricks.len())
                .filter(|&b| node.started & (1 << b) == 0)
                .map(|b| self.placement[r][b])
                .fold(f64::INFINITY, f64::min);
            let c = p + self.inst.robots[r].return_time;
            let f = slot.free.max(t);
            for k in 0..remaining {
                landings.push(f + p + k as f64 * c);
            }
        }
        landings.sort_by(f64::total_cmp);
        lb.max(landings[remaining - 1])
    }

    fn key(&self, node: &Node) -> Key {
        let t = node.t;
        let mut robots: Vec<(usize, u64, u64)> = node
            .robots
            .iter()
            .enumerate()
            .map(|(r, s)| (self.class[r], bits((s.free - t).max(0.0)), bits(s.duty)))
            .collect();
        robots.sort_unstable();
        Key {
            started: node.started,
            min_next: node.min_next,
            in_progress: node.in_progress.iter().map(|&(b, e)| (b, bits(e - t))).collect(),
            robots,
        }
    }

    fn dfs(&mut self, node: Node) {
        if self.exhausted {
            return;
        }
        self.states += 1;
        if self.states > self.budget {
            self.exhausted = true;
            return;
        }
        if node.started == self.all {
            let makespan = self.stack.iter().map(|p| p.placed_at).fold(0.0, f64::max);
            if makespan < self.best_t - EPS {
                self.best_t = makespan;
                self.best = Some((self.stack.clone(), self.swaps.clone()));
            }
            return;
        }
        if self.lower_bound(&node) >= self.best_t - EPS {
            return;
        }
        let key = self.key(&node);
        match self.seen.get(&key) {
            Some(&t0) if t0 <= node.t + EPS => return,
            _ => {
                self.seen.insert(key, node.t);
            }
        }

        let t = node.t;
        let busy: u64 = node.in_progress.iter().fold(0, |m, &(b, _)| m | 1 << b);
        let landed = node.started & !busy;

        // Idle robots, one representative per (class, duty).
        let mut reps: Vec<usize> = Vec::new();
        for (r, slot) in node.robots.iter().enumerate() {
            if slot.free <= t + EPS
                && !reps.iter().any(|&q| {
                    self.class[q] == self.class[r] && bits(node.robots[q].duty) == bits(slot.duty)
                })
            {
                reps.push(r);
            }
        }

        if !reps.is_empty() {
            for b in node.min_next..self.bricks.len() {
                let bit = 1u64 << b;
                if node.started & bit != 0
                    || self.preds[b] & !landed != 0
                    || self.partners[b] & busy != 0
                {
                    continue;
                }
                for &r in &reps {
                    let swaps = self.swaps.len();
                    let child = self.assign(&node, b, r);
                    self.dfs(child);
                    self.stack.pop();
                    self.swaps.truncate(swaps);
                    if self.exhausted {
                        return;
                    }
                }
            }
        }

        let next = node
            .robots
            .iter()
            .map(|s| s.free)
            .chain(node.in_progress.iter().map(|&(_, e)| e))
            .filter(|&x| x > t + EPS)
            .min_by(f64::total_cmp);
        if let Some(t2) = next {
            let mut child = node;
            child.t = t2;
            child.in_progress.retain(|&(_, e)| e > t2 + EPS);
            child.min_next = 0;
            self.dfs(child);
        }
    }

    fn assign(&mut self, node: &Node, b: usize, r: usize) -> Node {
        let cfg = &self.inst.robots[r];
        let t = node.t;
        let placed_at = t + self.placement[r][b];
        let mut child = node.clone();
        child.started |= 1 << b;
        let pos = child.in_progress.partition_point(|&(q, _)| q < b);
        child.in_progress.insert(pos, (b, placed_at));
        child.min_next = b + 1;
        let slot = &mut child.robots[r];
        let mut cycle_end = placed_at + cfg.return_time;
        slot.free = cycle_end;
        if let Some(budget) = cfg.battery_budget {
            slot.duty += cycle_end - t;
            if slot.duty + EPS >= budget {
                slot.free = placed_at + cfg.battery_swap_time;
                slot.duty = 0.0;
                cycle_end = placed_at;
                self.swaps.push(BatterySwap {
                    robot: cfg.id,
                    start: placed_at,
                    end: slot.free,
                });
            }
        }
        self.stack.push(Placement {
            brick: self.inst.graph.brick_id(self.bricks[b]),
            robot: cfg.id,
            start: t,
            placed_at,
            cycle_end,
        });
        child
    }
}

/// Exact minimum completion time for building every unbuilt brick.
///
/// Depth-first branch and bound over event-driven schedules: at each event
/// time it either starts an eligible brick on an idle robot or waits for the
/// next event. Pruned by a critical-path bound, a robot-capacity bound and
/// dominance on (started set, remaining work, robot offsets). Stops after
/// `state_budget` visited states and reports the incumbent as non-certified.
pub fn exact_oracle(inst: &Instance, state_budget: u64) -> Result<OracleResult> {
    inst.check_feasible()?;
    let g = &inst.graph;
    let bricks: Vec<usize> = (0..g.brick_count)
        .filter(|&i| !inst.blueprint.bricks[i].placed)
        .collect();
    if bricks.len() > ORACLE_MAX_BRICKS {
        return Err(Error::Config(format!(
            "the exact oracle handles at most {ORACLE_MAX_BRICKS} unbuilt bricks, got {}",
            bricks.len()
        )));
    }
    let mut local = vec![usize::MAX; g.brick_count];
    for (k, &b) in bricks.iter().enumerate() {
        local[b] = k;
    }
    let mask = |list: &[usize]| {
        list.iter()
            .filter(|&&q| local[q] != usize::MAX)
            .fold(0u64, |m, &q| m | 1 << local[q])
    };
    let preds: Vec<u64> = bricks.iter().map(|&b| mask(&g.preds[b])).collect();
    let partners: Vec<u64> = bricks.iter().map(|&b| mask(&g.partners[b])).collect();
    let topo: Vec<usize> = g
        .topological_order()
        .expect("precedence is acyclic")
        .into_iter()
        .filter(|&b| local[b] != usize::MAX)
        .map(|b| local[b])
        .collect();
    let placement: Vec<Vec<f64>> = (0..inst.robots.len())
        .map(|r| bricks.iter().map(|&b| inst.placement_time(r, b)).collect())
        .collect();
    let mut class = vec![0; inst.robots.len()];
    for r in 0..inst.robots.len() {
        class[r] = (0..r)
            .find(|&q| inst.robots[q].same_config(&inst.robots[r]))
            .map_or(r, |q| class[q]);
    }

    // Heuristic incumbents.
    let mut incumbent = naive_plan(inst)?;
    for seed in 0..8 {
        let p = construct(inst, EngineConfig::default(), ChaCha8Rng::seed_from_u64(seed))?;
        if p.reward == incumbent.reward && p.completion_time < incumbent.completion_time {
            incumbent = p;
        }
    }

    let all = if bricks.len() == 64 {
        u64::MAX
    } else {
        (1u64 << bricks.len()) - 1
    };
    let mut search = Search {
        inst,
        bricks,
        preds,
        partners,
        topo,
        placement,
        class,
        all,
        best_t: incumbent.completion_time,
        best: None,
        stack: Vec::new(),
        swaps: Vec::new(),
        seen: HashMap::new(),
        states: 0,
        budget: state_budget,
        exhausted: false,
    };
    let root = Node {
        t: 0.0,
        started: 0,
        in_progress: Vec::new(),
        robots: vec![RobotSlot { free: 0.0, duty: 0.0 }; inst.robots.len()],
        min_next: 0,
    };
    if all == 0 {
        search.states = 1;
    } else {
        search.dfs(root);
    }

    let plan = match search.best.take() {
        Some((mut placements, swaps)) => {
            placements.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.robot.cmp(&b.robot)));
            let reward = placements
                .iter()
                .map(|p| inst.blueprint.bricks[g.index_of(p.brick).unwrap()].reward)
                .sum();
            Plan {
                completion_time: search.best_t,
                placements,
                swaps,
                reward,
                robot_ids: inst.robot_ids(),
            }
        }
        None => incumbent,
    };
    Ok(OracleResult {
        optimal_t: plan.completion_time,
        optimal_plan: plan,
        states_explored: search.states,
        certified: !search.exhausted,
    })
}
