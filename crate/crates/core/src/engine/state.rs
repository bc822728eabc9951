use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::plan::{BatterySwap, Placement, Plan};
use super::Instance;
use crate::error::Result;
use crate::wall::BrickId;

const EPS: f64 = 1e-9;

/// Resource requirement of a brick. Every brick needs exactly one robot.
const BRICK_RESOURCES: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    /// Not yet reached by any processed edge.
    Hidden,
    Unavailable,
    Available,
    InProgress,
    Placed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RobotStatus {
    Working,
    Resting,
    Idle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    /// Brick index of the current or most recent assignment.
    pub assigned: Option<usize>,
    pub sigma_s: f64,
    pub sigma_e: f64,
    pub sigma_a: f64,
    /// Duty seconds since the last battery swap.
    pub duty: f64,
}

impl RobotState {
    fn fresh() -> Self {
        RobotState {
            assigned: None,
            sigma_s: 0.0,
            sigma_e: 0.0,
            sigma_a: 0.0,
            duty: 0.0,
        }
    }

    pub fn status(&self, t: f64) -> RobotStatus {
        if t + EPS < self.sigma_e {
            if t + EPS >= self.sigma_s {
                RobotStatus::Working
            } else {
                RobotStatus::Resting
            }
        } else if t + EPS < self.sigma_a {
            RobotStatus::Resting
        } else {
            RobotStatus::Idle
        }
    }

    pub fn is_idle(&self, t: f64) -> bool {
        self.sigma_a <= t + EPS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionPolicy {
    /// Highest reward first, ties broken uniformly at random.
    #[default]
    RewardGreedy,
    /// Lowest layer first, left to right; no randomness.
    LayerOrder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    /// Planning horizon; `None` is unbounded.
    pub t_max: Option<f64>,
    pub policy: SelectionPolicy,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            t_max: None,
            policy: SelectionPolicy::RewardGreedy,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlanState {
    pub t: f64,
    edge_visited: Vec<bool>,
    nodes: Vec<NodeStatus>,
    missing_preds: Vec<usize>,
    /// Completed nodes whose outgoing edges are not processed yet.
    frontier: Vec<usize>,
    unavailable: Vec<usize>,
    available: Vec<usize>,
    in_progress: Vec<usize>,
    window_end: Vec<f64>,
    pub robots: Vec<RobotState>,
    placements: Vec<Placement>,
    swaps: Vec<BatterySwap>,
    placed_total: usize,
    assigned_count: usize,
    reward: u32,
    finished: bool,
    t_max: f64,
    policy: SelectionPolicy,
    pub rng: ChaCha8Rng,
}

impl PlanState {
    /// Fresh state at t = 0 with pre-placed bricks already built.
    pub fn new(inst: &Instance, config: EngineConfig, rng: ChaCha8Rng) -> Result<Self> {
        inst.check_feasible()?;
        let g = &inst.graph;
        let n = g.brick_count;
        let mut state = PlanState {
            t: 0.0,
            edge_visited: vec![false; g.edges.len()],
            nodes: vec![NodeStatus::Hidden; n],
            missing_preds: g.preds.iter().map(Vec::len).collect(),
            frontier: g.start_nodes.clone(),
            unavailable: Vec::new(),
            available: Vec::new(),
            in_progress: Vec::new(),
            window_end: vec![0.0; n],
            robots: vec![RobotState::fresh(); inst.robots.len()],
            placements: Vec::new(),
            swaps: Vec::new(),
            placed_total: 0,
            assigned_count: 0,
            reward: 0,
            finished: false,
            t_max: config.t_max.unwrap_or(f64::INFINITY),
            policy: config.policy,
            rng,
        };
        for (i, brick) in inst.blueprint.bricks.iter().enumerate() {
            if brick.placed {
                state.complete(inst, i);
            }
        }
        Ok(state)
    }

    fn complete(&mut self, inst: &Instance, brick: usize) {
        self.nodes[brick] = NodeStatus::Placed;
        self.placed_total += 1;
        self.frontier.push(brick);
        for &s in &inst.graph.succs[brick] {
            self.missing_preds[s] -= 1;
        }
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Bricks handed to robots by this state (pre-placed bricks excluded).
    pub fn assigned_count(&self) -> usize {
        self.assigned_count
    }

    pub fn node_status(&self, brick: usize) -> NodeStatus {
        self.nodes[brick]
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    fn ids_with(&self, inst: &Instance, status: NodeStatus) -> BTreeSet<BrickId> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i] == status)
            .map(|i| inst.graph.brick_id(i))
            .collect()
    }

    pub fn unavailable_nodes(&self, inst: &Instance) -> BTreeSet<BrickId> {
        self.ids_with(inst, NodeStatus::Unavailable)
    }

    pub fn available_nodes(&self, inst: &Instance) -> BTreeSet<BrickId> {
        self.ids_with(inst, NodeStatus::Available)
    }

    pub fn placed_nodes(&self, inst: &Instance) -> BTreeSet<BrickId> {
        self.ids_with(inst, NodeStatus::Placed)
    }

    pub fn unvisited_edges(&self, inst: &Instance) -> BTreeSet<(usize, usize)> {
        self.edges_where(inst, false)
    }

    pub fn visited_edges(&self, inst: &Instance) -> BTreeSet<(usize, usize)> {
        self.edges_where(inst, true)
    }

    fn edges_where(&self, inst: &Instance, visited: bool) -> BTreeSet<(usize, usize)> {
        inst.graph
            .edges
            .iter()
            .zip(&self.edge_visited)
            .filter(|(_, v)| **v == visited)
            .map(|(e, _)| (e.from, e.to))
            .collect()
    }

    /// Picks a brick for an idle robot. Returns 0 after an assignment,
    /// otherwise the number of idle robots an assignment would need.
    pub fn assign_available_nodes(&mut self, inst: &Instance) -> usize {
        let t = self.t;
        let Some(robot) = self.best_idle_robot(inst) else {
            return BRICK_RESOURCES;
        };
        let robot_cfg = &inst.robots[robot];
        let fits = |state: &PlanState, b: usize| {
            let in_time =
                t + robot_cfg.placement_time(inst.blueprint.bricks[b].duration) <= state.t_max + EPS;
            in_time
                && inst.graph.partners[b].iter().all(|&p| {
                    state.nodes[p] != NodeStatus::InProgress || state.window_end[p] <= t + EPS
                })
        };

        let chosen = match self.policy {
            SelectionPolicy::LayerOrder => self
                .available
                .iter()
                .copied()
                .filter(|&b| fits(self, b))
                .min_by_key(|&b| inst.graph.layer_rank[b]),
            SelectionPolicy::RewardGreedy => {
                let mut best = Vec::new();
                let mut best_reward = 0;
                for &b in &self.available {
                    if !fits(self, b) {
                        continue;
                    }
                    let r = inst.blueprint.bricks[b].reward;
                    if best.is_empty() || r > best_reward {
                        best.clear();
                        best_reward = r;
                    }
                    if r == best_reward {
                        best.push(b);
                    }
                }
                match best.len() {
                    0 => None,
                    1 => Some(best[0]),
                    k => Some(best[self.rng.gen_range(0..k)]),
                }
            }
        };
        let Some(brick) = chosen else {
            return BRICK_RESOURCES;
        };

        let pos = self.available.iter().position(|&b| b == brick).unwrap();
        self.available.remove(pos);
        let placement_time = inst.placement_time(robot, brick);
        let placed_at = t + placement_time;
        let rs = &mut self.robots[robot];
        rs.assigned = Some(brick);
        rs.sigma_s = t;
        rs.sigma_e = placed_at;
        rs.sigma_a = placed_at + robot_cfg.return_time;
        self.nodes[brick] = NodeStatus::InProgress;
        self.window_end[brick] = placed_at;
        self.in_progress.push(brick);
        self.assigned_count += 1;
        self.placements.push(Placement {
            brick: inst.graph.brick_id(brick),
            robot: robot_cfg.id,
            start: t,
            placed_at,
            cycle_end: placed_at + robot_cfg.return_time,
        });
        self.apply_battery(inst, robot);
        0
    }

    /// Idle robot with the shortest placement time, lowest index on ties.
    fn best_idle_robot(&self, inst: &Instance) -> Option<usize> {
        (0..self.robots.len())
            .filter(|&r| self.robots[r].is_idle(self.t))
            .min_by(|&a, &b| {
                inst.robots[a]
                    .speed_penalty
                    .total_cmp(&inst.robots[b].speed_penalty)
                    .then(a.cmp(&b))
            })
    }

    fn idle_count(&self) -> usize {
        self.robots.iter().filter(|r| r.is_idle(self.t)).count()
    }

    /// Charges the robot's latest cycle to its battery. Once the budget is
    /// used up the robot finishes laying its brick, then swaps batteries
    /// instead of flying the return leg.
    pub fn apply_battery(&mut self, inst: &Instance, robot: usize) {
        let cfg = &inst.robots[robot];
        let Some(budget) = cfg.battery_budget else {
            return;
        };
        let rs = &mut self.robots[robot];
        rs.duty += rs.sigma_a - rs.sigma_s;
        if rs.duty + EPS >= budget {
            let start = rs.sigma_e;
            rs.sigma_a = start + cfg.battery_swap_time;
            rs.duty = 0.0;
            if let Some(last) = self.placements.last_mut() {
                last.cycle_end = start;
            }
            self.swaps.push(BatterySwap {
                robot: cfg.id,
                start,
                end: start + cfg.battery_swap_time,
            });
        }
    }

    /// Advances `t` to the earliest moment at which `needed` robots are idle
    /// at once. Never moves backwards.
    pub fn update_time(&mut self, needed: usize) {
        let mut free: Vec<f64> = self.robots.iter().map(|r| r.sigma_a).collect();
        free.sort_by(f64::total_cmp);
        let k = needed.clamp(1, free.len());
        self.t = self.t.max(free[k - 1]);
    }

    /// Next moment strictly after `t` at which a robot frees up or a brick lands.
    fn next_event(&self) -> Option<f64> {
        let t = self.t;
        self.robots
            .iter()
            .map(|r| r.sigma_a)
            .chain(self.in_progress.iter().map(|&b| self.window_end[b]))
            .filter(|&x| x > t + EPS)
            .min_by(f64::total_cmp)
    }

    /// Bricks whose placement window has closed enter the placed set.
    pub fn place_assigned_nodes(&mut self, inst: &Instance) {
        let t = self.t;
        let mut done = Vec::new();
        self.in_progress.retain(|&b| {
            let landed = self.window_end[b] <= t + EPS;
            if landed {
                done.push(b);
            }
            !landed
        });
        done.sort_unstable();
        for b in done {
            self.reward += inst.blueprint.bricks[b].reward;
            self.complete(inst, b);
        }
    }

    fn finish(&mut self, inst: &Instance) {
        let mut rest = std::mem::take(&mut self.in_progress);
        rest.sort_unstable();
        for b in rest {
            self.reward += inst.blueprint.bricks[b].reward;
            self.complete(inst, b);
        }
        self.finished = true;
    }

    pub fn to_plan(&self, inst: &Instance) -> Plan {
        let mut placements = self.placements.clone();
        placements.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.robot.cmp(&b.robot)));
        let completion_time = placements.iter().map(|p| p.placed_at).fold(0.0, f64::max);
        let reward = placements
            .iter()
            .map(|p| inst.blueprint.bricks[inst.graph.index_of(p.brick).unwrap()].reward)
            .sum();
        Plan {
            placements,
            swaps: self.swaps.clone(),
            completion_time,
            reward,
            robot_ids: inst.robot_ids(),
        }
    }
}

/// Moves edges leaving completed nodes to the visited set and exposes their
/// target bricks as unavailable nodes.
pub fn process_edges(state: &mut PlanState, inst: &Instance) {
    while let Some(node) = state.frontier.pop() {
        for &k in &inst.graph.out_edges[node] {
            if state.edge_visited[k] {
                continue;
            }
            state.edge_visited[k] = true;
            let to = inst.graph.edges[k].to;
            if state.nodes[to] == NodeStatus::Hidden {
                state.nodes[to] = NodeStatus::Unavailable;
                state.unavailable.push(to);
            }
        }
    }
}

/// Unavailable bricks whose predecessors are all placed become available.
pub fn find_available_nodes(state: &mut PlanState) {
    let mut ready = Vec::new();
    state.unavailable.retain(|&b| {
        let ok = state.missing_preds[b] == 0;
        if ok {
            ready.push(b);
        }
        !ok
    });
    ready.sort_unstable();
    for b in ready {
        state.nodes[b] = NodeStatus::Available;
        state.available.push(b);
    }
}

/// One construction step.
pub fn iterate_step(state: &mut PlanState, inst: &Instance) {
    if state.finished {
        return;
    }
    process_edges(state, inst);
    find_available_nodes(state);
    if state.placed_total == inst.graph.brick_count {
        state.finished = true;
        return;
    }
    let needed = state.assign_available_nodes(inst);
    if needed == 0 {
        return;
    }
    let next = if state.idle_count() < needed {
        let before = state.t;
        state.update_time(needed);
        (state.t > before + EPS).then_some(state.t).or_else(|| state.next_event())
    } else {
        state.next_event()
    };
    match next {
        Some(t) if t <= state.t_max + EPS => {
            state.t = t;
            state.place_assigned_nodes(inst);
        }
        _ => state.finish(inst),
    }
}

/// Steps until the state reports completion.
pub fn run_to_end(state: &mut PlanState, inst: &Instance) {
    while !state.finished {
        iterate_step(state, inst);
    }
}

/// One full construction from a fresh state.
pub fn construct(inst: &Instance, config: EngineConfig, rng: ChaCha8Rng) -> Result<Plan> {
    let mut state = PlanState::new(inst, config, rng)?;
    run_to_end(&mut state, inst);
    Ok(state.to_plan(inst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::ConcurrenceThreshold;
    use crate::robot::{uav_team, Robot};
    use crate::wall::{generate_wall, Bond, BrickDimensions};
    use rand::SeedableRng;

    fn instance(length: f64, height: f64, robots: Vec<Robot>) -> Instance {
        let w = generate_wall(length, height, BrickDimensions::default(), Bond::StretcherRunning)
            .unwrap();
        Instance::new(w, robots, ConcurrenceThreshold::default()).unwrap()
    }

    fn ids(v: &[u32]) -> BTreeSet<BrickId> {
        v.iter().map(|&i| BrickId(i)).collect()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn fig4_first_step_exposes_ground_layer() {
        let inst = instance(3.0, 0.4, uav_team(3));
        let mut s = PlanState::new(&inst, EngineConfig::default(), rng(0)).unwrap();
        process_edges(&mut s, &inst);
        find_available_nodes(&mut s);
        assert_eq!(s.available_nodes(&inst), ids(&[1, 2, 3, 4, 5]));
        assert!(s.unvisited_edges(&inst).iter().all(|(a, _)| *a < 11));
    }

    #[test]
    fn support_gates_availability() {
        let inst = instance(3.0, 0.4, uav_team(1));
        let mut s = PlanState::new(&inst, EngineConfig::default(), rng(0)).unwrap();
        process_edges(&mut s, &inst);
        find_available_nodes(&mut s);
        // Lay brick 1 by hand.
        s.available.retain(|&b| b != 0);
        s.complete(&inst, 0);
        process_edges(&mut s, &inst);
        find_available_nodes(&mut s);
        assert!(s.unavailable_nodes(&inst).contains(&BrickId(7)));
        assert!(!s.available_nodes(&inst).contains(&BrickId(7)));
        let before = s.visited_edges(&inst).len();
        process_edges(&mut s, &inst);
        assert_eq!(s.visited_edges(&inst).len(), before);
        s.available.retain(|&b| b != 1);
        s.complete(&inst, 1);
        process_edges(&mut s, &inst);
        find_available_nodes(&mut s);
        assert!(s.available_nodes(&inst).contains(&BrickId(7)));
    }

    #[test]
    fn reward_wins() {
        let inst = instance(0.9, 0.2, uav_team(1));
        for seed in 0..20 {
            let mut s = PlanState::new(&inst, EngineConfig::default(), rng(seed)).unwrap();
            process_edges(&mut s, &inst);
            find_available_nodes(&mut s);
            assert_eq!(s.assign_available_nodes(&inst), 0);
            assert_eq!(s.placements[0].brick, BrickId(1));
        }
    }

    #[test]
    fn histogram_time_update() {
        let inst = instance(1.8, 0.2, uav_team(3));
        let mut s = PlanState::new(&inst, EngineConfig::default(), rng(0)).unwrap();
        for (r, f) in [40.0, 50.0, 60.0].into_iter().enumerate() {
            s.robots[r].sigma_a = f;
        }
        let mut two = s.clone();
        two.update_time(2);
        assert_eq!(two.t, 50.0);
        let mut one = s.clone();
        one.update_time(1);
        assert_eq!(one.t, 40.0);
        let mut idle = PlanState::new(&inst, EngineConfig::default(), rng(0)).unwrap();
        idle.t = 70.0;
        idle.update_time(3);
        assert_eq!(idle.t, 70.0);
    }

    #[test]
    fn robot_states_follow_timeline() {
        let r = RobotState {
            assigned: Some(0),
            sigma_s: 0.0,
            sigma_e: 40.0,
            sigma_a: 50.0,
            duty: 0.0,
        };
        assert_eq!(r.status(0.0), RobotStatus::Working);
        assert_eq!(r.status(39.0), RobotStatus::Working);
        assert_eq!(r.status(40.0), RobotStatus::Resting);
        assert_eq!(r.status(50.0), RobotStatus::Idle);
    }

    #[test]
    fn wall_5_three_robots() {
        let inst = instance(1.2, 0.4, uav_team(3));
        assert_eq!(inst.graph.brick_count, 5);
        for seed in 0..10 {
            let plan = construct(&inst, EngineConfig::default(), rng(seed)).unwrap();
            assert_eq!(plan.completion_time, 160.0);
            assert_eq!(plan.reward, 8);
        }
    }

    #[test]
    fn finished_state_is_inert() {
        let inst = instance(0.6, 0.2, uav_team(1));
        let mut s = PlanState::new(&inst, EngineConfig::default(), rng(0)).unwrap();
        run_to_end(&mut s, &inst);
        let snapshot = s.to_plan(&inst);
        assert_eq!(snapshot.completion_time, 40.0);
        iterate_step(&mut s, &inst);
        assert!(s.is_finished());
        assert_eq!(s.to_plan(&inst), snapshot);
    }

    #[test]
    fn horizon_truncates() {
        let inst = instance(2.4, 0.8, uav_team(3));
        let config = EngineConfig {
            t_max: Some(100.0),
            ..EngineConfig::default()
        };
        let plan = construct(&inst, config, rng(1)).unwrap();
        assert!(plan.reward < 32);
        assert!(plan.placements.iter().all(|p| p.placed_at <= 100.0));
    }

    #[test]
    fn ugv_is_slower() {
        let inst = instance(0.6, 0.2, vec![Robot::ugv(0)]);
        let plan = construct(&inst, EngineConfig::default(), rng(0)).unwrap();
        assert_eq!(plan.completion_time, 50.0);
    }
}
