//! Event-driven plan construction.
//!
//! The state advances in discrete steps: newly completed nodes release their
//! outgoing edges, bricks whose supports are all laid become available, one
//! brick is handed to an idle robot, and when nothing can be assigned the
//! clock jumps to the next moment something can change.

mod plan;
mod state;
mod validate;

pub use plan::{BatterySwap, Placement, Plan, TimelineItem};
pub use state::{
    construct, find_available_nodes, iterate_step, process_edges, run_to_end, EngineConfig,
    NodeStatus, PlanState, RobotState, RobotStatus, SelectionPolicy,
};
pub use validate::{validate_plan, validate_plan_within, Violation};

use crate::constraints::{build_graph, ConcurrenceThreshold, ConstraintGraph};
use crate::error::{Error, Result};
use crate::robot::Robot;
use crate::wall::{BrickId, WallBlueprint};

/// Everything a planner needs: the wall, its constraint graph and the team.
#[derive(Debug, Clone)]
pub struct Instance {
    pub blueprint: WallBlueprint,
    pub graph: ConstraintGraph,
    pub robots: Vec<Robot>,
}

impl Instance {
    pub fn new(
        blueprint: WallBlueprint,
        robots: Vec<Robot>,
        threshold: ConcurrenceThreshold,
    ) -> Result<Self> {
        let graph = build_graph(&blueprint, &robots, threshold)?;
        Ok(Instance {
            blueprint,
            graph,
            robots,
        })
    }

    /// Rejects walls that can never be finished: bricks without support above
    /// the ground layer, or pre-placed bricks resting on unbuilt ones.
    pub fn check_feasible(&self) -> Result<()> {
        let floating: Vec<BrickId> = (0..self.graph.brick_count)
            .filter(|&i| self.blueprint.layer_of(i) > 0 && self.graph.preds[i].is_empty())
            .map(|i| self.graph.brick_id(i))
            .collect();
        if !floating.is_empty() {
            return Err(Error::Infeasible {
                reason: "bricks above the ground layer have no support".into(),
                bricks: floating,
            });
        }
        let bricks = &self.blueprint.bricks;
        let unsupported: Vec<BrickId> = (0..self.graph.brick_count)
            .filter(|&i| bricks[i].placed && self.graph.preds[i].iter().any(|&p| !bricks[p].placed))
            .map(|i| self.graph.brick_id(i))
            .collect();
        if !unsupported.is_empty() {
            return Err(Error::Infeasible {
                reason: "pre-placed bricks rest on bricks that are not built".into(),
                bricks: unsupported,
            });
        }
        Ok(())
    }

    /// Seconds robot `robot` needs from pick start until brick `brick` is laid.
    pub fn placement_time(&self, robot: usize, brick: usize) -> f64 {
        self.robots[robot].placement_time(self.blueprint.bricks[brick].duration)
    }

    pub fn robot_ids(&self) -> Vec<usize> {
        self.robots.iter().map(|r| r.id).collect()
    }

    pub fn remaining_reward(&self) -> u32 {
        self.blueprint.remaining_reward()
    }

    pub fn unplaced_count(&self) -> usize {
        self.blueprint.bricks.iter().filter(|b| !b.placed).count()
    }
}
