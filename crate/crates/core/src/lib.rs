//! Planning toolkit for teams of robots building brick walls.
//!
//! Walls are generated as stretcher running bond blueprints, turned into a
//! constraint graph (support precedence and proximity exclusion), and planned
//! with a GRASP optimizer built around an event-driven construction engine.
//! A layer-by-layer baseline, an exact branch-and-bound oracle for small
//! walls and an LP model exporter are provided for comparison.

pub mod baselines;
pub mod constraints;
pub mod engine;
pub mod error;
pub mod grasp;
pub mod milp;
pub mod robot;
pub mod wall;

pub use constraints::{build_graph, ConcurrenceThreshold, ConstraintGraph};
pub use engine::{validate_plan, EngineConfig, Instance, Plan, PlanState};
pub use error::{Error, Result};
pub use robot::{uav_team, Robot, RobotKind};
pub use wall::{generate_wall, Bond, Brick, BrickDimensions, BrickId, BrickKind, WallBlueprint};
