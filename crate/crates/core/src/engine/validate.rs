use std::collections::HashMap;
use std::fmt;

use super::plan::{Plan, TimelineItem};
use crate::constraints::ConstraintGraph;
use crate::robot::Robot;
use crate::wall::{BrickId, WallBlueprint};

const EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    UnknownBrick(BrickId),
    UnknownRobot(usize),
    DuplicatePlacement(BrickId),
    /// Placed again although flagged as already built.
    AlreadyBuilt(BrickId),
    /// Window shorter than the robot needs for this brick.
    TooFast { brick: BrickId, robot: usize },
    NegativeStart(BrickId),
    Precedence { below: BrickId, above: BrickId },
    Concurrence { a: BrickId, b: BrickId },
    RobotOverlap { robot: usize, at: f64 },
    Horizon { brick: BrickId, placed_at: f64 },
    Bookkeeping(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownBrick(b) => write!(f, "brick {b} is not part of the wall"),
            Violation::UnknownRobot(r) => write!(f, "robot {r} is not part of the team"),
            Violation::DuplicatePlacement(b) => write!(f, "brick {b} is placed more than once"),
            Violation::AlreadyBuilt(b) => write!(f, "brick {b} was already built"),
            Violation::TooFast { brick, robot } => {
                write!(f, "robot {robot} cannot lay brick {brick} that quickly")
            }
            Violation::NegativeStart(b) => write!(f, "brick {b} starts before t = 0"),
            Violation::Precedence { below, above } => {
                write!(f, "brick {above} is started before its support {below} is laid")
            }
            Violation::Concurrence { a, b } => {
                write!(f, "bricks {a} and {b} are too close to be placed at the same time")
            }
            Violation::RobotOverlap { robot, at } => {
                write!(f, "robot {robot} is double-booked at t = {at}")
            }
            Violation::Horizon { brick, placed_at } => {
                write!(f, "brick {brick} lands at {placed_at}, beyond the horizon")
            }
            Violation::Bookkeeping(msg) => f.write_str(msg),
        }
    }
}

/// Checks a plan without a planning horizon.
pub fn validate_plan(
    plan: &Plan,
    graph: &ConstraintGraph,
    blueprint: &WallBlueprint,
    robots: &[Robot],
) -> Vec<Violation> {
    validate_plan_within(plan, graph, blueprint, robots, f64::INFINITY)
}

/// Returns every violated scheduling rule; empty when the plan is valid.
pub fn validate_plan_within(
    plan: &Plan,
    graph: &ConstraintGraph,
    blueprint: &WallBlueprint,
    robots: &[Robot],
    t_max: f64,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let robot_index: HashMap<usize, usize> =
        robots.iter().enumerate().map(|(i, r)| (r.id, i)).collect();

    // Window [start, placed_at) per brick index.
    let mut window: Vec<Option<(f64, f64)>> = vec![None; graph.brick_count];
    for p in &plan.placements {
        let Some(b) = graph.index_of(p.brick) else {
            out.push(Violation::UnknownBrick(p.brick));
            continue;
        };
        let Some(&r) = robot_index.get(&p.robot) else {
            out.push(Violation::UnknownRobot(p.robot));
            continue;
        };
        if blueprint.bricks[b].placed {
            out.push(Violation::AlreadyBuilt(p.brick));
        }
        if window[b].is_some() {
            out.push(Violation::DuplicatePlacement(p.brick));
            continue;
        }
        if p.start < -EPS {
            out.push(Violation::NegativeStart(p.brick));
        }
        let need = robots[r].placement_time(blueprint.bricks[b].duration);
        if p.placed_at - p.start < need - EPS || p.cycle_end < p.placed_at - EPS {
            out.push(Violation::TooFast {
                brick: p.brick,
                robot: p.robot,
            });
        }
        if p.placed_at > t_max + EPS {
            out.push(Violation::Horizon {
                brick: p.brick,
                placed_at: p.placed_at,
            });
        }
        window[b] = Some((p.start, p.placed_at));
    }

    for rule in &graph.precedence {
        let (lo, hi) = match (graph.index_of(rule.below), graph.index_of(rule.above)) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => continue,
        };
        let Some((start_hi, _)) = window[hi] else {
            continue;
        };
        let ok = if blueprint.bricks[lo].placed {
            true
        } else {
            matches!(window[lo], Some((_, end_lo)) if end_lo <= start_hi + EPS)
        };
        if !ok {
            out.push(Violation::Precedence {
                below: rule.below,
                above: rule.above,
            });
        }
    }

    for rule in &graph.concurrence {
        let (Some(a), Some(b)) = (graph.index_of(rule.a), graph.index_of(rule.b)) else {
            continue;
        };
        if let (Some((sa, ea)), Some((sb, eb))) = (window[a], window[b]) {
            if sa < eb - EPS && sb < ea - EPS {
                out.push(Violation::Concurrence {
                    a: rule.a,
                    b: rule.b,
                });
            }
        }
    }

    for robot in robots {
        let items = plan.timeline(robot.id);
        for pair in items.windows(2) {
            if pair[1].start() < pair[0].busy_end() - EPS {
                out.push(Violation::RobotOverlap {
                    robot: robot.id,
                    at: pair[1].start(),
                });
            }
        }
        for item in &items {
            if let TimelineItem::Swap(s) = item {
                if s.end < s.start - EPS {
                    out.push(Violation::Bookkeeping(format!(
                        "swap of robot {} ends before it starts",
                        robot.id
                    )));
                }
            }
        }
    }

    let makespan = plan.placements.iter().map(|p| p.placed_at).fold(0.0, f64::max);
    if (makespan - plan.completion_time).abs() > EPS {
        out.push(Violation::Bookkeeping(format!(
            "completion time {} differs from last placement {makespan}",
            plan.completion_time
        )));
    }
    let reward: u32 = plan
        .placements
        .iter()
        .filter_map(|p| graph.index_of(p.brick))
        .map(|b| blueprint.bricks[b].reward)
        .sum();
    if reward != plan.reward {
        out.push(Violation::Bookkeeping(format!(
            "reward {} differs from placed bricks' total {reward}",
            plan.reward
        )));
    }
    out
}
