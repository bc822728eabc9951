use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wall::BrickId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub brick: BrickId,
    pub robot: usize,
    /// Pick start.
    pub start: f64,
    /// Brick laid; gates successors and concurrent neighbours.
    pub placed_at: f64,
    /// Robot back at the depot (or starting a battery swap).
    pub cycle_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatterySwap {
    pub robot: usize,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plan {
    pub placements: Vec<Placement>,
    pub swaps: Vec<BatterySwap>,
    /// T': time the last brick is laid, 0 for an empty plan.
    pub completion_time: f64,
    pub reward: u32,
    pub robot_ids: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimelineItem<'a> {
    Place(&'a Placement),
    Swap(&'a BatterySwap),
}

impl TimelineItem<'_> {
    pub fn start(&self) -> f64 {
        match self {
            TimelineItem::Place(p) => p.start,
            TimelineItem::Swap(s) => s.start,
        }
    }

    /// End of the interval during which the robot is unavailable.
    pub fn busy_end(&self) -> f64 {
        match self {
            TimelineItem::Place(p) => p.cycle_end,
            TimelineItem::Swap(s) => s.end,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PlanDoc {
    completion_time_s: f64,
    reward: u32,
    robots: Vec<RobotDoc>,
}

#[derive(Serialize, Deserialize)]
struct RobotDoc {
    id: usize,
    timeline: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EntryDoc {
    Place {
        brick: BrickId,
        start: f64,
        placed_at: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cycle_end: Option<f64>,
    },
    Swap {
        swap: bool,
        start: f64,
        end: f64,
    },
}

impl Plan {
    pub fn empty(robot_ids: Vec<usize>) -> Self {
        Plan {
            robot_ids,
            ..Plan::default()
        }
    }

    /// Robots that lay at least one brick.
    pub fn robots_used(&self) -> usize {
        self.robot_ids
            .iter()
            .filter(|r| self.placements.iter().any(|p| p.robot == **r))
            .count()
    }

    pub fn placed_ids(&self) -> Vec<BrickId> {
        self.placements.iter().map(|p| p.brick).collect()
    }

    /// Placements and swaps of one robot, ordered by start time.
    pub fn timeline(&self, robot: usize) -> Vec<TimelineItem<'_>> {
        let mut items: Vec<TimelineItem<'_>> = self
            .placements
            .iter()
            .filter(|p| p.robot == robot)
            .map(TimelineItem::Place)
            .chain(self.swaps.iter().filter(|s| s.robot == robot).map(TimelineItem::Swap))
            .collect();
        items.sort_by(|a, b| a.start().total_cmp(&b.start()));
        items
    }

    /// Higher reward wins; at equal reward the earlier completion wins.
    pub fn is_better_than(&self, other: &Plan) -> bool {
        self.reward > other.reward
            || (self.reward == other.reward && self.completion_time < other.completion_time)
    }

    pub fn to_json(&self) -> String {
        let robots = self
            .robot_ids
            .iter()
            .map(|&id| RobotDoc {
                id,
                timeline: self
                    .timeline(id)
                    .into_iter()
                    .map(|item| match item {
                        TimelineItem::Place(p) => EntryDoc::Place {
                            brick: p.brick,
                            start: p.start,
                            placed_at: p.placed_at,
                            cycle_end: Some(p.cycle_end),
                        },
                        TimelineItem::Swap(s) => EntryDoc::Swap {
                            swap: true,
                            start: s.start,
                            end: s.end,
                        },
                    })
                    .collect(),
            })
            .collect();
        let doc = PlanDoc {
            completion_time_s: self.completion_time,
            reward: self.reward,
            robots,
        };
        serde_json::to_string_pretty(&doc).expect("plan serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Plan> {
        let doc: PlanDoc = serde_json::from_str(text).map_err(|source| Error::Parse {
            path: "<plan>".into(),
            source,
        })?;
        let mut plan = Plan {
            completion_time: doc.completion_time_s,
            reward: doc.reward,
            ..Plan::default()
        };
        for robot in doc.robots {
            plan.robot_ids.push(robot.id);
            for entry in robot.timeline {
                match entry {
                    EntryDoc::Place {
                        brick,
                        start,
                        placed_at,
                        cycle_end,
                    } => plan.placements.push(Placement {
                        brick,
                        robot: robot.id,
                        start,
                        placed_at,
                        cycle_end: cycle_end.unwrap_or(placed_at),
                    }),
                    EntryDoc::Swap { start, end, .. } => plan.swaps.push(BatterySwap {
                        robot: robot.id,
                        start,
                        end,
                    }),
                }
            }
        }
        plan.placements
            .sort_by(|a, b| a.start.total_cmp(&b.start).then(a.robot.cmp(&b.robot)));
        Ok(plan)
    }
}
