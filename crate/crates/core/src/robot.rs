//! Static robot configuration.
//!
//! A placement occupies the robot for the brick duration plus its speed
//! penalty (pick, flight and placement), then for the return leg to the
//! brick depot. Only the placement part gates precedence and concurrence.

use serde::{Deserialize, Serialize};

pub const DEFAULT_RETURN_TIME_S: f64 = 10.0;
pub const UGV_SPEED_PENALTY_S: f64 = 10.0;
pub const DEFAULT_BATTERY_SWAP_S: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RobotKind {
    Uav,
    Ugv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Robot {
    pub id: usize,
    pub kind: RobotKind,
    pub return_time: f64,
    pub speed_penalty: f64,
    /// Duty seconds between battery swaps; `None` means unlimited.
    pub battery_budget: Option<f64>,
    pub battery_swap_time: f64,
}

impl Robot {
    pub fn uav(id: usize) -> Self {
        Robot {
            id,
            kind: RobotKind::Uav,
            return_time: DEFAULT_RETURN_TIME_S,
            speed_penalty: 0.0,
            battery_budget: None,
            battery_swap_time: DEFAULT_BATTERY_SWAP_S,
        }
    }

    pub fn ugv(id: usize) -> Self {
        Robot {
            kind: RobotKind::Ugv,
            speed_penalty: UGV_SPEED_PENALTY_S,
            ..Robot::uav(id)
        }
    }

    pub fn with_battery(mut self, budget: f64, swap_time: f64) -> Self {
        self.battery_budget = Some(budget);
        self.battery_swap_time = swap_time;
        self
    }

    /// Time from pick start until the brick is laid.
    pub fn placement_time(&self, brick_duration: f64) -> f64 {
        brick_duration + self.speed_penalty
    }

    /// Full cycle including the return leg.
    pub fn cycle_time(&self, brick_duration: f64) -> f64 {
        self.placement_time(brick_duration) + self.return_time
    }

    /// Same timing, same battery: interchangeable for scheduling purposes.
    pub fn same_config(&self, other: &Robot) -> bool {
        self.return_time == other.return_time
            && self.speed_penalty == other.speed_penalty
            && self.battery_budget == other.battery_budget
            && self.battery_swap_time == other.battery_swap_time
    }
}

/// `n` identical UAVs with ids `0..n`.
pub fn uav_team(n: usize) -> Vec<Robot> {
    (0..n).map(Robot::uav).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycles() {
        let uav = Robot::uav(0);
        assert_eq!(uav.placement_time(40.0), 40.0);
        assert_eq!(uav.cycle_time(40.0), 50.0);
        let ugv = Robot::ugv(1);
        assert_eq!(ugv.placement_time(40.0), 50.0);
        assert!(!uav.same_config(&ugv));
        assert!(uav.same_config(&Robot::uav(7)));
    }
}
