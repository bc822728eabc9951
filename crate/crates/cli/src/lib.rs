//! Library side of the `brickplan` command: fixture lookup, benchmark
//! suites, run reports and Gantt rendering.

pub mod bench;
pub mod fixtures;
pub mod gantt;
pub mod report;

use brickplan_core::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const IO: i32 = 4;
}

/// Maps a library error to the exit code the command reports.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Infeasible { .. } => exit::INFEASIBLE,
        Error::Io { .. } | Error::Parse { .. } | Error::InvalidWall { .. } => exit::IO,
        Error::Dimension(_) | Error::UnsupportedBond(_) | Error::Config(_) | Error::Export(_) => {
            exit::USAGE
        }
    }
}
