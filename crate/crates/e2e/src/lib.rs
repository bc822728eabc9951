//! Holds the `acceptance` test target, which runs the planners end to end
//! against fixture walls and an external MILP solver. It lives in its own
//! package so that `cargo test --workspace` runs it after every other target.
