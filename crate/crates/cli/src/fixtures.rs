//! Shipped wall fixtures.
//!
//! The `wall_N` walls and `set_N` walls are reconstructions: they match the
//! published brick counts and scale, not the original geometry.

use std::env;
use std::path::{Path, PathBuf};

use brickplan_core::{Result, WallBlueprint};

/// Overrides the default fixture directory.
pub const FIXTURE_ENV: &str = "BRICKPLAN_FIXTURES";

pub const TABLE5_WALLS: [&str; 6] = ["wall_5", "wall_18", "wall_39", "wall_68", "wall_105", "wall_150"];

/// Full bricks per even layer (and layer count) of each `wall_N`.
pub fn wall_side(name: &str) -> Option<usize> {
    Some(match name {
        "wall_5" => 2,
        "wall_18" => 4,
        "wall_39" => 6,
        "wall_68" => 8,
        "wall_105" => 10,
        "wall_150" => 12,
        _ => return None,
    })
}

pub fn set_names() -> Vec<String> {
    (1..=10).map(|k| format!("set_{k}")).collect()
}

/// Length (m), height (m) and half-brick duration (s) of `set_k`.
pub fn set_shape(k: usize) -> (f64, f64, f64) {
    const SHAPES: [(f64, f64, f64); 10] = [
        (1.5, 0.4, 40.0),
        (1.2, 0.4, 30.0),
        (0.9, 0.6, 40.0),
        (2.1, 0.2, 30.0),
        (2.7, 0.2, 30.0),
        (1.5, 0.4, 30.0),
        (0.9, 0.4, 40.0),
        (2.1, 0.4, 40.0),
        (1.2, 0.6, 30.0),
        (1.8, 0.4, 40.0),
    ];
    SHAPES[k - 1]
}

pub fn fixture_dir() -> PathBuf {
    match env::var_os(FIXTURE_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"),
    }
}

pub fn fixture_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.json"))
}

pub fn load_fixture(dir: &Path, name: &str) -> Result<WallBlueprint> {
    WallBlueprint::load(fixture_path(dir, name))
}

/// Resolves a `--wall` argument: an existing path, or a fixture name.
pub fn resolve_wall(arg: &str) -> PathBuf {
    let p = PathBuf::from(arg);
    if p.exists() {
        return p;
    }
    let named = fixture_path(&fixture_dir(), arg);
    if named.exists() {
        named
    } else {
        p
    }
}
