//! Bricks, wall blueprints and the stretcher running bond generator.
//!
//! A blueprint is a list of bricks partitioned into horizontal layers. Each
//! layer is a string over the brick alphabet `{F, H}`; the running bond only
//! admits four layer forms: `F^k`, `H F^(n-1)`, `F^(n-1) H` and `H F^(n-1) H`.
//! Brick ids run left to right within a layer and bottom to top across layers,
//! starting at 1.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-brick processing time used by generated walls, in seconds.
pub const DEFAULT_BRICK_DURATION_S: f64 = 40.0;

const LENGTH_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BrickId(pub u32);

impl fmt::Display for BrickId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BrickKind {
    Full,
    Half,
}

impl BrickKind {
    /// Reward proportional to covered wall surface: full = 2, half = 1.
    pub fn default_reward(self) -> u32 {
        match self {
            BrickKind::Full => 2,
            BrickKind::Half => 1,
        }
    }

    pub fn length(self, dims: &BrickDimensions) -> f64 {
        match self {
            BrickKind::Full => dims.full_length,
            BrickKind::Half => dims.half_length,
        }
    }

    fn symbol(self) -> char {
        match self {
            BrickKind::Full => 'F',
            BrickKind::Half => 'H',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrickDimensions {
    pub full_length: f64,
    pub half_length: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for BrickDimensions {
    fn default() -> Self {
        BrickDimensions {
            full_length: 0.60,
            half_length: 0.30,
            width: 0.30,
            height: 0.20,
        }
    }
}

impl BrickDimensions {
    /// Builds dimensions from a full brick; the half brick is derived.
    pub fn new(full_length: f64, width: f64, height: f64) -> Result<Self> {
        let dims = BrickDimensions {
            full_length,
            half_length: full_length / 2.0,
            width,
            height,
        };
        dims.validate()?;
        Ok(dims)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.full_length, self.half_length, self.width, self.height];
        if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::Dimension(format!(
                "brick dimensions must be strictly positive, got {self:?}"
            )));
        }
        if (self.half_length * 2.0 - self.full_length).abs() > LENGTH_EPS {
            return Err(Error::Dimension(format!(
                "half length {} is not half of full length {}",
                self.half_length, self.full_length
            )));
        }
        Ok(())
    }
}

/// Axis-aligned rectangle in the xy-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footprint {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Footprint {
    pub fn overlap_area(&self, other: &Footprint) -> f64 {
        let dx = self.max[0].min(other.max[0]) - self.min[0].max(other.min[0]);
        let dy = self.max[1].min(other.max[1]) - self.min[1].max(other.min[1]);
        if dx <= 0.0 || dy <= 0.0 {
            0.0
        } else {
            dx * dy
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Brick {
    pub id: BrickId,
    pub kind: BrickKind,
    /// `[x, y, z]` in meters; `z` is the bottom face.
    pub center: [f64; 3],
    /// Rotation around the z-axis in radians.
    pub yaw: f64,
    pub reward: u32,
    #[serde(rename = "duration_s")]
    pub duration: f64,
    /// Already built on site (semi-built walls).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub placed: bool,
}

impl Brick {
    pub fn length(&self, dims: &BrickDimensions) -> f64 {
        self.kind.length(dims)
    }

    /// Bounding rectangle of the brick's xy-projection.
    pub fn footprint(&self, dims: &BrickDimensions) -> Footprint {
        let (hl, hw) = (self.length(dims) / 2.0, dims.width / 2.0);
        let (s, c) = self.yaw.sin_cos();
        let ex = (hl * c).abs() + (hw * s).abs();
        let ey = (hl * s).abs() + (hw * c).abs();
        Footprint {
            min: [self.center[0] - ex, self.center[1] - ey],
            max: [self.center[0] + ex, self.center[1] + ey],
        }
    }

    /// Left and right x-extent (only meaningful for yaw = 0).
    pub fn x_span(&self, dims: &BrickDimensions) -> (f64, f64) {
        let h = self.length(dims) / 2.0;
        (self.center[0] - h, self.center[0] + h)
    }

    pub fn distance(&self, other: &Brick) -> f64 {
        self.center
            .iter()
            .zip(other.center.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bond {
    StretcherRunning,
}

impl FromStr for Bond {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "stretcher-running" | "stretcher" | "running" => Ok(Bond::StretcherRunning),
            _ => Err(Error::UnsupportedBond(s.to_string())),
        }
    }
}

impl fmt::Display for Bond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bond::StretcherRunning => f.write_str("stretcher-running"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WallBlueprint {
    pub bricks: Vec<Brick>,
    /// Brick indices (into `bricks`) per layer, sorted by x.
    pub layers: Vec<Vec<usize>>,
    pub dims: BrickDimensions,
    pub length: f64,
    pub height: f64,
    pub note: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WallFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    dims: BrickDimensions,
    bricks: Vec<Brick>,
}

fn multiple_of(value: f64, unit: f64) -> Option<usize> {
    let k = value / unit;
    let r = k.round();
    if r >= 1.0 && (k - r).abs() < 1e-6 {
        Some(r as usize)
    } else {
        None
    }
}

/// Generates a stretcher running bond wall.
///
/// Even layers start with a full brick, odd layers with a half brick. When the
/// length is an odd number of half bricks the layer closes with a half brick on
/// the opposite end instead.
pub fn generate_wall(
    length: f64,
    height: f64,
    dims: BrickDimensions,
    bond: Bond,
) -> Result<WallBlueprint> {
    dims.validate()?;
    let Bond::StretcherRunning = bond;
    let halves = multiple_of(length, dims.half_length).ok_or_else(|| {
        Error::Dimension(format!(
            "wall length {length} m is not a positive multiple of the half brick length {} m",
            dims.half_length
        ))
    })?;
    let n_layers = multiple_of(height, dims.height).ok_or_else(|| {
        Error::Dimension(format!(
            "wall height {height} m is not a positive multiple of the brick height {} m",
            dims.height
        ))
    })?;

    let mut bricks = Vec::new();
    let mut layers = Vec::with_capacity(n_layers);
    for layer in 0..n_layers {
        let kinds = layer_kinds(halves, layer % 2 == 1);
        let mut x = 0.0;
        let mut members = Vec::with_capacity(kinds.len());
        for kind in kinds {
            let len = kind.length(&dims);
            members.push(bricks.len());
            bricks.push(Brick {
                id: BrickId(bricks.len() as u32 + 1),
                kind,
                center: [x + len / 2.0, 0.0, layer as f64 * dims.height],
                yaw: 0.0,
                reward: kind.default_reward(),
                duration: DEFAULT_BRICK_DURATION_S,
                placed: false,
            });
            x += len;
        }
        layers.push(members);
    }

    Ok(WallBlueprint {
        bricks,
        layers,
        dims,
        length: halves as f64 * dims.half_length,
        height: n_layers as f64 * dims.height,
        note: None,
    })
}

/// Kinds of one layer covering `halves` half-brick units.
fn layer_kinds(halves: usize, offset: bool) -> Vec<BrickKind> {
    use BrickKind::{Full, Half};
    let mut kinds = Vec::new();
    let mut remaining = halves;
    if offset {
        kinds.push(Half);
        remaining -= 1;
    }
    kinds.extend(std::iter::repeat(Full).take(remaining / 2));
    if remaining % 2 == 1 {
        kinds.push(Half);
    }
    kinds
}

impl WallBlueprint {
    /// Assembles a blueprint from a brick list, deriving layers from `z`.
    pub fn from_bricks(dims: BrickDimensions, bricks: Vec<Brick>) -> Result<Self, String> {
        dims.validate().map_err(|e| e.to_string())?;
        let mut ids = std::collections::BTreeSet::new();
        let mut layers: Vec<Vec<usize>> = Vec::new();
        for (idx, brick) in bricks.iter().enumerate() {
            if !ids.insert(brick.id) {
                return Err(format!("duplicate brick id {}", brick.id));
            }
            if !brick.duration.is_finite() || brick.duration <= 0.0 {
                return Err(format!("brick {} has non-positive duration", brick.id));
            }
            let z = brick.center[2];
            let k = z / dims.height;
            if z < -LENGTH_EPS || (k - k.round()).abs() > 1e-6 {
                return Err(format!(
                    "brick {} has z = {z}, which is not a multiple of the brick height {}",
                    brick.id, dims.height
                ));
            }
            let layer = k.round() as usize;
            if layers.len() <= layer {
                layers.resize_with(layer + 1, Vec::new);
            }
            layers[layer].push(idx);
        }
        for members in &mut layers {
            members.sort_by(|&a, &b| bricks[a].center[0].total_cmp(&bricks[b].center[0]));
        }
        let length = layers
            .iter()
            .filter(|m| !m.is_empty())
            .map(|m| {
                let left = bricks[m[0]].x_span(&dims).0;
                let right = bricks[*m.last().unwrap()].x_span(&dims).1;
                right - left
            })
            .fold(0.0, f64::max);
        let height = layers.len() as f64 * dims.height;
        Ok(WallBlueprint {
            bricks,
            layers,
            dims,
            length,
            height,
            note: None,
        })
    }

    pub fn empty(dims: BrickDimensions) -> Self {
        WallBlueprint {
            bricks: Vec::new(),
            layers: Vec::new(),
            dims,
            length: 0.0,
            height: 0.0,
            note: None,
        }
    }

    pub fn len(&self) -> usize {
        self.bricks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bricks.is_empty()
    }

    pub fn index_of(&self, id: BrickId) -> Option<usize> {
        self.bricks.iter().position(|b| b.id == id)
    }

    pub fn layer_of(&self, idx: usize) -> usize {
        (self.bricks[idx].center[2] / self.dims.height).round() as usize
    }

    /// Sum of rewards over all bricks.
    pub fn reward_total(&self) -> u32 {
        self.bricks.iter().map(|b| b.reward).sum()
    }

    /// Reward of bricks not yet flagged as placed.
    pub fn remaining_reward(&self) -> u32 {
        self.bricks.iter().filter(|b| !b.placed).map(|b| b.reward).sum()
    }

    /// Layer strings over `{F, H}`, bottom to top.
    pub fn layer_strings(&self) -> Vec<String> {
        self.layers
            .iter()
            .map(|m| m.iter().map(|&i| self.bricks[i].kind.symbol()).collect())
            .collect()
    }

    /// Returns every violated blueprint invariant; empty when the wall is valid.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if let Err(e) = self.dims.validate() {
            problems.push(e.to_string());
        }
        let mut joints: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for (layer, members) in self.layers.iter().enumerate() {
            let mut layer_joints = Vec::new();
            if members.is_empty() {
                problems.push(format!("layer {layer} is empty"));
                joints.push(layer_joints);
                continue;
            }
            let mut cursor = self.bricks[members[0]].x_span(&self.dims).0;
            let start = cursor;
            for (pos, &idx) in members.iter().enumerate() {
                let brick = &self.bricks[idx];
                if self.layer_of(idx) != layer {
                    problems.push(format!("brick {} is listed on layer {layer}", brick.id));
                }
                let (left, right) = brick.x_span(&self.dims);
                if (left - cursor).abs() > LENGTH_EPS {
                    problems.push(format!(
                        "layer {layer}: gap or overlap of {:.3e} m before brick {}",
                        left - cursor,
                        brick.id
                    ));
                }
                if brick.kind == BrickKind::Half && pos != 0 && pos != members.len() - 1 {
                    problems.push(format!(
                        "layer {layer}: half brick {} is not on a layer edge",
                        brick.id
                    ));
                }
                if pos != 0 {
                    layer_joints.push(left);
                }
                cursor = right;
            }
            if (cursor - start - self.length).abs() > LENGTH_EPS {
                problems.push(format!(
                    "layer {layer} spans {} m but the wall is {} m long",
                    cursor - start,
                    self.length
                ));
            }
            joints.push(layer_joints);
        }
        for (layer, pair) in joints.windows(2).enumerate() {
            for a in &pair[0] {
                if pair[1].iter().any(|b| (a - b).abs() < LENGTH_EPS) {
                    problems.push(format!(
                        "vertical joint at x = {a} aligned between layers {layer} and {}",
                        layer + 1
                    ));
                }
            }
        }
        problems
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse { source, .. } => Error::Parse {
                path: path.to_path_buf(),
                source,
            },
            Error::InvalidWall { reason, .. } => Error::InvalidWall {
                path: path.to_path_buf(),
                reason,
            },
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: WallFile = serde_json::from_str(text).map_err(|source| Error::Parse {
            path: "<input>".into(),
            source,
        })?;
        let mut wall =
            WallBlueprint::from_bricks(file.dims, file.bricks).map_err(|reason| Error::InvalidWall {
                path: "<input>".into(),
                reason,
            })?;
        wall.note = file.note;
        Ok(wall)
    }

    pub fn to_json(&self) -> String {
        let file = WallFile {
            note: self.note.clone(),
            dims: self.dims,
            bricks: self.bricks.clone(),
        };
        serde_json::to_string_pretty(&file).expect("wall serialization cannot fail")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Sum of brick rewards.
pub fn wall_reward_total(blueprint: &WallBlueprint) -> u32 {
    blueprint.reward_total()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wall(length: f64, height: f64) -> WallBlueprint {
        generate_wall(length, height, BrickDimensions::default(), Bond::StretcherRunning).unwrap()
    }

    #[test]
    fn two_layer_example() {
        let w = wall(2.4, 0.4);
        assert_eq!(w.len(), 9);
        assert_eq!(w.layer_strings(), vec!["FFFF", "HFFFH"]);
        assert!(w.check_invariants().is_empty());
    }

    #[test]
    fn smallest_wall() {
        let w = wall(0.6, 0.2);
        assert_eq!(w.layer_strings(), vec!["F"]);
    }

    #[test]
    fn odd_half_count_closes_with_half() {
        let w = wall(2.7, 0.6);
        assert_eq!(w.layer_strings(), vec!["FFFFH", "HFFFF", "FFFFH"]);
        assert!(w.check_invariants().is_empty());
    }

    #[test]
    fn ids_run_left_to_right_bottom_to_top() {
        let w = wall(3.0, 0.4);
        let ids: Vec<u32> = w.layers.iter().flatten().map(|&i| w.bricks[i].id.0).collect();
        assert_eq!(ids, (1..=11).collect::<Vec<_>>());
        assert_eq!(w.layers[0].len(), 5);
        assert_eq!(w.layers[1].len(), 6);
    }

    #[test]
    fn rejects_bad_length() {
        let err = generate_wall(1.0, 0.4, BrickDimensions::default(), Bond::StretcherRunning);
        assert!(matches!(err, Err(Error::Dimension(_))));
        let err = generate_wall(1.2, 0.3, BrickDimensions::default(), Bond::StretcherRunning);
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn unknown_bond() {
        assert!(matches!("flemish".parse::<Bond>(), Err(Error::UnsupportedBond(_))));
        assert_eq!("stretcher-running".parse::<Bond>().unwrap(), Bond::StretcherRunning);
    }

    #[test]
    fn rewards() {
        assert_eq!(WallBlueprint::empty(BrickDimensions::default()).reward_total(), 0);
        let w = wall(2.4, 0.8);
        assert_eq!(w.len(), 18);
        assert_eq!(wall_reward_total(&w), 32);
        let mut two = wall(0.9, 0.2);
        assert_eq!(two.layer_strings(), vec!["FH"]);
        assert_eq!(two.reward_total(), 3);
        two.bricks[0].placed = true;
        assert_eq!(two.remaining_reward(), 1);
    }

    #[test]
    fn detects_broken_tiling() {
        let mut w = wall(1.8, 0.4);
        w.bricks[1].center[0] += 0.05;
        assert!(!w.check_invariants().is_empty());

        let mut aligned = wall(1.8, 0.4);
        for idx in aligned.layers[1].clone() {
            aligned.bricks[idx].center[0] -= 0.3;
        }
        let problems = aligned.check_invariants();
        assert!(problems.iter().any(|p| p.contains("aligned")), "{problems:?}");
    }

    #[test]
    fn missing_field_is_named() {
        let text = r#"{"dims": {"full_length": 0.6, "half_length": 0.3, "width": 0.3, "height": 0.2},
            "bricks": [{"id": 1, "kind": "full", "yaw": 0.0, "reward": 2, "duration_s": 40.0}]}"#;
        let err = WallBlueprint::from_json(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("center"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn rejects_fractional_layer() {
        let text = r#"{"dims": {"full_length": 0.6, "half_length": 0.3, "width": 0.3, "height": 0.2},
            "bricks": [{"id": 1, "kind": "full", "center": [0.3, 0.0, 0.1], "yaw": 0.0, "reward": 2, "duration_s": 40.0}]}"#;
        assert!(matches!(
            WallBlueprint::from_json(text),
            Err(Error::InvalidWall { .. })
        ));
    }
}
