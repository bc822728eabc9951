//! Precedence and concurrence rules derived from wall geometry, and the
//! planning graph with one virtual start node per robot and one end node.
//!
//! Node indices: bricks occupy `0..B` in blueprint order, start nodes
//! `B..B+R`, and the end node is `B+R`.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::robot::Robot;
use crate::wall::{BrickId, WallBlueprint};

/// Default absolute concurrence distance, meters.
pub const DEFAULT_D_MIN: f64 = 0.80;

const DIST_EPS: f64 = 1e-9;

/// `above` rests (at least partly) on `below`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PrecedenceRule {
    pub below: BrickId,
    pub above: BrickId,
}

/// Unordered pair, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConcurrenceRule {
    pub a: BrickId,
    pub b: BrickId,
}

impl ConcurrenceRule {
    pub fn new(x: BrickId, y: BrickId) -> Self {
        if x <= y {
            ConcurrenceRule { a: x, b: y }
        } else {
            ConcurrenceRule { a: y, b: x }
        }
    }
}

/// How the concurrence distance is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConcurrenceThreshold {
    /// `d_min = factor * (smallest center distance over all brick pairs)`.
    Factor(f64),
    /// Absolute `d_min` in meters.
    Distance(f64),
}

impl Default for ConcurrenceThreshold {
    fn default() -> Self {
        ConcurrenceThreshold::Distance(DEFAULT_D_MIN)
    }
}

impl ConcurrenceThreshold {
    /// Resolves to an absolute distance; `None` when fewer than two bricks exist.
    pub fn resolve(&self, blueprint: &WallBlueprint) -> Option<f64> {
        match *self {
            ConcurrenceThreshold::Distance(d) => Some(d),
            ConcurrenceThreshold::Factor(f) => min_pair_distance(blueprint).map(|d| f * d),
        }
    }
}

/// Smallest center distance over all brick pairs.
pub fn min_pair_distance(blueprint: &WallBlueprint) -> Option<f64> {
    let b = &blueprint.bricks;
    let mut best: Option<f64> = None;
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            let d = b[i].distance(&b[j]);
            best = Some(best.map_or(d, |m| m.min(d)));
        }
    }
    best
}

pub fn build_precedence(blueprint: &WallBlueprint) -> BTreeSet<PrecedenceRule> {
    let mut rules = BTreeSet::new();
    for pair in blueprint.layers.windows(2) {
        for &lo in &pair[0] {
            let below = &blueprint.bricks[lo];
            let fb = below.footprint(&blueprint.dims);
            for &hi in &pair[1] {
                let above = &blueprint.bricks[hi];
                if fb.overlap_area(&above.footprint(&blueprint.dims)) > 0.0 {
                    rules.insert(PrecedenceRule {
                        below: below.id,
                        above: above.id,
                    });
                }
            }
        }
    }
    rules
}

/// Pairs with center distance at most `d_min`.
pub fn build_concurrence_within(blueprint: &WallBlueprint, d_min: f64) -> BTreeSet<ConcurrenceRule> {
    let b = &blueprint.bricks;
    let mut rules = BTreeSet::new();
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            if b[i].distance(&b[j]) <= d_min + DIST_EPS {
                rules.insert(ConcurrenceRule::new(b[i].id, b[j].id));
            }
        }
    }
    rules
}

/// Pairs within `d_place` times the smallest pair distance.
pub fn build_concurrence(blueprint: &WallBlueprint, d_place: f64) -> BTreeSet<ConcurrenceRule> {
    match ConcurrenceThreshold::Factor(d_place).resolve(blueprint) {
        Some(d_min) => build_concurrence_within(blueprint, d_min),
        None => BTreeSet::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone)]
pub struct ConstraintGraph {
    pub brick_count: usize,
    pub robot_count: usize,
    pub precedence: BTreeSet<PrecedenceRule>,
    pub concurrence: BTreeSet<ConcurrenceRule>,
    pub d_min: Option<f64>,
    /// One per robot, in robot order.
    pub start_nodes: Vec<usize>,
    pub end_node: usize,
    /// Precedence edges between bricks plus start-node edges to every root brick.
    pub edges: Vec<Edge>,
    /// Outgoing edge indices per node.
    pub out_edges: Vec<Vec<usize>>,
    pub preds: Vec<Vec<usize>>,
    pub succs: Vec<Vec<usize>>,
    pub partners: Vec<Vec<usize>>,
    /// Bricks sorted bottom-to-top, left-to-right.
    pub layer_order: Vec<usize>,
    /// Position of each brick in `layer_order`.
    pub layer_rank: Vec<usize>,
    /// Travel between consecutive placements of one robot (its return leg).
    pub brick_travel_s: f64,
    ids: Vec<BrickId>,
    index: HashMap<BrickId, usize>,
}

pub fn build_graph(
    blueprint: &WallBlueprint,
    robots: &[Robot],
    threshold: ConcurrenceThreshold,
) -> Result<ConstraintGraph> {
    if robots.is_empty() {
        return Err(Error::Config("at least one robot is required".into()));
    }
    let n = blueprint.len();
    let r = robots.len();
    let ids: Vec<BrickId> = blueprint.bricks.iter().map(|b| b.id).collect();
    let index: HashMap<BrickId, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();

    let precedence = build_precedence(blueprint);
    let d_min = threshold.resolve(blueprint);
    let concurrence = match d_min {
        Some(d) => build_concurrence_within(blueprint, d),
        None => BTreeSet::new(),
    };

    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    for rule in &precedence {
        let (lo, hi) = (index[&rule.below], index[&rule.above]);
        preds[hi].push(lo);
        succs[lo].push(hi);
    }
    let mut partners = vec![Vec::new(); n];
    for rule in &concurrence {
        let (a, b) = (index[&rule.a], index[&rule.b]);
        partners[a].push(b);
        partners[b].push(a);
    }

    let start_nodes: Vec<usize> = (n..n + r).collect();
    let end_node = n + r;
    let mut edges = Vec::new();
    for &s in &start_nodes {
        for (brick, p) in preds.iter().enumerate() {
            if p.is_empty() {
                edges.push(Edge { from: s, to: brick });
            }
        }
    }
    for (lo, hs) in succs.iter().enumerate() {
        for &hi in hs {
            edges.push(Edge { from: lo, to: hi });
        }
    }
    let mut out_edges = vec![Vec::new(); end_node + 1];
    for (k, e) in edges.iter().enumerate() {
        out_edges[e.from].push(k);
    }

    let mut layer_order: Vec<usize> = (0..n).collect();
    layer_order.sort_by(|&a, &b| {
        let (ba, bb) = (&blueprint.bricks[a], &blueprint.bricks[b]);
        blueprint
            .layer_of(a)
            .cmp(&blueprint.layer_of(b))
            .then(ba.center[0].total_cmp(&bb.center[0]))
            .then(ba.id.cmp(&bb.id))
    });

    let mut layer_rank = vec![0; n];
    for (rank, &b) in layer_order.iter().enumerate() {
        layer_rank[b] = rank;
    }

    let brick_travel_s = robots.iter().map(|r| r.return_time).fold(0.0, f64::max);

    Ok(ConstraintGraph {
        brick_count: n,
        robot_count: r,
        precedence,
        concurrence,
        d_min,
        start_nodes,
        end_node,
        edges,
        out_edges,
        preds,
        succs,
        partners,
        layer_order,
        layer_rank,
        brick_travel_s,
        ids,
        index,
    })
}

impl ConstraintGraph {
    /// Bricks, start nodes and the end node.
    pub fn node_count(&self) -> usize {
        self.brick_count + self.robot_count + 1
    }

    pub fn brick_id(&self, idx: usize) -> BrickId {
        self.ids[idx]
    }

    pub fn index_of(&self, id: BrickId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn is_virtual(&self, node: usize) -> bool {
        node >= self.brick_count
    }

    /// Bricks a robot may lay first.
    pub fn roots(&self) -> Vec<usize> {
        (0..self.brick_count).filter(|&i| self.preds[i].is_empty()).collect()
    }

    /// Bricks nothing rests on; the end node is reached from these.
    pub fn sinks(&self) -> Vec<usize> {
        (0..self.brick_count).filter(|&i| self.succs[i].is_empty()).collect()
    }

    /// Seconds of travel on the arc `from -> to`.
    pub fn travel_time(&self, from: usize, to: usize) -> f64 {
        if from < self.brick_count && to < self.brick_count && from != to {
            self.brick_travel_s
        } else {
            0.0
        }
    }

    pub fn are_concurrent(&self, a: usize, b: usize) -> bool {
        self.partners[a].contains(&b)
    }

    /// Precedence relation restricted to bricks is acyclic.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut queue: Vec<usize> = (0..self.brick_count).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(self.brick_count);
        while let Some(v) = queue.pop() {
            order.push(v);
            for &w in &self.succs[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push(w);
                }
            }
        }
        (order.len() == self.brick_count).then_some(order)
    }

    /// Text edge list, `P below above` then `C a b`, one rule per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for p in &self.precedence {
            let _ = writeln!(out, "P {} {}", p.below, p.above);
        }
        for c in &self.concurrence {
            let _ = writeln!(out, "C {} {}", c.a, c.b);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robot::uav_team;
    use crate::wall::{generate_wall, Bond, BrickDimensions};

    fn wall(length: f64, height: f64) -> WallBlueprint {
        generate_wall(length, height, BrickDimensions::default(), Bond::StretcherRunning).unwrap()
    }

    fn ids(v: &[usize], g: &ConstraintGraph) -> Vec<u32> {
        v.iter().map(|&i| g.brick_id(i).0).collect()
    }

    #[test]
    fn fig4_wall_predecessors() {
        let w = wall(3.0, 0.4);
        let g = build_graph(&w, &uav_team(3), ConcurrenceThreshold::default()).unwrap();
        let seven = g.index_of(BrickId(7)).unwrap();
        let mut p = ids(&g.preds[seven], &g);
        p.sort();
        assert_eq!(p, vec![1, 2]);
        assert_eq!(ids(&g.roots(), &g), vec![1, 2, 3, 4, 5]);
        assert_eq!(ids(&g.sinks(), &g), vec![6, 7, 8, 9, 10, 11]);
        assert_eq!(g.node_count(), 11 + 3 + 1);
    }

    #[test]
    fn single_layer_has_no_precedence() {
        assert!(build_precedence(&wall(2.4, 0.2)).is_empty());
    }

    #[test]
    fn nearest_neighbours_only() {
        let w = wall(2.4, 0.4);
        let rules = build_concurrence(&w, 1.0 + 1e-6);
        let dmin = min_pair_distance(&w).unwrap();
        // A top-layer half brick sits diagonally above the first full brick.
        assert!((dmin - 0.25).abs() < 1e-12);
        let mut expected = BTreeSet::new();
        for a in &w.bricks {
            for b in &w.bricks {
                if a.id < b.id && (a.distance(b) - dmin).abs() < 1e-9 {
                    expected.insert(ConcurrenceRule::new(a.id, b.id));
                }
            }
        }
        assert_eq!(rules, expected);
        assert!(!rules.is_empty());
    }

    #[test]
    fn adjacent_pairs_are_concurrent_at_80cm() {
        let w = wall(2.4, 0.8);
        let g = build_graph(&w, &uav_team(3), ConcurrenceThreshold::Distance(0.8)).unwrap();
        for layer in &w.layers {
            for pair in layer.windows(2) {
                assert!(g.are_concurrent(pair[0], pair[1]));
            }
        }
        assert!(g.dump().lines().any(|l| l == "C 1 2"));
        assert!(g.dump().lines().any(|l| l == "P 1 5"));
    }

    #[test]
    fn tiny_graph() {
        let w = wall(0.6, 0.2);
        let g = build_graph(&w, &uav_team(1), ConcurrenceThreshold::Factor(1.5)).unwrap();
        assert_eq!(g.node_count(), 3);
        assert!(g.concurrence.is_empty());
        assert_eq!(g.edges, vec![Edge { from: 1, to: 0 }]);
        assert!(matches!(
            build_graph(&w, &[], ConcurrenceThreshold::default()),
            Err(Error::Config(_))
        ));
    }
}
