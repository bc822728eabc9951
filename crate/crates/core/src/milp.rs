//! Mixed-integer model of the planning problem and its LP-format writer.
//!
//! Node indices follow the constraint graph: bricks `0..B`, one start node per
//! robot, and the end node last. By default every arc a route could use is
//! modelled: start to any brick or to the end, brick to brick, brick to end.
//!
//! Row names carry a constraint family tag:
//!
//! | tag    | meaning                                                  |
//! |--------|----------------------------------------------------------|
//! | eq2    | each robot leaves its start node exactly once            |
//! | eq3    | the end node is entered once per robot                   |
//! | eq4    | start nodes are visited at t = 0                         |
//! | eq5/6  | start and end nodes are visited                          |
//! | eq7    | per-robot flow conservation at bricks                    |
//! | eq8    | a node is visited iff some robot leaves it               |
//! | eq9    | arc usage forces the arc indicator `z`                   |
//! | eq10   | visit times along used arcs (big-M)                      |
//! | eq11   | a brick is built only if its supports are                |
//! | eq12   | a brick starts only after its supports are laid          |
//! | eq13   | close bricks are laid one after the other (two rows)     |

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::engine::{Instance, Plan};
use crate::error::{Error, Result};

const FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeWeight {
    /// `W = 1 / T_max`, keeping the time term within [0, 1].
    Reciprocal,
    /// `W = T_max`.
    Horizon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MilpOptions {
    pub t_max: Option<f64>,
    pub weight: TimeWeight,
    /// Only connect start nodes to ground-layer bricks and the end node to
    /// top bricks, instead of the complete arc set.
    pub restrict_virtual_edges: bool,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            t_max: None,
            weight: TimeWeight::Reciprocal,
            restrict_virtual_edges: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    /// Constraint family tag (2..=13), also the row name prefix.
    pub family: u8,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v]).sum()
    }

    pub fn is_satisfied(&self, values: &[f64]) -> bool {
        let lhs = self.activity(values);
        let tol = FEAS_TOL * (1.0 + self.rhs.abs());
        match self.sense {
            Sense::Le => lhs <= self.rhs + tol,
            Sense::Ge => lhs >= self.rhs - tol,
            Sense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub objective: Vec<(usize, f64)>,
    pub rows: Vec<Row>,
    pub big_m: f64,
    pub t_max: f64,
    pub w: f64,
    pub node_count: usize,
    pub edges: Vec<(usize, usize)>,
    pub robot_ids: Vec<usize>,
    /// Brick id per brick node.
    pub brick_ids: Vec<u32>,
    pub concurrence_pairs: Vec<(usize, usize)>,
    x: Vec<Vec<usize>>,
    z: Vec<usize>,
    y: Vec<usize>,
    s: Vec<usize>,
    d: Vec<usize>,
    edge_index: HashMap<(usize, usize), usize>,
}

struct Builder {
    variables: Vec<Variable>,
    rows: Vec<Row>,
}

impl Builder {
    fn var(&mut self, name: String, kind: VarKind, upper: f64) -> usize {
        self.variables.push(Variable {
            name,
            kind,
            lower: 0.0,
            upper,
        });
        self.variables.len() - 1
    }

    fn row(&mut self, name: String, family: u8, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(Row {
            name,
            family,
            terms,
            sense,
            rhs,
        });
    }
}

pub fn build_milp(inst: &Instance, options: &MilpOptions) -> Result<MilpModel> {
    let t_max = match options.t_max {
        Some(t) if t.is_finite() && t > 0.0 => t,
        _ => {
            return Err(Error::Export(
                "a finite planning horizon is required; pass a positive t_max".into(),
            ))
        }
    };
    let robots = &inst.robots;
    if robots.iter().any(|r| !r.same_config(&robots[0])) {
        return Err(Error::Export(
            "the model assumes identical robots; the team mixes configurations".into(),
        ));
    }
    let g = &inst.graph;
    let nb = g.brick_count;
    let nr = robots.len();
    let n = g.node_count();
    let end = g.end_node;

    // Arc set.
    let mut edges = Vec::new();
    for &s in &g.start_nodes {
        let targets: Vec<usize> = if options.restrict_virtual_edges {
            g.roots()
        } else {
            (0..nb).collect()
        };
        edges.extend(targets.into_iter().map(|b| (s, b)));
        edges.push((s, end));
    }
    for i in 0..nb {
        for j in 0..nb {
            if i != j {
                edges.push((i, j));
            }
        }
    }
    let sinks: Vec<usize> = if options.restrict_virtual_edges {
        g.sinks()
    } else {
        (0..nb).collect()
    };
    edges.extend(sinks.into_iter().map(|b| (b, end)));
    let edge_index: HashMap<(usize, usize), usize> =
        edges.iter().enumerate().map(|(k, &e)| (e, k)).collect();

    // Node processing time (placement) and arc travel.
    let t_node = |i: usize| {
        if i < nb {
            inst.placement_time(0, i)
        } else {
            0.0
        }
    };
    let travel = |i: usize, j: usize| if i < nb && j < nb { robots[0].return_time } else { 0.0 };
    let max_t = (0..nb).map(t_node).fold(0.0, f64::max);
    let max_e = edges.iter().map(|&(i, j)| travel(i, j)).fold(0.0, f64::max);
    let big_m = t_max + max_t + max_e;
    let w = match options.weight {
        TimeWeight::Reciprocal => 1.0 / t_max,
        TimeWeight::Horizon => t_max,
    };

    let mut b = Builder {
        variables: Vec::new(),
        rows: Vec::new(),
    };
    let x: Vec<Vec<usize>> = (0..nr)
        .map(|r| {
            edges
                .iter()
                .map(|&(i, j)| b.var(format!("x_r{r}_i{i}_j{j}"), VarKind::Binary, 1.0))
                .collect()
        })
        .collect();
    let z: Vec<usize> = edges
        .iter()
        .map(|&(i, j)| b.var(format!("z_{i}_{j}"), VarKind::Binary, 1.0))
        .collect();
    let y: Vec<usize> = (0..n).map(|i| b.var(format!("y_{i}"), VarKind::Binary, 1.0)).collect();
    let s: Vec<usize> = (0..n)
        .map(|i| b.var(format!("s_{i}"), VarKind::Continuous, t_max))
        .collect();
    let pairs: Vec<(usize, usize)> = g
        .concurrence
        .iter()
        .map(|c| (g.index_of(c.a).unwrap(), g.index_of(c.b).unwrap()))
        .collect();
    let d: Vec<usize> = pairs
        .iter()
        .map(|&(a, c)| b.var(format!("d_{a}_{c}"), VarKind::Binary, 1.0))
        .collect();

    let mut objective: Vec<(usize, f64)> = (0..nb)
        .map(|i| (y[i], inst.blueprint.bricks[i].reward as f64))
        .collect();
    objective.push((s[end], -w));

    let out_of = |node: usize| -> Vec<usize> {
        (0..edges.len()).filter(|&k| edges[k].0 == node).collect()
    };
    let into = |node: usize| -> Vec<usize> {
        (0..edges.len()).filter(|&k| edges[k].1 == node).collect()
    };

    for (r, &start) in g.start_nodes.iter().enumerate() {
        let terms = out_of(start).into_iter().map(|k| (x[r][k], 1.0)).collect();
        b.row(format!("eq2_r{r}"), 2, terms, Sense::Eq, 1.0);
    }
    let arrivals: Vec<(usize, f64)> = (0..nr)
        .flat_map(|r| into(end).into_iter().map(move |k| (r, k)))
        .map(|(r, k)| (x[r][k], 1.0))
        .collect();
    b.row("eq3".into(), 3, arrivals, Sense::Eq, nr as f64);
    for (r, &start) in g.start_nodes.iter().enumerate() {
        b.row(format!("eq4_r{r}"), 4, vec![(s[start], 1.0)], Sense::Eq, 0.0);
        b.row(format!("eq5_r{r}"), 5, vec![(y[start], 1.0)], Sense::Eq, 1.0);
    }
    b.row("eq6".into(), 6, vec![(y[end], 1.0)], Sense::Eq, 1.0);
    for r in 0..nr {
        for c in 0..nb {
            let mut terms: Vec<(usize, f64)> = into(c).into_iter().map(|k| (x[r][k], 1.0)).collect();
            terms.extend(out_of(c).into_iter().map(|k| (x[r][k], -1.0)));
            b.row(format!("eq7_r{r}_n{c}"), 7, terms, Sense::Eq, 0.0);
        }
    }
    for c in 0..n {
        if c == end {
            continue;
        }
        let mut terms: Vec<(usize, f64)> = (0..nr)
            .flat_map(|r| out_of(c).into_iter().map(move |k| (r, k)))
            .map(|(r, k)| (x[r][k], 1.0))
            .collect();
        terms.push((y[c], -1.0));
        b.row(format!("eq8_n{c}"), 8, terms, Sense::Eq, 0.0);
    }
    for (k, &(i, j)) in edges.iter().enumerate() {
        let mut terms: Vec<(usize, f64)> = (0..nr).map(|r| (x[r][k], 1.0)).collect();
        terms.push((z[k], -(nr as f64)));
        b.row(format!("eq9_i{i}_j{j}"), 9, terms, Sense::Le, 0.0);
    }
    for (k, &(i, j)) in edges.iter().enumerate() {
        b.row(
            format!("eq10_i{i}_j{j}"),
            10,
            vec![(s[i], 1.0), (s[j], -1.0), (z[k], big_m)],
            Sense::Le,
            big_m - t_node(i) - travel(i, j),
        );
    }
    for rule in &g.precedence {
        let (lo, hi) = (g.index_of(rule.below).unwrap(), g.index_of(rule.above).unwrap());
        b.row(
            format!("eq11_{lo}_{hi}"),
            11,
            vec![(y[lo], 1.0), (y[hi], -1.0)],
            Sense::Ge,
            0.0,
        );
        b.row(
            format!("eq12_{lo}_{hi}"),
            12,
            vec![(s[hi], 1.0), (s[lo], -1.0), (y[lo], -t_node(lo))],
            Sense::Ge,
            0.0,
        );
    }
    for (p, &(a, c)) in pairs.iter().enumerate() {
        b.row(
            format!("eq13a_{a}_{c}"),
            13,
            vec![(s[c], 1.0), (s[a], -1.0), (y[a], -t_node(a)), (d[p], big_m)],
            Sense::Ge,
            0.0,
        );
        b.row(
            format!("eq13b_{a}_{c}"),
            13,
            vec![(s[a], 1.0), (s[c], -1.0), (y[c], -t_node(c)), (d[p], -big_m)],
            Sense::Ge,
            -big_m,
        );
    }

    Ok(MilpModel {
        variables: b.variables,
        objective,
        rows: b.rows,
        big_m,
        t_max,
        w,
        node_count: n,
        edges,
        robot_ids: inst.robot_ids(),
        brick_ids: inst.blueprint.bricks.iter().map(|b| b.id.0).collect(),
        concurrence_pairs: pairs,
        x,
        z,
        y,
        s,
        d,
        edge_index,
    })
}

fn push_term(line: &mut String, lines: &mut Vec<String>, coef: f64, name: &str, first: bool) {
    let sign = if coef < 0.0 { "-" } else { "+" };
    let mag = coef.abs();
    let term = if mag == 1.0 {
        name.to_string()
    } else {
        format!("{mag} {name}")
    };
    let piece = if first && sign == "+" {
        term
    } else {
        format!("{sign} {term}")
    };
    if line.len() + piece.len() + 1 > 78 {
        lines.push(std::mem::take(line));
        line.push_str("   ");
    } else if !line.trim().is_empty() && !line.ends_with(' ') {
        line.push(' ');
    }
    line.push_str(&piece);
}

fn linear_expr(head: String, terms: &[(usize, f64)], vars: &[Variable]) -> Vec<String> {
    let mut lines = Vec::new();
    let mut line = head;
    for (n, &(v, c)) in terms.iter().enumerate() {
        push_term(&mut line, &mut lines, c, &vars[v].name, n == 0);
    }
    lines.push(line);
    lines
}

impl MilpModel {
    pub fn binary_count(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn continuous_count(&self) -> usize {
        self.variables.len() - self.binary_count()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v]).sum()
    }

    /// Rows violated by `values`, plus variables outside their bounds.
    pub fn violated_rows(&self, values: &[f64]) -> Vec<String> {
        let mut out: Vec<String> = self
            .rows
            .iter()
            .filter(|r| !r.is_satisfied(values))
            .map(|r| r.name.clone())
            .collect();
        for (v, var) in self.variables.iter().enumerate() {
            let x = values[v];
            let integral = var.kind == VarKind::Continuous || (x - x.round()).abs() <= FEAS_TOL;
            if x < var.lower - FEAS_TOL || x > var.upper + FEAS_TOL || !integral {
                out.push(format!("bound:{}", var.name));
            }
        }
        out
    }

    /// LP text: Maximize / Subject To / Bounds / Binaries / End.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "\\ {} nodes, {} arcs, {} robots, M = {}, W = {}",
            self.node_count,
            self.edges.len(),
            self.robot_ids.len(),
            self.big_m,
            self.w
        );
        out.push_str("Maximize\n");
        for line in linear_expr(" obj: ".into(), &self.objective, &self.variables) {
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str("Subject To\n");
        for row in &self.rows {
            let mut lines = linear_expr(format!(" {}: ", row.name), &row.terms, &self.variables);
            let last = lines.last_mut().unwrap();
            let _ = write!(last, " {} {}", row.sense.symbol(), row.rhs);
            for line in lines {
                out.push_str(&line);
                out.push('\n');
            }
        }
        out.push_str("Bounds\n");
        for v in self.variables.iter().filter(|v| v.kind == VarKind::Continuous) {
            let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
        }
        out.push_str("Binaries\n");
        let mut line = String::from(" ");
        for v in self.variables.iter().filter(|v| v.kind == VarKind::Binary) {
            if line.len() + v.name.len() + 1 > 78 {
                out.push_str(line.trim_end());
                out.push('\n');
                line = String::from(" ");
            }
            line.push_str(&v.name);
            line.push(' ');
        }
        if !line.trim().is_empty() {
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out.push_str("End\n");
        out
    }

    /// JSON map from node indices to brick and robot ids.
    pub fn sidecar_json(&self) -> String {
        #[derive(Serialize)]
        struct Node {
            node: usize,
            kind: &'static str,
            #[serde(skip_serializing_if = "Option::is_none")]
            brick: Option<u32>,
            #[serde(skip_serializing_if = "Option::is_none")]
            robot: Option<usize>,
        }
        #[derive(Serialize)]
        struct Sidecar<'a> {
            t_max: f64,
            big_m: f64,
            w: f64,
            robots: &'a [usize],
            nodes: Vec<Node>,
            variable_patterns: [&'static str; 5],
        }
        let nb = self.brick_ids.len();
        let nodes = (0..self.node_count)
            .map(|i| {
                if i < nb {
                    Node {
                        node: i,
                        kind: "brick",
                        brick: Some(self.brick_ids[i]),
                        robot: None,
                    }
                } else if i < self.node_count - 1 {
                    Node {
                        node: i,
                        kind: "start",
                        brick: None,
                        robot: Some(self.robot_ids[i - nb]),
                    }
                } else {
                    Node {
                        node: i,
                        kind: "end",
                        brick: None,
                        robot: None,
                    }
                }
            })
            .collect();
        let doc = Sidecar {
            t_max: self.t_max,
            big_m: self.big_m,
            w: self.w,
            robots: &self.robot_ids,
            nodes,
            variable_patterns: [
                "x_r{robot_index}_i{node}_j{node}: robot uses arc",
                "z_{node}_{node}: arc used by any robot",
                "y_{node}: node visited",
                "s_{node}: visit time in seconds",
                "d_{node}_{node}: order of a close pair (0: first listed goes first)",
            ],
        };
        serde_json::to_string_pretty(&doc).expect("sidecar serialization cannot fail")
    }

    /// Variable values that encode `plan`. Unbuilt bricks get `s = T_max`.
    pub fn plan_assignment(&self, inst: &Instance, plan: &Plan) -> Result<Vec<f64>> {
        let g = &inst.graph;
        let nb = g.brick_count;
        let end = g.end_node;
        let mut v = vec![0.0; self.variables.len()];
        for i in 0..nb {
            v[self.s[i]] = self.t_max;
        }
        v[self.y[end]] = 1.0;
        v[self.s[end]] = plan.completion_time;
        for (r, robot) in inst.robots.iter().enumerate() {
            let start = g.start_nodes[r];
            v[self.y[start]] = 1.0;
            let mut route: Vec<(f64, usize)> = plan
                .placements
                .iter()
                .filter(|p| p.robot == robot.id)
                .map(|p| {
                    g.index_of(p.brick)
                        .map(|b| (p.start, b))
                        .ok_or_else(|| Error::Export(format!("brick {} is not in the wall", p.brick)))
                })
                .collect::<Result<_>>()?;
            route.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut prev = start;
            for &(t, b) in &route {
                v[self.y[b]] = 1.0;
                v[self.s[b]] = t;
                self.use_arc(&mut v, r, prev, b)?;
                prev = b;
            }
            self.use_arc(&mut v, r, prev, end)?;
        }
        for (p, &(a, c)) in self.concurrence_pairs.iter().enumerate() {
            let a_first = v[self.y[a]] == 0.0 && v[self.y[c]] == 0.0
                || v[self.y[a]] == 1.0 && v[self.s[c]] >= v[self.s[a]] + inst.placement_time(0, a) - FEAS_TOL;
            v[self.d[p]] = if a_first { 0.0 } else { 1.0 };
        }
        Ok(v)
    }

    fn use_arc(&self, v: &mut [f64], r: usize, i: usize, j: usize) -> Result<()> {
        let k = *self
            .edge_index
            .get(&(i, j))
            .ok_or_else(|| Error::Export(format!("arc {i} -> {j} is not part of the model")))?;
        v[self.x[r][k]] = 1.0;
        v[self.z[k]] = 1.0;
        Ok(())
    }
}

pub fn write_lp(model: &MilpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model.to_lp_string()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::ConcurrenceThreshold;
    use crate::engine::{construct, EngineConfig};
    use crate::robot::{uav_team, Robot};
    use crate::wall::{generate_wall, Bond, BrickDimensions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn instance(length: f64, height: f64, robots: Vec<Robot>) -> Instance {
        let w = generate_wall(length, height, BrickDimensions::default(), Bond::StretcherRunning)
            .unwrap();
        Instance::new(w, robots, ConcurrenceThreshold::default()).unwrap()
    }

    fn opts(t_max: f64) -> MilpOptions {
        MilpOptions {
            t_max: Some(t_max),
            ..MilpOptions::default()
        }
    }

    #[test]
    fn one_brick_model() {
        let inst = instance(0.6, 0.2, uav_team(1));
        let m = build_milp(&inst, &opts(100.0)).unwrap();
        assert_eq!(m.node_count, 3);
        assert_eq!(m.edges, vec![(1, 0), (1, 2), (0, 2)]);
        let e = m.edges.len();
        assert_eq!(m.binary_count(), e + e + 3);
        assert_eq!(m.continuous_count(), 3);
        let lp = m.to_lp_string();
        for i in 0..3 {
            assert!(lp.contains(&format!("y_{i}")));
        }
        assert!(!lp.contains("y_3"));

        let plan = construct(&inst, EngineConfig::default(), ChaCha8Rng::seed_from_u64(0)).unwrap();
        let v = m.plan_assignment(&inst, &plan).unwrap();
        assert!(m.violated_rows(&v).is_empty());
        assert!((m.objective_value(&v) - (2.0 - 40.0 / 100.0)).abs() < 1e-12);
    }

    #[test]
    fn needs_finite_horizon_and_identical_robots() {
        let inst = instance(1.2, 0.4, uav_team(2));
        assert!(matches!(build_milp(&inst, &MilpOptions::default()), Err(Error::Export(_))));
        let mixed = instance(1.2, 0.4, vec![Robot::uav(0), Robot::ugv(1)]);
        assert!(matches!(build_milp(&mixed, &opts(400.0)), Err(Error::Export(_))));
    }

    #[test]
    fn disjunction_rows_enumerate() {
        // For a close pair with both bricks built, exactly one delta value
        // admits each ordering.
        let inst = instance(1.2, 0.2, uav_team(2));
        let m = build_milp(&inst, &opts(400.0)).unwrap();
        let a_row = m.rows.iter().find(|r| r.name == "eq13a_0_1").unwrap();
        let b_row = m.rows.iter().find(|r| r.name == "eq13b_0_1").unwrap();
        let mut v = vec![0.0; m.variables.len()];
        v[m.y[0]] = 1.0;
        v[m.y[1]] = 1.0;
        for (s0, s1, ok_delta) in [(0.0, 40.0, 0.0), (40.0, 0.0, 1.0), (0.0, 20.0, -1.0)] {
            v[m.s[0]] = s0;
            v[m.s[1]] = s1;
            for delta in [0.0, 1.0] {
                v[m.d[0]] = delta;
                let ok = a_row.is_satisfied(&v) && b_row.is_satisfied(&v);
                assert_eq!(ok, delta == ok_delta, "s=({s0},{s1}) delta={delta}");
            }
        }
    }

    #[test]
    fn deterministic_text() {
        let inst = instance(2.4, 0.8, uav_team(3));
        let a = build_milp(&inst, &opts(600.0)).unwrap().to_lp_string();
        let b = build_milp(&inst, &opts(600.0)).unwrap().to_lp_string();
        assert_eq!(a, b);
        assert!(a.lines().all(|l| l.len() <= 255));
        assert!(a.starts_with("\\"));
        assert!(a.ends_with("End\n"));
    }

    #[test]
    fn horizon_weight_switch() {
        let inst = instance(0.6, 0.2, uav_team(1));
        let m = build_milp(
            &inst,
            &MilpOptions {
                t_max: Some(50.0),
                weight: TimeWeight::Horizon,
                ..MilpOptions::default()
            },
        )
        .unwrap();
        assert_eq!(m.w, 50.0);
    }
}
