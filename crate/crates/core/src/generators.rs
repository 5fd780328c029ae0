//! Deterministic graph families: lattice boxes, pre-fractals and trees.
//!
//! Vertex ids follow construction order so that every emitted file is
//! reproducible byte-for-byte. Each generator also marks the host frontier,
//! the vertices whose neighbourhood is cut off compared to the infinite graph
//! the finite box approximates.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::graph::{Fixture, Vertex, VertexSet, WeightedGraph};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Lattice { dim: u32, side: usize },
    Sierpinski { level: u32 },
    Vicsek { level: u32 },
    BinaryTree { depth: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    Unit,
    /// Edge weight `lambda^k` where `k` is the hop distance from the root to the
    /// nearer endpoint.
    Radial {
        lambda: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub weights: WeightRule,
}

pub fn generate(spec: &FamilySpec) -> Result<Fixture> {
    let fx = match spec.family {
        Family::Lattice { dim, side } => lattice_box(dim, side)?,
        Family::Sierpinski { level } => sierpinski_gasket(level)?,
        Family::Vicsek { level } => vicsek_tree(level)?,
        Family::BinaryTree { depth } => binary_tree(depth)?,
    };
    match spec.weights {
        WeightRule::Unit => Ok(fx),
        WeightRule::Radial { lambda } => radial_weights(fx, lambda),
    }
}

fn finish(
    n: usize,
    edges: Vec<(Vertex, Vertex, f64)>,
    frontier: Vec<Vertex>,
    center: Vertex,
    label: String,
) -> Result<Fixture> {
    let graph = WeightedGraph::new(n, edges)?.with_frontier(VertexSet::from_unsorted(frontier))?;
    Ok(Fixture {
        graph,
        center: Some(center),
        label,
    })
}

/// `side^dim` box of `Z^dim` with unit nearest-neighbour edges; returns the center.
pub fn lattice_box(dim: u32, side: usize) -> Result<Fixture> {
    if !(1..=3).contains(&dim) {
        return Err(LabError::invalid(format!(
            "lattice dimension must be 1, 2 or 3, got {dim}"
        )));
    }
    if side < 3 || side.is_multiple_of(2) {
        return Err(LabError::invalid(format!(
            "lattice side must be odd and at least 3, got {side}"
        )));
    }
    let d = dim as usize;
    let n = side.pow(dim);
    let stride: Vec<usize> = (0..d).map(|k| side.pow(k as u32)).collect();
    let mut edges = Vec::with_capacity(d * n);
    let mut frontier = Vec::new();
    for id in 0..n {
        let mut on_face = false;
        for k in 0..d {
            let c = (id / stride[k]) % side;
            if c + 1 < side {
                edges.push((id, id + stride[k], 1.0));
            }
            on_face |= c == 0 || c + 1 == side;
        }
        if on_face {
            frontier.push(id);
        }
    }
    let half = (side - 1) / 2;
    let center = stride.iter().map(|s| half * s).sum();
    finish(n, edges, frontier, center, format!("lattice d={dim} L={side}"))
}

/// Level-`k` Sierpinski gasket graph. Vertex 0 is the corner the box is grown
/// from; the two other corners form the frontier.
pub fn sierpinski_gasket(level: u32) -> Result<Fixture> {
    if !(1..=8).contains(&level) {
        return Err(LabError::invalid(format!("gasket level must be in 1..=8, got {level}")));
    }
    let side = 1usize << level;
    let mut ids: HashMap<(usize, usize), Vertex> = HashMap::new();
    let mut edges = Vec::new();
    let id_of = |p: (usize, usize), ids: &mut HashMap<(usize, usize), Vertex>| {
        let next = ids.len();
        *ids.entry(p).or_insert(next)
    };
    // Unit up-triangles sit where Pascal's triangle is odd.
    for i in 0..side {
        for j in 0..side - i {
            if i & j != 0 {
                continue;
            }
            let a = id_of((i, j), &mut ids);
            let b = id_of((i + 1, j), &mut ids);
            let c = id_of((i, j + 1), &mut ids);
            edges.push((a, b, 1.0));
            edges.push((a, c, 1.0));
            edges.push((b, c, 1.0));
        }
    }
    let frontier = vec![ids[&(side, 0)], ids[&(0, side)]];
    let corner = ids[&(0, 0)];
    finish(ids.len(), edges, frontier, corner, format!("sierpinski level={level}"))
}

fn in_vicsek(mut i: usize, mut j: usize, level: u32) -> bool {
    for _ in 0..level {
        let (a, b) = (i % 3, j % 3);
        if a != 1 && b != 1 {
            return false;
        }
        i /= 3;
        j /= 3;
    }
    true
}

/// Plus-shaped Vicsek tree on the `3^k x 3^k` pixel grid; returns the hub.
/// The four outermost arm tips form the frontier.
pub fn vicsek_tree(level: u32) -> Result<Fixture> {
    if !(1..=7).contains(&level) {
        return Err(LabError::invalid(format!("vicsek level must be in 1..=7, got {level}")));
    }
    let side = 3usize.pow(level);
    let mut ids: HashMap<(usize, usize), Vertex> = HashMap::new();
    for i in 0..side {
        for j in 0..side {
            if in_vicsek(i, j, level) {
                let next = ids.len();
                ids.insert((i, j), next);
            }
        }
    }
    let mut edges = Vec::new();
    for i in 0..side {
        for j in 0..side {
            if let Some(&a) = ids.get(&(i, j)) {
                if let Some(&b) = ids.get(&(i + 1, j)) {
                    edges.push((a, b, 1.0));
                }
                if let Some(&b) = ids.get(&(i, j + 1)) {
                    edges.push((a, b, 1.0));
                }
            }
        }
    }
    let h = (side - 1) / 2;
    let frontier = vec![ids[&(0, h)], ids[&(side - 1, h)], ids[&(h, 0)], ids[&(h, side - 1)]];
    finish(
        ids.len(),
        edges,
        frontier,
        ids[&(h, h)],
        format!("vicsek level={level}"),
    )
}

/// Complete binary tree of the given depth in heap order; returns the root. Leaves
/// form the frontier.
pub fn binary_tree(depth: u32) -> Result<Fixture> {
    if !(1..=20).contains(&depth) {
        return Err(LabError::invalid(format!("tree depth must be in 1..=20, got {depth}")));
    }
    let n = (1usize << (depth + 1)) - 1;
    let edges = (1..n).map(|v| ((v - 1) / 2, v, 1.0)).collect();
    let first_leaf = (1usize << depth) - 1;
    finish(
        n,
        edges,
        (first_leaf..n).collect(),
        0,
        format!("binary tree depth={depth}"),
    )
}

fn radial_weights(fx: Fixture, lambda: f64) -> Result<Fixture> {
    if !(0.25..=4.0).contains(&lambda) {
        return Err(LabError::invalid(format!(
            "radial lambda must lie in [0.25, 4], got {lambda}"
        )));
    }
    let root = fx.center.unwrap_or(0);
    let dist = fx.graph.distances(root)?;
    let edges = fx
        .graph
        .edges()
        .iter()
        .map(|&(u, v, _)| (u, v, lambda.powi(dist[u].min(dist[v]) as i32)))
        .collect();
    let graph = WeightedGraph::new(fx.graph.vertex_count(), edges)?.with_frontier(fx.graph.frontier().clone())?;
    Ok(Fixture {
        graph,
        center: fx.center,
        label: format!("{} radial={lambda}", fx.label),
    })
}
