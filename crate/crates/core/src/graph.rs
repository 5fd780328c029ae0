//! Weighted graphs with the hop metric: balls, spheres, annuli, boundaries
//! and the contraction of a vertex set into a single vertex.
//!
//! Edge weights are conductances and the vertex measure is
//! `mu(x) = sum_y mu_xy`. Distances ignore weights entirely.

use std::collections::{BTreeMap, VecDeque};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub type Vertex = usize;

/// Sentinel for "no vertex at this distance" (never produced on connected graphs).
pub const UNREACHABLE: u32 = u32::MAX;

/// Sorted, duplicate-free list of vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<Vertex>);

impl VertexSet {
    pub fn from_unsorted(mut ids: Vec<Vertex>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        VertexSet(ids)
    }

    /// Builds a set and checks every id against `n`.
    pub fn new(n: usize, ids: Vec<Vertex>) -> Result<Self> {
        if let Some(&bad) = ids.iter().find(|&&v| v >= n) {
            return Err(LabError::InvalidVertex { vertex: bad, n });
        }
        Ok(Self::from_unsorted(ids))
    }

    pub fn singleton(v: Vertex) -> Self {
        VertexSet(vec![v])
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.0.iter().copied()
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|&v| !other.contains(v)).collect())
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut all = self.0.clone();
        all.extend_from_slice(&other.0);
        Self::from_unsorted(all)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    /// Dense membership mask of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.0 {
            m[v] = true;
        }
        m
    }
}

impl FromIterator<Vertex> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        Self::from_unsorted(iter.into_iter().collect())
    }
}

/// Open ball `B(center, radius) = { y : d(center, y) < radius }`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: Vertex,
    pub radius: u32,
}

impl BallSpec {
    pub fn new(center: Vertex, radius: u32) -> Self {
        BallSpec { center, radius }
    }
}

/// Annulus `B(center, outer) \ B(center, inner)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnnulusSpec {
    pub center: Vertex,
    pub inner: u32,
    pub outer: u32,
}

impl AnnulusSpec {
    pub fn new(center: Vertex, inner: u32, outer: u32) -> Result<Self> {
        if outer <= inner {
            return Err(LabError::invalid(format!(
                "annulus needs outer > inner, got inner={inner} outer={outer}"
            )));
        }
        Ok(AnnulusSpec { center, inner, outer })
    }
}

/// Per-vertex reach data: distance to the host frontier and eccentricity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Reach {
    /// Hop distance to the nearest frontier vertex, `UNREACHABLE` if the host has none.
    pub frontier: u32,
    pub eccentricity: u32,
}

impl Reach {
    /// Largest radius `r` for which `B(x, r)` is a proper subset free of frontier vertices.
    pub fn max_clean_radius(&self) -> u32 {
        self.frontier.min(self.eccentricity)
    }
}

/// Immutable symmetric weighted graph.
///
/// The optional frontier marks vertices whose neighbourhood was cut off when the
/// finite host was carved out of a larger (conceptually infinite) graph. Balls that
/// contain a frontier vertex do not see the true walk and are rejected by margin checks.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(Vertex, Vertex, f64)>,
    offsets: Vec<usize>,
    nbrs: Vec<Vertex>,
    wts: Vec<f64>,
    mu: Vec<f64>,
    frontier: VertexSet,
    dist_cache: Vec<OnceLock<Arc<[u32]>>>,
    reach_cache: Vec<OnceLock<Reach>>,
}

impl WeightedGraph {
    /// Builds a graph from an undirected edge list. Each unordered pair may appear once;
    /// self-loops are allowed and counted once in `mu`.
    pub fn new(n: usize, edges: Vec<(Vertex, Vertex, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(LabError::invalid("graph needs at least one vertex"));
        }
        let mut canon = Vec::with_capacity(edges.len());
        for (u, v, w) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(LabError::InvalidVertex { vertex: x, n });
                }
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(LabError::invalid(format!(
                    "edge ({u},{v}) has non-positive or non-finite weight {w}"
                )));
            }
            canon.push((u.min(v), u.max(v), w));
        }
        canon.sort_by_key(|e| (e.0, e.1));
        if let Some(dup) = canon.windows(2).find(|p| (p[0].0, p[0].1) == (p[1].0, p[1].1)) {
            return Err(LabError::invalid(format!(
                "edge ({},{}) listed more than once",
                dup[0].0, dup[0].1
            )));
        }

        let mut degree = vec![0usize; n];
        for &(u, v, _) in &canon {
            degree[u] += 1;
            if u != v {
                degree[v] += 1;
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut nbrs = vec![0usize; offsets[n]];
        let mut wts = vec![0.0f64; offsets[n]];
        for &(u, v, w) in &canon {
            nbrs[fill[u]] = v;
            wts[fill[u]] = w;
            fill[u] += 1;
            if u != v {
                nbrs[fill[v]] = u;
                wts[fill[v]] = w;
                fill[v] += 1;
            }
        }
        let mu = (0..n).map(|x| wts[offsets[x]..offsets[x + 1]].iter().sum()).collect();

        let g = WeightedGraph {
            n,
            edges: canon,
            offsets,
            nbrs,
            wts,
            mu,
            frontier: VertexSet::default(),
            dist_cache: (0..n).map(|_| OnceLock::new()).collect(),
            reach_cache: (0..n).map(|_| OnceLock::new()).collect(),
        };
        g.ensure_connected()?;
        Ok(g)
    }

    /// Attaches the host frontier (vertices truncated from a larger graph).
    pub fn with_frontier(mut self, frontier: VertexSet) -> Result<Self> {
        if let Some(bad) = frontier.iter().find(|&v| v >= self.n) {
            return Err(LabError::InvalidVertex { vertex: bad, n: self.n });
        }
        self.frontier = frontier;
        self.reach_cache = (0..self.n).map(|_| OnceLock::new()).collect();
        Ok(self)
    }

    fn ensure_connected(&self) -> Result<()> {
        let d = self.bfs(0, UNREACHABLE);
        match d.iter().position(|&x| x == UNREACHABLE) {
            Some(v) => Err(LabError::Disconnected { unreachable: v }),
            None => Ok(()),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list, sorted by `(min, max)` endpoint.
    pub fn edges(&self) -> &[(Vertex, Vertex, f64)] {
        &self.edges
    }

    pub fn frontier(&self) -> &VertexSet {
        &self.frontier
    }

    pub fn mu(&self, x: Vertex) -> f64 {
        self.mu[x]
    }

    pub fn mu_all(&self) -> &[f64] {
        &self.mu
    }

    pub fn total_measure(&self) -> f64 {
        self.mu.iter().sum()
    }

    pub fn measure(&self, set: &VertexSet) -> f64 {
        set.iter().map(|v| self.mu[v]).sum()
    }

    /// Neighbours of `x` with the weight as seen from `x`'s row.
    pub fn neighbors(&self, x: Vertex) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        let r = self.offsets[x]..self.offsets[x + 1];
        self.nbrs[r.clone()].iter().copied().zip(self.wts[r].iter().copied())
    }

    pub fn degree(&self, x: Vertex) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    /// Weight `mu_xy` as stored in `x`'s row, zero if not adjacent.
    pub fn weight(&self, x: Vertex, y: Vertex) -> f64 {
        self.neighbors(x).find(|&(z, _)| z == y).map_or(0.0, |(_, w)| w)
    }

    /// Transition probability `P(x, y) = mu_xy / mu(x)`.
    pub fn transition(&self, x: Vertex, y: Vertex) -> f64 {
        self.weight(x, y) / self.mu[x]
    }

    pub fn check_vertex(&self, x: Vertex) -> Result<()> {
        if x < self.n {
            Ok(())
        } else {
            Err(LabError::InvalidVertex { vertex: x, n: self.n })
        }
    }

    fn check_set(&self, set: &VertexSet) -> Result<()> {
        match set.iter().find(|&v| v >= self.n) {
            Some(v) => Err(LabError::InvalidVertex { vertex: v, n: self.n }),
            None => Ok(()),
        }
    }

    fn bfs(&self, x: Vertex, limit: u32) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.n];
        dist[x] = 0;
        let mut queue = VecDeque::from([x]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            if du + 1 >= limit && limit != UNREACHABLE {
                continue;
            }
            for (v, _) in self.neighbors(u) {
                if dist[v] == UNREACHABLE {
                    dist[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Hop distances from `x` to every vertex. Cached per center.
    pub fn distances(&self, x: Vertex) -> Result<Arc<[u32]>> {
        self.check_vertex(x)?;
        Ok(self.dist_cache[x]
            .get_or_init(|| Arc::from(self.bfs(x, UNREACHABLE)))
            .clone())
    }

    /// Vertices of `B(x, radius)` paired with their distance to `x`, in BFS order.
    pub fn ball_layers(&self, x: Vertex, radius: u32) -> Result<Vec<(Vertex, u32)>> {
        self.check_vertex(x)?;
        if radius == 0 {
            return Ok(Vec::new());
        }
        let mut seen = std::collections::HashMap::new();
        seen.insert(x, 0u32);
        let mut out = vec![(x, 0)];
        let mut head = 0;
        while head < out.len() {
            let (u, du) = out[head];
            head += 1;
            if du + 1 >= radius {
                continue;
            }
            for (v, _) in self.neighbors(u) {
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(v) {
                    e.insert(du + 1);
                    out.push((v, du + 1));
                }
            }
        }
        Ok(out)
    }

    pub fn ball(&self, spec: BallSpec) -> Result<VertexSet> {
        Ok(self
            .ball_layers(spec.center, spec.radius)?
            .into_iter()
            .map(|(v, _)| v)
            .collect())
    }

    /// `S(x, r) = { y : d(x, y) = r }`.
    pub fn sphere(&self, x: Vertex, radius: u32) -> Result<VertexSet> {
        Ok(self
            .ball_layers(x, radius + 1)?
            .into_iter()
            .filter(|&(_, d)| d == radius)
            .map(|(v, _)| v)
            .collect())
    }

    pub fn annulus(&self, spec: AnnulusSpec) -> Result<VertexSet> {
        Ok(self
            .ball_layers(spec.center, spec.outer)?
            .into_iter()
            .filter(|&(_, d)| d >= spec.inner)
            .map(|(v, _)| v)
            .collect())
    }

    /// `V(x, r) = mu(B(x, r))`.
    pub fn volume(&self, spec: BallSpec) -> Result<f64> {
        Ok(self
            .ball_layers(spec.center, spec.radius)?
            .into_iter()
            .map(|(v, _)| self.mu[v])
            .sum())
    }

    /// `v(x, r, R) = V(x, R) - V(x, r)`.
    pub fn annulus_volume(&self, spec: AnnulusSpec) -> Result<f64> {
        Ok(self
            .ball_layers(spec.center, spec.outer)?
            .into_iter()
            .filter(|&(_, d)| d >= spec.inner)
            .map(|(v, _)| self.mu[v])
            .sum())
    }

    /// `A` together with all neighbours of `A`.
    pub fn closure(&self, set: &VertexSet) -> Result<VertexSet> {
        self.check_set(set)?;
        let mut all: Vec<Vertex> = set.iter().collect();
        for v in set.iter() {
            all.extend(self.neighbors(v).map(|(y, _)| y));
        }
        Ok(VertexSet::from_unsorted(all))
    }

    /// Exterior vertex boundary `closure(A) \ A`.
    pub fn boundary(&self, set: &VertexSet) -> Result<VertexSet> {
        Ok(self.closure(set)?.difference(set))
    }

    /// Hop distance from the set `A` to every vertex (multi-source BFS).
    pub fn set_distances(&self, set: &VertexSet) -> Result<Vec<u32>> {
        self.check_set(set)?;
        let mut dist = vec![UNREACHABLE; self.n];
        let mut queue = VecDeque::new();
        for v in set.iter() {
            dist[v] = 0;
            queue.push_back(v);
        }
        while let Some(u) = queue.pop_front() {
            for (v, _) in self.neighbors(u) {
                if dist[v] == UNREACHABLE {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    /// Distance to the frontier and eccentricity of `x`. Cached per vertex.
    pub fn reach(&self, x: Vertex) -> Result<Reach> {
        self.check_vertex(x)?;
        Ok(*self.reach_cache[x].get_or_init(|| {
            let d = self.bfs(x, UNREACHABLE);
            let eccentricity = d.iter().copied().max().unwrap_or(0);
            let frontier = self.frontier.iter().map(|f| d[f]).min().unwrap_or(UNREACHABLE);
            Reach { frontier, eccentricity }
        }))
    }

    /// Checks that `B(x, radius)` is a proper subset of the host with no frontier vertex.
    pub fn check_clean_ball(&self, x: Vertex, radius: u32) -> Result<()> {
        let reach = self.reach(x)?;
        if radius > reach.frontier {
            return Err(LabError::Margin {
                center: x,
                radius,
                reason: format!("frontier at distance {}", reach.frontier),
            });
        }
        if radius > reach.eccentricity {
            return Err(LabError::Margin {
                center: x,
                radius,
                reason: format!("ball covers the host (eccentricity {})", reach.eccentricity),
            });
        }
        Ok(())
    }

    /// Minimum transition probability over directed adjacent pairs.
    pub fn check_p0(&self) -> P0Report {
        let mut best = (f64::INFINITY, 0, 0);
        let mut max_degree = 0;
        for x in 0..self.n {
            max_degree = max_degree.max(self.degree(x));
            for (y, w) in self.neighbors(x) {
                let p = w / self.mu[x];
                if p < best.0 {
                    best = (p, x, y);
                }
            }
        }
        let (p0, x, y) = best;
        P0Report {
            p0,
            witness: (x, y),
            max_degree,
            degree_bound_holds: (max_degree as f64) <= 1.0 / p0 * (1.0 + 1e-12),
        }
    }

    /// Contracts `A` into one new vertex `a` (the last id), summing crossing weights.
    pub fn shrink(&self, set: &VertexSet) -> Result<Shrunk> {
        self.check_set(set)?;
        if set.is_empty() {
            return Err(LabError::invalid("cannot shrink an empty set"));
        }
        if set.len() == self.n {
            return Err(LabError::invalid("cannot shrink the whole vertex set"));
        }
        let inside = set.mask(self.n);
        let mut map = vec![None; self.n];
        let mut next = 0;
        for v in 0..self.n {
            if !inside[v] {
                map[v] = Some(next);
                next += 1;
            }
        }
        let a = next;
        let mut edges = Vec::new();
        let mut to_a: BTreeMap<Vertex, f64> = BTreeMap::new();
        for &(u, v, w) in &self.edges {
            match (inside[u], inside[v]) {
                (false, false) => edges.push((map[u].unwrap(), map[v].unwrap(), w)),
                (true, false) => *to_a.entry(map[v].unwrap()).or_default() += w,
                (false, true) => *to_a.entry(map[u].unwrap()).or_default() += w,
                (true, true) => {}
            }
        }
        edges.extend(to_a.into_iter().map(|(x, w)| (x, a, w)));
        let mut frontier: Vec<Vertex> = self.frontier.iter().filter_map(|f| map[f]).collect();
        if self.frontier.iter().any(|f| inside[f]) {
            frontier.push(a);
        }
        let graph = WeightedGraph::new(a + 1, edges)?.with_frontier(VertexSet::from_unsorted(frontier))?;
        Ok(Shrunk { graph, a, map })
    }

    /// Test hook: rescales `mu_uv` in `u`'s row only, breaking symmetry.
    #[doc(hidden)]
    pub fn inject_asymmetry(&mut self, u: Vertex, v: Vertex, factor: f64) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let r = self.offsets[u]..self.offsets[u + 1];
        let slot = self.nbrs[r.clone()]
            .iter()
            .position(|&y| y == v)
            .ok_or_else(|| LabError::invalid(format!("{u} and {v} are not adjacent")))?;
        self.wts[r.start + slot] *= factor;
        self.mu[u] = self.wts[r].iter().sum();
        Ok(())
    }

    /// Largest relative mismatch of `mu(x)P(x,y)` against `mu(y)P(y,x)`, with its pair.
    pub fn reversibility_defect(&self) -> (f64, (Vertex, Vertex)) {
        let mut worst = (0.0, (0, 0));
        for x in 0..self.n {
            for (y, wxy) in self.neighbors(x) {
                let flow_xy = self.mu[x] * (wxy / self.mu[x]);
                let flow_yx = self.mu[y] * self.transition(y, x);
                let rel = (flow_xy - flow_yx).abs() / flow_xy.abs().max(flow_yx.abs());
                if rel > worst.0 {
                    worst = (rel, (x, y));
                }
            }
        }
        worst
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct P0Report {
    pub p0: f64,
    pub witness: (Vertex, Vertex),
    pub max_degree: usize,
    /// `|{y : y ~ x}| <= 1/p0` for every vertex.
    pub degree_bound_holds: bool,
}

/// Result of [`WeightedGraph::shrink`]: `map[v]` is the new id of an untouched vertex.
#[derive(Clone, Debug)]
pub struct Shrunk {
    pub graph: WeightedGraph,
    pub a: Vertex,
    pub map: Vec<Option<Vertex>>,
}

/// A graph together with its distinguished vertex (lattice center, gasket corner, ...).
#[derive(Clone, Debug)]
pub struct Fixture {
    pub graph: WeightedGraph,
    pub center: Option<Vertex>,
    pub label: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> WeightedGraph {
        WeightedGraph::new(n, (0..n - 1).map(|i| (i, i + 1, 1.0)).collect()).unwrap()
    }

    fn grid(side: usize) -> WeightedGraph {
        let id = |i: usize, j: usize| i * side + j;
        let mut e = Vec::new();
        for i in 0..side {
            for j in 0..side {
                if i + 1 < side {
                    e.push((id(i, j), id(i + 1, j), 1.0));
                }
                if j + 1 < side {
                    e.push((id(i, j), id(i, j + 1), 1.0));
                }
            }
        }
        WeightedGraph::new(side * side, e).unwrap()
    }

    #[test]
    fn path_distances() {
        let g = path(5);
        assert_eq!(&*g.distances(0).unwrap(), &[0, 1, 2, 3, 4]);
        assert_eq!(g.distances(3).unwrap()[3], 0);
        assert!(g.distances(5).is_err());
    }

    #[test]
    fn grid_center_eccentricity() {
        let g = grid(5);
        assert_eq!(g.distances(12).unwrap().iter().max(), Some(&4));
    }

    #[test]
    fn open_ball_on_path() {
        let g = path(5);
        let b = g.ball(BallSpec::new(2, 2)).unwrap();
        assert_eq!(b.as_slice(), &[1, 2, 3]);
        assert_eq!(g.volume(BallSpec::new(2, 2)).unwrap(), 6.0);
        assert_eq!(g.ball(BallSpec::new(4, 1)).unwrap().as_slice(), &[4]);
        assert!(g.ball(BallSpec::new(4, 0)).unwrap().is_empty());
    }

    #[test]
    fn boundary_and_closure() {
        let g = path(5);
        assert_eq!(g.boundary(&VertexSet::singleton(2)).unwrap().as_slice(), &[1, 3]);
        let all: VertexSet = (0..5).collect();
        assert!(g.boundary(&all).unwrap().is_empty());

        let z = grid(9);
        let ball = z.ball(BallSpec::new(40, 3)).unwrap();
        assert_eq!(z.boundary(&ball).unwrap(), z.sphere(40, 3).unwrap());
    }

    #[test]
    fn volume_partition_and_monotone() {
        let z = grid(7);
        let x = 10;
        let mut prev = 0.0;
        for r in 0..14 {
            let v = z.volume(BallSpec::new(x, r)).unwrap();
            let shells: f64 = (0..r).map(|k| z.measure(&z.sphere(x, k).unwrap())).sum();
            assert!((v - shells).abs() < 1e-12);
            assert!(v >= prev);
            prev = v;
        }
        assert_eq!(prev, z.total_measure());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            WeightedGraph::new(3, vec![(0, 1, 1.0)]),
            Err(LabError::Disconnected { unreachable: 2 })
        ));
        assert!(WeightedGraph::new(2, vec![(0, 1, 0.0)]).is_err());
        assert!(WeightedGraph::new(2, vec![(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(WeightedGraph::new(2, vec![(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn self_loop_counted_once() {
        let g = WeightedGraph::new(2, vec![(0, 0, 3.0), (0, 1, 1.0)]).unwrap();
        assert_eq!(g.mu(0), 4.0);
        assert_eq!(g.transition(0, 0), 0.75);
    }

    #[test]
    fn p0_values() {
        assert_eq!(path(3).check_p0().p0, 0.5);
        assert_eq!(path(3).check_p0().witness.0, 1);
        let cycle = WeightedGraph::new(4, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        let r = cycle.check_p0();
        assert_eq!(r.p0, 0.5);
        assert!(r.degree_bound_holds);
    }

    #[test]
    fn shrink_sums_crossing_weights() {
        let g = path(3);
        let s = g.shrink(&VertexSet::from_unsorted(vec![0, 2])).unwrap();
        assert_eq!(s.graph.vertex_count(), 2);
        assert_eq!(s.graph.edges(), &[(0, 1, 2.0)]);
        assert_eq!(s.a, 1);
        assert_eq!(s.graph.mu(s.a), 2.0);

        assert!(g.shrink(&VertexSet::default()).is_err());
        assert!(g.shrink(&(0..3).collect()).is_err());
    }

    #[test]
    fn shrink_singleton_is_relabeling() {
        let z = grid(3);
        let s = z.shrink(&VertexSet::singleton(4)).unwrap();
        assert_eq!(s.graph.edge_count(), z.edge_count());
        let mut degrees: Vec<usize> = (0..9).map(|v| z.degree(v)).collect();
        let mut shrunk: Vec<usize> = (0..9).map(|v| s.graph.degree(v)).collect();
        degrees.sort();
        shrunk.sort();
        assert_eq!(degrees, shrunk);
        assert_eq!(s.graph.degree(s.a), 4);
    }

    #[test]
    fn asymmetry_hook_breaks_reversibility() {
        let mut g = path(4);
        assert_eq!(g.reversibility_defect().0, 0.0);
        g.inject_asymmetry(1, 2, 3.0).unwrap();
        let (defect, pair) = g.reversibility_defect();
        assert!(defect > 0.5);
        assert!(pair == (1, 2) || pair == (2, 1));
    }

    #[test]
    fn margin_checks() {
        let g = path(9).with_frontier(VertexSet::from_unsorted(vec![0, 8])).unwrap();
        assert!(g.check_clean_ball(4, 4).is_ok());
        assert!(matches!(g.check_clean_ball(4, 5), Err(LabError::Margin { .. })));
        let plain = path(9);
        assert!(plain.check_clean_ball(4, 4).is_ok());
        assert!(plain.check_clean_ball(4, 5).is_err());
    }
}
