//! Exact potential theory on a finite region: Dirichlet potentials, effective
//! resistance, the killed Green kernel, mean exit times, the bottom of the
//! Dirichlet spectrum, harmonic measure and the Harnack and Green-ratio constants.
//!
//! Every solve goes through the weighted Dirichlet Laplacian
//! `M = D - W` restricted to a region `A`, where `D = diag(mu)`. With that
//! matrix, `I - P^A = D^{-1} M`, so
//!
//! * the Green kernel is `g^A = M^{-1}` (symmetric),
//! * `G^A(y, z) = g^A(y, z) mu(z)`,
//! * exit times solve `M E = mu|_A`,
//! * harmonic measure solves `M w = mu(., z)|_A` for each boundary vertex `z`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::graph::{BallSpec, Vertex, VertexSet, WeightedGraph};
use crate::linalg::{dot, norm, Solver, SparseSym};

/// Rayleigh residual required of an eigenpair.
pub const EIGEN_TOLERANCE: f64 = 1e-9;
pub const EIGEN_MAX_ITERATIONS: usize = 10_000;

const NOT_LOCAL: usize = usize::MAX;

/// `M = D - W` restricted to a region, factorized once.
#[derive(Clone, Debug)]
pub struct DirichletOperator {
    region: VertexSet,
    local: Vec<usize>,
    solver: Solver,
}

impl DirichletOperator {
    pub fn new(g: &WeightedGraph, region: &VertexSet) -> Result<Self> {
        let n = g.vertex_count();
        if region.is_empty() {
            return Err(LabError::invalid("region must be nonempty"));
        }
        if let Some(v) = region.iter().find(|&v| v >= n) {
            return Err(LabError::InvalidVertex { vertex: v, n });
        }
        if region.len() == n {
            return Err(LabError::Singular(
                "region is the whole graph, the killed walk never leaves".into(),
            ));
        }
        let mut local = vec![NOT_LOCAL; n];
        for (i, v) in region.iter().enumerate() {
            local[v] = i;
        }
        let mut diag = Vec::with_capacity(region.len());
        let mut rows = Vec::with_capacity(region.len());
        for v in region.iter() {
            let mut d = g.mu(v);
            let mut row = Vec::new();
            for (u, w) in g.neighbors(v) {
                if u == v {
                    d -= w;
                } else if local[u] != NOT_LOCAL {
                    row.push((local[u], -w));
                }
            }
            diag.push(d);
            rows.push(row);
        }
        let solver = Solver::new(SparseSym::from_rows(diag, rows))?;
        Ok(DirichletOperator {
            region: region.clone(),
            local,
            solver,
        })
    }

    pub fn region(&self) -> &VertexSet {
        &self.region
    }

    /// Position of `v` in the region's local ordering.
    pub fn local_index(&self, v: Vertex) -> Option<usize> {
        self.local.get(v).copied().filter(|&i| i != NOT_LOCAL)
    }

    fn require_local(&self, v: Vertex) -> Result<usize> {
        self.local_index(v)
            .ok_or_else(|| LabError::invalid(format!("vertex {v} is not in the region")))
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
        self.solver.solve(rhs)
    }

    fn matrix(&self) -> &SparseSym {
        self.solver.matrix()
    }
}

/// Killed Green operator of a region, reusable across many queries.
#[derive(Clone, Debug)]
pub struct GreenOperator {
    op: DirichletOperator,
}

/// `green(g, A)`.
pub fn green(g: &WeightedGraph, region: &VertexSet) -> Result<GreenOperator> {
    Ok(GreenOperator {
        op: DirichletOperator::new(g, region)?,
    })
}

impl GreenOperator {
    pub fn region(&self) -> &VertexSet {
        self.op.region()
    }

    pub fn operator(&self) -> &DirichletOperator {
        &self.op
    }

    /// `g^A(., z)` on the region, in local order.
    pub fn kernel_column(&self, z: Vertex) -> Result<Vec<f64>> {
        let iz = self.op.require_local(z)?;
        let mut e = vec![0.0; self.op.region.len()];
        e[iz] = 1.0;
        Ok(self.op.solve(&e)?.0)
    }

    /// `g^A(y, z)`; zero when either point lies outside the region.
    pub fn kernel(&self, y: Vertex, z: Vertex) -> Result<f64> {
        let (Some(iy), Some(_)) = (self.op.local_index(y), self.op.local_index(z)) else {
            return Ok(0.0);
        };
        Ok(self.kernel_column(z)?[iy])
    }

    /// `G^A(y, z) = g^A(y, z) mu(z)`, the expected number of visits to `z` from `y`.
    pub fn visits(&self, g: &WeightedGraph, y: Vertex, z: Vertex) -> Result<f64> {
        Ok(self.kernel(y, z)? * g.mu(z))
    }

    pub fn exit_times(&self, g: &WeightedGraph) -> Result<ExitTimeField> {
        let rhs: Vec<f64> = self.op.region.iter().map(|v| g.mu(v)).collect();
        let (sol, residual) = self.op.solve(&rhs)?;
        let mut values = vec![0.0; g.vertex_count()];
        let mut max = (f64::NEG_INFINITY, 0);
        for (v, e) in self.op.region.iter().zip(&sol) {
            values[v] = *e;
            if *e > max.0 {
                max = (*e, v);
            }
        }
        Ok(ExitTimeField {
            region: self.op.region.clone(),
            values,
            max_value: max.0,
            max_location: max.1,
            residual,
        })
    }
}

/// `E_z(A)` for every `z` (zero off the region).
#[derive(Clone, Debug, Serialize)]
pub struct ExitTimeField {
    pub region: VertexSet,
    pub values: Vec<f64>,
    /// `Ebar(A) = max_z E_z(A)`.
    pub max_value: f64,
    pub max_location: Vertex,
    pub residual: f64,
}

impl ExitTimeField {
    pub fn at(&self, z: Vertex) -> f64 {
        self.values[z]
    }
}

pub fn exit_time(g: &WeightedGraph, region: &VertexSet) -> Result<ExitTimeField> {
    green(g, region)?.exit_times(g)
}

fn clean_ball(g: &WeightedGraph, x: Vertex, radius: u32) -> Result<VertexSet> {
    g.check_clean_ball(x, radius)?;
    g.ball(BallSpec::new(x, radius))
}

/// `E(x, R)`: mean exit time from `B(x, R)` started at its center.
pub fn mean_exit_time(g: &WeightedGraph, x: Vertex, radius: u32) -> Result<f64> {
    if radius == 0 {
        return Err(LabError::invalid("exit time needs radius >= 1"));
    }
    Ok(exit_time(g, &clean_ball(g, x, radius)?)?.at(x))
}

/// `Ebar(x, R)`: largest mean exit time from `B(x, R)` over starting points.
pub fn max_exit_time(g: &WeightedGraph, x: Vertex, radius: u32) -> Result<f64> {
    if radius == 0 {
        return Err(LabError::invalid("exit time needs radius >= 1"));
    }
    Ok(exit_time(g, &clean_ball(g, x, radius)?)?.max_value)
}

/// Smallest `R` with `E(x, R) >= n`.
pub fn e_inverse(g: &WeightedGraph, x: Vertex, n: u64) -> Result<u32> {
    let mut r = 1;
    loop {
        if mean_exit_time(g, x, r)? >= n as f64 {
            return Ok(r);
        }
        r += 1;
    }
}

/// Solution of the Dirichlet problem: 1 on the source, 0 on the sink.
#[derive(Clone, Debug, Serialize)]
pub struct PotentialField {
    pub values: Vec<f64>,
    pub source: VertexSet,
    pub sink: VertexSet,
    pub residual: f64,
}

pub fn dirichlet_potential(g: &WeightedGraph, source: &VertexSet, outer: &VertexSet) -> Result<PotentialField> {
    let n = g.vertex_count();
    if source.is_empty() {
        return Err(LabError::invalid("source set must be nonempty"));
    }
    let all: VertexSet = (0..n).collect();
    let outer = VertexSet::new(n, outer.as_slice().to_vec())?;
    let sink = all.difference(&outer);
    if sink.is_empty() {
        return Err(LabError::invalid(
            "sink set (complement of the outer region) must be nonempty",
        ));
    }
    if let Some(v) = source.iter().find(|&v| sink.contains(v)) {
        return Err(LabError::Overlap(v));
    }
    let interior = outer.difference(source);
    let mut values = vec![0.0; n];
    for a in source.iter() {
        values[a] = 1.0;
    }
    let mut residual = 0.0;
    if !interior.is_empty() {
        let op = DirichletOperator::new(g, &interior)?;
        let rhs: Vec<f64> = interior
            .iter()
            .map(|y| {
                g.neighbors(y)
                    .filter(|&(a, _)| a != y && source.contains(a))
                    .map(|(_, w)| w)
                    .sum()
            })
            .collect();
        let (sol, res) = op.solve(&rhs)?;
        residual = res;
        for (y, u) in interior.iter().zip(sol) {
            values[y] = u;
        }
    }
    Ok(PotentialField {
        values,
        source: source.clone(),
        sink,
        residual,
    })
}

impl PotentialField {
    /// Total current `sum_{x in A, y not in A} mu_xy (u(x) - u(y))`.
    pub fn current(&self, g: &WeightedGraph) -> f64 {
        self.source
            .iter()
            .flat_map(|x| g.neighbors(x).map(move |(y, w)| (x, y, w)))
            .filter(|&(_, y, _)| !self.source.contains(y))
            .map(|(x, y, w)| w * (self.values[x] - self.values[y]))
            .sum()
    }

    /// Dirichlet energy `sum_edges mu_xy (u(x) - u(y))^2`.
    pub fn energy(&self, g: &WeightedGraph) -> f64 {
        g.edges()
            .iter()
            .map(|&(x, y, w)| w * (self.values[x] - self.values[y]).powi(2))
            .sum()
    }
}

/// Effective resistance, with an explicit marker for a zero-current configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Resistance {
    Finite(f64),
    Unreachable,
}

impl Resistance {
    pub fn finite(self) -> Option<f64> {
        match self {
            Resistance::Finite(r) => Some(r),
            Resistance::Unreachable => None,
        }
    }

    /// Value for callers that have already excluded the unreachable case.
    pub fn expect_finite(self) -> Result<f64> {
        self.finite()
            .ok_or_else(|| LabError::invalid("source cannot reach the sink (infinite resistance)"))
    }
}

/// `rho(A, Gamma \ B_outer)`.
pub fn resistance(g: &WeightedGraph, source: &VertexSet, outer: &VertexSet) -> Result<Resistance> {
    let field = dirichlet_potential(g, source, outer)?;
    let current = field.current(g);
    Ok(if current > 0.0 {
        Resistance::Finite(1.0 / current)
    } else {
        Resistance::Unreachable
    })
}

/// `rho(x, r, R) = rho(B(x, r), Gamma \ B(x, R))`.
pub fn resistance_annulus(g: &WeightedGraph, x: Vertex, inner: u32, outer: u32) -> Result<Resistance> {
    if inner == 0 || outer <= inner {
        return Err(LabError::invalid(format!(
            "annulus resistance needs 0 < r < R, got r={inner} R={outer}"
        )));
    }
    let big = clean_ball(g, x, outer)?;
    let small = g.ball(BallSpec::new(x, inner))?;
    resistance(g, &small, &big)
}

/// Shell decomposition lower bound for `rho(A, Gamma \ B)`.
#[derive(Clone, Debug, Serialize)]
pub struct LayeredBound {
    pub bound: f64,
    /// `d(A, boundary of B)`.
    pub depth: u32,
    /// Crossing weight between consecutive distance shells.
    pub shell_weights: Vec<f64>,
}

pub fn layered_lower_bound(g: &WeightedGraph, source: &VertexSet, outer: &VertexSet) -> Result<LayeredBound> {
    if source.is_empty() {
        return Err(LabError::invalid("source set must be nonempty"));
    }
    if !source.is_subset(outer) {
        let v = source.iter().find(|&v| !outer.contains(v)).unwrap();
        return Err(LabError::Overlap(v));
    }
    let rim = g.boundary(outer)?;
    if rim.is_empty() {
        return Err(LabError::invalid("outer region has empty boundary"));
    }
    let dist = g.set_distances(source)?;
    let depth = rim.iter().map(|v| dist[v]).min().unwrap();
    let mut shell_weights = vec![0.0; depth as usize];
    for &(u, v, w) in g.edges() {
        let (lo, hi) = (dist[u].min(dist[v]), dist[u].max(dist[v]));
        if hi == lo + 1 && hi <= depth {
            shell_weights[lo as usize] += w;
        }
    }
    let bound = shell_weights.iter().map(|w| 1.0 / w).sum();
    Ok(LayeredBound {
        bound,
        depth,
        shell_weights,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenResult {
    pub lambda: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Smallest eigenvalue of `(I - P^A)` on `A` by inverse iteration on the
/// symmetrized operator `S = D^{-1/2} M D^{-1/2}` (similar to `I - P^A`).
pub fn lambda_min(g: &WeightedGraph, region: &VertexSet) -> Result<EigenResult> {
    let op = DirichletOperator::new(g, region)?;
    lambda_min_with(g, &op)
}

pub fn lambda_min_with(g: &WeightedGraph, op: &DirichletOperator) -> Result<EigenResult> {
    let sqrt_mu: Vec<f64> = op.region().iter().map(|v| g.mu(v).sqrt()).collect();
    let apply_s = |v: &[f64]| -> Vec<f64> {
        let scaled: Vec<f64> = v.iter().zip(&sqrt_mu).map(|(x, s)| x / s).collect();
        op.matrix()
            .mul(&scaled)
            .iter()
            .zip(&sqrt_mu)
            .map(|(x, s)| x / s)
            .collect()
    };
    let mut v: Vec<f64> = sqrt_mu.clone();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut residual = f64::INFINITY;
    let mut theta = 0.0;
    for it in 1..=EIGEN_MAX_ITERATIONS {
        let rhs: Vec<f64> = v.iter().zip(&sqrt_mu).map(|(x, s)| x * s).collect();
        let (w, _) = op.solve(&rhs)?;
        let mut next: Vec<f64> = w.iter().zip(&sqrt_mu).map(|(x, s)| x * s).collect();
        let nn = norm(&next);
        next.iter_mut().for_each(|x| *x /= nn);
        let sv = apply_s(&next);
        theta = dot(&next, &sv);
        residual = norm(&sv.iter().zip(&next).map(|(a, b)| a - theta * b).collect::<Vec<_>>());
        v = next;
        if residual <= EIGEN_TOLERANCE {
            return Ok(EigenResult {
                lambda: theta,
                iterations: it,
                residual,
            });
        }
    }
    let _ = theta;
    Err(LabError::NonConvergence {
        iterations: EIGEN_MAX_ITERATIONS,
        residual,
    })
}

/// Exit distribution `omega(y, z)` of a ball: rows over the ball, columns over its boundary.
#[derive(Clone, Debug, Serialize)]
pub struct HarmonicMeasure {
    pub region: VertexSet,
    pub boundary: VertexSet,
    /// `omega[i][j]`: from the `i`-th region vertex to the `j`-th boundary vertex.
    pub omega: Vec<Vec<f64>>,
}

impl HarmonicMeasure {
    pub fn row(&self, y: Vertex) -> Option<&[f64]> {
        self.region
            .as_slice()
            .binary_search(&y)
            .ok()
            .map(|i| self.omega[i].as_slice())
    }
}

fn exit_columns(g: &WeightedGraph, op: &DirichletOperator, rim: &VertexSet) -> Result<Vec<Vec<f64>>> {
    rim.iter()
        .map(|z| {
            let rhs: Vec<f64> = op
                .region()
                .iter()
                .map(|y| if y == z { 0.0 } else { g.weight(y, z) })
                .collect();
            Ok(op.solve(&rhs)?.0)
        })
        .collect()
}

/// Harmonic measure of an arbitrary region.
pub fn harmonic_measure_of(g: &WeightedGraph, region: &VertexSet) -> Result<HarmonicMeasure> {
    let op = DirichletOperator::new(g, region)?;
    let rim = g.boundary(region)?;
    let cols = exit_columns(g, &op, &rim)?;
    let omega = (0..region.len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    Ok(HarmonicMeasure {
        region: region.clone(),
        boundary: rim,
        omega,
    })
}

/// `harmonic_measure(g, x, R)` for the ball `B(x, R)`.
pub fn harmonic_measure(g: &WeightedGraph, x: Vertex, radius: u32) -> Result<HarmonicMeasure> {
    if radius == 0 {
        return Err(LabError::invalid("harmonic measure needs radius >= 1"));
    }
    harmonic_measure_of(g, &clean_ball(g, x, radius)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct HarnackConstant {
    /// `f64::INFINITY` when some kernel vanishes on the inner ball.
    pub value: f64,
    pub finite: bool,
    /// Boundary vertex of the extremal kernel and the two inner points realizing it.
    pub boundary_vertex: Vertex,
    pub argmax: Vertex,
    pub argmin: Vertex,
}

/// Exact elliptic Harnack constant of `B(x, R)` inside `B(x, 2R)`: the largest
/// ratio `omega(y, z) / omega(y', z)` over `y, y'` in the inner ball and `z` on
/// the boundary of the outer ball. Every non-negative function harmonic in the
/// outer ball is a non-negative combination of these kernels, so this is the
/// supremum over the whole cone.
pub fn harnack_constant(g: &WeightedGraph, x: Vertex, radius: u32) -> Result<HarnackConstant> {
    if radius == 0 {
        return Err(LabError::invalid("Harnack constant needs radius >= 1"));
    }
    let outer = clean_ball(g, x, 2 * radius)?;
    let inner = g.ball(BallSpec::new(x, radius))?;
    let op = DirichletOperator::new(g, &outer)?;
    let rim = g.boundary(&outer)?;
    let inner_local: Vec<(Vertex, usize)> = inner.iter().map(|v| (v, op.local_index(v).unwrap())).collect();
    let mut best = HarnackConstant {
        value: 1.0,
        finite: true,
        boundary_vertex: rim.iter().next().unwrap_or(x),
        argmax: x,
        argmin: x,
    };
    let mut best_ratio = f64::NEG_INFINITY;
    for (z, col) in rim.iter().zip(exit_columns(g, &op, &rim)?) {
        let (mut hi, mut lo) = ((f64::NEG_INFINITY, x), (f64::INFINITY, x));
        for &(v, i) in &inner_local {
            if col[i] > hi.0 {
                hi = (col[i], v);
            }
            if col[i] < lo.0 {
                lo = (col[i], v);
            }
        }
        let ratio = if lo.0 > 0.0 {
            hi.0 / lo.0
        } else if hi.0 > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        if ratio > best_ratio {
            best_ratio = ratio;
            best = HarnackConstant {
                value: ratio,
                finite: ratio.is_finite(),
                boundary_vertex: z,
                argmax: hi.1,
                argmin: lo.1,
            };
        }
    }
    Ok(best)
}

/// Green-kernel ratios on `B = B(x, 2R)` with inner ball `A = B(x, R)`.
#[derive(Clone, Debug, Serialize)]
pub struct GreenRatios {
    /// `sup_{y in B \ A} g^B(x, y) / inf_{z in A} g^B(x, z)`.
    pub hg: f64,
    pub inf_inner: f64,
    pub sup_outer: f64,
    pub diagonal: f64,
    /// `E(x, 2R)`, from the same kernel column.
    pub exit_time: f64,
    /// `V(x, R)`.
    pub volume: f64,
    /// `(min_A g) V(x, R) / E(x, 2R)`.
    pub c_low: f64,
    /// `(max_{B \ A} g) V(x, R) / E(x, 2R)`.
    pub c_high: f64,
}

pub fn green_ratios(g: &WeightedGraph, x: Vertex, radius: u32) -> Result<GreenRatios> {
    if radius == 0 {
        return Err(LabError::invalid("Green ratios need radius >= 1"));
    }
    let outer = clean_ball(g, x, 2 * radius)?;
    let layers = g.ball_layers(x, 2 * radius)?;
    let op = green(g, &outer)?;
    let col = op.kernel_column(x)?;
    let mut inf_inner = f64::INFINITY;
    let mut sup_outer = 0.0f64;
    let mut volume = 0.0;
    let mut exit = 0.0;
    for (v, d) in layers {
        let gv = col[op.operator().local_index(v).unwrap()];
        exit += gv * g.mu(v);
        if d < radius {
            inf_inner = inf_inner.min(gv);
            volume += g.mu(v);
        } else {
            sup_outer = sup_outer.max(gv);
        }
    }
    let diagonal = col[op.operator().local_index(x).unwrap()];
    Ok(GreenRatios {
        hg: sup_outer / inf_inner,
        inf_inner,
        sup_outer,
        diagonal,
        exit_time: exit,
        volume,
        c_low: inf_inner * volume / exit,
        c_high: sup_outer * volume / exit,
    })
}

pub fn hg_constant(g: &WeightedGraph, x: Vertex, radius: u32) -> Result<f64> {
    Ok(green_ratios(g, x, radius)?.hg)
}

/// `(c_low, C_high)` of the two-sided Green kernel bounds.
pub fn g_condition(g: &WeightedGraph, x: Vertex, radius: u32) -> Result<(f64, f64)> {
    let r = green_ratios(g, x, radius)?;
    Ok((r.c_low, r.c_high))
}
