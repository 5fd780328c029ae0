//! Sweep engine: evaluates inequalities and measures conditions over a grid of
//! `(center, radius)` cells, each cell valid only when the enlarged ball a check
//! needs stays clear of the host frontier.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::graph::{BallSpec, Vertex, VertexSet, WeightedGraph};
use crate::potential::{self, ExitTimeField, Resistance};

pub mod doubling;
pub mod einstein;
pub mod fit;
pub mod inequalities;
pub mod measure;

pub use doubling::{resistance_doubling, strong_antidoubling, AntiDoublingReport, DoublingReport};
pub use einstein::{einstein_report, EinsteinRecord, EinsteinReport};
pub use fit::{fit_exponents, linear_fit, ExponentFit, ExponentReport};
pub use inequalities::{verify_inequalities, CheckKind, CheckOutcome, VerifyReport};
pub use measure::{measure_all, measure_condition, ConditionReport, MeasuredCell, Tag};

/// Relative slack below which an asserted inequality counts as violated.
pub const SLACK_TOLERANCE: f64 = 1e-8;

/// Centers and radii to sweep. Both lists are kept sorted and deduplicated so
/// that cells are always visited in `(x, R)` order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub centers: Vec<Vertex>,
    pub radii: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: Vertex,
    pub radius: u32,
}

/// A cell left out of a check because `margin * radius` exceeds the clean radius at `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub check: String,
    pub x: Vertex,
    pub radius: u32,
    pub needed: u32,
    pub available: u32,
}

impl SweepGrid {
    pub fn new(g: &WeightedGraph, mut centers: Vec<Vertex>, mut radii: Vec<u32>) -> Result<Self> {
        for &x in &centers {
            g.check_vertex(x)?;
        }
        if radii.contains(&0) {
            return Err(LabError::invalid("radii must be positive"));
        }
        if centers.is_empty() || radii.is_empty() {
            return Err(LabError::EmptyGrid("no centers or no radii given".into()));
        }
        centers.sort_unstable();
        centers.dedup();
        radii.sort_unstable();
        radii.dedup();
        Ok(SweepGrid { centers, radii })
    }

    /// `r0, 2 r0, 4 r0, ...` with `count` entries.
    pub fn dyadic(r0: u32, count: u32) -> Vec<u32> {
        (0..count).map(|k| r0 << k).collect()
    }

    /// Splits the grid into cells valid under `margin` and recorded exclusions.
    pub fn split(&self, g: &WeightedGraph, check: &str, margin: u32) -> Result<(Vec<Cell>, Vec<Exclusion>)> {
        let mut valid = Vec::new();
        let mut excluded = Vec::new();
        for &x in &self.centers {
            let available = g.reach(x)?.max_clean_radius();
            for &radius in &self.radii {
                let needed = margin.saturating_mul(radius);
                if needed <= available {
                    valid.push(Cell { x, radius });
                } else {
                    excluded.push(Exclusion {
                        check: check.to_string(),
                        x,
                        radius,
                        needed,
                        available,
                    });
                }
            }
        }
        Ok((valid, excluded))
    }
}

/// Picks the host center plus four vertices spread evenly (in id order) over the
/// sphere at a quarter of the center's clean radius.
pub fn auto_centers(g: &WeightedGraph, center: Vertex) -> Result<Vec<Vertex>> {
    let reach = g.reach(center)?.max_clean_radius();
    let mut out = vec![center];
    let d = reach.div_ceil(4);
    if d > 0 {
        let sphere = g.sphere(center, d)?;
        let s = sphere.as_slice();
        if !s.is_empty() {
            for k in 0..4 {
                out.push(s[k * s.len() / 4]);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `(rhs - lhs) / max(|lhs|, |rhs|)`: non-negative exactly when `lhs <= rhs`.
pub fn relative_slack(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (rhs - lhs) / scale
    }
}

type ExitCache = Mutex<HashMap<(Vertex, u32), Arc<ExitTimeField>>>;

/// Shared evaluation context: the graph, an execution mode and memoized solves.
/// Cached values are pure functions of their keys, so sharing the cache across
/// threads never changes a result.
pub struct Lab<'g> {
    g: &'g WeightedGraph,
    exec: Exec,
    exits: ExitCache,
    rhos: Mutex<HashMap<(Vertex, u32, u32), f64>>,
    lambdas: Mutex<HashMap<(Vertex, u32), f64>>,
}

impl<'g> Lab<'g> {
    pub fn new(g: &'g WeightedGraph, exec: Exec) -> Self {
        Lab {
            g,
            exec,
            exits: Mutex::new(HashMap::new()),
            rhos: Mutex::new(HashMap::new()),
            lambdas: Mutex::new(HashMap::new()),
        }
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.g
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn clean_radius(&self, x: Vertex) -> Result<u32> {
        Ok(self.g.reach(x)?.max_clean_radius())
    }

    pub fn ball(&self, x: Vertex, radius: u32) -> Result<VertexSet> {
        self.g.ball(BallSpec::new(x, radius))
    }

    pub fn volume(&self, x: Vertex, radius: u32) -> Result<f64> {
        self.g.volume(BallSpec::new(x, radius))
    }

    /// `v(x, r, R) = V(x, R) - V(x, r)`.
    pub fn annulus_volume(&self, x: Vertex, inner: u32, outer: u32) -> Result<f64> {
        Ok(self.volume(x, outer)? - self.volume(x, inner)?)
    }

    pub fn exit_field(&self, x: Vertex, radius: u32) -> Result<Arc<ExitTimeField>> {
        if let Some(f) = self.exits.lock().unwrap().get(&(x, radius)) {
            return Ok(f.clone());
        }
        if radius == 0 {
            return Err(LabError::invalid("exit time needs radius >= 1"));
        }
        self.g.check_clean_ball(x, radius)?;
        let field = Arc::new(potential::exit_time(self.g, &self.ball(x, radius)?)?);
        self.exits.lock().unwrap().insert((x, radius), field.clone());
        Ok(field)
    }

    /// `E(x, R)`.
    pub fn e(&self, x: Vertex, radius: u32) -> Result<f64> {
        Ok(self.exit_field(x, radius)?.at(x))
    }

    /// `Ebar(x, R)`.
    pub fn ebar(&self, x: Vertex, radius: u32) -> Result<f64> {
        Ok(self.exit_field(x, radius)?.max_value)
    }

    /// `rho(x, r, R)`; an unreachable sink is an error here since every valid cell is connected.
    pub fn rho(&self, x: Vertex, inner: u32, outer: u32) -> Result<f64> {
        if let Some(&r) = self.rhos.lock().unwrap().get(&(x, inner, outer)) {
            return Ok(r);
        }
        let r = match potential::resistance_annulus(self.g, x, inner, outer)? {
            Resistance::Finite(r) => r,
            Resistance::Unreachable => return Err(LabError::invalid(format!("B({x},{inner}) cannot reach the sink"))),
        };
        self.rhos.lock().unwrap().insert((x, inner, outer), r);
        Ok(r)
    }

    /// `lambda(x, R) = lambda(B(x, R))`.
    pub fn lambda(&self, x: Vertex, radius: u32) -> Result<f64> {
        if let Some(&l) = self.lambdas.lock().unwrap().get(&(x, radius)) {
            return Ok(l);
        }
        self.g.check_clean_ball(x, radius)?;
        let l = potential::lambda_min(self.g, &self.ball(x, radius)?)?.lambda;
        self.lambdas.lock().unwrap().insert((x, radius), l);
        Ok(l)
    }

    /// Runs `f` on every cell with the lab's execution mode, keeping cell order.
    pub fn map_cells<R, F>(&self, cells: &[Cell], f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(Cell) -> Result<R> + Sync + Send,
    {
        self.exec.map(cells, |&c| f(c)).into_iter().collect()
    }
}
