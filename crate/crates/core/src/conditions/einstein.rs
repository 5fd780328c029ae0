//! Per-cell Einstein records `Q = E(x, 2R) / (rho(x, R, 2R) v(x, R, 2R))`.

use serde::{Deserialize, Serialize};

use super::{Exclusion, Lab, SweepGrid};
use crate::error::{LabError, Result};
use crate::graph::Vertex;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EinsteinRecord {
    pub x: Vertex,
    pub radius: u32,
    pub e2r: f64,
    pub rho: f64,
    pub v: f64,
    pub q: f64,
    /// `rho v >= R^2` on this cell.
    pub quadratic_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EinsteinReport {
    pub grid: SweepGrid,
    pub records: Vec<EinsteinRecord>,
    pub min_q: f64,
    pub max_q: f64,
    /// `max_q / min_q`.
    pub spread: f64,
    pub excluded: Vec<Exclusion>,
}

pub const EINSTEIN_MARGIN: u32 = 2;

pub fn einstein_report(lab: &Lab, grid: &SweepGrid) -> Result<EinsteinReport> {
    let (cells, excluded) = grid.split(lab.graph(), "einstein", EINSTEIN_MARGIN)?;
    if cells.is_empty() {
        return Err(LabError::EmptyGrid("no cell satisfies the Einstein margin".into()));
    }
    let records = lab.map_cells(&cells, |c| {
        let (x, r) = (c.x, c.radius);
        let e2r = lab.e(x, 2 * r)?;
        let rho = lab.rho(x, r, 2 * r)?;
        let v = lab.annulus_volume(x, r, 2 * r)?;
        let q = e2r / (rho * v);
        let r2 = (r as f64).powi(2);
        Ok(EinsteinRecord {
            x,
            radius: r,
            e2r,
            rho,
            v,
            q,
            quadratic_ok: rho * v >= r2 * (1.0 - super::SLACK_TOLERANCE),
        })
    })?;
    let min_q = records.iter().map(|r| r.q).fold(f64::INFINITY, f64::min);
    let max_q = records.iter().map(|r| r.q).fold(f64::NEG_INFINITY, f64::max);
    Ok(EinsteinReport {
        grid: grid.clone(),
        records,
        min_q,
        max_q,
        spread: max_q / min_q,
        excluded,
    })
}
