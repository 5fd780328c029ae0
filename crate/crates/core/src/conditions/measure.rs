//! Empirical constants of the lettered conditions over a sweep grid.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Cell, Exclusion, Lab, SweepGrid};
use crate::error::{LabError, Result};
use crate::graph::Vertex;
use crate::potential;

#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tag {
    BC,
    VD,
    wVC,
    TC,
    wTC,
    TD,
    ER,
    rho_v,
    E_hom,
    p0,
    H,
    Ebar,
    HG,
    g,
    aVD,
    adrv,
}

impl Tag {
    pub const ALL: [Tag; 16] = [
        Tag::BC,
        Tag::VD,
        Tag::wVC,
        Tag::TC,
        Tag::wTC,
        Tag::TD,
        Tag::ER,
        Tag::rho_v,
        Tag::E_hom,
        Tag::p0,
        Tag::H,
        Tag::Ebar,
        Tag::HG,
        Tag::g,
        Tag::aVD,
        Tag::adrv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tag::BC => "BC",
            Tag::VD => "VD",
            Tag::wVC => "wVC",
            Tag::TC => "TC",
            Tag::wTC => "wTC",
            Tag::TD => "TD",
            Tag::ER => "ER",
            Tag::rho_v => "rho_v",
            Tag::E_hom => "E_hom",
            Tag::p0 => "p0",
            Tag::H => "H",
            Tag::Ebar => "Ebar",
            Tag::HG => "HG",
            Tag::g => "g",
            Tag::aVD => "aVD",
            Tag::adrv => "adrv",
        }
    }

    /// Multiple of `R` that must fit inside the clean radius at the center.
    pub fn margin(self) -> u32 {
        match self {
            Tag::p0 => 0,
            Tag::Ebar => 1,
            Tag::BC | Tag::VD | Tag::wVC | Tag::TC | Tag::wTC | Tag::TD | Tag::ER | Tag::H | Tag::HG | Tag::g => 2,
            Tag::rho_v => 3,
            Tag::E_hom => 1,
            // Anti-doubling tags search multipliers up to MAX_MULTIPLIER; cells
            // are filtered per multiplier.
            Tag::aVD => 1,
            Tag::adrv => 2,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tag {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        Tag::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| LabError::invalid(format!("unknown condition tag {s:?}")))
    }
}

/// Largest dyadic multiplier tried by the anti-doubling searches.
pub const MAX_MULTIPLIER: u32 = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremizer {
    pub x: Vertex,
    pub radius: u32,
    pub y: Option<Vertex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub tag: Tag,
    /// `None` when an anti-doubling factor was not achieved within `MAX_MULTIPLIER`.
    pub constant: Option<f64>,
    pub extremizer: Option<Extremizer>,
    pub cells_evaluated: usize,
    pub grid: SweepGrid,
    pub excluded: Vec<Exclusion>,
    /// Secondary statistics (lower constants, flags).
    pub extra: BTreeMap<String, f64>,
    /// Per-cell values in `(x, R)` order; empty for graph-level tags.
    pub cells: Vec<MeasuredCell>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasuredCell {
    pub x: Vertex,
    pub radius: u32,
    pub y: Option<Vertex>,
    pub value: f64,
}

/// Per-cell value with the secondary vertex realizing it.
struct CellValue {
    cell: Cell,
    value: f64,
    y: Option<Vertex>,
}

fn max_over_ball<F>(lab: &Lab, x: Vertex, radius: u32, f: F) -> Result<(f64, Vertex)>
where
    F: Fn(Vertex) -> Result<f64>,
{
    let mut best = (f64::NEG_INFINITY, x);
    for y in lab.ball(x, radius)?.iter() {
        let v = f(y)?;
        if v > best.0 {
            best = (v, y);
        }
    }
    Ok(best)
}

fn greedy_cover(lab: &Lab, x: Vertex, radius: u32) -> Result<usize> {
    let g = lab.graph();
    let target = lab.ball(x, 2 * radius)?;
    let mut covered = vec![false; g.vertex_count()];
    let mut count = 0;
    for v in target.iter() {
        if covered[v] {
            continue;
        }
        count += 1;
        for (u, _) in g.ball_layers(v, radius)? {
            covered[u] = true;
        }
    }
    Ok(count)
}

fn cell_value(lab: &Lab, tag: Tag, c: Cell) -> Result<CellValue> {
    let (x, r) = (c.x, c.radius);
    let done = |value: f64, y: Option<Vertex>| Ok(CellValue { cell: c, value, y });
    match tag {
        Tag::BC => done(greedy_cover(lab, x, r)? as f64, None),
        Tag::VD => done(lab.volume(x, 2 * r)? / lab.volume(x, r)?, None),
        Tag::wVC => {
            let vx = lab.volume(x, r)?;
            let (v, y) = max_over_ball(lab, x, r, |y| Ok(vx / lab.volume(y, r)?))?;
            done(v, Some(y))
        }
        Tag::TC => {
            let e2 = lab.e(x, 2 * r)?;
            let (v, y) = max_over_ball(lab, x, r, |y| Ok(e2 / lab.e(y, r)?))?;
            done(v, Some(y))
        }
        Tag::wTC => {
            let e = lab.e(x, r)?;
            let (v, y) = max_over_ball(lab, x, r, |y| Ok(e / lab.e(y, r)?))?;
            done(v, Some(y))
        }
        Tag::TD => done(lab.e(x, 2 * r)? / lab.e(x, r)?, None),
        Tag::Ebar => done(lab.ebar(x, r)? / lab.e(x, r)?, None),
        Tag::H => {
            let h = potential::harnack_constant(lab.graph(), x, r)?;
            done(h.value, Some(h.boundary_vertex))
        }
        Tag::HG => done(potential::hg_constant(lab.graph(), x, r)?, None),
        Tag::g => done(potential::green_ratios(lab.graph(), x, r)?.c_high, None),
        Tag::ER | Tag::E_hom => done(einstein_q(lab, x, r, tag)?, None),
        Tag::rho_v => {
            let w = rho_v(lab, x, r)?;
            let (v, y) = max_over_ball(lab, x, r, |y| Ok(w / rho_v(lab, y, r)?))?;
            done(v, Some(y))
        }
        Tag::p0 | Tag::aVD | Tag::adrv => unreachable!("handled separately"),
    }
}

fn einstein_q(lab: &Lab, x: Vertex, r: u32, tag: Tag) -> Result<f64> {
    match tag {
        Tag::E_hom => lab.e(x, r),
        _ => Ok(lab.e(x, 2 * r)? / rho_v(lab, x, r)?),
    }
}

/// `rho(x, R, 2R) v(x, R, 2R)`.
pub fn rho_v(lab: &Lab, x: Vertex, r: u32) -> Result<f64> {
    Ok(lab.rho(x, r, 2 * r)? * lab.annulus_volume(x, r, 2 * r)?)
}

fn first_max(values: &[CellValue]) -> Option<&CellValue> {
    values.iter().fold(None, |best: Option<&CellValue>, v| match best {
        Some(b) if v.value <= b.value => Some(b),
        _ => Some(v),
    })
}

fn first_min(values: &[CellValue]) -> Option<&CellValue> {
    values.iter().fold(None, |best: Option<&CellValue>, v| match best {
        Some(b) if v.value >= b.value => Some(b),
        _ => Some(v),
    })
}

fn extremizer(v: &CellValue) -> Extremizer {
    Extremizer {
        x: v.cell.x,
        radius: v.cell.radius,
        y: v.y,
    }
}

/// Homogeneity tags compare the same quantity at different centers: the constant
/// is the largest ratio `max_x f(x, R) / min_x f(x, R)` over radii, which is the
/// best `C` in `f(x, R) <= C f(y, R)` over the grid.
fn spread_by_radius(values: &[CellValue]) -> (f64, Extremizer) {
    let mut radii: Vec<u32> = values.iter().map(|v| v.cell.radius).collect();
    radii.sort_unstable();
    radii.dedup();
    let mut best: Option<(f64, Extremizer)> = None;
    for r in radii {
        let at: Vec<&CellValue> = values.iter().filter(|v| v.cell.radius == r).collect();
        let hi = at.iter().fold(at[0], |b, v| if v.value > b.value { v } else { b });
        let lo = at.iter().fold(at[0], |b, v| if v.value < b.value { v } else { b });
        let ratio = hi.value / lo.value;
        if best.as_ref().is_none_or(|(b, _)| ratio > *b) {
            best = Some((
                ratio,
                Extremizer {
                    x: hi.cell.x,
                    radius: r,
                    y: Some(lo.cell.x),
                },
            ));
        }
    }
    best.unwrap()
}

/// Smallest dyadic `A` with `f(x, A R) >= 2 f(x, R)` on every cell where `A R`
/// (times the check's own margin) fits.
fn anti_doubling<F>(lab: &Lab, grid: &SweepGrid, tag: Tag, f: F) -> Result<ConditionReport>
where
    F: Fn(Vertex, u32) -> Result<f64> + Sync + Send,
{
    let base = tag.margin();
    let mut excluded = Vec::new();
    let mut evaluated = 0;
    let mut found = None;
    let mut a = 2;
    let mut any_cells = false;
    while a <= MAX_MULTIPLIER {
        let (cells, ex) = grid.split(lab.graph(), tag.name(), base * a)?;
        if a == 2 {
            excluded = ex;
        }
        if cells.is_empty() {
            break;
        }
        any_cells = true;
        let ok = lab.map_cells(&cells, |c| Ok(f(c.x, a * c.radius)? >= 2.0 * f(c.x, c.radius)?))?;
        evaluated += cells.len();
        if ok.iter().all(|&b| b) {
            found = Some((a, cells[0]));
            break;
        }
        a *= 2;
    }
    if !any_cells {
        return Err(LabError::EmptyGrid(format!("no valid cells for {tag}")));
    }
    let mut extra = BTreeMap::new();
    extra.insert("max_multiplier_tried".into(), a.min(MAX_MULTIPLIER) as f64);
    Ok(ConditionReport {
        tag,
        constant: found.map(|(a, _)| a as f64),
        extremizer: found.map(|(_, c)| Extremizer {
            x: c.x,
            radius: c.radius,
            y: None,
        }),
        cells_evaluated: evaluated,
        grid: grid.clone(),
        excluded,
        extra,
        cells: vec![],
    })
}

pub fn measure_condition(lab: &Lab, grid: &SweepGrid, tag: Tag) -> Result<ConditionReport> {
    match tag {
        Tag::p0 => {
            let rep = lab.graph().check_p0();
            let mut extra = BTreeMap::new();
            extra.insert("max_degree".into(), rep.max_degree as f64);
            extra.insert(
                "degree_bound_holds".into(),
                if rep.degree_bound_holds { 1.0 } else { 0.0 },
            );
            return Ok(ConditionReport {
                tag,
                constant: Some(rep.p0),
                extremizer: Some(Extremizer {
                    x: rep.witness.0,
                    radius: 1,
                    y: Some(rep.witness.1),
                }),
                cells_evaluated: 1,
                grid: grid.clone(),
                excluded: vec![],
                extra,
                cells: vec![],
            });
        }
        Tag::aVD => return anti_doubling(lab, grid, tag, |x, r| lab.volume(x, r)),
        Tag::adrv => return anti_doubling(lab, grid, tag, |x, r| rho_v(lab, x, r)),
        _ => {}
    }
    let (cells, excluded) = grid.split(lab.graph(), tag.name(), tag.margin())?;
    if cells.is_empty() {
        return Err(LabError::EmptyGrid(format!("no valid cells for {tag}")));
    }
    let values = lab.map_cells(&cells, |c| cell_value(lab, tag, c))?;
    let mut extra = BTreeMap::new();
    let (constant, ext) = match tag {
        Tag::ER => {
            let hi = first_max(&values).unwrap();
            let lo = first_min(&values).unwrap();
            extra.insert("min_q".into(), lo.value);
            extra.insert("max_q".into(), hi.value);
            (
                hi.value / lo.value,
                Extremizer {
                    x: hi.cell.x,
                    radius: hi.cell.radius,
                    y: Some(lo.cell.x),
                },
            )
        }
        Tag::E_hom => spread_by_radius(&values),
        Tag::g => {
            let hi = first_max(&values).unwrap();
            let lows = lab.map_cells(&cells, |c| {
                Ok(potential::green_ratios(lab.graph(), c.x, c.radius)?.c_low)
            })?;
            extra.insert("c_low".into(), lows.iter().cloned().fold(f64::INFINITY, f64::min));
            (hi.value, extremizer(hi))
        }
        Tag::H => {
            let hi = first_max(&values).unwrap();
            let infinite = values.iter().filter(|v| v.value.is_infinite()).count();
            extra.insert("infinite_cells".into(), infinite as f64);
            (hi.value, extremizer(hi))
        }
        _ => {
            let hi = first_max(&values).unwrap();
            (hi.value, extremizer(hi))
        }
    };
    Ok(ConditionReport {
        tag,
        constant: Some(constant),
        extremizer: Some(ext),
        cells_evaluated: cells.len(),
        grid: grid.clone(),
        excluded,
        extra,
        cells: values
            .iter()
            .map(|v| MeasuredCell {
                x: v.cell.x,
                radius: v.cell.radius,
                y: v.y,
                value: v.value,
            })
            .collect(),
    })
}

/// Every tag that has at least one valid cell; tags with an empty grid are skipped.
pub fn measure_all(lab: &Lab, grid: &SweepGrid) -> Result<Vec<ConditionReport>> {
    let mut out = Vec::new();
    for tag in Tag::ALL {
        match measure_condition(lab, grid, tag) {
            Ok(r) => out.push(r),
            Err(LabError::EmptyGrid(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
