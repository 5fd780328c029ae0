//! Resistance doubling constants and the strong anti-doubling of `F(R) = inf_x E(x, R)`.

use serde::{Deserialize, Serialize};

use super::fit::{linear_fit, MIN_FIT_RADII};
use super::{Cell, Exclusion, Lab, SweepGrid, SLACK_TOLERANCE};
use crate::error::{LabError, Result};
use crate::graph::Vertex;
use crate::potential;

pub const DOUBLING_MARGIN: u32 = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioWitness {
    pub value: f64,
    pub x: Vertex,
    pub radius: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub grid: SweepGrid,
    /// `max rho(x, R, 4R) / rho(x, R, 2R)`.
    pub c1: RatioWitness,
    /// `max rho(x, R, 4R) / rho(x, 2R, 4R)`.
    pub c2: RatioWitness,
    /// `log2(C1 - 1)`, absent when `C1 <= 1`.
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    /// Largest Harnack constant over cells with `B(x, 2R)` clean.
    pub harnack: Option<RatioWitness>,
    /// `log3 H`.
    pub theta: Option<f64>,
    /// `(C1 - 1)(C2 - 1)`.
    pub product: f64,
    pub product_at_least_one: bool,
    /// Smallest `(V(x, 2R) - V(x, R)) / (mu(x) R^{2 - gamma1})`.
    pub shell_volume_prefactor: Option<f64>,
    /// Largest `V(x, R) / (E(x, R) mu(x) R^{gamma2})`.
    pub volume_exit_prefactor: Option<f64>,
    /// Largest `V(x, R) / R^{1 + theta}`.
    pub volume_harnack_prefactor: Option<f64>,
    pub cells: usize,
    pub excluded: Vec<Exclusion>,
}

fn first_max(items: impl IntoIterator<Item = (f64, Cell)>) -> Option<RatioWitness> {
    let mut best: Option<RatioWitness> = None;
    for (v, c) in items {
        if best.as_ref().is_none_or(|b| v > b.value) {
            best = Some(RatioWitness {
                value: v,
                x: c.x,
                radius: c.radius,
            });
        }
    }
    best
}

fn log_shifted(c: f64, base: f64) -> Option<f64> {
    (c > 1.0).then(|| (c - 1.0).ln() / base.ln())
}

pub fn resistance_doubling(lab: &Lab, grid: &SweepGrid) -> Result<DoublingReport> {
    let (cells, excluded) = grid.split(lab.graph(), "resistance_doubling", DOUBLING_MARGIN)?;
    if cells.is_empty() {
        return Err(LabError::EmptyGrid(
            "no cell satisfies the resistance doubling margin".into(),
        ));
    }
    let ratios = lab.map_cells(&cells, |c| {
        let (x, r) = (c.x, c.radius);
        let whole = lab.rho(x, r, 4 * r)?;
        Ok((whole / lab.rho(x, r, 2 * r)?, whole / lab.rho(x, 2 * r, 4 * r)?))
    })?;
    let c1 = first_max(ratios.iter().zip(&cells).map(|(r, &c)| (r.0, c))).unwrap();
    let c2 = first_max(ratios.iter().zip(&cells).map(|(r, &c)| (r.1, c))).unwrap();
    let gamma1 = log_shifted(c1.value, 2.0);
    let gamma2 = log_shifted(c2.value, 2.0);
    let product = (c1.value - 1.0) * (c2.value - 1.0);

    let (h_cells, _) = grid.split(lab.graph(), "harnack", 2)?;
    let hs = lab.map_cells(&h_cells, |c| {
        Ok(potential::harnack_constant(lab.graph(), c.x, c.radius)?.value)
    })?;
    let harnack = first_max(hs.into_iter().zip(h_cells.iter().copied()));
    let theta = harnack
        .as_ref()
        .filter(|h| h.value.is_finite())
        .map(|h| h.value.ln() / 3f64.ln());

    let g = lab.graph();
    let prefactors = lab.map_cells(&cells, |c| {
        let (x, r) = (c.x, c.radius);
        let rf = r as f64;
        let shell =
            gamma1.map(|g1| Ok::<_, LabError>(lab.annulus_volume(x, r, 2 * r)? / (g.mu(x) * rf.powf(2.0 - g1))));
        let vol = gamma2.map(|g2| Ok::<_, LabError>(lab.volume(x, r)? / (lab.e(x, r)? * g.mu(x) * rf.powf(g2))));
        let barl = theta.map(|t| Ok::<_, LabError>(lab.volume(x, r)? / rf.powf(1.0 + t)));
        Ok((shell.transpose()?, vol.transpose()?, barl.transpose()?))
    })?;
    let fold = |vals: Vec<Option<f64>>, min: bool| -> Option<f64> {
        let vals: Vec<f64> = vals.into_iter().flatten().collect();
        if vals.is_empty() {
            None
        } else if min {
            Some(vals.into_iter().fold(f64::INFINITY, f64::min))
        } else {
            Some(vals.into_iter().fold(f64::NEG_INFINITY, f64::max))
        }
    };
    Ok(DoublingReport {
        grid: grid.clone(),
        gamma1,
        gamma2,
        theta,
        product,
        product_at_least_one: product >= 1.0 - SLACK_TOLERANCE,
        shell_volume_prefactor: fold(prefactors.iter().map(|p| p.0).collect(), true),
        volume_exit_prefactor: fold(prefactors.iter().map(|p| p.1).collect(), false),
        volume_harnack_prefactor: fold(prefactors.iter().map(|p| p.2).collect(), false),
        c1,
        c2,
        harnack,
        cells: cells.len(),
        excluded,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FPoint {
    pub radius: u32,
    pub value: f64,
    pub argmin: Vertex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearGrowthCheck {
    pub multiplier: u32,
    pub radius: u32,
    /// `F(L R)` and `F(R)`, both over the centers valid at `L R`.
    pub f_long: f64,
    pub f_short: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntiDoublingReport {
    pub grid: SweepGrid,
    /// `F(R)` over the centers whose `B(x, R)` is clean.
    pub f: Vec<FPoint>,
    pub linear_growth: Vec<LinearGrowthCheck>,
    pub linear_growth_holds: bool,
    /// Smallest multiplier `A` with `min_R F(A R) / F(R) > A`, and that minimum.
    pub a_f: Option<u32>,
    pub b_f: Option<f64>,
    /// Slope of `ln F` against `ln R`, when at least four radii are available.
    pub beta1: Option<f64>,
    /// `min_R F(R) / R^2`.
    pub quadratic_constant: f64,
}

fn f_over(lab: &Lab, centers: &[Vertex], radius: u32) -> Result<Option<(f64, Vertex)>> {
    let mut best: Option<(f64, Vertex)> = None;
    for &x in centers {
        let e = lab.e(x, radius)?;
        if best.is_none_or(|b| e < b.0) {
            best = Some((e, x));
        }
    }
    Ok(best)
}

fn valid_centers(lab: &Lab, grid: &SweepGrid, need: u32) -> Result<Vec<Vertex>> {
    let mut out = Vec::new();
    for &x in &grid.centers {
        if lab.clean_radius(x)? >= need {
            out.push(x);
        }
    }
    Ok(out)
}

const MULTIPLIERS: [u32; 3] = [2, 3, 4];
const MAX_STRONG_MULTIPLIER: u32 = 8;

pub fn strong_antidoubling(lab: &Lab, grid: &SweepGrid) -> Result<AntiDoublingReport> {
    let mut f = Vec::new();
    for &r in &grid.radii {
        let centers = valid_centers(lab, grid, r)?;
        if let Some((value, argmin)) = f_over(lab, &centers, r)? {
            f.push(FPoint {
                radius: r,
                value,
                argmin,
            });
        }
    }
    if f.is_empty() {
        return Err(LabError::EmptyGrid(
            "no center has a clean ball at any grid radius".into(),
        ));
    }
    let ratio_at = |a: u32, r: u32| -> Result<Option<(f64, f64)>> {
        let centers = valid_centers(lab, grid, a * r)?;
        Ok(match (f_over(lab, &centers, a * r)?, f_over(lab, &centers, r)?) {
            (Some(long), Some(short)) => Some((long.0, short.0)),
            _ => None,
        })
    };
    let mut linear_growth = Vec::new();
    for l in MULTIPLIERS {
        for &r in &grid.radii {
            if let Some((f_long, f_short)) = ratio_at(l, r)? {
                linear_growth.push(LinearGrowthCheck {
                    multiplier: l,
                    radius: r,
                    f_long,
                    f_short,
                    holds: f_long >= l as f64 * f_short * (1.0 - SLACK_TOLERANCE),
                });
            }
        }
    }
    let mut a_f = None;
    let mut b_f = None;
    for a in 2..=MAX_STRONG_MULTIPLIER {
        let mut worst: Option<f64> = None;
        for &r in &grid.radii {
            if let Some((long, short)) = ratio_at(a, r)? {
                let q = long / short;
                worst = Some(worst.map_or(q, |w: f64| w.min(q)));
            }
        }
        match worst {
            Some(b) if b > a as f64 => {
                a_f = Some(a);
                b_f = Some(b);
                break;
            }
            None => break,
            _ => {}
        }
    }
    let beta1 = (f.len() >= MIN_FIT_RADII).then(|| {
        let pts: Vec<(f64, f64)> = f.iter().map(|p| ((p.radius as f64).ln(), p.value.ln())).collect();
        linear_fit(&pts).0
    });
    let quadratic_constant = f
        .iter()
        .map(|p| p.value / (p.radius as f64).powi(2))
        .fold(f64::INFINITY, f64::min);
    Ok(AntiDoublingReport {
        grid: grid.clone(),
        linear_growth_holds: linear_growth.iter().all(|c| c.holds),
        f,
        linear_growth,
        a_f,
        b_f,
        beta1,
        quadratic_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Exec;
    use crate::generators::{lattice_box, vicsek_tree};

    #[test]
    fn path_doubling_constants_follow_closed_forms() {
        // rho(x, r, R) = (R - r + 1)/2 on the two-sided path.
        let fx = lattice_box(1, 129).unwrap();
        let lab = Lab::new(&fx.graph, Exec::default());
        let grid = SweepGrid::new(&fx.graph, vec![fx.center.unwrap()], vec![2, 4, 8, 16]).unwrap();
        let rep = resistance_doubling(&lab, &grid).unwrap();
        let r = 16.0;
        assert!((rep.c1.value - (3.0 * r + 1.0) / (r + 1.0)).abs() < 1e-9);
        assert!((rep.c2.value - (3.0 * r + 1.0) / (2.0 * r + 1.0)).abs() < 1e-9);
        let expect = 2.0 * r * r / ((r + 1.0) * (2.0 * r + 1.0));
        assert!((rep.product - expect).abs() < 1e-9);
        assert!(!rep.product_at_least_one);
        assert!(rep.harnack.as_ref().unwrap().value.is_finite());
    }

    #[test]
    fn tree_resistance_is_linear() {
        let fx = vicsek_tree(4).unwrap();
        let lab = Lab::new(&fx.graph, Exec::default());
        let grid = SweepGrid::new(&fx.graph, vec![fx.center.unwrap()], vec![2, 4, 8]).unwrap();
        let rep = resistance_doubling(&lab, &grid).unwrap();
        assert!(rep.c1.value > 1.0 && rep.c2.value > 1.0);
    }

    #[test]
    fn exit_time_anti_doubling_on_plane() {
        let fx = lattice_box(2, 41).unwrap();
        let lab = Lab::new(&fx.graph, Exec::default());
        let c = fx.center.unwrap();
        let grid = SweepGrid::new(&fx.graph, vec![c], vec![1, 2, 4, 8]).unwrap();
        let rep = strong_antidoubling(&lab, &grid).unwrap();
        assert!(rep.linear_growth_holds, "{:?}", rep.linear_growth);
        assert_eq!(rep.a_f, Some(2));
        assert!(rep.b_f.unwrap() > 2.0);
        assert!((rep.beta1.unwrap() - 2.0).abs() < 0.3);
        assert!(rep.quadratic_constant >= 0.5);
    }
}
