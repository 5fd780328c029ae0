//! Log-log exponent fits of volume, exit time and annulus conductance.

use serde::{Deserialize, Serialize};

use super::Lab;
use crate::error::{LabError, Result};
use crate::graph::Vertex;

pub const MIN_FIT_RADII: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub r_squared: f64,
    pub radii: Vec<u32>,
    /// `(ln R, ln value)` pairs the fit was computed from.
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub x: Vertex,
    /// Volume growth `V(x, R) ~ R^alpha`.
    pub alpha: ExponentFit,
    /// Exit time `E(x, R) ~ R^beta`.
    pub beta: ExponentFit,
    /// Annulus conductance `1 / rho(x, R, 2R) ~ R^gamma`.
    pub gamma: ExponentFit,
    /// `beta - (alpha - gamma)`.
    pub erdim_residual: f64,
}

/// Ordinary least squares `y = a + b x`; returns `(b, a, stderr(b), r^2)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let sse: f64 = points.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum();
    let stderr = if points.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    (b, a, stderr, r2)
}

fn fit_series<F>(lab: &Lab, x: Vertex, radii: &[u32], margin: u32, f: F) -> Result<ExponentFit>
where
    F: Fn(u32) -> Result<f64> + Sync + Send,
{
    let clean = lab.clean_radius(x)?;
    let valid: Vec<u32> = radii
        .iter()
        .copied()
        .filter(|&r| r >= 1 && margin * r <= clean)
        .collect();
    if valid.len() < MIN_FIT_RADII {
        return Err(LabError::InsufficientRadii {
            needed: MIN_FIT_RADII,
            found: valid.len(),
        });
    }
    let values = lab
        .exec()
        .map(&valid, |&r| f(r))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let points: Vec<(f64, f64)> = valid
        .iter()
        .zip(&values)
        .map(|(&r, &v)| ((r as f64).ln(), v.ln()))
        .collect();
    let (exponent, intercept, stderr, r_squared) = linear_fit(&points);
    Ok(ExponentFit {
        exponent,
        intercept,
        stderr,
        r_squared,
        radii: valid,
        points,
    })
}

/// Fits each series over its own valid radii (volume and exit time need `B(x, R)`,
/// the conductance needs `B(x, 2R)`).
pub fn fit_exponents(lab: &Lab, x: Vertex, radii: &[u32]) -> Result<ExponentReport> {
    let mut radii = radii.to_vec();
    radii.sort_unstable();
    radii.dedup();
    let alpha = fit_series(lab, x, &radii, 1, |r| lab.volume(x, r))?;
    let beta = fit_series(lab, x, &radii, 1, |r| lab.e(x, r))?;
    let gamma = fit_series(lab, x, &radii, 2, |r| Ok(1.0 / lab.rho(x, r, 2 * r)?))?;
    let erdim_residual = beta.exponent - (alpha.exponent - gamma.exponent);
    Ok(ExponentReport {
        x,
        alpha,
        beta,
        gamma,
        erdim_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Exec;
    use crate::generators::lattice_box;

    #[test]
    fn exact_power_law_is_recovered() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0]
            .iter()
            .map(|r| (r.ln(), (3.0 * r.powf(1.7)).ln()))
            .collect();
        let (b, a, se, r2) = linear_fit(&pts);
        assert!((b - 1.7).abs() < 1e-12 && (a - 3f64.ln()).abs() < 1e-12);
        assert!(se < 1e-10 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn line_exit_exponent_is_two() {
        let fx = lattice_box(1, 129).unwrap();
        let lab = Lab::new(&fx.graph, Exec::default());
        let rep = fit_exponents(&lab, fx.center.unwrap(), &[4, 8, 16, 32]).unwrap();
        assert!((rep.beta.exponent - 2.0).abs() < 1e-9);
        assert!(rep.gamma.exponent < -0.8);
    }

    #[test]
    fn too_few_radii() {
        let fx = lattice_box(1, 33).unwrap();
        let lab = Lab::new(&fx.graph, Exec::default());
        let err = fit_exponents(&lab, fx.center.unwrap(), &[2, 4, 8, 16]).unwrap_err();
        assert!(matches!(err, LabError::InsufficientRadii { needed: 4, found: 3 }));
    }
}
