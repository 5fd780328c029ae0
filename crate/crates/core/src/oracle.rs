//! Dense reference computations used only by tests. They work in the original
//! (non-symmetric) `I - P^A` form with plain Gaussian elimination and the
//! Jacobi eigenvalue method, sharing nothing with the sparse solvers.

use crate::graph::{VertexSet, WeightedGraph};

fn killed_matrix(g: &WeightedGraph, a: &VertexSet) -> Vec<Vec<f64>> {
    let ids = a.as_slice();
    ids.iter()
        .map(|&y| {
            ids.iter()
                .map(|&z| (if y == z { 1.0 } else { 0.0 }) - g.transition(y, z))
                .collect()
        })
        .collect()
}

pub fn solve_dense(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / m[i][i];
    }
    x
}

/// `E_z(A)` for every vertex, from `(I - P^A) E = 1`.
pub fn exit_times(g: &WeightedGraph, a: &VertexSet) -> Vec<f64> {
    let sol = solve_dense(killed_matrix(g, a), vec![1.0; a.len()]);
    let mut out = vec![0.0; g.vertex_count()];
    for (v, e) in a.iter().zip(sol) {
        out[v] = e;
    }
    out
}

/// Smallest eigenvalue of `I - P^A`, via cyclic Jacobi on the symmetrized matrix.
pub fn smallest_eigenvalue(g: &WeightedGraph, a: &VertexSet) -> f64 {
    let ids = a.as_slice();
    let n = ids.len();
    let mut s: Vec<Vec<f64>> = ids
        .iter()
        .map(|&y| {
            ids.iter()
                .map(|&z| {
                    let delta = if y == z { 1.0 } else { 0.0 };
                    delta - g.weight(y, z) / (g.mu(y) * g.mu(z)).sqrt()
                })
                .collect()
        })
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| s[i][j].powi(2))
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if s[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (skp, skq) = (s[k][p], s[k][q]);
                    s[k][p] = c * skp - sn * skq;
                    s[k][q] = sn * skp + c * skq;
                }
                for k in 0..n {
                    let (spk, sqk) = (s[p][k], s[q][k]);
                    s[p][k] = c * spk - sn * sqk;
                    s[q][k] = sn * spk + c * sqk;
                }
            }
        }
    }
    (0..n).map(|i| s[i][i]).fold(f64::INFINITY, f64::min)
}
