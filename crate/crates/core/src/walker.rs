//! Monte Carlo simulation of the reversible walk.
//!
//! Walk `i` draws from a ChaCha8 stream keyed by `(seed, i)`, so every estimate
//! is reproducible regardless of how walks are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::graph::{BallSpec, Vertex, WeightedGraph};

/// Fraction of capped walks above which an estimate is flagged invalid.
pub const MAX_CAPPED_FRACTION: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub seed: u64,
    pub n_walks: u64,
    pub step_cap: u64,
}

impl WalkConfig {
    /// Step cap of `100 * 100 R^2`, used when no exact exit time is known.
    pub fn for_radius(seed: u64, n_walks: u64, radius: u32) -> Self {
        let r = radius.max(1) as u64;
        WalkConfig {
            seed,
            n_walks,
            step_cap: 10_000 * r * r,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_walks == 0 {
            return Err(LabError::invalid("n_walks must be positive"));
        }
        if self.step_cap == 0 {
            return Err(LabError::invalid("step_cap must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Walks that exited (capped walks excluded).
    pub n: u64,
    pub capped_count: u64,
    pub valid: bool,
}

/// Per-walk generator for walk number `index`.
pub fn walk_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One step of the walk from `x`: neighbour `y` with probability `mu_xy / mu(x)`.
pub fn step<R: Rng + ?Sized>(g: &WeightedGraph, x: Vertex, rng: &mut R) -> Vertex {
    let target = rng.gen::<f64>() * g.mu(x);
    let mut acc = 0.0;
    let mut last = x;
    for (y, w) in g.neighbors(x) {
        acc += w;
        last = y;
        if target < acc {
            return y;
        }
    }
    last
}

/// Outcome of a single walk killed on leaving a region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkOutcome {
    Exited { steps: u64, at: Vertex },
    Capped,
}

pub fn run_walk<R: Rng + ?Sized>(
    g: &WeightedGraph,
    start: Vertex,
    inside: &[bool],
    cap: u64,
    rng: &mut R,
) -> WalkOutcome {
    let mut x = start;
    for k in 1..=cap {
        x = step(g, x, rng);
        if !inside[x] {
            return WalkOutcome::Exited { steps: k, at: x };
        }
    }
    WalkOutcome::Capped
}

fn simulate(g: &WeightedGraph, x: Vertex, radius: u32, cfg: &WalkConfig, exec: Exec) -> Result<Vec<WalkOutcome>> {
    cfg.validate()?;
    if radius == 0 {
        return Err(LabError::invalid("exit time needs radius >= 1"));
    }
    g.check_clean_ball(x, radius)?;
    let inside = g.ball(BallSpec::new(x, radius))?.mask(g.vertex_count());
    let indices: Vec<u64> = (0..cfg.n_walks).collect();
    Ok(exec.map(&indices, |&i| {
        run_walk(g, x, &inside, cfg.step_cap, &mut walk_rng(cfg.seed, i))
    }))
}

fn summarize(outcomes: &[WalkOutcome]) -> McEstimate {
    let mut n = 0u64;
    let mut capped = 0u64;
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for o in outcomes {
        match *o {
            WalkOutcome::Exited { steps, .. } => {
                n += 1;
                let s = steps as f64;
                sum += s;
                sum_sq += s * s;
            }
            WalkOutcome::Capped => capped += 1,
        }
    }
    let mean = if n > 0 { sum / n as f64 } else { f64::NAN };
    let std_error = if n > 1 {
        let var = ((sum_sq - n as f64 * mean * mean) / (n - 1) as f64).max(0.0);
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    let total = outcomes.len() as f64;
    McEstimate {
        mean,
        std_error,
        n,
        capped_count: capped,
        valid: n > 0 && (capped as f64) <= MAX_CAPPED_FRACTION * total,
    }
}

/// Mean of `T_{B(x, R)}` over `cfg.n_walks` walks started at `x`.
pub fn mc_exit_time(g: &WeightedGraph, x: Vertex, radius: u32, cfg: &WalkConfig) -> Result<McEstimate> {
    mc_exit_time_with(g, x, radius, cfg, Exec::default())
}

pub fn mc_exit_time_with(
    g: &WeightedGraph,
    x: Vertex,
    radius: u32,
    cfg: &WalkConfig,
    exec: Exec,
) -> Result<McEstimate> {
    Ok(summarize(&simulate(g, x, radius, cfg, exec)?))
}

/// Exit-time estimate together with exit-position counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExitSample {
    pub estimate: McEstimate,
    /// `(boundary vertex, number of walks that exited there)`, sorted by vertex.
    pub exit_counts: Vec<(Vertex, u64)>,
}

pub fn mc_exit_sample(g: &WeightedGraph, x: Vertex, radius: u32, cfg: &WalkConfig, exec: Exec) -> Result<ExitSample> {
    let outcomes = simulate(g, x, radius, cfg, exec)?;
    let mut counts = std::collections::BTreeMap::new();
    for o in &outcomes {
        if let WalkOutcome::Exited { at, .. } = o {
            *counts.entry(*at).or_insert(0u64) += 1;
        }
    }
    Ok(ExitSample {
        estimate: summarize(&outcomes),
        exit_counts: counts.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::lattice_box;
    use crate::potential::mean_exit_time;

    #[test]
    fn step_frequencies_follow_weights() {
        let g = WeightedGraph::new(3, vec![(0, 1, 2.0), (0, 2, 1.0)]).unwrap();
        let mut rng = walk_rng(11, 0);
        let n = 300_000;
        let hits = (0..n).filter(|_| step(&g, 0, &mut rng) == 1).count() as f64;
        let p = 2.0 / 3.0;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits / n as f64 - p).abs() <= 4.0 * sigma);
    }

    #[test]
    fn radius_one_exits_in_one_step() {
        let fx = lattice_box(2, 9).unwrap();
        let cfg = WalkConfig::for_radius(3, 500, 1);
        let est = mc_exit_time(&fx.graph, fx.center.unwrap(), 1, &cfg).unwrap();
        assert_eq!((est.mean, est.std_error, est.n, est.capped_count), (1.0, 0.0, 500, 0));
        assert!(est.valid);
    }

    #[test]
    fn interval_exit_agrees_with_exact() {
        let fx = lattice_box(1, 21).unwrap();
        let c = fx.center.unwrap();
        let exact = mean_exit_time(&fx.graph, c, 5).unwrap();
        let est = mc_exit_time(&fx.graph, c, 5, &WalkConfig::for_radius(1, 10_000, 5)).unwrap();
        assert!((est.mean - exact).abs() <= 4.0 * est.std_error, "{est:?} vs {exact}");
    }

    #[test]
    fn reproducible_across_exec_modes() {
        let fx = lattice_box(2, 21).unwrap();
        let c = fx.center.unwrap();
        let cfg = WalkConfig::for_radius(7, 2_000, 4);
        let a = mc_exit_sample(&fx.graph, c, 4, &cfg, Exec::Sequential).unwrap();
        let b = mc_exit_sample(&fx.graph, c, 4, &cfg, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn capped_walks_are_counted_and_invalidate() {
        let fx = lattice_box(2, 21).unwrap();
        let cfg = WalkConfig {
            seed: 1,
            n_walks: 200,
            step_cap: 3,
        };
        let est = mc_exit_time(&fx.graph, fx.center.unwrap(), 6, &cfg).unwrap();
        assert_eq!(est.n + est.capped_count, 200);
        assert!(est.capped_count > 2 && !est.valid);
        assert!(WalkConfig { n_walks: 0, ..cfg }.validate().is_err());
    }
}
