//! Potential theory on finite weighted graphs: exit times, effective resistance,
//! Green kernels, Dirichlet eigenvalues, Harnack constants, a Monte Carlo walker
//! and a sweep engine that measures the classical conditions and inequalities
//! relating them.

pub mod conditions;
pub mod error;
pub mod exec;
pub mod generators;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod potential;
pub mod walker;

#[cfg(test)]
mod oracle;

pub use error::{LabError, Result};
pub use exec::Exec;
pub use generators::{
    binary_tree, generate, lattice_box, sierpinski_gasket, vicsek_tree, Family, FamilySpec, WeightRule,
};
pub use graph::{AnnulusSpec, BallSpec, Fixture, Vertex, VertexSet, WeightedGraph};
pub use potential::{
    dirichlet_potential, exit_time, green, harmonic_measure, harnack_constant, lambda_min, mean_exit_time, resistance,
    resistance_annulus, EigenResult, ExitTimeField, GreenOperator, HarmonicMeasure, PotentialField, Resistance,
};
