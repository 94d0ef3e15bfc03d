//! Finite-element experiment on a graded criss-cross mesh of `(−1, 1)²`.

pub mod energy;
pub mod experiment;
pub mod enrichment;
pub mod mesh;
pub mod solver;
pub mod sparse;

pub use energy::{functional_g, modular_energy, modular_energy_gradient, separating_functional, EnrichedField};
pub use enrichment::Enrichment;
pub use mesh::{build_mesh, Element, MeshSpace};
pub use solver::{minimize, BoundaryData, MinimizeOptions, Minimizer};
pub use experiment::{
    cone_trace_diagnostic, gap_experiment, gap_experiment_fields, gap_level, gap_level_fields, scaling_probe, ConeTrace, ConeTraceRow,
    GapLevel, GapMode, GapOptions, GapReport, Iterations, LevelFields,
};
