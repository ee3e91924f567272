//! Quadratic finite elements for the torsion problem on star-shaped domains.

pub mod element;
pub mod mesh;
pub mod solve;
pub mod space;
pub mod sparse;

pub use mesh::{generate_mesh, BoundaryEdge, TriMesh};
pub use solve::{
    harmonic_h, solve_domain, solve_torsion, FieldDump, HarmonicField, QuadSample, SolverOptions,
    TorsionField,
};
pub use space::P2Space;
