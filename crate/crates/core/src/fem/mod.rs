//! Piecewise-linear finite elements on the unit disk.

pub mod mesh;
pub mod solve;
pub mod sparse;

pub use mesh::{mesh_disk, DiscreteField, DiskMesh, MAX_NODES};
pub use solve::{
    assemble_gradient, assemble_hessian, energy, minimize, minimize_from, solve_frozen, solve_u_dependent,
    solve_u_dependent_from, Discretization, Frozen, LogRow, NewtonOptions, PicardOptions, SolveLog,
};
pub use sparse::{bicgstab, pcg, CsrMatrix, KrylovOutcome};
