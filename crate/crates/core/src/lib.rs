//! Lagrange `P_k` finite elements on randomized triangulations of the unit
//! square, together with the probabilistic laws that compare the accuracy of
//! two elements `P_k` and `P_m` at a fixed mesh size.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! file system, threads or the command line lives in the `relacc` crate.
//!
//! Module map:
//!
//! * [`meshgen`]: seeded jittered-grid triangulations with quality repair.
//! * [`linalg`]: compressed-row symmetric matrices and Jacobi-preconditioned CG.
//! * [`fem`]: reference elements, quadrature, DOF numbering, assembly, H1 error.
//! * [`problems`]: manufactured solutions (Runge, smooth, polynomial patch).
//! * [`laws`]: bound-coefficient MLE, critical mesh size, two-steps and sigmoid laws.
#![no_std]

extern crate alloc;

pub mod fem;
pub mod laws;
pub mod linalg;
pub mod meshgen;
pub mod problems;
pub mod seed;

pub use fem::{h1_error, solve_poisson, FemError, FemOptions, FemSolution, NormKind};
pub use laws::{
    empirical_frequency, estimate_coefficient, estimate_h_star, sigmoid_law, two_steps_law,
    AccuracyModel, BoundCoefficient, ErrorSample, LawError,
};
pub use linalg::{cg_solve, CgOptions, CsrMatrix, LinalgError, SolveReport};
pub use meshgen::{generate_mesh, mesh_statistics, Mesh, MeshError, MeshParams, MeshStats};
pub use problems::{ProblemCase, ProblemError};
