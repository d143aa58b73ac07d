//! Nyström solver for the interior Laplace Dirichlet problem on planar
//! domains whose boundary has a single corner.
//!
//! The boundary is split into two short arms at the corner and one smooth
//! remainder. The double-layer equation is discretized with a Lobatto rule
//! for the Jacobi weight `x(1 − x)`, with a small modification of the wedge
//! operator near the corner that keeps the linear systems well conditioned.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod linalg;
pub mod potential;
pub mod problems;
pub mod quadrature;
pub mod system;

pub use error::{Error, Result};
pub use geometry::{split_boundary, ArcSystem, BoundaryCurve, CornerData, ParametricCurve, Vec2};
pub use kernels::KernelSet;
pub use potential::{evaluate_potential, PotentialEvaluation};
pub use problems::{example_problem, ProblemSpec};
pub use quadrature::{lobatto_rule, QuadratureRule};
pub use system::{assemble, BoundaryData, LinearSystem, NystromSolution, SolverConfig};
