//! Polynomial multigrid for nodal discontinuous Galerkin discretizations of
//! the periodic 2D Poisson equation.
//!
//! The pieces, bottom up:
//!
//! * [`basis`]: GLL nodes, weights and 1D standard matrices.
//! * [`mesh`]: periodic Cartesian meshes and coefficient fields.
//! * [`operator`]: the unified IP/LDG operator `A = M2 (x) L1 + L2 (x) M1`.
//! * [`schwarz`]: element- and face-centered overlapping Schwarz smoothers
//!   with fast-diagonalization subdomain solves.
//! * [`multigrid`]: the polynomial hierarchy and V-cycle.
//! * [`krylov`]: conjugate gradients and multigrid-preconditioned CG.
//! * [`metrics`]: convergence rates and the cycle cost model.

pub mod basis;
pub mod error;
pub mod krylov;
pub mod mesh;
pub mod metrics;
pub mod multigrid;
pub mod operator;
pub mod schwarz;

pub use basis::{InterpolationMatrix, ReferenceBasis};
pub use error::{Error, Result};
pub use mesh::{CartesianMesh2D, FieldShape, GlobalIndexMap, NodalField};
pub use operator::{DgParams, FluxForm, GlobalOperator1D, SystemOperator};
