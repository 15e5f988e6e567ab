//! Shape functions, quadrature, sparse assembly and linear solves.

pub mod assemble;
pub mod csr;
pub mod quadrature;
pub mod shape;
pub mod solve;

pub use assemble::{
    assemble_advection, assemble_pressure_load, assemble_thick_elasticity, assemble_thin_wall,
    assemble_transformed_divergence, assemble_transformed_stiffness, assemble_weighted_mass,
    assemble_weighted_mass_vector, qp_jacobian, qp_ones, qp_v_over_r, AdvectionMatrices,
    FormWeights, ThinWallMatrices,
};
pub use csr::{Coo, CsrMatrix};
pub use solve::{solve_sparse, Factorization, SolveKind, SOLVE_TOL};
