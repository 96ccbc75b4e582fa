//! Dense complex matrices, spectral norms and analytic polynomials.

pub mod families;
pub mod matrix;
pub mod norm;
pub mod persist;
pub mod poly;

pub use matrix::{block_matrix, conj, kron, transpose, ComplexMatrix};
pub use norm::{
    lanczos_norm, op_norm, op_norm_with, power_norm, top_singular_pair, LinearOperator, NormEstimate, NormMethod, NormOptions,
    SingularPair,
};
pub use poly::{
    poly_derivative, poly_eval, poly_of_matrix, sup_norm, toeplitz, toeplitz_block_apply, Polynomial, SupNorm,
};
