//! Dense complex linear algebra: matrices, Kronecker products, the matrix
//! exponential, random ensembles, Gram–Schmidt and proportionality tests.

mod linalg;
mod matrix;
mod random;
mod rng;
mod state;

pub use linalg::{
    antisymmetric_projector, compose_perm, cyclic_shift, determinant, expm, gamma_conjugation_check, inverse,
    orthonormal_extend, permutation_operator, proportionality, proportionality_fit, solve, swap_matrix,
    symmetric_projector, Proportionality,
};
pub use matrix::{kron, kron_all, ComplexMatrix};
pub use random::{complex_normal, ginibre, haar_unitary, random_diagonal, random_hermitian, random_state};
pub use rng::RngStream;
pub use state::{vec_inner, vec_norm, StateVector};

pub use num_complex::Complex64 as C64;
