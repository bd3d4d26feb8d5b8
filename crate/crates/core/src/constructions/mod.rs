//! Polynomial constructions: central polynomials, rewinders, fast-forward
//! and fast-rewind compositions, and symbolic permutation polynomials.

mod central;
mod fastforward;
mod projectors;
mod rewind;

pub use central::{
    central_filler, formanek_central, formanek_central_unguarded, pad_central, qubit_central, CentralPoly,
    FORMANEK_MAX_DIM,
};
pub use fastforward::{compose_fast_forward, compose_fast_rewind, SwapPolys};
pub use projectors::{
    check_bundle, check_bundle_extended, perm_poly, perm_target, scaled_fit, swap_poly_symbolic, transposition_chain,
    BundleCheck, PermutationPolyBundle, ScaledFit,
};
pub use rewind::{commutator_step, qubit_rewind, rewind_poly, rewind_poly_vw, Rewinder};
