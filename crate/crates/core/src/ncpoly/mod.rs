//! Homogeneous tensor polynomials in noncommuting matrix variables.
//!
//! Words are stored in matrix-product order: the leftmost letter is the
//! leftmost factor, so the chronologically first probe step corresponds to
//! the last letter. Variable 0 is the free-evolution letter `V`.

mod alg;
mod expr;
mod expr_json;
pub mod json;
mod poly;
mod word;

pub use alg::{ExtendedMatrix, MatAlg, ScaledMatrix};
pub use expr::{poly_mul, tensor_embed, PolyExpr, EXPAND_LIMIT};
pub use expr_json::{expr_from_value, expr_to_value, is_expr_document, load_any, EXPR_FORMAT};
pub use json::PolyDocument;
pub use poly::{names, ColumnProfile, PolyBuilder, TensorPoly, TensorTerm};
pub use word::{Letter, Word};

/// The conventional two-letter alphabet `[V, W]`.
pub fn vw_names() -> Vec<String> {
    names(&["V", "W"])
}
