//! Bundled polynomial fixtures.
//!
//! The 40-term degree-5 qubit SWAP polynomial is shipped as JSON with words
//! transcribed literally. Its printed word order (product vs chronological)
//! is not self-evident, so loading checks proportionality to SWAP on random
//! unitaries and falls back to the per-word reversal if the literal reading
//! fails. The accepted orientation is recorded on the result. For a
//! SWAP target both readings pass, since reversing every word yields
//! p(Xᵀ)ᵀ and SWAP is symmetric; the literal reading is then kept.

use std::sync::OnceLock;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::ncpoly::{json, TensorPoly};
use crate::numkit::{haar_unitary, proportionality_fit, swap_matrix, RngStream};

/// Raw bytes of `omega_d2_m5.json`.
pub const OMEGA_D2_M5_JSON: &str = include_str!("../../fixtures/omega_d2_m5.json");

const LOAD_SAMPLES: usize = 20;
const LOAD_TOL: f64 = 1e-9;
const LOAD_SEED: u64 = 0x0e6a_d2d5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Words used exactly as written.
    Literal,
    /// Every word reversed before use.
    Reversed,
}

#[derive(Clone, Debug)]
pub struct SwapFixture {
    pub poly: TensorPoly,
    pub orientation: Orientation,
    pub metadata: Option<Value>,
}

/// Worst relative residual of `p(V,W) ∝ SWAP` over `samples` Haar draws, or
/// `None` if the evaluation vanished at some draw.
fn swap_residual(p: &TensorPoly, samples: usize, rng: &mut RngStream) -> Result<Option<f64>> {
    let d = 2;
    let swap = swap_matrix(d);
    let mut worst = 0f64;
    for _ in 0..samples {
        let xs: Vec<_> = (0..p.n_vars()).map(|_| haar_unitary(d, rng)).collect();
        let val = p.evaluate(&xs)?;
        if val.norm() < 1e-12 {
            return Ok(None);
        }
        worst = worst.max(proportionality_fit(&val, &swap)?.relative);
    }
    Ok(Some(worst))
}

fn with_orientation(metadata: Option<Value>, o: Orientation) -> Option<Value> {
    let mut m = match metadata {
        Some(Value::Object(m)) => m,
        Some(other) => serde_json::Map::from_iter([("original".to_string(), other)]),
        None => serde_json::Map::new(),
    };
    m.insert("orientation".into(), serde_json::to_value(o).expect("enum serializes"));
    Some(Value::Object(m))
}

/// Parses a two-party qubit SWAP fixture and settles its word orientation.
pub fn load_swap_fixture(bytes: &[u8]) -> Result<SwapFixture> {
    let doc = json::parse_document(bytes)?;
    if doc.poly.n_parties() != 2 {
        return Err(Error::Invalid(format!("swap fixture must be two-party, got {}", doc.poly.n_parties())));
    }
    let mut rng = RngStream::named(LOAD_SEED, "fixture-orientation");
    let literal = swap_residual(&doc.poly, LOAD_SAMPLES, &mut rng)?;
    if literal.is_some_and(|r| r <= LOAD_TOL) {
        let metadata = with_orientation(doc.metadata, Orientation::Literal);
        return Ok(SwapFixture { poly: doc.poly, orientation: Orientation::Literal, metadata });
    }
    let reversed = doc.poly.reverse_words();
    let rev = swap_residual(&reversed, LOAD_SAMPLES, &mut rng)?;
    if rev.is_some_and(|r| r <= LOAD_TOL) {
        let metadata = with_orientation(doc.metadata, Orientation::Reversed);
        return Ok(SwapFixture { poly: reversed, orientation: Orientation::Reversed, metadata });
    }
    Err(Error::Certification(format!(
        "fixture is not proportional to SWAP in either word orientation (literal residual {literal:?}, reversed {rev:?})"
    )))
}

/// The bundled Ω̃ fixture, loaded and checked once per process.
pub fn omega_d2_m5() -> Result<&'static SwapFixture> {
    static CELL: OnceLock<std::result::Result<SwapFixture, String>> = OnceLock::new();
    CELL.get_or_init(|| load_swap_fixture(OMEGA_D2_M5_JSON.as_bytes()).map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::Certification(e.clone()))
}

/// Shorthand for the fixture polynomial.
pub fn omega() -> Result<TensorPoly> {
    Ok(omega_d2_m5()?.poly.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixture_is_literal_product_order() {
        let f = omega_d2_m5().unwrap();
        assert_eq!(f.orientation, Orientation::Literal);
        assert_eq!(f.poly.term_count(), 40);
        assert_eq!(f.poly.degrees(), &[5, 5]);
    }

    #[test]
    fn reversal_is_transpose_so_both_orientations_pass() {
        let f = omega_d2_m5().unwrap();
        let rev = f.poly.reverse_words();
        let g = load_swap_fixture(&json::serialize(&rev)).unwrap();
        assert_eq!(g.orientation, Orientation::Literal);
        let mut rng = RngStream::new(3, 0);
        let xs: Vec<_> = (0..2).map(|_| haar_unitary(2, &mut rng)).collect();
        let xt: Vec<_> = xs.iter().map(|x| x.transpose()).collect();
        let lhs = rev.evaluate(&xs).unwrap();
        let rhs = f.poly.evaluate(&xt).unwrap().transpose();
        assert!((&lhs - &rhs).norm() < 1e-10);
    }

    #[test]
    fn tampered_fixture_is_rejected() {
        let tampered = OMEGA_D2_M5_JSON.replacen("\"re\":1.0", "\"re\":-1.0", 1);
        assert!(matches!(load_swap_fixture(tampered.as_bytes()), Err(Error::Certification(_))));
    }
}
