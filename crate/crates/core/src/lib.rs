//! Post-selected scattering protocols as homogeneous tensor matrix polynomials.
//!
//! A lab that scatters probes off uncontrolled quantum systems and
//! post-selects its quantum memory applies a polynomial in the free
//! propagator `V` and the probe-conditioned propagator `W` to the systems.
//! This crate builds, searches for, verifies and simulates such polynomials,
//! and plans time translations (rewinding, freezing, fast-forwarding)
//! against the feasibility bound `Σ_{T>0} T + (d−1) Σ_{T<0} |T| ≤ n T'`.

pub mod constructions;
pub mod error;
pub mod fixtures;
pub mod ncpoly;
pub mod numkit;
mod par;
pub mod planner;
pub mod protocol;
pub mod reproduce;
pub mod search;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
