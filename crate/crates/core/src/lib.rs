//! Numerical verification engine for generalized geometric structures on the
//! double bundle TM ⊕ T*M over a single coordinate chart.
//!
//! The crate builds tensor fields from a small expression language, equips
//! them with affine connections, lifts everything to the double bundle
//! (sections X + η, block operators, induced connections and brackets) and
//! provides sampled residual checks for the algebraic and differential
//! identities these objects satisfy. All derivatives are exact first-order
//! jets; a central finite-difference oracle cross-checks them.

pub mod error;
pub mod jets;
pub mod exprlang;

pub use error::{Error, Result};
pub use jets::Jet;
