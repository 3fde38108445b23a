//! Exact arithmetic for truncated Hahn series over lexicographic exponent
//! lattices, and the algebra of their valuation-preserving automorphisms:
//! normal forms, canonical lifts, extraction and decomposition, twisted
//! products, plus the Laurent/Schilling, Cremona/Moebius, Puiseux and
//! Rayner-family specializations.
//!
//! Everything is exact: coefficients live in `Q` or `Q(√m)`, exponents in
//! `(1/L)Z^d` ordered lexicographically, and every series carries a cutoff
//! below which its coefficients are guaranteed.
//!
//! Start with the runnable examples (`cargo run --example series_arithmetic`
//! and friends) or the `hahn` command-line tool.

pub mod autalg;
pub mod cli;
pub mod coeffs;
pub mod error;
pub mod exponents;
pub mod laurent;
pub mod parse;
pub mod puiseux;
pub mod rational;
pub mod rayner;
pub mod series;
pub mod verify;

pub use coeffs::{FieldAut, FieldDescriptor, FieldElement, FieldKind};
pub use error::{Error, Result};
pub use exponents::{Exponent, GroupDescriptor, GroupKind, OrderAutMatrix};
pub use series::{Series, SummableFamily};
