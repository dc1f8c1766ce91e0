//! Desk-scale constructions behind hypercyclic algebras.
//!
//! The crate works in three operator models:
//!
//! * convolution operators `φ(D)` on entire functions, and the translation /
//!   dilation composition models, all of which act diagonally on a family of
//!   multiplicative eigenvectors `E(λ)` ([`eigenmodel`]);
//! * polynomials `P(B)` of the backward shift on `ℓ¹(ℕ)` with the Cauchy
//!   product, acting on polynomial-geometric sequences ([`shiftalg`]).
//!
//! [`search`] finds the parameters each construction needs and records them
//! as [`certificate`]s. [`engine`] builds the witness vectors, scans `N` and
//! certifies the transitivity-criterion conditions in a [`engine::Transcript`].
//!
//! Everything here is pure computation. IO, file formats and the command line
//! live in the `hyperalg` crate.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod certificate;
pub mod complex;
pub mod eigenmodel;
pub mod engine;
pub mod error;
pub mod faulhaber;
pub mod funcexpr;
pub mod logcomplex;
pub mod parse;
pub mod polynomial;
pub mod search;
pub mod shiftalg;

pub use complex::C64;
pub use error::{Error, Result};
pub use funcexpr::FunctionExpr;
pub use logcomplex::LogComplex;
pub use polynomial::Polynomial;
