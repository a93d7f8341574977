//! Projection-based p-interpolation on reference elements.
//!
//! This crate implements the H¹-, H(curl)- and H(div)-conforming
//! projection-based interpolation operators on the equilateral reference
//! triangle and the reference square, together with the machinery they
//! are built from:
//!
//! * hierarchical scalar and vector polynomial spaces with exact
//!   differential-operator matrices ([`spaces`]),
//! * Gauss quadrature on interval/triangle/square, including composite
//!   rules graded towards a vertex or an edge for singular integrands
//!   ([`quadrature`]),
//! * computable Sobolev norms, in particular a discrete fractional-order
//!   norm on edges realized through a generalized eigenproblem on a
//!   high-degree "oracle" space ([`norms`]),
//! * discrete harmonic extension of polynomial boundary traces
//!   ([`extension`]),
//! * regularized Poincaré-type potential operators and the induced
//!   regular decomposition of vector fields ([`poincare`]),
//! * 1D Chebyshev projection with endpoint-matched correctors
//!   ([`approx1d`]),
//! * the interpolation operators themselves ([`interpolation`]) and a
//!   convergence-study harness with rate fitting and CSV output
//!   ([`harness`]).
//!
//! The `pinterp` binary exposes the harness as a CLI; see the README.

pub mod approx1d;
pub mod error;
pub mod extension;
pub mod fields;
pub mod geometry;
pub mod harness;
pub mod interpolation;
pub mod norms;
pub mod poincare;
pub mod poly1d;
pub mod quadrature;
pub mod spaces;

pub use error::{Error, Result};
pub use geometry::{ElementKind, RefElement};
