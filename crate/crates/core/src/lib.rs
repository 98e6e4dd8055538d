//! Numerical toolkit for lacunary trigonometric products: exact sparse
//! trigonometric polynomials over dyadic rationals, finite products of
//! shifted cosine factors, L^p moments by exact coefficient pairing or
//! adaptive grid quadrature, and stable polynomial approximation for the
//! majorant constructions used by the verification layer.

pub mod approx;
pub mod dyadic;
pub mod error;
pub mod lacunary;
pub mod moments;
pub mod quadrature;
pub mod riesz;
pub mod trigpoly;

pub use error::{Error, Result};
