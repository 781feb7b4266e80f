//! Exact computations for twisted Calabi-Yau threefold families: Jacobian
//! rings, Griffiths-Dwork reduction, Picard-Fuchs operators, relations among
//! deformation monomials and hypergeometric I-function checks.
//!
//! The core is generic over the exact coefficient field ([`scalar::Field`]);
//! the aliases below fix the two fields used in practice.

pub mod diffop;
pub mod family;
pub mod gdwork;
pub mod groebner;
pub mod iseries;
pub mod relations;
pub mod scalar;
pub mod wpoly;

pub use scalar::{Field, ParamPolynomial, Rational, RationalFunction};
