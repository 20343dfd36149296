//! Quantified bit-vector solving by counterexample-guided instantiation
//! with symbolic terms built from invertibility conditions.

pub mod bv;
pub mod catalog;
pub mod cegqi;
pub mod qfbv;
pub mod smtlib;
pub mod solve;
pub mod term;
pub mod verifier;
