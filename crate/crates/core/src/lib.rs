//! Sharing coeffects and type modifiers for a small imperative object calculus.
//!
//! The crate is organised bottom-up: [`algebra`] provides semirings and
//! modules, [`lang`] the calculus, [`interp`] a reference interpreter,
//! [`sharing`] and [`modifiers`] the two checkers, [`lambda`] a graded
//! λ-calculus over the same algebra, and [`harness`] the differential checks
//! tying checkers and interpreter together.

pub mod algebra;
pub mod harness;
pub mod interp;
pub mod lambda;
pub mod lang;
pub mod modifiers;
pub mod sharing;
