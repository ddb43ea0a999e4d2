//! Semirings, modules over them, and the sharing-link instance.

mod links;
mod module;
mod semiring;

pub use links::{close_all, CanonGroup, Canonical, Coeffect, CoeffectCtx, Link, LinkGen};
pub use module::{ClosedCtx, Closure, Endo, FinMap, Fixpoint, Identity, Module, Structural};
pub use semiring::{Nat, Semiring, UsageGrade};
