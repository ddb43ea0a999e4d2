//! Type modifiers on top of sharing coeffects: `mut`, `read`, `imm`,
//! `caps` and internal seals. Promotion turns a `mut` (`read`) expression
//! into `caps` (`imm`) when no mutable variable is connected to its result.

mod infer;
mod lattice;
mod memory;

pub use infer::{
    check_method_coherence_mod, check_table_mod, ctx_sum_linear, infer_mod, prepare_table_mod,
    seal, Mode,
};
pub use lattice::{combine, equiv, is_linear, leq, modif, subtype};
pub use memory::{
    deep_modifiers_hold, imm_closure, mod_sharing, type_configuration_mod, type_memory_mod,
    ModConfJudgment, ModMap,
};

#[cfg(test)]
mod tests;
