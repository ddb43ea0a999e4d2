//! The sharing coeffect system: bottom-up inference of which free variables
//! may end up connected to each other and to the result.

mod ctx;
mod infer;
mod json;
mod memory;

pub use ctx::{CheckError, ErrorCode, TypeCtx};
pub(crate) use infer::{
    arity, class_of, combine, first_problem, fresh_scale, lookup_sig, mismatch, same_type, unbound,
};
pub use infer::{
    check_method_coherence, check_method_coherence_with, check_table, coherent, infer,
    prepare_table, prepare_table_with, BodyInfer, Deriv, Env, Judgment, MethodReport,
};
pub use json::{judgment_json, SCHEMA};
pub(crate) use memory::check_mem;
pub use memory::{
    mem_env, restriction_holds, type_configuration, type_memory, ConfJudgment, MemTyping,
};
