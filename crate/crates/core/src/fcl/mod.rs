//! Functional constraint logic: syntax, values, traces and offline semantics.

mod ast;
pub mod bound;
pub mod eval;
pub mod names;
pub mod offline;
mod trace;
mod value;

pub use ast::{ArithOp, Bound, CmpOp, Constraint, Endcount, Expr, Formula, SetExpr};
pub(crate) use ast::write_string;
pub use eval::{eval_state, Env, EvalError, Vocabulary};
pub use offline::{eval_offline, ltl_bridge, Binding, LtlOp, Verdict, Witness};
pub use trace::{Attributes, Component, Snapshot, Trace, TraceError};
pub use value::Value;
