//! Cylinder functions, their algebra and exact grid norms.

mod expr;
mod function;
mod holder;
mod random;

pub use expr::{Expr, Func};
pub use function::CylinderFunction;
pub use holder::{
    holder_constant, holder_constant_scoped, holder_norm, holder_norm_scoped, sup_norm, HolderNorm, PairScope,
};
pub use random::{random_function, ProbeRng, PROBE_GENERATOR};
