//! Expression language for RHS families F_ε(t, x, p): parser, symbolic
//! differentiation, and ε-aware primitives (scaled mollifier, mollified
//! Heaviside, log(1/ε)).

pub mod ast;
pub mod deriv;
pub mod eval;
pub mod mollifier;
pub mod net;
pub mod parse;

pub use ast::{Expr, ExprKind, Signature, Span, Var};
pub use deriv::differentiate;
pub use eval::{eval, EvalEnv};
pub use mollifier::{std_mollifier, Mollifier};
pub use net::{rhs_net_from_sources, to_function_net, ExprMap, VarLayout};
pub use parse::parse;
