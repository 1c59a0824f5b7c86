//! Numerical calculus for ε-parameterized nets of smooth functions.
//!
//! Generalized functions are handled through representatives: nets (u_ε)_ε
//! sampled on a finite geometric ε-grid. The crate certifies the asymptotic
//! hypotheses that the local solution theory needs (uniform bounds,
//! logarithmic derivative growth, c-boundedness, moderateness), constructs
//! local solutions of generalized initial value problems per ε, and checks
//! and solves total-differential (Frobenius) systems by ray reduction.
//!
//! Modules:
//! - [`eps`]: grids, number/point nets, growth classification, equivalence.
//! - [`geom`]: box geometry standing in for open sets and compacts.
//! - [`gf`]: function nets, sup estimation, c-bounds, composition.
//! - [`dsl`]: the RHS expression language with symbolic differentiation.
//! - [`ivp`]: hypothesis certification and the per-ε solution engine.
//! - [`param`]: parameterized families and dependence on initial values.
//! - [`frobenius`]: integrability test and the ray-reduction solver.
//!
//! All certificates are numerical surrogates computed on the grid; they
//! witness the defining bounds at every tested ε, they are not proofs.

pub mod dsl;
pub mod eps;
pub mod error;
pub mod frobenius;
pub mod geom;
pub mod gf;
pub mod ivp;
pub mod param;
pub(crate) mod quad;

pub use eps::{classify_growth, nets_equivalent, near_standard_limit, EpsGrid, GrowthClass,
    GrowthKind, NumberNet, PointNet};
pub use error::{DslError, EpsError, GeomError, GfError, SolveError};
pub use geom::{Ambient, BoxDomain};
pub use gf::{check_cbounded, compose, compose_slowly_increasing, equal_by_points, point_value,
    sup_on_compact, CBoundCertificate, CBoundOutcome, FunctionNet};
