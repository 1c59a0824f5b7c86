//! Error types, one enum per subsystem.

use thiserror::Error;

use crate::eps::GrowthClass;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid bounds on axis {axis}: [{lower}, {upper}]")]
    InvalidBounds { axis: usize, lower: f64, upper: f64 },
    #[error("invalid radius {0}")]
    InvalidRadius(f64),
}

#[derive(Debug, Error)]
pub enum EpsError {
    #[error("empty grid")]
    EmptyGrid,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite sample at eps = {eps}: {value}")]
    NonFiniteSample { eps: f64, value: f64 },
    #[error("nets live on different grids")]
    GridMismatch,
    #[error("no orders to test")]
    NoOrders,
    #[error("sample dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point net leaves its ambient set at eps = {eps}")]
    PointOutsideAmbient { eps: f64 },
}

#[derive(Debug, Error)]
pub enum GfError {
    #[error("compact K is not contained in the net's domain (margin {margin})")]
    KOutsideDomain { margin: f64 },
    #[error("certificate does not certify this composition: {0}")]
    MissingCertificate(String),
    #[error("growth witness (C, N) fails for derivative order {order} at |x| = {at}")]
    GrowthWitnessFailed { order: usize, at: f64 },
    #[error("point net escapes the function domain for eps = {eps}")]
    PointEscapesDomain { eps: f64 },
    #[error("probe {index} is not near-standard")]
    ProbeNotNearStandard { index: usize },
    #[error("domain evaluation failed at eps = {eps}, x = {location:?}: {reason}")]
    DomainEvaluation {
        eps: f64,
        location: Vec<f64>,
        reason: String,
    },
    #[error("derivative order {0:?} is not available for this net")]
    DerivativeUnavailable(Vec<usize>),
    #[error(transparent)]
    Eps(#[from] EpsError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Parse- and evaluation-time errors of the expression language.
#[derive(Debug, Error, PartialEq)]
pub enum DslError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown identifier `{name}` at {line}:{col}")]
    UnknownIdentifier { name: String, line: usize, col: usize },
    #[error("`{name}` expects {expected} argument(s), got {got} (at {line}:{col})")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
        line: usize,
        col: usize,
    },
    #[error("evaluation error: {reason}")]
    Eval { reason: String },
}

/// Wrap an expression evaluation failure as a located domain error.
pub fn domain_eval_error(eps: f64, location: &[f64], err: DslError) -> GfError {
    GfError::DomainEvaluation {
        eps,
        location: location.to_vec(),
        reason: err.to_string(),
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("RHS sup over Q is not bounded uniformly in eps (fitted growth: {growth})")]
    UnboundedRhs { growth: GrowthClass },
    #[error("trajectory escapes L_beta at eps = {eps}, t = {t_escape}")]
    EscapeFromLBeta { eps: f64, t_escape: f64 },
    #[error("step size underflow at eps = {eps}, t = {t}")]
    StiffnessFailure { eps: f64, t: f64 },
    #[error("no logarithmic bound on the second-slot derivative was certified")]
    MissingLogBound,
    #[error("no admissible cutoff width eta for the requested delta = {delta}")]
    EtaNotFound { delta: f64 },
    #[error("uniform bound fails over the parameter box: sup grows from {coarse} to {fine} under lattice refinement")]
    NonUniformBound { coarse: f64, fine: f64 },
    #[error("no admissible constants reach the target half-width {h_target}; binding constraint: {binding}")]
    ConstantsInfeasible { h_target: f64, binding: String },
    #[error("integrability condition rejected: asymmetry classified {classification}")]
    IntegrabilityRejected { classification: GrowthClass },
    #[error("derivative access unavailable: {0}")]
    DerivativeUnavailable(String),
    #[error("Picard iteration did not contract after {iters} iterations at eps = {eps}")]
    PicardDiverged { iters: usize, eps: f64 },
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error(transparent)]
    Eps(#[from] EpsError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Dsl(#[from] DslError),
}
