//! Local solution engine for generalized initial value problems: hypothesis
//! certification, per-ε classical solves, smooth extension, assembly into a
//! solution net, and gap/uniqueness diagnostics.

pub mod extend;
pub mod picard;
pub mod problem;
pub mod rk;
pub mod solve;
pub mod uniqueness;

pub use extend::{extend_smoothly, SmoothCutoff, SmoothExtension};
pub use picard::{picard_solve, PicardOptions, PicardTrajectory};
pub use problem::{certify_hypotheses, fit_log_bound, sup_state_jacobian, HypothesisCertificate,
    IvpProblem, LogBound};
pub use rk::{integrate, DenseTrajectory, RkOptions, RkOutcome};
pub use solve::{escape_time, solve_classical_per_eps, solve_generalized, sup_gap_on, EpsSolution,
    EpsSolutionKind, Method, ModeratenessReport, ResidualReport, SolutionNet, SolveOptions, Traj,
    TwoSided};
pub use uniqueness::{fit_above_floor, uniqueness_gap, GapReport};
