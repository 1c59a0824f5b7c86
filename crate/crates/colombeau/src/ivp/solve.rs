//! Per-ε classical solves, smooth extension across the shrunk intervals, and
//! assembly into a solution net with c-bound, residual and moderateness
//! diagnostics.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::eps::{classify_growth, GrowthClass, GrowthKind, NumberNet, DEFAULT_ORDERS};
use crate::error::{GfError, SolveError};
use crate::geom::{dist2, norm2, Ambient, BoxDomain};
use crate::gf::{
    check_cbounded, sup_on_compact, CBoundCertificate, CBoundOutcome, EpsMap, EpsVal, FunctionNet,
};

use super::extend::{extend_smoothly, SmoothExtension, TrajFn};
use super::picard::{picard_solve, PicardError, PicardOptions, PicardTrajectory};
use super::problem::{sup_state_jacobian, HypothesisCertificate, IvpProblem};
use super::rk::{integrate, DenseTrajectory, RkError, RkOptions, RkOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    AdaptiveRk,
    Picard,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub atol: f64,
    pub rtol: f64,
    pub method: Method,
    /// Picard node half-count (per side of t0_ε).
    pub picard_half_nodes: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            atol: 1e-9,
            rtol: 1e-9,
            method: Method::AdaptiveRk,
            picard_half_nodes: 512,
        }
    }
}

impl SolveOptions {
    pub fn tight() -> Self {
        Self {
            atol: 1e-12,
            rtol: 1e-12,
            ..Default::default()
        }
    }

    fn rk(&self, bounds: Option<BoxDomain>) -> RkOptions {
        RkOptions {
            atol: self.atol,
            rtol: self.rtol,
            bounds,
            ..Default::default()
        }
    }
}

/// Classical trajectory centred at the (generalized) initial time, covering
/// both integration directions.
#[derive(Debug)]
pub struct TwoSided {
    pub t_center: f64,
    pub y_center: Vec<f64>,
    pub fwd: Option<DenseTrajectory>,
    pub bwd: Option<DenseTrajectory>,
}

impl TwoSided {
    pub fn eval(&self, t: f64) -> Vec<f64> {
        if t == self.t_center {
            return self.y_center.clone();
        }
        let side = if t > self.t_center { &self.fwd } else { &self.bwd };
        if let Some(traj) = side {
            if let Some(v) = traj.eval(t) {
                return v;
            }
            // clamp tiny overshoots to the trajectory end
            return traj.eval(traj.t_end).unwrap_or_else(|| self.y_center.clone());
        }
        self.y_center.clone()
    }

    pub fn deriv_interp(&self, t: f64) -> Option<Vec<f64>> {
        let side = if t >= self.t_center { &self.fwd } else { &self.bwd };
        side.as_ref().and_then(|tr| tr.deriv_interp(t))
    }

    pub fn deriv_resolution(&self, atol: f64, rtol: f64) -> f64 {
        let a = self
            .fwd
            .as_ref()
            .map(|t| t.deriv_resolution(atol, rtol))
            .unwrap_or(0.0);
        let b = self
            .bwd
            .as_ref()
            .map(|t| t.deriv_resolution(atol, rtol))
            .unwrap_or(0.0);
        a.max(b)
    }
}

/// One per-ε classical solution in either integrator representation.
#[derive(Debug)]
pub enum Traj {
    Dense(TwoSided),
    Hermite(PicardTrajectory),
}

impl Traj {
    pub fn eval(&self, t: f64) -> Vec<f64> {
        match self {
            Traj::Dense(d) => d.eval(t),
            Traj::Hermite(p) => p
                .eval(t)
                .unwrap_or_else(|| p.values[p.center_index].clone()),
        }
    }

    pub fn deriv_interp(&self, t: f64) -> Option<Vec<f64>> {
        match self {
            Traj::Dense(d) => d.deriv_interp(t),
            Traj::Hermite(p) => p.deriv_interp(t),
        }
    }

    fn deriv_resolution(&self, atol: f64, rtol: f64) -> f64 {
        match self {
            Traj::Dense(d) => d.deriv_resolution(atol, rtol),
            // Hermite nodes are uniform; the interpolant derivative error is
            // dominated by the quadrature tolerance over one cell width.
            Traj::Hermite(p) => {
                let hcell = (p.nodes[1] - p.nodes[0]).abs();
                (atol + rtol) / hcell.max(1e-12)
            }
        }
    }
}

pub enum EpsSolutionKind {
    Direct(Arc<Traj>),
    Extended(SmoothExtension),
    /// Representative chosen constant above the hypothesis threshold when
    /// the classical solve is unavailable there.
    Constant(Vec<f64>),
}

pub struct EpsSolution {
    pub index: usize,
    pub eps: f64,
    /// J_ε = [t0-h+δ_ε, t0+h-δ_ε]: where the classical solve lives.
    pub classical_span: (f64, f64),
    /// J̃_ε = [t0-h+2δ_ε, t0+h-2δ_ε]: where the ODE holds exactly.
    pub inner: (f64, f64),
    pub kind: EpsSolutionKind,
    /// Max violation of |u(t) - x0_ε| ≤ a·|t - t0_ε| over the span lattice.
    pub cone_excess: f64,
    pub solved: bool,
}

impl EpsSolution {
    pub fn eval(&self, t: f64) -> Vec<f64> {
        match &self.kind {
            EpsSolutionKind::Direct(tr) => tr.eval(t),
            EpsSolutionKind::Extended(ext) => ext.eval(t),
            EpsSolutionKind::Constant(v) => v.clone(),
        }
    }

    fn deriv_rhs(&self, t: f64, rhs: impl Fn(f64, &[f64]) -> Option<Vec<f64>>) -> Vec<f64> {
        match &self.kind {
            EpsSolutionKind::Direct(tr) => {
                let y = tr.eval(t);
                rhs(t, &y).unwrap_or_else(|| vec![f64::NAN; y.len()])
            }
            EpsSolutionKind::Extended(ext) => ext.deriv(t),
            EpsSolutionKind::Constant(v) => vec![0.0; v.len()],
        }
    }
}

struct SolutionMap {
    sols: Arc<Vec<EpsSolution>>,
    f_map: Arc<dyn EpsMap>,
    dim: usize,
}

impl SolutionMap {
    fn rhs_at(&self, ev: EpsVal, t: f64, y: &[f64]) -> Option<Vec<f64>> {
        let mut args = Vec::with_capacity(1 + y.len());
        args.push(t);
        args.extend_from_slice(y);
        let mut out = vec![0.0; self.dim];
        self.f_map.eval(ev, &args, &mut out).ok()?;
        Some(out)
    }
}

impl EpsMap for SolutionMap {
    fn dim_in(&self) -> usize {
        1
    }

    fn dim_out(&self) -> usize {
        self.dim
    }

    fn eval(&self, eps: EpsVal, x: &[f64], out: &mut [f64]) -> Result<(), GfError> {
        let v = self.sols[eps.index].eval(x[0]);
        out.copy_from_slice(&v);
        Ok(())
    }

    fn partial(&self, eps: EpsVal, x: &[f64], _var: usize, out: &mut [f64]) -> Result<(), GfError> {
        let sol = &self.sols[eps.index];
        let v = sol.deriv_rhs(x[0], |t, y| self.rhs_at(eps, t, y));
        out.copy_from_slice(&v);
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    pub eps: f64,
    pub residual: f64,
    pub budget: f64,
}

/// Sup of |u' - F(t, u)| on the inner interval per ε, with the interpolant
/// derivative as the independent route. The budget is the derivative
/// resolution of the interpolant at the integrator tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub rows: Vec<ResidualRow>,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeratenessReport {
    pub value: GrowthClass,
    pub dt1: GrowthClass,
    pub dt2: GrowthClass,
    /// False when any classification came back inconclusive (warning, not an
    /// error).
    pub certified: bool,
}

pub struct SolutionNet {
    pub base: FunctionNet,
    pub j_interval: (f64, f64),
    pub inner_intervals: Vec<(f64, f64)>,
    pub cbound: CBoundCertificate,
    pub residual: ResidualReport,
    pub moderateness: ModeratenessReport,
    pub cert: HypothesisCertificate,
    pub options: SolveOptions,
    pub per_eps: Arc<Vec<EpsSolution>>,
    pub problem: IvpProblem,
    /// Initial-condition residuals |u_ε(t0_ε) - x0_ε| per active ε.
    pub init_residuals: Vec<f64>,
}

impl SolutionNet {
    /// Value of the solution at (ε-index, t).
    pub fn value(&self, index: usize, t: f64) -> Vec<f64> {
        self.per_eps[index].eval(t)
    }
}

fn rk_error(e: RkError, eps: f64) -> SolveError {
    match e {
        RkError::StepUnderflow { t } | RkError::StepBudget { t } => {
            SolveError::StiffnessFailure { eps, t }
        }
        RkError::BadStart => SolveError::InvalidProblem("non-finite initial state".into()),
    }
}

fn picard_error(e: PicardError, eps: f64) -> SolveError {
    match e {
        PicardError::NoContraction { iters, .. } => SolveError::PicardDiverged { iters, eps },
        PicardError::LeftBounds { t } => SolveError::EscapeFromLBeta { eps, t_escape: t },
        PicardError::RhsFailure { t, .. } => SolveError::StiffnessFailure { eps, t },
    }
}

/// Solve the classical problem at one grid point on J_ε, values in L_β.
///
/// The a-priori cone |u(t) - x0_ε| ≤ a·|t - t0_ε| is checked a posteriori on
/// a lattice; its worst excess is returned with the trajectory. Escaping
/// L_β before the end of J_ε reports the escape time.
pub fn solve_classical_per_eps(
    prob: &IvpProblem,
    cert: &HypothesisCertificate,
    index: usize,
    method: Method,
    opts: &SolveOptions,
) -> Result<(Arc<Traj>, f64), SolveError> {
    let eps = prob.grid().values()[index];
    let delta = cert.delta_eps[index];
    let t_lo = cert.t0 - cert.h + delta;
    let t_hi = cert.t0 + cert.h - delta;
    let t_c = prob.t0_net.at(index)[0];
    let y0 = prob.x0_net.at(index).to_vec();
    let l_beta = prob.l_beta();
    let n = prob.dim();
    let ev = EpsVal { index, eps };

    let f_map = prob.f.map().clone();
    let rhs = move |t: f64, y: &[f64], out: &mut [f64]| -> Result<(), GfError> {
        let mut args = Vec::with_capacity(1 + n);
        args.push(t);
        args.extend_from_slice(y);
        f_map.eval(ev, &args, out)
    };

    let traj = match method {
        Method::AdaptiveRk => {
            let rk_opts = opts.rk(Some(l_beta.inflate(1e-12)));
            let fwd = match integrate(&rhs, t_c, &y0, t_hi, &rk_opts).map_err(|e| rk_error(e, eps))? {
                RkOutcome::Complete(t) => Some(t),
                RkOutcome::Escaped { t_escape, .. } => {
                    return Err(SolveError::EscapeFromLBeta { eps, t_escape })
                }
            };
            let bwd = match integrate(&rhs, t_c, &y0, t_lo, &rk_opts).map_err(|e| rk_error(e, eps))? {
                RkOutcome::Complete(t) => Some(t),
                RkOutcome::Escaped { t_escape, .. } => {
                    return Err(SolveError::EscapeFromLBeta { eps, t_escape })
                }
            };
            Traj::Dense(TwoSided {
                t_center: t_c,
                y_center: y0.clone(),
                fwd,
                bwd,
            })
        }
        Method::Picard => {
            if n > 3 {
                return Err(SolveError::InvalidProblem(
                    "Picard mode is limited to state dimension <= 3".into(),
                ));
            }
            let gamma = {
                let d2 = sup_state_jacobian(&prob.f, &cert.q_box, 1..1 + n, eps)?;
                d2.at(index)
            };
            let p_opts = PicardOptions {
                half_nodes: opts.picard_half_nodes,
                bounds: Some(l_beta.inflate(1e-9)),
                ..Default::default()
            };
            let traj = picard_solve(&rhs, t_c, &y0, t_lo, t_hi, gamma, &p_opts)
                .map_err(|e| picard_error(e, eps))?;
            Traj::Hermite(traj)
        }
    };

    // a-priori cone check
    let mut excess: f64 = 0.0;
    for i in 0..=256 {
        let t = t_lo + (t_hi - t_lo) * i as f64 / 256.0;
        let y = traj.eval(t);
        let cone = cert.a * (t - t_c).abs();
        excess = excess.max(dist2(&y, &y0) - cone);
    }
    Ok((Arc::new(traj), excess))
}

/// Time at which the per-ε trajectory leaves L_β (diagnostic probe; usable
/// without a certificate, e.g. on problems that fail the uniform bound).
pub fn escape_time(
    prob: &IvpProblem,
    index: usize,
    opts: &SolveOptions,
) -> Result<Option<(f64, Vec<f64>)>, SolveError> {
    let eps = prob.grid().values()[index];
    let t_c = prob.t0_net.at(index)[0];
    let y0 = prob.x0_net.at(index).to_vec();
    let n = prob.dim();
    let ev = EpsVal { index, eps };
    let f_map = prob.f.map().clone();
    let rhs = move |t: f64, y: &[f64], out: &mut [f64]| -> Result<(), GfError> {
        let mut args = Vec::with_capacity(1 + n);
        args.push(t);
        args.extend_from_slice(y);
        f_map.eval(ev, &args, out)
    };
    let rk_opts = opts.rk(Some(prob.l_beta()));
    match integrate(&rhs, t_c, &y0, prob.t0 + prob.alpha, &rk_opts).map_err(|e| rk_error(e, eps))? {
        RkOutcome::Escaped {
            t_escape, y_escape, ..
        } => Ok(Some((t_escape, y_escape))),
        RkOutcome::Complete(_) => Ok(None),
    }
}

/// Fraction of h below which a generalized initial time is treated as
/// standard (extension skipped; the classical span already covers J up to
/// rounding).
const DELTA_NEGLIGIBLE: f64 = 1e-9;

/// Solve the generalized problem: per-ε classical solves on J_ε, smooth
/// extension to J when the initial time is genuinely generalized, c-bound
/// certificate into W, and moderateness of the value and first two time
/// derivatives.
pub fn solve_generalized(
    prob: &IvpProblem,
    cert: &HypothesisCertificate,
    opts: &SolveOptions,
) -> Result<SolutionNet, SolveError> {
    let grid = prob.grid().clone();
    let (j_lo, j_hi) = cert.j_interval;
    let w_box = cert.w_box.clone();

    let results: Vec<Result<EpsSolution, SolveError>> = (0..grid.len())
        .into_par_iter()
        .map(|index| {
            let eps = grid.values()[index];
            let active = eps <= cert.eps0_used;
            let delta = cert.delta_eps[index];
            let span = (cert.t0 - cert.h + delta, cert.t0 + cert.h - delta);
            let solve = solve_classical_per_eps(prob, cert, index, opts.method, opts);
            match solve {
                Ok((traj, cone_excess)) => {
                    let skip_extension = delta <= DELTA_NEGLIGIBLE * cert.h;
                    let inner = if skip_extension {
                        (j_lo, j_hi)
                    } else {
                        (j_lo + 2.0 * delta, j_hi - 2.0 * delta)
                    };
                    let kind = if skip_extension {
                        EpsSolutionKind::Direct(traj)
                    } else {
                        let ua = traj.eval(span.0);
                        let ub = traj.eval(span.1);
                        let m = w_box
                            .interior_margin(&ua)
                            .min(w_box.interior_margin(&ub));
                        let delta_ext = (prob.beta / 10.0).min(0.9 * m.max(1e-12));
                        let traj_for_eval = traj.clone();
                        let eval_fn: TrajFn = Arc::new(move |t: f64| traj_for_eval.eval(t));
                        let f_map = prob.f.map().clone();
                        let ev = EpsVal { index, eps };
                        let traj_for_deriv = traj.clone();
                        let n = prob.dim();
                        let deriv_fn: TrajFn = Arc::new(move |t: f64| {
                            let y = traj_for_deriv.eval(t);
                            let mut args = Vec::with_capacity(1 + n);
                            args.push(t);
                            args.extend_from_slice(&y);
                            let mut out = vec![0.0; n];
                            match f_map.eval(ev, &args, &mut out) {
                                Ok(()) => out,
                                Err(_) => vec![f64::NAN; n],
                            }
                        });
                        let ext = extend_smoothly(
                            eval_fn,
                            Some(deriv_fn),
                            span,
                            (j_lo, j_hi),
                            inner,
                            delta_ext,
                        )?;
                        EpsSolutionKind::Extended(ext)
                    };
                    Ok(EpsSolution {
                        index,
                        eps,
                        classical_span: span,
                        inner,
                        kind,
                        cone_excess,
                        solved: true,
                    })
                }
                Err(e) => {
                    if active {
                        Err(e)
                    } else {
                        // outside the hypothesis threshold the representative
                        // is free; pick a constant inside W
                        let mut v = prob.x0_net.at(index).to_vec();
                        w_box.shrink(1e-9).clamp(&mut v);
                        Ok(EpsSolution {
                            index,
                            eps,
                            classical_span: span,
                            inner: (j_lo, j_hi),
                            kind: EpsSolutionKind::Constant(v),
                            cone_excess: 0.0,
                            solved: false,
                        })
                    }
                }
            }
        })
        .collect();

    let mut sols = Vec::with_capacity(results.len());
    for r in results {
        sols.push(r?);
    }
    let sols = Arc::new(sols);

    let net_grid = grid.with_eps0(cert.eps0_used).map_err(SolveError::Eps)?;
    let j_box = BoxDomain::interval(j_lo, j_hi).map_err(SolveError::Geom)?;
    let base = FunctionNet::new(
        net_grid.clone(),
        j_box,
        Arc::new(SolutionMap {
            sols: sols.clone(),
            f_map: prob.f.map().clone(),
            dim: prob.dim(),
        }),
    )?;

    // c-boundedness into W via the compact J† = [t0 ± 5h/8]
    let h_dagger = 0.625 * cert.h;
    let j_dagger = BoxDomain::interval(cert.t0 - h_dagger, cert.t0 + h_dagger)
        .map_err(SolveError::Geom)?;
    let cbound = match check_cbounded(&base, &j_dagger, &Ambient::Boxed(w_box.clone()))? {
        CBoundOutcome::Certified(c) => c,
        CBoundOutcome::Escapes(rep) => {
            return Err(SolveError::InvalidProblem(format!(
                "constructed solution failed its own c-bound check: {}",
                rep.reason
            )))
        }
    };
    // the trapping bound: u(J†) ⊆ L + ball(a (h' + δ_ε))
    for (index, _) in net_grid.active() {
        let sol = &sols[index];
        let bound = cert.a * (h_dagger + cert.delta_eps[index]) + 1e-6;
        for i in 0..=64 {
            let t = cert.t0 - h_dagger + 2.0 * h_dagger * i as f64 / 64.0;
            let y = sol.eval(t);
            let d = prob
                .l_box
                .violation(&y)
                .max(0.0);
            if d > bound {
                return Err(SolveError::InvalidProblem(format!(
                    "solution leaves L + ball(a(h'+δ)) at eps index {index}, t = {t}"
                )));
            }
        }
    }

    // residual of the ODE on the inner intervals
    let mut rows = Vec::new();
    let mut residual_ok = true;
    for (index, eps) in net_grid.active() {
        let sol = &sols[index];
        let (a2, b2) = sol.inner;
        let lo = a2 + 1e-9 * cert.h;
        let hi = b2 - 1e-9 * cert.h;
        let mut worst: f64 = 0.0;
        for i in 0..=256 {
            let t = lo + (hi - lo) * i as f64 / 256.0;
            let interp = match &sol.kind {
                EpsSolutionKind::Direct(tr) => tr.deriv_interp(t),
                EpsSolutionKind::Extended(ext) => {
                    // inside the copy region the extension is the trajectory
                    Some(ext.deriv(t))
                }
                EpsSolutionKind::Constant(v) => Some(vec![0.0; v.len()]),
            };
            let Some(du) = interp else { continue };
            let y = sol.eval(t);
            let mut args = Vec::with_capacity(1 + y.len());
            args.push(t);
            args.extend_from_slice(&y);
            let mut fv = vec![0.0; prob.dim()];
            prob.f
                .map()
                .eval(EpsVal { index, eps }, &args, &mut fv)?;
            let r = du
                .iter()
                .zip(&fv)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        let resolution = match &sol.kind {
            EpsSolutionKind::Direct(tr) => tr.deriv_resolution(opts.atol, opts.rtol),
            EpsSolutionKind::Extended(_) => opts.atol + opts.rtol,
            EpsSolutionKind::Constant(_) => 0.0,
        };
        let budget = 50.0 * resolution + 1e3 * (opts.atol + opts.rtol);
        residual_ok &= worst <= budget;
        rows.push(ResidualRow {
            eps,
            residual: worst,
            budget,
        });
    }

    // moderateness of the value and first two t-derivatives
    let sup0 = sup_on_compact(&base, &j_dagger, &[])?;
    let sup1 = sup_on_compact(&base, &j_dagger, &[1])?;
    let sup2 = sup_on_compact(&base, &j_dagger, &[2])?;
    let value = classify_growth(&sup0, &DEFAULT_ORDERS)?;
    let dt1 = classify_growth(&sup1, &DEFAULT_ORDERS)?;
    let dt2 = classify_growth(&sup2, &DEFAULT_ORDERS)?;
    let certified = ![&value, &dt1, &dt2]
        .iter()
        .any(|c| matches!(c.kind, GrowthKind::Inconclusive | GrowthKind::SuperPolynomial));

    let init_residuals: Vec<f64> = net_grid
        .active()
        .map(|(index, _)| {
            let u0 = sols[index].eval(prob.t0_net.at(index)[0]);
            dist2(&u0, prob.x0_net.at(index))
        })
        .collect();

    let inner_intervals = sols.iter().map(|s| s.inner).collect();
    Ok(SolutionNet {
        base,
        j_interval: cert.j_interval,
        inner_intervals,
        cbound,
        residual: ResidualReport {
            rows,
            ok: residual_ok,
        },
        moderateness: ModeratenessReport {
            value,
            dt1,
            dt2,
            certified,
        },
        cert: cert.clone(),
        options: opts.clone(),
        per_eps: sols,
        problem: prob.clone(),
        init_residuals,
    })
}

/// Per-ε sup distance between two solution nets on a compact subinterval.
pub fn sup_gap_on(
    a: &SolutionNet,
    b: &SolutionNet,
    k_lo: f64,
    k_hi: f64,
    points: usize,
) -> Result<NumberNet, SolveError> {
    if a.base.grid() != b.base.grid() {
        return Err(SolveError::Eps(crate::error::EpsError::GridMismatch));
    }
    let grid = a.base.grid().clone();
    let samples: Vec<f64> = (0..grid.len())
        .map(|index| {
            let mut worst: f64 = 0.0;
            for i in 0..=points {
                let t = k_lo + (k_hi - k_lo) * i as f64 / points as f64;
                let va = a.per_eps[index].eval(t);
                let vb = b.per_eps[index].eval(t);
                worst = worst.max(dist2(&va, &vb));
            }
            worst
        })
        .collect();
    Ok(NumberNet::new(grid, samples).map_err(SolveError::Eps)?)
}

/// Euclidean norm helper re-exported for solver diagnostics.
pub fn state_norm(y: &[f64]) -> f64 {
    norm2(y)
}
