//! Parameterized families u(p, t) with generalized dependence on the
//! parameter, sensitivity verification against the variational integral
//! equation, and dependence on generalized initial values via the
//! translation construction.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::Serialize;

use crate::eps::{geometric_tolerances, near_standard_limit, EpsGrid, PointNet};
use crate::error::{GfError, SolveError};
use crate::geom::{dist2, BoxDomain};
use crate::gf::{EpsMap, EpsVal, FunctionNet};
use crate::ivp::extend::extension_with_eta;
use crate::ivp::problem::{certify_core, HypothesisCertificate, IvpProblem};
use crate::ivp::rk::{integrate, RkOptions, RkOutcome};
use crate::ivp::solve::{Method, SolveOptions, Traj, TwoSided};
use crate::ivp::{picard_solve, PicardOptions};
use crate::quad::simpson_weights;

/// IVP family with RHS F_ε(t, x, p) on I × U × P.
#[derive(Clone)]
pub struct ParamIvpProblem {
    /// RHS net on I × U × P (axes: t, x1..xn, p1..pl).
    pub f: FunctionNet,
    pub n: usize,
    pub l: usize,
    pub t0_net: PointNet,
    pub x0_net: PointNet,
    pub t0: f64,
    pub alpha: f64,
    pub l_box: BoxDomain,
    pub beta: f64,
    pub p_box: BoxDomain,
    pub eps0: f64,
}

impl ParamIvpProblem {
    pub fn new(
        f: FunctionNet,
        t0_net: PointNet,
        x0_net: PointNet,
        alpha: f64,
        l_box: BoxDomain,
        beta: f64,
        p_box: BoxDomain,
    ) -> Result<Self, SolveError> {
        let n = f.codim();
        let l = p_box.dim();
        if f.domain().dim() != 1 + n + l {
            return Err(SolveError::InvalidProblem(format!(
                "RHS domain dim {} does not match 1 + n + l = {}",
                f.domain().dim(),
                1 + n + l
            )));
        }
        if t0_net.dim() != 1 || x0_net.dim() != n {
            return Err(SolveError::InvalidProblem(
                "initial data dimensions do not match the RHS".into(),
            ));
        }
        if t0_net.grid() != f.grid() || x0_net.grid() != f.grid() {
            return Err(SolveError::Eps(crate::error::EpsError::GridMismatch));
        }
        if l > 0 {
            let p_slot = f.domain().slice(1 + n, l);
            if p_slot.containment_margin(&p_box) < -1e-12 {
                return Err(SolveError::InvalidProblem(
                    "parameter box must sit inside the RHS domain's parameter slot".into(),
                ));
            }
        }
        let tols = geometric_tolerances(f.grid().len());
        let t0 = near_standard_limit(&t0_net, &tols)
            .ok_or_else(|| SolveError::InvalidProblem("t0 net is not near-standard".into()))?
            .limit[0];
        let i_interval = f.domain().slice(0, 1);
        let u_set = f.domain().slice(1, n);
        let t_compact = BoxDomain::interval(t0 - alpha, t0 + alpha).map_err(SolveError::Geom)?;
        if !i_interval.compactly_contains(&t_compact) {
            return Err(SolveError::InvalidProblem(
                "[t0 - alpha, t0 + alpha] must sit compactly inside I".into(),
            ));
        }
        let l_beta = l_box.inflate(beta);
        if !u_set.compactly_contains(&l_beta) {
            return Err(SolveError::InvalidProblem(
                "L + ball(beta) must sit compactly inside U".into(),
            ));
        }
        let grid = f.grid().clone();
        let mut eps0 = grid.eps0();
        let mut good_from: Option<usize> = None;
        for (i, _) in grid.active() {
            if l_box.contains(x0_net.at(i), 1e-12) {
                if good_from.is_none() {
                    good_from = Some(i);
                }
            } else {
                good_from = None;
            }
        }
        match good_from {
            Some(i) => eps0 = eps0.min(grid.values()[i]),
            None => {
                return Err(SolveError::InvalidProblem(
                    "initial values never settle inside L on the active grid".into(),
                ))
            }
        }
        grid.with_eps0(eps0).map_err(SolveError::Eps)?;
        Ok(Self {
            f,
            n,
            l,
            t0_net,
            x0_net,
            t0,
            alpha,
            l_box,
            beta,
            p_box,
            eps0,
        })
    }

    pub fn grid(&self) -> &EpsGrid {
        self.f.grid()
    }

    pub fn l_beta(&self) -> BoxDomain {
        self.l_box.inflate(self.beta)
    }

    /// Q × P = [t0-α, t0+α] × L_β × P.
    pub fn q_full(&self) -> BoxDomain {
        BoxDomain::interval(self.t0 - self.alpha, self.t0 + self.alpha)
            .unwrap()
            .product(&self.l_box.inflate(self.beta))
            .product(&self.p_box)
    }

    /// The frozen-parameter problem at a fixed p (for slice comparisons).
    pub fn freeze(&self, p: &[f64]) -> Result<IvpProblem, SolveError> {
        if p.len() != self.l {
            return Err(SolveError::InvalidProblem(
                "frozen p has wrong length".into(),
            ));
        }
        let map = Arc::new(FrozenMap {
            inner: self.f.map().clone(),
            p: p.to_vec(),
            n: self.n,
        });
        let domain = self.f.domain().slice(0, 1 + self.n);
        let f = FunctionNet::new(self.grid().clone(), domain, map)?;
        IvpProblem::new(
            f,
            self.t0_net.clone(),
            self.x0_net.clone(),
            self.alpha,
            self.l_box.clone(),
            self.beta,
        )
    }
}

/// Frozen-parameter view of a parameterized RHS.
struct FrozenMap {
    inner: Arc<dyn EpsMap>,
    p: Vec<f64>,
    n: usize,
}

impl EpsMap for FrozenMap {
    fn dim_in(&self) -> usize {
        1 + self.n
    }

    fn dim_out(&self) -> usize {
        self.n
    }

    fn eval(&self, eps: EpsVal, x: &[f64], out: &mut [f64]) -> Result<(), GfError> {
        let mut args = Vec::with_capacity(1 + self.n + self.p.len());
        args.extend_from_slice(x);
        args.extend_from_slice(&self.p);
        self.inner.eval(eps, &args, out)
    }

    fn partial(&self, eps: EpsVal, x: &[f64], var: usize, out: &mut [f64]) -> Result<(), GfError> {
        let mut args = Vec::with_capacity(1 + self.n + self.p.len());
        args.extend_from_slice(x);
        args.extend_from_slice(&self.p);
        self.inner.partial(eps, &args, var, out)
    }
}

/// Certify the parameterized hypotheses: the uniform bound over Q × P and
/// the mandatory log bound on ∂₂F over J × W × P. Also guards against
/// bounds that only hold on the coarse parameter lattice.
pub fn certify_with_parameters(
    prob: &ParamIvpProblem,
) -> Result<HypothesisCertificate, SolveError> {
    let q_full = prob.q_full();
    let coarse = crate::gf::sup_on_compact(&prob.f, &q_full, &[])?;
    let coarse_max = coarse.active_max();
    let dense_pts = q_full.halton_interior(512);
    let mut dense_max: f64 = 0.0;
    for (index, eps) in prob.grid().active() {
        if eps > prob.eps0 {
            continue;
        }
        let ev = EpsVal { index, eps };
        let mut out = vec![0.0; prob.n];
        for x in &dense_pts {
            prob.f.map().eval(ev, x, &mut out)?;
            dense_max = dense_max.max(crate::geom::norm2(&out));
        }
    }
    if dense_max > 1.25 * coarse_max + 1e-12 {
        return Err(SolveError::NonUniformBound {
            coarse: coarse_max,
            fine: dense_max,
        });
    }

    let cert = certify_core(
        &prob.f,
        &prob.t0_net,
        prob.t0,
        prob.alpha,
        prob.beta,
        prob.eps0,
        q_full,
        prob.l_box.inflate(prob.beta),
        1..1 + prob.n,
        Some(&prob.p_box),
    )?;
    if cert.log_bound.is_none() {
        return Err(SolveError::MissingLogBound);
    }
    Ok(cert)
}

type TrajKey = (usize, Vec<u64>);

/// One frozen-(ε, p) trajectory with its extension bookkeeping.
pub struct EpsParamSolution {
    pub traj: Arc<Traj>,
    pub extended: Option<crate::ivp::SmoothExtension>,
    pub classical_span: (f64, f64),
    pub inner: (f64, f64),
}

impl EpsParamSolution {
    pub fn eval(&self, t: f64) -> Vec<f64> {
        match &self.extended {
            Some(ext) => ext.eval(t),
            None => self.traj.eval(t),
        }
    }

    pub fn deriv(&self, t: f64, rhs: impl Fn(f64, &[f64]) -> Option<Vec<f64>>) -> Vec<f64> {
        match &self.extended {
            Some(ext) => ext.deriv(t),
            None => {
                let y = self.traj.eval(t);
                let n = y.len();
                rhs(t, &y).unwrap_or_else(|| vec![f64::NAN; n])
            }
        }
    }
}

fn key_of(index: usize, p: &[f64]) -> TrajKey {
    (index, p.iter().map(|v| v.to_bits()).collect())
}

/// Shared solver state: everything needed to produce a trajectory for any
/// (ε, p) on demand, with memoization.
struct ParamFamilyCore {
    f_map: Arc<dyn EpsMap>,
    grid: EpsGrid,
    n: usize,
    t0_net: PointNet,
    x0_net: PointNet,
    cert: HypothesisCertificate,
    l_beta: BoxDomain,
    beta: f64,
    options: SolveOptions,
    cache: Mutex<HashMap<TrajKey, Arc<EpsParamSolution>>>,
}

fn rk_err(e: crate::ivp::rk::RkError, eps: f64) -> SolveError {
    use crate::ivp::rk::RkError;
    match e {
        RkError::StepUnderflow { t } | RkError::StepBudget { t } => {
            SolveError::StiffnessFailure { eps, t }
        }
        RkError::BadStart => SolveError::InvalidProblem("non-finite initial state".into()),
    }
}

impl ParamFamilyCore {
    fn solve(&self, index: usize, p: &[f64]) -> Result<Arc<EpsParamSolution>, SolveError> {
        let key = key_of(index, p);
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let eps = self.grid.values()[index];
        let ev = EpsVal { index, eps };
        let delta = self.cert.delta_eps[index].min(self.cert.h / 4.0);
        let (j_lo, j_hi) = self.cert.j_interval;
        let span = (j_lo + delta, j_hi - delta);
        let t_c = self.t0_net.at(index)[0];
        let y0 = self.x0_net.at(index).to_vec();
        let f_map = self.f_map.clone();
        let p_owned = p.to_vec();
        let n = self.n;
        let rhs = move |t: f64, y: &[f64], out: &mut [f64]| -> Result<(), GfError> {
            let mut args = Vec::with_capacity(1 + n + p_owned.len());
            args.push(t);
            args.extend_from_slice(y);
            args.extend_from_slice(&p_owned);
            f_map.eval(ev, &args, out)
        };

        let traj = match self.options.method {
            Method::AdaptiveRk => {
                let rk = RkOptions {
                    atol: self.options.atol,
                    rtol: self.options.rtol,
                    bounds: Some(self.l_beta.inflate(1e-12)),
                    ..Default::default()
                };
                let fwd =
                    match integrate(&rhs, t_c, &y0, span.1, &rk).map_err(|e| rk_err(e, eps))? {
                        RkOutcome::Complete(t) => Some(t),
                        RkOutcome::Escaped { t_escape, .. } => {
                            return Err(SolveError::EscapeFromLBeta { eps, t_escape })
                        }
                    };
                let bwd =
                    match integrate(&rhs, t_c, &y0, span.0, &rk).map_err(|e| rk_err(e, eps))? {
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
                let p_opts = PicardOptions {
                    half_nodes: self.options.picard_half_nodes,
                    bounds: Some(self.l_beta.inflate(1e-9)),
                    ..Default::default()
                };
                let traj = picard_solve(&rhs, t_c, &y0, span.0, span.1, 0.0, &p_opts).map_err(
                    |e| match e {
                        crate::ivp::picard::PicardError::NoContraction { iters, .. } => {
                            SolveError::PicardDiverged { iters, eps }
                        }
                        crate::ivp::picard::PicardError::LeftBounds { t } => {
                            SolveError::EscapeFromLBeta { eps, t_escape: t }
                        }
                        crate::ivp::picard::PicardError::RhsFailure { t, .. } => {
                            SolveError::StiffnessFailure { eps, t }
                        }
                    },
                )?;
                Traj::Hermite(traj)
            }
        };
        let traj = Arc::new(traj);

        // joint smoothness across parameters: the collar width is chosen per
        // ε only, never per p, so neighbouring parameters share the cutoff
        let extended = if delta > 1e-9 * self.cert.h {
            let inner = (j_lo + 2.0 * delta, j_hi - 2.0 * delta);
            let eta = 0.95 * (delta / 3.0).min(0.02 * self.beta / self.cert.a.max(1e-12));
            let traj_eval = traj.clone();
            let eval_fn: crate::ivp::extend::TrajFn = Arc::new(move |t| traj_eval.eval(t));
            let traj_d = traj.clone();
            let f_map = self.f_map.clone();
            let p_owned = p.to_vec();
            let n = self.n;
            let deriv_fn: crate::ivp::extend::TrajFn = Arc::new(move |t| {
                let y = traj_d.eval(t);
                let mut args = Vec::with_capacity(1 + n + p_owned.len());
                args.push(t);
                args.extend_from_slice(&y);
                args.extend_from_slice(&p_owned);
                let mut out = vec![0.0; n];
                match f_map.eval(ev, &args, &mut out) {
                    Ok(()) => out,
                    Err(_) => vec![f64::NAN; n],
                }
            });
            Some(extension_with_eta(
                eval_fn,
                Some(deriv_fn),
                span,
                (j_lo, j_hi),
                inner,
                self.beta / 10.0,
                eta,
            )?)
        } else {
            None
        };

        let sol = Arc::new(EpsParamSolution {
            traj,
            extended,
            classical_span: span,
            inner: if delta > 1e-9 * self.cert.h {
                (j_lo + 2.0 * delta, j_hi - 2.0 * delta)
            } else {
                (j_lo, j_hi)
            },
        });
        self.cache.lock().unwrap().insert(key, sol.clone());
        Ok(sol)
    }

    fn rhs_at(&self, ev: EpsVal, t: f64, y: &[f64], p: &[f64]) -> Option<Vec<f64>> {
        let mut args = Vec::with_capacity(1 + y.len() + p.len());
        args.push(t);
        args.extend_from_slice(y);
        args.extend_from_slice(p);
        let mut out = vec![0.0; self.n];
        self.f_map.eval(ev, &args, &mut out).ok()?;
        Some(out)
    }
}

struct ParamMap {
    core: Arc<ParamFamilyCore>,
    l: usize,
}

impl EpsMap for ParamMap {
    fn dim_in(&self) -> usize {
        self.l + 1
    }

    fn dim_out(&self) -> usize {
        self.core.n
    }

    fn eval(&self, eps: EpsVal, x: &[f64], out: &mut [f64]) -> Result<(), GfError> {
        let (p, t) = x.split_at(self.l);
        let sol = self
            .core
            .solve(eps.index, p)
            .map_err(|e| GfError::DomainEvaluation {
                eps: eps.eps,
                location: x.to_vec(),
                reason: e.to_string(),
            })?;
        out.copy_from_slice(&sol.eval(t[0]));
        Ok(())
    }

    fn partial(&self, eps: EpsVal, x: &[f64], var: usize, out: &mut [f64]) -> Result<(), GfError> {
        if var == self.l {
            let (p, t) = x.split_at(self.l);
            let sol = self
                .core
                .solve(eps.index, p)
                .map_err(|e| GfError::DomainEvaluation {
                    eps: eps.eps,
                    location: x.to_vec(),
                    reason: e.to_string(),
                })?;
            let core = &self.core;
            let v = sol.deriv(t[0], |s, y| core.rhs_at(eps, s, y, p));
            out.copy_from_slice(&v);
            Ok(())
        } else {
            let h = crate::quad::fd_step(x[var]) * 10.0;
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[var] += h;
            xm[var] -= h;
            let mut fp = vec![0.0; self.dim_out()];
            let mut fm = vec![0.0; self.dim_out()];
            self.eval(eps, &xp, &mut fp)?;
            self.eval(eps, &xm, &mut fm)?;
            for i in 0..self.dim_out() {
                out[i] = (fp[i] - fm[i]) / (2.0 * h);
            }
            Ok(())
        }
    }
}

/// Solution family over P × J.
pub struct ParamSolutionNet {
    pub base: FunctionNet,
    pub cert: HypothesisCertificate,
    pub problem: ParamIvpProblem,
    pub options: SolveOptions,
    pub p_lattice: Vec<Vec<f64>>,
    /// Init-condition residual per lattice parameter (max over active ε).
    pub init_residuals: Vec<f64>,
    core: Arc<ParamFamilyCore>,
}

/// Default parameter lattice: 9 points per axis.
pub fn default_p_lattice(p_box: &BoxDomain) -> Vec<Vec<f64>> {
    p_box.lattice(9).collect()
}

/// Solve the family over the parameter box: per-(ε, p) classical solves with
/// a shared memoized cache; the lattice parameters are prewarmed in parallel
/// and their initial-condition residuals recorded.
pub fn solve_with_parameters(
    prob: &ParamIvpProblem,
    cert: &HypothesisCertificate,
    p_samples: &[Vec<f64>],
    opts: &SolveOptions,
) -> Result<ParamSolutionNet, SolveError> {
    if cert.log_bound.is_none() {
        return Err(SolveError::MissingLogBound);
    }
    let core = Arc::new(ParamFamilyCore {
        f_map: prob.f.map().clone(),
        grid: prob.grid().clone(),
        n: prob.n,
        t0_net: prob.t0_net.clone(),
        x0_net: prob.x0_net.clone(),
        cert: cert.clone(),
        l_beta: prob.l_beta(),
        beta: prob.beta,
        options: opts.clone(),
        cache: Mutex::new(HashMap::new()),
    });

    let active: Vec<usize> = prob
        .grid()
        .active()
        .filter(|&(_, e)| e <= cert.eps0_used)
        .map(|(i, _)| i)
        .collect();
    let jobs: Vec<(usize, &Vec<f64>)> = active
        .iter()
        .flat_map(|&i| p_samples.iter().map(move |p| (i, p)))
        .collect();
    let failures: Vec<SolveError> = jobs
        .par_iter()
        .filter_map(|(i, p)| core.solve(*i, p).err())
        .collect();
    if let Some(e) = failures.into_iter().next() {
        return Err(e);
    }

    let mut init_residuals = Vec::with_capacity(p_samples.len());
    for p in p_samples {
        let mut worst: f64 = 0.0;
        for &i in &active {
            let sol = core.solve(i, p)?;
            let u0 = sol.eval(prob.t0_net.at(i)[0]);
            worst = worst.max(dist2(&u0, prob.x0_net.at(i)));
        }
        init_residuals.push(worst);
    }

    let grid = prob
        .grid()
        .with_eps0(cert.eps0_used)
        .map_err(SolveError::Eps)?;
    let domain = prob.p_box.product(
        &BoxDomain::interval(cert.j_interval.0, cert.j_interval.1).map_err(SolveError::Geom)?,
    );
    let base = FunctionNet::new(
        grid,
        domain,
        Arc::new(ParamMap {
            core: core.clone(),
            l: prob.l,
        }),
    )?;

    Ok(ParamSolutionNet {
        base,
        cert: cert.clone(),
        problem: prob.clone(),
        options: opts.clone(),
        p_lattice: p_samples.to_vec(),
        init_residuals,
        core,
    })
}

impl ParamSolutionNet {
    /// u(p, t) at one grid index.
    pub fn value(&self, index: usize, p: &[f64], t: f64) -> Result<Vec<f64>, SolveError> {
        Ok(self.core.solve(index, p)?.eval(t))
    }

    /// Interpolant time-derivative of the trajectory (a route independent of
    /// re-evaluating the RHS; used by the mixed-derivative diagnostics).
    pub fn dt_interp(&self, index: usize, p: &[f64], t: f64) -> Result<Vec<f64>, SolveError> {
        let sol = self.core.solve(index, p)?;
        Ok(sol
            .traj
            .deriv_interp(t)
            .unwrap_or_else(|| vec![f64::NAN; self.problem.n]))
    }

    /// ∂u/∂p_j by central differences through the solve cache.
    pub fn dp(&self, index: usize, p: &[f64], t: f64, j: usize) -> Result<Vec<f64>, SolveError> {
        let margin = (p[j] - self.problem.p_box.lower()[j])
            .min(self.problem.p_box.upper()[j] - p[j]);
        let h = 1e-3f64.min(0.45 * margin).max(1e-7);
        let mut pp = p.to_vec();
        let mut pm = p.to_vec();
        pp[j] += h;
        pm[j] -= h;
        let up = self.core.solve(index, &pp)?.eval(t);
        let um = self.core.solve(index, &pm)?.eval(t);
        Ok(up
            .iter()
            .zip(&um)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect())
    }

    /// Growth of sup |∂₁u_ε| over the lattice parameters at a fixed interior
    /// time, with the envelope exponent N₁ + h·C₂ from the variational
    /// Gronwall bound (N₁ from the third-slot derivative's growth, C₂ from
    /// the log bound).
    pub fn p_derivative_growth(&self, t: f64) -> Result<ParamGrowthReport, SolveError> {
        let grid = self.base.grid().clone();
        let mut sup = vec![0.0; grid.len()];
        for (index, _) in grid.active() {
            let mut worst: f64 = 0.0;
            for p in &self.p_lattice {
                let interior = (0..self.problem.l).all(|j| {
                    let lo = self.problem.p_box.lower()[j];
                    let hi = self.problem.p_box.upper()[j];
                    p[j] > lo + 1e-9 && p[j] < hi - 1e-9
                });
                if !interior {
                    continue;
                }
                for j in 0..self.problem.l {
                    let d = self.dp(index, p, t, j)?;
                    worst = worst.max(crate::geom::norm2(&d));
                }
            }
            sup[index] = worst;
        }
        let net = crate::eps::NumberNet::new(grid, sup).map_err(SolveError::Eps)?;
        let fit = crate::ivp::fit_above_floor(&net, 0.0);
        let c2 = self.cert.log_c1().unwrap_or(0.0);
        // third-slot moderateness order from the q-lattice sup of ∂₃F
        let n1 = {
            let q = self.problem.q_full();
            let n = self.problem.n;
            let l = self.problem.l;
            let d3 = crate::ivp::sup_state_jacobian(
                &self.problem.f,
                &q,
                1 + n..1 + n + l,
                self.cert.eps0_used,
            )?;
            let class = crate::eps::classify_growth(
                &d3.with_eps0(self.cert.eps0_used).map_err(SolveError::Eps)?,
                &crate::eps::DEFAULT_ORDERS,
            )?;
            match class.kind {
                crate::eps::GrowthKind::Moderate(n) => n as f64,
                crate::eps::GrowthKind::Negligible(_) => 0.0,
                _ => f64::INFINITY,
            }
        };
        let envelope_exponent = n1 + self.cert.h * c2;
        Ok(ParamGrowthReport {
            sup_dp: net,
            fitted_order: fit.as_ref().map(|f| f.order()),
            envelope_exponent,
            within_envelope: fit
                .as_ref()
                .map(|f| f.order() <= envelope_exponent + 0.5)
                .unwrap_or(true),
        })
    }
}

/// Growth of the parameter derivative against the variational envelope.
#[derive(Debug, Clone, Serialize)]
pub struct ParamGrowthReport {
    pub sup_dp: crate::eps::NumberNet,
    pub fitted_order: Option<f64>,
    pub envelope_exponent: f64,
    pub within_envelope: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SensitivityRow {
    pub eps: f64,
    pub residual: f64,
}

/// Residual of the variational integral identity at an interior (p, t): the
/// p-derivative of u (by central differences) against the quadrature of
/// ∂₂F · ∂₁u + ∂₃F along the trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityReport {
    pub p: Vec<f64>,
    pub t: f64,
    pub rows: Vec<SensitivityRow>,
    pub max_residual: f64,
}

pub fn sensitivity_residual(
    sol: &ParamSolutionNet,
    p: &[f64],
    t: f64,
) -> Result<SensitivityReport, SolveError> {
    let prob = &sol.problem;
    let n = prob.n;
    let l = prob.l;
    if l == 0 {
        return Err(SolveError::DerivativeUnavailable(
            "problem has no parameters".into(),
        ));
    }
    let grid = sol.base.grid().clone();
    let panels = 256usize;
    let mut rows = Vec::new();
    let mut max_residual: f64 = 0.0;

    for (index, eps) in grid.active() {
        let ev = EpsVal { index, eps };
        let t0e = prob.t0_net.at(index)[0];
        let mut lhs = vec![vec![0.0; l]; n];
        for j in 0..l {
            let col = sol.dp(index, p, t, j)?;
            for i in 0..n {
                lhs[i][j] = col[i];
            }
        }
        let w = simpson_weights(panels, (t - t0e) / panels as f64);
        let mut rhs = vec![vec![0.0; l]; n];
        let mut buf = vec![0.0; n];
        for (k, wk) in w.iter().enumerate() {
            let s = t0e + (t - t0e) * k as f64 / panels as f64;
            let u = sol.value(index, p, s)?;
            let mut du = vec![vec![0.0; l]; n];
            for j in 0..l {
                let col = sol.dp(index, p, s, j)?;
                for i in 0..n {
                    du[i][j] = col[i];
                }
            }
            let mut args = Vec::with_capacity(1 + n + l);
            args.push(s);
            args.extend_from_slice(&u);
            args.extend_from_slice(p);
            let mut d2 = vec![vec![0.0; n]; n];
            for c in 0..n {
                prob.f.map().partial(ev, &args, 1 + c, &mut buf)?;
                for r in 0..n {
                    d2[r][c] = buf[r];
                }
            }
            let mut d3 = vec![vec![0.0; l]; n];
            for c in 0..l {
                prob.f.map().partial(ev, &args, 1 + n + c, &mut buf)?;
                for r in 0..n {
                    d3[r][c] = buf[r];
                }
            }
            for r in 0..n {
                for c in 0..l {
                    let mut acc = d3[r][c];
                    for m in 0..n {
                        acc += d2[r][m] * du[m][c];
                    }
                    rhs[r][c] += wk * acc;
                }
            }
        }
        let mut res: f64 = 0.0;
        for r in 0..n {
            for c in 0..l {
                res = res.max((lhs[r][c] - rhs[r][c]).abs());
            }
        }
        max_residual = max_residual.max(res);
        rows.push(SensitivityRow { eps, residual: res });
    }
    Ok(SensitivityReport {
        p: p.to_vec(),
        t,
        rows,
        max_residual,
    })
}

/// The tuning constants of the translation construction, chosen by the
/// deterministic defaulting rule and recorded.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyConstants {
    pub lambda: f64,
    pub mu: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub delta: f64,
    pub eta: f64,
    pub hat_h: f64,
    pub h: f64,
    pub h1: f64,
}

/// Solution family u(t₁, x₁, p, t) = v(t₁, x₁, p, t - t₁) + x₁ built from
/// the translated problem.
pub struct InitialValueFamily {
    pub constants: FamilyConstants,
    pub j_interval: (f64, f64),
    pub j1_interval: (f64, f64),
    pub u1_box: BoxDomain,
    pub solution: FunctionNet,
    pub v_net: ParamSolutionNet,
    pub x0: Vec<f64>,
    pub t0: f64,
}

impl InitialValueFamily {
    /// u at one grid index and family coordinates (t₁, x₁, p, t).
    pub fn value(
        &self,
        index: usize,
        t1: f64,
        x1: &[f64],
        p: &[f64],
        t: f64,
    ) -> Result<Vec<f64>, SolveError> {
        let mut pv = Vec::with_capacity(1 + x1.len() + p.len());
        pv.push(t1);
        pv.extend_from_slice(x1);
        pv.extend_from_slice(p);
        let v = self.v_net.value(index, &pv, t - t1)?;
        Ok(v.iter().zip(x1).map(|(a, b)| a + b).collect())
    }
}

/// Shift wrapper G(t, x, (t₁, x₁, p)) = F(t + t₁, x + x₁, p).
struct ShiftMap {
    inner: Arc<dyn EpsMap>,
    n: usize,
    l: usize,
}

impl ShiftMap {
    fn shift_args(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let t = x[0];
        let state = &x[1..1 + n];
        let t1 = x[1 + n];
        let x1 = &x[2 + n..2 + 2 * n];
        let p = &x[2 + 2 * n..];
        let mut args = Vec::with_capacity(1 + n + self.l);
        args.push(t + t1);
        for i in 0..n {
            args.push(state[i] + x1[i]);
        }
        args.extend_from_slice(p);
        args
    }
}

impl EpsMap for ShiftMap {
    fn dim_in(&self) -> usize {
        2 + 2 * self.n + self.l
    }

    fn dim_out(&self) -> usize {
        self.n
    }

    fn eval(&self, eps: EpsVal, x: &[f64], out: &mut [f64]) -> Result<(), GfError> {
        self.inner.eval(eps, &self.shift_args(x), out)
    }

    fn partial(&self, eps: EpsVal, x: &[f64], var: usize, out: &mut [f64]) -> Result<(), GfError> {
        // shifts are affine with unit coefficients: each outer slot maps to
        // one inner slot (t and t₁ both to slot 0, x and x₁ to the state
        // slots, p straight through)
        let n = self.n;
        let inner_var = if var == 0 || var == 1 + n {
            0
        } else if var < 1 + n {
            var
        } else if var < 2 + 2 * n {
            var - (1 + n)
        } else {
            var - (1 + n)
        };
        self.inner.partial(eps, &self.shift_args(x), inner_var, out)
    }
}

/// Choose (λ, μ, σ, δ, η) for a requested half-width: defaults first, then a
/// 1-D search over σ, then over λ. Errors report the binding constraint.
fn choose_constants(
    alpha: f64,
    beta: f64,
    a: f64,
    h_target: f64,
) -> Result<(f64, f64, f64, f64, f64, f64), SolveError> {
    let mu = beta / 6.0;
    let gamma = beta - 2.0 * mu;
    let cap_eta = gamma - mu; // = beta/2
    let try_lambda = |lambda: f64| -> Option<(f64, f64, f64, f64)> {
        let hat_cap = (0.999 * lambda * alpha).min(0.999 * cap_eta / (1.05 * a));
        if hat_cap <= 0.0 {
            return None;
        }
        let hat_default = h_target / 0.5;
        if hat_default <= hat_cap {
            let hat = hat_default;
            return Some((0.5, hat, (1.05 * a * hat).min(0.999 * cap_eta), hat));
        }
        let sigma = h_target / hat_cap;
        if sigma < 0.999 {
            let hat = hat_cap;
            return Some((sigma, hat, (1.05 * a * hat).min(0.999 * cap_eta), hat));
        }
        None
    };
    for lambda in [0.5, 0.6, 0.7, 0.8, 0.9, 0.95] {
        if let Some((sigma, delta, eta, hat)) = try_lambda(lambda) {
            return Ok((lambda, mu, sigma, delta, eta, hat));
        }
    }
    let binding = if 0.999 * 0.95 * alpha < 0.999 * cap_eta / (1.05 * a) {
        format!("time collar lambda*alpha with lambda <= 0.95, alpha = {alpha}")
    } else {
        format!("state collar eta < gamma - mu = {cap_eta} against a = {a}")
    };
    Err(SolveError::ConstantsInfeasible { h_target, binding })
}

struct FamilyMap {
    v_map: Arc<dyn EpsMap>,
    n: usize,
    l: usize,
}

impl EpsMap for FamilyMap {
    fn dim_in(&self) -> usize {
        2 + self.n + self.l
    }

    fn dim_out(&self) -> usize {
        self.n
    }

    fn eval(&self, eps: EpsVal, x: &[f64], out: &mut [f64]) -> Result<(), GfError> {
        let t1 = x[0];
        let x1 = &x[1..1 + self.n];
        let t = x[1 + self.n + self.l];
        let mut v_args = Vec::with_capacity(2 + self.n + self.l);
        v_args.extend_from_slice(&x[..1 + self.n + self.l]);
        v_args.push(t - t1);
        self.v_map.eval(eps, &v_args, out)?;
        for i in 0..self.n {
            out[i] += x1[i];
        }
        Ok(())
    }
}

/// Construct the dependence of the solution on generalized initial values
/// (t₁, x₁) and the parameter, for a fixed target half-width h of the common
/// solution interval J = (t₀ - h, t₀ + h).
pub fn solve_with_initial_data(
    prob: &ParamIvpProblem,
    h_target: f64,
    opts: &SolveOptions,
) -> Result<InitialValueFamily, SolveError> {
    let tols = geometric_tolerances(prob.grid().len());
    let x0 = near_standard_limit(&prob.x0_net, &tols)
        .ok_or_else(|| SolveError::InvalidProblem("x0 net is not near-standard".into()))?
        .limit;
    let cert0 = certify_with_parameters(prob)?;
    let h_sup = prob.alpha.min(prob.beta / cert0.a);
    if !(h_target > 0.0 && h_target < h_sup) {
        return Err(SolveError::ConstantsInfeasible {
            h_target,
            binding: format!("h must lie in (0, min(alpha, beta/a)) = (0, {h_sup})"),
        });
    }

    let (lambda, mu, _sigma_plan, delta, eta, _hat_plan) =
        choose_constants(prob.alpha, prob.beta, cert0.a, h_target)?;
    let gamma = prob.beta - 2.0 * mu;
    let n = prob.n;
    let l = prob.l;

    // translated problem: state near 0, parameters (t₁, x₁, p)
    let i_hat = BoxDomain::interval(-lambda * prob.alpha, lambda * prob.alpha)
        .map_err(SolveError::Geom)?;
    let u_hat = BoxDomain::ball_inf(&vec![0.0; n], gamma + mu).map_err(SolveError::Geom)?;
    let i1 = BoxDomain::interval(
        prob.t0 - (1.0 - lambda) * prob.alpha,
        prob.t0 + (1.0 - lambda) * prob.alpha,
    )
    .map_err(SolveError::Geom)?;
    let u1 = BoxDomain::ball_inf(&x0, mu).map_err(SolveError::Geom)?;
    let p_shift = i1.product(&u1).product(&prob.p_box);
    let domain = i_hat.product(&u_hat).product(&p_shift);

    let g_net = FunctionNet::new(
        prob.grid().clone(),
        domain,
        Arc::new(ShiftMap {
            inner: prob.f.map().clone(),
            n,
            l,
        }),
    )?;
    let zero_t = PointNet::constant(prob.grid().clone(), &[0.0]).map_err(SolveError::Eps)?;
    let zero_x = PointNet::constant(prob.grid().clone(), &vec![0.0; n]).map_err(SolveError::Eps)?;
    let g_prob = ParamIvpProblem::new(
        g_net,
        zero_t,
        zero_x,
        delta,
        BoxDomain::point(&vec![0.0; n]).map_err(SolveError::Geom)?,
        eta,
        p_shift.clone(),
    )?;
    let g_cert = certify_with_parameters(&g_prob)?;
    let hat_h = g_cert.h;
    let sigma_final = h_target / hat_h;
    if !(0.5 - 1e-9..0.999).contains(&sigma_final) {
        return Err(SolveError::ConstantsInfeasible {
            h_target,
            binding: format!(
                "certified translated half-width {hat_h} puts sigma = {sigma_final} outside [1/2, 1)"
            ),
        });
    }
    let h = h_target;
    let h1 = ((1.0 - sigma_final) * hat_h).min((1.0 - lambda) * prob.alpha);
    if h + h1 > hat_h * (1.0 + 1e-12) {
        return Err(SolveError::InvalidProblem(
            "family interval arithmetic violated: h + h1 > hat_h".into(),
        ));
    }
    let p_lattice = if p_shift.dim() <= 3 {
        p_shift.lattice(5).collect::<Vec<_>>()
    } else {
        p_shift.lattice(3).collect::<Vec<_>>()
    };
    let v_net = solve_with_parameters(&g_prob, &g_cert, &p_lattice, opts)?;

    let j1 = BoxDomain::interval(prob.t0 - h1, prob.t0 + h1).map_err(SolveError::Geom)?;
    let j = BoxDomain::interval(prob.t0 - h, prob.t0 + h).map_err(SolveError::Geom)?;
    let family_domain = j1.product(&u1).product(&prob.p_box).product(&j);
    let grid = prob
        .grid()
        .with_eps0(g_cert.eps0_used)
        .map_err(SolveError::Eps)?;
    let solution = FunctionNet::new(
        grid,
        family_domain,
        Arc::new(FamilyMap {
            v_map: v_net.base.map().clone(),
            n,
            l,
        }),
    )?;

    // containment arithmetic of the construction
    let i_full = prob.f.domain().slice(0, 1);
    let hull_t = BoxDomain::interval(
        i_hat.lower()[0] + i1.lower()[0],
        i_hat.upper()[0] + i1.upper()[0],
    )
    .map_err(SolveError::Geom)?;
    if i_full.containment_margin(&hull_t) < 0.0 {
        return Err(SolveError::InvalidProblem(
            "translated time window leaves I".into(),
        ));
    }
    let u_full = prob.f.domain().slice(1, n);
    let hull_x = BoxDomain::ball_inf(&x0, prob.beta).map_err(SolveError::Geom)?;
    if u_full.containment_margin(&hull_x) < 0.0 {
        return Err(SolveError::InvalidProblem(
            "translated state window leaves U".into(),
        ));
    }

    Ok(InitialValueFamily {
        constants: FamilyConstants {
            lambda,
            mu,
            gamma,
            sigma: sigma_final,
            delta,
            eta,
            hat_h,
            h,
            h1,
        },
        j_interval: (prob.t0 - h, prob.t0 + h),
        j1_interval: (prob.t0 - h1, prob.t0 + h1),
        u1_box: u1,
        solution,
        v_net,
        x0,
        t0: prob.t0,
    })
}
