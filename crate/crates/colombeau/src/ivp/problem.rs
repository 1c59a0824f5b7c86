//! Generalized initial value problems and the certification of their
//! hypotheses: the uniform RHS bound over Q and the logarithmic bound on the
//! second-slot derivative.

use rayon::prelude::*;
use serde::Serialize;

use crate::eps::{
    classify_growth, geometric_tolerances, near_standard_limit, EpsGrid, GrowthClass, NumberNet,
    PointNet, DEFAULT_ORDERS,
};
use crate::error::SolveError;
use crate::geom::BoxDomain;
use crate::gf::{sup_lattice, EpsVal, FunctionNet};

/// Inflation factor applied to the measured lattice sup of |F| to absorb
/// undersampling between lattice points.
pub const SUP_INFLATION: f64 = 1.05;

/// The full hypothesis package: geometry, RHS net and initial data.
#[derive(Clone)]
pub struct IvpProblem {
    /// RHS net on the product I × U (first axis is time).
    pub f: FunctionNet,
    pub t0_net: PointNet,
    pub x0_net: PointNet,
    /// Near-standard limit of t0_net.
    pub t0: f64,
    pub alpha: f64,
    /// Compact box holding the initial values for small ε.
    pub l_box: BoxDomain,
    pub beta: f64,
    /// Working hypothesis threshold (≤ the grid's ε₀), shrunk so that the
    /// initial values sit in L for all active ε.
    pub eps0: f64,
}

impl IvpProblem {
    pub fn new(
        f: FunctionNet,
        t0_net: PointNet,
        x0_net: PointNet,
        alpha: f64,
        l_box: BoxDomain,
        beta: f64,
    ) -> Result<Self, SolveError> {
        let n = f.codim();
        if f.domain().dim() != n + 1 {
            return Err(SolveError::InvalidProblem(format!(
                "RHS must map an interval times an n-box to n components; got domain dim {} with codim {}",
                f.domain().dim(),
                n
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
        let tols = geometric_tolerances(f.grid().len());
        let t0 = near_standard_limit(&t0_net, &tols)
            .ok_or_else(|| SolveError::InvalidProblem("t0 net is not near-standard".into()))?
            .limit[0];

        let i_interval = f.domain().slice(0, 1);
        let u_set = f.domain().slice(1, n);
        let t_compact = BoxDomain::interval(t0 - alpha, t0 + alpha).map_err(SolveError::Geom)?;
        if !i_interval.compactly_contains(&t_compact) {
            return Err(SolveError::InvalidProblem(format!(
                "[t0 - alpha, t0 + alpha] = [{}, {}] must sit compactly inside I",
                t0 - alpha,
                t0 + alpha
            )));
        }
        if !(beta > 0.0) {
            return Err(SolveError::InvalidProblem("beta must be positive".into()));
        }
        let l_beta = l_box.inflate(beta);
        if !u_set.compactly_contains(&l_beta) {
            return Err(SolveError::InvalidProblem(
                "L + ball(beta) must sit compactly inside U".into(),
            ));
        }

        // shrink eps0 until the initial values sit in L
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
            Some(i) => {
                let e = grid.values()[i];
                if e < eps0 {
                    eps0 = e;
                }
            }
            None => {
                return Err(SolveError::InvalidProblem(
                    "initial values never settle inside L on the active grid".into(),
                ))
            }
        }
        // still need a stable active tail
        grid.with_eps0(eps0).map_err(SolveError::Eps)?;

        Ok(Self {
            f,
            t0_net,
            x0_net,
            t0,
            alpha,
            l_box,
            beta,
            eps0,
        })
    }

    pub fn grid(&self) -> &EpsGrid {
        self.f.grid()
    }

    pub fn dim(&self) -> usize {
        self.f.codim()
    }

    /// Q = [t0-α, t0+α] × L_β.
    pub fn q_box(&self) -> BoxDomain {
        BoxDomain::interval(self.t0 - self.alpha, self.t0 + self.alpha)
            .unwrap()
            .product(&self.l_box.inflate(self.beta))
    }

    pub fn l_beta(&self) -> BoxDomain {
        self.l_box.inflate(self.beta)
    }
}

/// Logarithmic bound on the second-slot derivative:
/// sup |∂₂F_ε| ≤ C₁ · log(1/ε) on the certification lattice.
#[derive(Debug, Clone, Serialize)]
pub struct LogBound {
    pub c1: f64,
    /// Per-ε sup of the Jacobian Frobenius norm.
    pub sup_net: NumberNet,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisCertificate {
    /// Inflated uniform bound: a = 1.05 × (lattice sup of |F_ε| over Q, ε ≤ ε₀).
    pub a: f64,
    pub sup_measured: f64,
    /// Half-width of the existence interval: h = min(α, β/a), exact.
    pub h: f64,
    /// J = (t0 - h, t0 + h).
    pub j_interval: (f64, f64),
    /// W = L + ball(β) as a box.
    pub w_box: BoxDomain,
    pub q_box: BoxDomain,
    pub log_bound: Option<LogBound>,
    /// δ_ε = sup over grid ε' ≤ ε of |t0_ε' - t0| (aligned with the grid).
    pub delta_eps: Vec<f64>,
    /// Threshold after the |t0_ε - t0| ≤ h/4 normalisation.
    pub eps0_used: f64,
    pub t0: f64,
    /// Growth classification of the per-ε sup net (bounded on success).
    pub sup_class: GrowthClass,
}

impl HypothesisCertificate {
    pub fn log_c1(&self) -> Option<f64> {
        self.log_bound.as_ref().map(|b| b.c1)
    }
}

/// Frobenius norm of the Jacobian with respect to the state slots, maximised
/// over a lattice of `region`, per ε.
pub fn sup_state_jacobian(
    f: &FunctionNet,
    region: &BoxDomain,
    state_slots: std::ops::Range<usize>,
    eps0: f64,
) -> Result<NumberNet, SolveError> {
    let pts = sup_lattice(region);
    let grid = f.grid();
    let rows: Vec<Result<f64, SolveError>> = (0..grid.len())
        .into_par_iter()
        .map(|index| {
            let ev = EpsVal {
                index,
                eps: grid.values()[index],
            };
            if ev.eps > eps0 {
                return Ok(0.0);
            }
            let mut best: f64 = 0.0;
            let mut col = vec![0.0; f.codim()];
            for x in &pts {
                let mut acc = 0.0;
                for slot in state_slots.clone() {
                    f.map().partial(ev, x, slot, &mut col)?;
                    acc += col.iter().map(|v| v * v).sum::<f64>();
                }
                best = best.max(acc.sqrt());
            }
            Ok(best)
        })
        .collect();
    let mut samples = Vec::with_capacity(rows.len());
    for r in rows {
        samples.push(r?);
    }
    Ok(NumberNet::new(grid.clone(), samples).map_err(SolveError::Eps)?)
}

/// Decide whether the per-ε sups `d` admit a log(1/ε) envelope, and fit C₁.
///
/// Accepts when the least-squares line in log(1/ε) explains the data to 5%
/// of scale, or when the ratio d/log(1/ε) has already peaked before the
/// smallest grid points (so the ratio is not still climbing).
pub fn fit_log_bound(d: &NumberNet, eps0: f64) -> Option<f64> {
    let rows: Vec<(f64, f64)> = d
        .grid()
        .active()
        .filter(|&(_, e)| e <= eps0 && e < 0.999)
        .map(|(i, e)| ((1.0 / e).ln(), d.at(i)))
        .collect();
    if rows.len() < 4 {
        return None;
    }
    let scale = rows.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
    if scale <= 1e-250 {
        return Some(0.0);
    }
    let n = rows.len() as f64;
    let mx = rows.iter().map(|r| r.0).sum::<f64>() / n;
    let my = rows.iter().map(|r| r.1).sum::<f64>() / n;
    let sxx: f64 = rows.iter().map(|r| (r.0 - mx) * (r.0 - mx)).sum();
    let sxy: f64 = rows.iter().map(|r| (r.0 - mx) * (r.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let resid = rows
        .iter()
        .map(|r| (r.1 - (icpt + slope * r.0)).abs())
        .fold(0.0, f64::max);

    let ratios: Vec<f64> = rows.iter().map(|r| r.1 / r.0).collect();
    let c1 = ratios.iter().copied().fold(0.0, f64::max);
    let peak = ratios
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let still_climbing = peak + 2 >= ratios.len();

    if resid < 0.05 * scale || !still_climbing {
        Some(c1)
    } else {
        None
    }
}

/// Shared certification core: classify the sup net, derive (a, h), enforce
/// the |t0_ε - t0| ≤ h/4 normalisation by shrinking ε₀, and compute δ_ε.
/// `q_aux` is the box over which the second-slot Jacobian is certified
/// (J × W for the plain problem, J × W × K for parameterized ones).
pub(crate) fn certify_core(
    f: &FunctionNet,
    t0_net: &PointNet,
    t0: f64,
    alpha: f64,
    beta: f64,
    eps0_init: f64,
    q: BoxDomain,
    w_box: BoxDomain,
    state_slots: std::ops::Range<usize>,
    param_tail: Option<&BoxDomain>,
) -> Result<HypothesisCertificate, SolveError> {
    let grid = f.grid();
    let sup_net = crate::gf::sup_on_compact(f, &q, &[])?;

    let classify_at = |eps0: f64| -> Result<GrowthClass, SolveError> {
        Ok(classify_growth(&sup_net.with_eps0(eps0)?, &DEFAULT_ORDERS)?)
    };
    let sup_class = classify_at(eps0_init)?;
    if !sup_class.is_bounded() {
        return Err(SolveError::UnboundedRhs { growth: sup_class });
    }

    let measured = |eps0: f64| -> f64 {
        grid.active()
            .filter(|&(_, e)| e <= eps0)
            .map(|(i, _)| sup_net.at(i))
            .fold(0.0, f64::max)
    };

    let mut eps0 = eps0_init;
    let mut sup_measured = measured(eps0);
    let mut a = SUP_INFLATION * sup_measured;
    let mut h = alpha.min(beta / a);

    // normalisation: |t0_ε - t0| ≤ h/4 for all active ε; shrink ε₀ until it
    // holds, then refresh a and h on the smaller active set (h only grows).
    let within = |i: usize, h: f64| (t0_net.at(i)[0] - t0).abs() <= h / 4.0;
    let all_within = |eps0: f64, h: f64| {
        grid.active()
            .filter(|&(_, e)| e <= eps0)
            .all(|(i, _)| within(i, h))
    };
    if !all_within(eps0, h) {
        let mut candidate: Option<f64> = None;
        for (_i, e) in grid.active() {
            if e > eps0 {
                continue;
            }
            if grid
                .active()
                .filter(|&(_, e2)| e2 <= e)
                .all(|(j, _)| within(j, h))
            {
                candidate = Some(e);
                break;
            }
        }
        let new_eps0 = candidate.ok_or_else(|| {
            SolveError::InvalidProblem(
                "t0 net never satisfies the |t0_eps - t0| <= h/4 normalisation".into(),
            )
        })?;
        grid.with_eps0(new_eps0).map_err(SolveError::Eps)?;
        eps0 = new_eps0;
        sup_measured = measured(eps0);
        a = SUP_INFLATION * sup_measured;
        h = alpha.min(beta / a);
        if !all_within(eps0, h) {
            return Err(SolveError::InvalidProblem(
                "t0 normalisation failed to stabilise".into(),
            ));
        }
    }

    // δ_ε = sup over grid ε' ≤ ε: a suffix max toward the small-ε end
    let delta_eps: Vec<f64> = {
        let len = grid.len();
        let mut out = vec![0.0; len];
        let mut running: f64 = 0.0;
        for i in (0..len).rev() {
            running = running.max((t0_net.at(i)[0] - t0).abs());
            out[i] = running;
        }
        out
    };

    let mut jw_box = BoxDomain::interval(t0 - h, t0 + h)
        .map_err(SolveError::Geom)?
        .product(&w_box);
    if let Some(tail) = param_tail {
        jw_box = jw_box.product(tail);
    }
    let d2 = sup_state_jacobian(f, &jw_box, state_slots, eps0)?;
    let log_bound = fit_log_bound(&d2, eps0).map(|c1| LogBound { c1, sup_net: d2 });

    Ok(HypothesisCertificate {
        a,
        sup_measured,
        h,
        j_interval: (t0 - h, t0 + h),
        w_box,
        q_box: q,
        log_bound,
        delta_eps,
        eps0_used: eps0,
        t0,
        sup_class: classify_at(eps0)?,
    })
}

/// Certify the hypotheses of a problem: the uniform bound a over Q for
/// ε ≤ ε₀ (inflated 5% over the lattice sup), the derived half-width
/// h = min(α, β/a), the normalisation |t0_ε - t0| ≤ h/4 (shrinking ε₀ as
/// needed), and the optional logarithmic bound on ∂₂F over J × W.
pub fn certify_hypotheses(prob: &IvpProblem) -> Result<HypothesisCertificate, SolveError> {
    let n = prob.dim();
    certify_core(
        &prob.f,
        &prob.t0_net,
        prob.t0,
        prob.alpha,
        prob.beta,
        prob.eps0,
        prob.q_box(),
        prob.l_box.inflate(prob.beta),
        1..1 + n,
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, to_function_net, Signature, VarLayout};
    use crate::geom::Ambient;

    fn simple_problem(src: &str, domain: BoxDomain, x0: f64, alpha: f64, beta: f64) -> IvpProblem {
        let grid = EpsGrid::standard();
        let e = parse(src, Signature::new(1, 0)).unwrap();
        let f = to_function_net(vec![e], VarLayout::t_x(1), grid.clone(), domain).unwrap();
        let t0 = PointNet::constant(grid.clone(), &[0.0]).unwrap();
        let x0 = PointNet::constant(grid, &[x0]).unwrap();
        let l = BoxDomain::point(&[0.0]).unwrap();
        IvpProblem::new(f, t0, x0, alpha, l, beta).unwrap()
    }

    #[test]
    fn eps_free_rhs_is_certified_with_log_bound() {
        let domain = BoxDomain::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let prob = simple_problem("sin(t) + cos(x1)", domain, 0.0, 1.0, 0.5);
        let cert = certify_hypotheses(&prob).unwrap();
        assert!(cert.sup_measured <= 2.0 + 1e-9);
        assert_eq!(cert.a, SUP_INFLATION * cert.sup_measured);
        assert_eq!(cert.h, prob.alpha.min(prob.beta / cert.a));
        let c1 = cert.log_c1().expect("log bound present");
        assert!(c1 > 0.0 && c1 < 2.0, "c1 = {c1}");
    }

    #[test]
    fn one_over_eps_rhs_is_rejected_with_order_one() {
        let domain = BoxDomain::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let grid = EpsGrid::standard();
        let e = parse("(2 - 1/(1+x1^2))/eps", Signature::new(1, 0)).unwrap();
        let f = to_function_net(vec![e], VarLayout::t_x(1), grid.clone(), domain).unwrap();
        let t0 = PointNet::constant(grid.clone(), &[0.0]).unwrap();
        let x0 = PointNet::constant(grid, &[0.0]).unwrap();
        let l = BoxDomain::point(&[0.0]).unwrap();
        let prob = IvpProblem::new(f, t0, x0, 1.0, l, 0.5).unwrap();
        match certify_hypotheses(&prob) {
            Err(SolveError::UnboundedRhs { growth }) => {
                let order = growth.fit.expect("fit present").order();
                assert!((order - 1.0).abs() < 0.1, "order = {order}");
            }
            other => panic!("expected UnboundedRhs, got {other:?}"),
        }
    }

    #[test]
    fn generalized_t0_shrinks_eps0_for_normalisation() {
        let grid = EpsGrid::standard();
        let domain = BoxDomain::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let e = parse("sin(t) + cos(x1)", Signature::new(1, 0)).unwrap();
        let f = to_function_net(vec![e], VarLayout::t_x(1), grid.clone(), domain).unwrap();
        // t0_eps = eps: needs eps <= h/4
        let t0 =
            PointNet::from_fn(grid.clone(), Ambient::All(1), |e| vec![e]).unwrap();
        let x0 = PointNet::constant(grid, &[0.0]).unwrap();
        let l = BoxDomain::point(&[0.0]).unwrap();
        let prob = IvpProblem::new(f, t0, x0, 1.0, l, 0.5).unwrap();
        let cert = certify_hypotheses(&prob).unwrap();
        assert!(cert.eps0_used <= cert.h / 4.0 + 1e-15);
        for (i, e) in prob.grid().active() {
            if e <= cert.eps0_used {
                assert!(cert.delta_eps[i] <= cert.h / 4.0 + 1e-15);
            }
        }
    }
}
