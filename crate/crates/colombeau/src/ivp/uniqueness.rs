//! Gap diagnostics between two solution nets of (negligibly) perturbed
//! problems, with the Gronwall envelope built from measured surrogate
//! constants.

use serde::Serialize;

use crate::eps::{classify_growth, GrowthClass, LogLogFit, NumberNet};
use crate::error::SolveError;
use crate::geom::dist2;
use crate::gf::EpsVal;
use crate::quad::simpson;

use super::problem::HypothesisCertificate;
use super::solve::{sup_gap_on, SolutionNet};

/// Measured gap between two solutions on a compact subinterval J†, against
/// the Gronwall envelope inhom_ε · exp((C₃ + C₄ log(1/ε)) · w). The proof
/// constants are existential; the fields here are measured surrogates
/// (C' = 1 on convex boxes, C₃ = a, C₄ = C'·C₁).
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub k_interval: (f64, f64),
    pub gap: NumberNet,
    pub inhomogeneity: Vec<f64>,
    pub envelope: Vec<f64>,
    /// Fitted inhomogeneity model C₂ ε^m.
    pub c2: f64,
    pub m_fit: f64,
    pub c3: f64,
    pub c4: f64,
    /// Additive allowance for integrator noise in the pointwise check.
    pub noise_budget: f64,
    /// gap ≤ envelope + noise at every active ε.
    pub envelope_ok: bool,
    /// Log-log slope of the gap restricted to samples above the noise floor.
    pub above_noise_fit: Option<LogLogFit>,
    /// Classification of the gap net at the requested order list.
    pub classification: GrowthClass,
}

/// Fit log-log slope using only samples above `floor`.
pub fn fit_above_floor(net: &NumberNet, floor: f64) -> Option<LogLogFit> {
    let pts: Vec<(f64, f64)> = net
        .grid()
        .active()
        .filter(|&(i, _)| net.at(i) > floor)
        .map(|(i, e)| (e.ln(), net.at(i).ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = pts
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).abs())
        .fold(0.0, f64::max);
    Some(LogLogFit {
        slope,
        intercept,
        max_residual,
    })
}

/// Measure the gap between two solutions of the same problem up to
/// negligible perturbations (of the RHS and/or the initial value), and
/// compare it against the Gronwall envelope. Requires the log bound.
pub fn uniqueness_gap(
    sol1: &SolutionNet,
    sol2: &SolutionNet,
    cert: &HypothesisCertificate,
    k_lo: f64,
    k_hi: f64,
    m_test: i32,
) -> Result<GapReport, SolveError> {
    let c1 = cert.log_c1().ok_or(SolveError::MissingLogBound)?;
    let gap = sup_gap_on(sol1, sol2, k_lo, k_hi, 256)?;
    let grid = gap.grid().clone();

    // per-ε inhomogeneity: initial-value gap plus ∫ |F₂ - F₁| along u₁
    let n = sol1.problem.dim();
    let mut inhom = vec![0.0; grid.len()];
    for (index, eps) in grid.active() {
        let x0_gap = dist2(
            sol1.problem.x0_net.at(index),
            sol2.problem.x0_net.at(index),
        );
        let ev = EpsVal { index, eps };
        let f1 = sol1.problem.f.map().clone();
        let f2 = sol2.problem.f.map().clone();
        let sol = &sol1.per_eps[index];
        let integrand = |t: f64| -> f64 {
            let y = sol.eval(t);
            let mut args = Vec::with_capacity(1 + n);
            args.push(t);
            args.extend_from_slice(&y);
            let mut a = vec![0.0; n];
            let mut b = vec![0.0; n];
            if f1.eval(ev, &args, &mut a).is_err() || f2.eval(ev, &args, &mut b).is_err() {
                return 0.0;
            }
            dist2(&a, &b)
        };
        inhom[index] = x0_gap + simpson(integrand, k_lo, k_hi, 256);
    }

    // fit inhom ≈ C₂ ε^m over the active grid
    let inhom_net = NumberNet::new(grid.clone(), inhom.clone()).map_err(SolveError::Eps)?;
    let fit = fit_above_floor(&inhom_net, 0.0);
    let (c2, m_fit) = match &fit {
        Some(f) => (f.intercept.exp(), -f.order()),
        None => (0.0, 0.0),
    };

    let c3 = cert.a;
    let c4 = c1; // C' = 1: mean value bound on a convex box
    let noise_budget = 20.0 * (sol1.options.atol + sol1.options.rtol
        + sol2.options.atol + sol2.options.rtol);

    let mut envelope = vec![0.0; grid.len()];
    let mut ok = true;
    for (index, eps) in grid.active() {
        let t0e = sol1.problem.t0_net.at(index)[0];
        let w = (k_hi - t0e).abs().max((t0e - k_lo).abs());
        envelope[index] = inhom[index] * ((c3 + c4 * (1.0 / eps).ln()) * w).exp();
        if gap.at(index) > envelope[index] + noise_budget {
            ok = false;
        }
    }

    let above_noise_fit = fit_above_floor(&gap, 10.0 * noise_budget);
    let orders: Vec<i32> = (0..=m_test.max(0)).collect();
    let classification = classify_growth(&gap, &orders)?;

    Ok(GapReport {
        k_interval: (k_lo, k_hi),
        gap,
        inhomogeneity: inhom,
        envelope,
        c2,
        m_fit,
        c3,
        c4,
        noise_budget,
        envelope_ok: ok,
        above_noise_fit,
        classification,
    })
}
