//! Function nets on box domains: sup-norm estimation over compacts,
//! c-boundedness certificates, composition, slowly-increasing composition,
//! point values, and the pointwise equality test.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::eps::{
    classify_growth, near_standard_limit, geometric_tolerances, EpsGrid, GrowthClass, NumberNet,
    PointNet, DEFAULT_ORDERS,
};
use crate::error::GfError;
use crate::geom::{norm2, Ambient, BoxDomain};
use crate::quad::fd_step;

/// One grid position handed to evaluators: the index avoids float lookups,
/// the value is what enters formulas.
#[derive(Debug, Clone, Copy)]
pub struct EpsVal {
    pub index: usize,
    pub eps: f64,
}

/// A net of smooth maps indexed by ε, with derivative access.
///
/// `partial_multi` has a finite-difference default built on `partial`;
/// symbolic evaluators override both.
pub trait EpsMap: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;

    fn eval(&self, eps: EpsVal, x: &[f64], out: &mut [f64]) -> Result<(), GfError>;

    fn partial(&self, eps: EpsVal, x: &[f64], var: usize, out: &mut [f64]) -> Result<(), GfError> {
        let h = fd_step(x[var]);
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

    /// Mixed partial of multi-index `alpha` (one entry per input axis).
    fn partial_multi(
        &self,
        eps: EpsVal,
        x: &[f64],
        alpha: &[usize],
        out: &mut [f64],
    ) -> Result<(), GfError> {
        let order: usize = alpha.iter().sum();
        match order {
            0 => self.eval(eps, x, out),
            1 => {
                let var = alpha.iter().position(|&a| a > 0).unwrap();
                self.partial(eps, x, var, out)
            }
            _ => {
                // peel one derivative off by central differences
                let var = alpha.iter().position(|&a| a > 0).unwrap();
                let mut lower = alpha.to_vec();
                lower[var] -= 1;
                let h = fd_step(x[var]);
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[var] += h;
                xm[var] -= h;
                let mut fp = vec![0.0; self.dim_out()];
                let mut fm = vec![0.0; self.dim_out()];
                self.partial_multi(eps, &xp, &lower, &mut fp)?;
                self.partial_multi(eps, &xm, &lower, &mut fm)?;
                for i in 0..self.dim_out() {
                    out[i] = (fp[i] - fm[i]) / (2.0 * h);
                }
                Ok(())
            }
        }
    }
}

/// Closure-backed evaluator with finite-difference derivatives.
pub struct FnMap<F> {
    dim_in: usize,
    dim_out: usize,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(dim_in: usize, dim_out: usize, f: F) -> Self {
        Self { dim_in, dim_out, f }
    }
}

impl<F> EpsMap for FnMap<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Send + Sync,
{
    fn dim_in(&self) -> usize {
        self.dim_in
    }

    fn dim_out(&self) -> usize {
        self.dim_out
    }

    fn eval(&self, eps: EpsVal, x: &[f64], out: &mut [f64]) -> Result<(), GfError> {
        (self.f)(eps.eps, x, out);
        Ok(())
    }
}

/// Representative (u_ε)_ε of a generalized function on a box domain.
#[derive(Clone)]
pub struct FunctionNet {
    grid: EpsGrid,
    domain: BoxDomain,
    map: Arc<dyn EpsMap>,
}

impl std::fmt::Debug for FunctionNet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionNet")
            .field("domain", &self.domain)
            .field("dim_out", &self.map.dim_out())
            .finish()
    }
}

impl FunctionNet {
    pub fn new(grid: EpsGrid, domain: BoxDomain, map: Arc<dyn EpsMap>) -> Result<Self, GfError> {
        if !domain.is_solid() {
            return Err(GfError::Geom(crate::error::GeomError::InvalidBounds {
                axis: 0,
                lower: f64::NAN,
                upper: f64::NAN,
            }));
        }
        if map.dim_in() != domain.dim() {
            return Err(GfError::Eps(crate::error::EpsError::DimensionMismatch {
                expected: domain.dim(),
                got: map.dim_in(),
            }));
        }
        Ok(Self { grid, domain, map })
    }

    pub fn from_fn<F>(
        grid: EpsGrid,
        domain: BoxDomain,
        dim_out: usize,
        f: F,
    ) -> Result<Self, GfError>
    where
        F: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        let dim_in = domain.dim();
        Self::new(grid, domain, Arc::new(FnMap::new(dim_in, dim_out, f)))
    }

    pub fn grid(&self) -> &EpsGrid {
        &self.grid
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn codim(&self) -> usize {
        self.map.dim_out()
    }

    pub fn map(&self) -> &Arc<dyn EpsMap> {
        &self.map
    }

    fn eps_val(&self, index: usize) -> EpsVal {
        EpsVal {
            index,
            eps: self.grid.values()[index],
        }
    }

    pub fn value(&self, index: usize, x: &[f64]) -> Result<Vec<f64>, GfError> {
        let mut out = vec![0.0; self.codim()];
        self.map.eval(self.eps_val(index), x, &mut out)?;
        Ok(out)
    }

    pub fn partial(&self, index: usize, x: &[f64], var: usize) -> Result<Vec<f64>, GfError> {
        let mut out = vec![0.0; self.codim()];
        self.map.partial(self.eps_val(index), x, var, &mut out)?;
        Ok(out)
    }

    pub fn partial_multi(&self, index: usize, x: &[f64], alpha: &[usize]) -> Result<Vec<f64>, GfError> {
        let mut out = vec![0.0; self.codim()];
        self.map.partial_multi(self.eps_val(index), x, alpha, &mut out)?;
        Ok(out)
    }

    /// Max relative deviation between declared first partials and central
    /// differences of `eval` at deterministic interior probes. The tolerance
    /// contract is 10·step² relative.
    pub fn derivative_consistency(&self, probes: usize) -> Result<f64, GfError> {
        let pts = self.domain.shrink(self.domain.min_width() * 0.05).halton_interior(probes);
        let mut worst: f64 = 0.0;
        for (index, _) in self.grid.active() {
            let ev = self.eps_val(index);
            for x in &pts {
                for var in 0..self.domain.dim() {
                    let mut sym = vec![0.0; self.codim()];
                    self.map.partial(ev, x, var, &mut sym)?;
                    let h = fd_step(x[var]);
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[var] += h;
                    xm[var] -= h;
                    let mut fp = vec![0.0; self.codim()];
                    let mut fm = vec![0.0; self.codim()];
                    self.map.eval(ev, &xp, &mut fp)?;
                    self.map.eval(ev, &xm, &mut fm)?;
                    for i in 0..self.codim() {
                        let fd = (fp[i] - fm[i]) / (2.0 * h);
                        let scale = sym[i].abs().max(fd.abs()).max(1.0);
                        worst = worst.max((fd - sym[i]).abs() / scale);
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// Lattice density for a sup estimate, by dimension.
fn lattice_per_axis(dim: usize) -> usize {
    match dim {
        0 | 1 | 2 => 257,
        3 => 33,
        4 => 9,
        _ => 5,
    }
}

/// Number of low-discrepancy interior probes added to the tensor lattice.
const INTERIOR_PROBES: usize = 64;

/// Deterministic sample set for sup estimation on a compact box.
pub fn sup_lattice(k: &BoxDomain) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = k.lattice(lattice_per_axis(k.dim())).collect();
    if k.min_width() > 0.0 {
        pts.extend(k.halton_interior(INTERIOR_PROBES));
    }
    pts
}

/// Per-ε sup of |∂^α f_ε| over a deterministic lattice of K. The result is a
/// lower bound for the true sup, fed to `classify_growth`.
pub fn sup_on_compact(
    f: &FunctionNet,
    k: &BoxDomain,
    alpha: &[usize],
) -> Result<NumberNet, GfError> {
    let margin = f.domain.containment_margin(k);
    if margin < -1e-12 {
        return Err(GfError::KOutsideDomain { margin });
    }
    let pts = sup_lattice(k);
    let alpha_full: Vec<usize> = if alpha.is_empty() {
        vec![0; f.domain.dim()]
    } else if alpha.len() == f.domain.dim() {
        alpha.to_vec()
    } else {
        return Err(GfError::DerivativeUnavailable(alpha.to_vec()));
    };
    let order: usize = alpha_full.iter().sum();

    let samples: Vec<Result<f64, GfError>> = (0..f.grid.len())
        .into_par_iter()
        .map(|index| {
            let ev = f.eps_val(index);
            let active = ev.eps <= f.grid.eps0();
            let mut out = vec![0.0; f.codim()];
            let mut best: f64 = 0.0;
            for x in &pts {
                let r = match order {
                    0 => f.map.eval(ev, x, &mut out),
                    _ => f.map.partial_multi(ev, x, &alpha_full, &mut out),
                };
                match r {
                    Ok(()) => best = best.max(norm2(&out)),
                    // representatives are unconstrained above ε₀; record the
                    // failure as NaN there instead of aborting
                    Err(e) if active => return Err(e),
                    Err(_) => return Ok(f64::NAN),
                }
            }
            Ok(best)
        })
        .collect();

    let mut values = Vec::with_capacity(samples.len());
    for s in samples {
        values.push(s?);
    }
    Ok(NumberNet::new(f.grid.clone(), values)?)
}

/// Witness that u maps the compact K into the compact L ⊂⊂ V for all ε ≤ ε₀.
#[derive(Debug, Clone, Serialize)]
pub struct CBoundCertificate {
    pub source_compact: BoxDomain,
    pub target_compact: BoxDomain,
    pub eps0_used: f64,
    /// Distance from L to the boundary of V (infinite for V = ℝⁿ).
    pub margin: f64,
}

/// Where and how a c-boundedness check failed.
#[derive(Debug, Clone, Serialize)]
pub struct EscapeReport {
    pub eps: f64,
    pub point: Vec<f64>,
    pub value: Vec<f64>,
    pub sup_class: GrowthClass,
    /// How many levels of the compact exhaustion of V are escaped by some
    /// sample with ε ≤ ε₀.
    pub levels_escaped: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub enum CBoundOutcome {
    Certified(CBoundCertificate),
    Escapes(EscapeReport),
}

impl CBoundOutcome {
    pub fn certificate(&self) -> Option<&CBoundCertificate> {
        match self {
            CBoundOutcome::Certified(c) => Some(c),
            CBoundOutcome::Escapes(_) => None,
        }
    }
}

const EXHAUSTION_LEVELS: usize = 12;

/// Check that f maps K into a fixed compact of V for every ε ≤ ε₀.
///
/// On success the target compact is the bounding box of all active samples,
/// inflated by 10% per axis, verified to sit compactly inside V. Failure
/// means either a sample leaves V, the per-ε sup net fails the bounded
/// certification (values diverge as ε → 0), or the inflated hull reaches the
/// boundary of V.
pub fn check_cbounded(
    f: &FunctionNet,
    k: &BoxDomain,
    v: &Ambient,
) -> Result<CBoundOutcome, GfError> {
    let margin = f.domain.containment_margin(k);
    if margin < -1e-12 {
        return Err(GfError::KOutsideDomain { margin });
    }
    let pts = sup_lattice(k);
    let active: Vec<(usize, f64)> = f.grid.active().collect();

    struct PerEps {
        sup: f64,
        argmax: Vec<f64>,
        val_at_max: Vec<f64>,
        hull: BoxDomain,
        outside: Option<(Vec<f64>, Vec<f64>)>,
    }

    let rows: Vec<Result<PerEps, GfError>> = active
        .par_iter()
        .map(|&(index, eps)| {
            let ev = EpsVal {
                index,
                eps,
            };
            let mut out = vec![0.0; f.codim()];
            let mut sup = f64::NEG_INFINITY;
            let mut argmax = pts[0].clone();
            let mut val_at_max = vec![0.0; f.codim()];
            let mut outside = None;
            let mut values = Vec::with_capacity(pts.len());
            for x in &pts {
                f.map.eval(ev, x, &mut out)?;
                let n = norm2(&out);
                if n > sup {
                    sup = n;
                    argmax = x.clone();
                    val_at_max = out.clone();
                }
                if outside.is_none() && !v.contains(&out, 0.0) {
                    outside = Some((x.clone(), out.clone()));
                }
                values.push(out.clone());
            }
            let hull =
                BoxDomain::hull_of_points(values.iter().map(|v| v.as_slice())).expect("nonempty");
            Ok(PerEps {
                sup,
                argmax,
                val_at_max,
                hull,
                outside,
            })
        })
        .collect();

    let mut per_eps = Vec::with_capacity(rows.len());
    for r in rows {
        per_eps.push(r?);
    }

    let sup_net = NumberNet::new(
        f.grid.clone(),
        {
            // carry the active sups; inactive entries mirror the largest active ε
            let mut v = vec![per_eps[0].sup; f.grid.len()];
            for ((index, _), row) in active.iter().zip(&per_eps) {
                v[*index] = row.sup;
            }
            v
        },
    )?;
    let sup_class = classify_growth(&sup_net, &DEFAULT_ORDERS)?;

    let exhaustion = v.exhaustion(EXHAUSTION_LEVELS);
    let smallest = per_eps.last().unwrap();
    let levels_escaped = exhaustion
        .iter()
        .filter(|k_j| !k_j.compactly_contains(&smallest.hull))
        .count();

    // hard failure: a sample left V outright
    for ((_, eps), row) in active.iter().zip(&per_eps) {
        if let Some((x, val)) = &row.outside {
            return Ok(CBoundOutcome::Escapes(EscapeReport {
                eps: *eps,
                point: x.clone(),
                value: val.clone(),
                sup_class,
                levels_escaped,
                reason: "sample value outside V".into(),
            }));
        }
    }

    if !sup_class.is_bounded() {
        return Ok(CBoundOutcome::Escapes(EscapeReport {
            eps: active.last().unwrap().1,
            point: smallest.argmax.clone(),
            value: smallest.val_at_max.clone(),
            sup_class,
            levels_escaped,
            reason: "per-ε sup over K keeps growing as ε → 0".into(),
        }));
    }

    let mut hull = per_eps[0].hull.clone();
    for row in &per_eps[1..] {
        hull = hull.hull(&row.hull);
    }
    let target = hull.inflate_relative(0.1, 1e-9);
    let margin = match v {
        Ambient::Boxed(vb) => {
            let m = vb.containment_margin(&target);
            if m <= 0.0 {
                return Ok(CBoundOutcome::Escapes(EscapeReport {
                    eps: active.last().unwrap().1,
                    point: smallest.argmax.clone(),
                    value: smallest.val_at_max.clone(),
                    sup_class,
                    levels_escaped,
                    reason: "inflated value hull reaches the boundary of V".into(),
                }));
            }
            m
        }
        Ambient::All(_) => f64::INFINITY,
    };

    Ok(CBoundOutcome::Certified(CBoundCertificate {
        source_compact: k.clone(),
        target_compact: target,
        eps0_used: f.grid.eps0(),
        margin,
    }))
}

struct ComposeMap {
    u: Arc<dyn EpsMap>,
    v: Arc<dyn EpsMap>,
    v_domain: BoxDomain,
}

impl ComposeMap {
    fn inner(&self, eps: EpsVal, x: &[f64]) -> Result<Vec<f64>, GfError> {
        let mut y = vec![0.0; self.u.dim_out()];
        self.u.eval(eps, x, &mut y)?;
        // a certified c-bound makes this unreachable; refuse to extrapolate v
        let viol = self.v_domain.violation(&y);
        if viol > 1e-9 * (1.0 + norm2(&y)) {
            return Err(GfError::DomainEvaluation {
                eps: eps.eps,
                location: y,
                reason: "inner value left the outer net's domain".into(),
            });
        }
        self.v_domain.clamp(&mut y);
        Ok(y)
    }
}

impl EpsMap for ComposeMap {
    fn dim_in(&self) -> usize {
        self.u.dim_in()
    }

    fn dim_out(&self) -> usize {
        self.v.dim_out()
    }

    fn eval(&self, eps: EpsVal, x: &[f64], out: &mut [f64]) -> Result<(), GfError> {
        let y = self.inner(eps, x)?;
        self.v.eval(eps, &y, out)
    }

    fn partial(&self, eps: EpsVal, x: &[f64], var: usize, out: &mut [f64]) -> Result<(), GfError> {
        let y = self.inner(eps, x)?;
        let m = self.u.dim_out();
        let mut du = vec![0.0; m];
        self.u.partial(eps, x, var, &mut du)?;
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut dv = vec![0.0; self.v.dim_out()];
        for j in 0..m {
            if du[j] == 0.0 {
                continue;
            }
            self.v.partial(eps, &y, j, &mut dv)?;
            for i in 0..self.v.dim_out() {
                out[i] += dv[i] * du[j];
            }
        }
        Ok(())
    }
}

/// Composition v ∘ u, gated by a c-bound certificate for u into v's domain.
pub fn compose(
    v: &FunctionNet,
    u: &FunctionNet,
    cert: &CBoundCertificate,
) -> Result<FunctionNet, GfError> {
    if u.grid != v.grid {
        return Err(GfError::Eps(crate::error::EpsError::GridMismatch));
    }
    if u.codim() != v.domain.dim() {
        return Err(GfError::MissingCertificate(format!(
            "inner codim {} does not match outer domain dim {}",
            u.codim(),
            v.domain.dim()
        )));
    }
    if cert.source_compact.containment_margin(&u.domain) < -1e-12 {
        return Err(GfError::MissingCertificate(
            "certificate source compact does not cover the inner domain".into(),
        ));
    }
    if v.domain.containment_margin(&cert.target_compact) < 0.0 {
        return Err(GfError::MissingCertificate(
            "certificate target compact is not contained in the outer domain".into(),
        ));
    }
    FunctionNet::new(
        u.grid.clone(),
        u.domain.clone(),
        Arc::new(ComposeMap {
            u: u.map.clone(),
            v: v.map.clone(),
            v_domain: v.domain.clone(),
        }),
    )
}

/// A fixed smooth map with certified polynomial growth of its derivatives:
/// |∂^α f(x)| ≤ C_k (1 + |x|)^{N_k} for |α| = k, verified numerically on a
/// large probe box at construction.
pub struct SlowlyIncreasingMap {
    map: Arc<dyn EpsMap>,
    pub witnesses: Vec<(f64, i32)>,
    pub probe_radius: f64,
}

impl SlowlyIncreasingMap {
    pub fn new(
        map: Arc<dyn EpsMap>,
        witnesses: Vec<(f64, i32)>,
        probe_radius: f64,
    ) -> Result<Self, GfError> {
        if witnesses.is_empty() {
            return Err(GfError::GrowthWitnessFailed { order: 0, at: 0.0 });
        }
        let n = map.dim_in();
        let probe = BoxDomain::ball_inf(&vec![0.0; n], probe_radius)?;
        let per_axis = if n <= 1 { 1025 } else { lattice_per_axis(n) };
        let pts: Vec<Vec<f64>> = probe.lattice(per_axis).collect();
        let ev = EpsVal { index: 0, eps: 1.0 };
        let mut out = vec![0.0; map.dim_out()];
        for (k, &(c, nk)) in witnesses.iter().enumerate() {
            for alpha in multi_indices(n, k) {
                for x in &pts {
                    map.partial_multi(ev, x, &alpha, &mut out)?;
                    let bound = c * (1.0 + norm2(x)).powi(nk);
                    if norm2(&out) > bound {
                        return Err(GfError::GrowthWitnessFailed {
                            order: k,
                            at: norm2(x),
                        });
                    }
                }
            }
        }
        Ok(Self {
            map,
            witnesses,
            probe_radius,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.map.dim_in()
    }
}

fn multi_indices(n: usize, order: usize) -> Vec<Vec<usize>> {
    if order == 0 {
        return vec![vec![0; n]];
    }
    let mut out = Vec::new();
    for lower in multi_indices(n, order - 1) {
        for i in 0..n {
            let mut a = lower.clone();
            a[i] += 1;
            if !out.contains(&a) {
                out.push(a);
            }
        }
    }
    out
}

struct OMapCompose {
    v: Arc<dyn EpsMap>,
    u: Arc<dyn EpsMap>,
}

impl EpsMap for OMapCompose {
    fn dim_in(&self) -> usize {
        self.u.dim_in()
    }

    fn dim_out(&self) -> usize {
        self.v.dim_out()
    }

    fn eval(&self, eps: EpsVal, x: &[f64], out: &mut [f64]) -> Result<(), GfError> {
        let mut y = vec![0.0; self.u.dim_out()];
        self.u.eval(eps, x, &mut y)?;
        self.v.eval(eps, &y, out)
    }

    fn partial(&self, eps: EpsVal, x: &[f64], var: usize, out: &mut [f64]) -> Result<(), GfError> {
        let mut y = vec![0.0; self.u.dim_out()];
        self.u.eval(eps, x, &mut y)?;
        let mut du = vec![0.0; self.u.dim_out()];
        self.u.partial(eps, x, var, &mut du)?;
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut dv = vec![0.0; self.v.dim_out()];
        for j in 0..self.u.dim_out() {
            if du[j] == 0.0 {
                continue;
            }
            self.v.partial(eps, &y, j, &mut dv)?;
            for i in 0..self.v.dim_out() {
                out[i] += dv[i] * du[j];
            }
        }
        Ok(())
    }
}

/// Composition v ∘ u for a globally defined slowly-increasing v; no c-bound
/// certificate is needed.
pub fn compose_slowly_increasing(
    v: &SlowlyIncreasingMap,
    u: &FunctionNet,
) -> Result<FunctionNet, GfError> {
    if u.codim() != v.dim_in() {
        return Err(GfError::Eps(crate::error::EpsError::DimensionMismatch {
            expected: v.dim_in(),
            got: u.codim(),
        }));
    }
    FunctionNet::new(
        u.grid.clone(),
        u.domain.clone(),
        Arc::new(OMapCompose {
            v: v.map.clone(),
            u: u.map.clone(),
        }),
    )
}

/// Generalized point value (f_ε(x_ε))_ε. The point must stay compactly inside
/// the domain for ε ≤ ε₀.
pub fn point_value(f: &FunctionNet, p: &PointNet) -> Result<PointNet, GfError> {
    if p.grid() != &f.grid {
        return Err(GfError::Eps(crate::error::EpsError::GridMismatch));
    }
    let active_hull = BoxDomain::hull_of_points(
        f.grid.active().map(|(i, _)| p.at(i)),
    )
    .ok_or(GfError::Eps(crate::error::EpsError::EmptyGrid))?;
    if f.domain.containment_margin(&active_hull) < 0.0 {
        let bad = f
            .grid
            .active()
            .find(|&(i, _)| f.domain.violation(p.at(i)) > 0.0)
            .map(|(_, e)| e)
            .unwrap_or(f.grid.eps0());
        return Err(GfError::PointEscapesDomain { eps: bad });
    }
    let mut samples = Vec::with_capacity(f.grid.len());
    for index in 0..f.grid.len() {
        let x = p.at(index);
        if f.domain.contains(x, 1e-12) {
            match f.value(index, x) {
                Ok(v) => samples.push(v),
                // inactive ε may step outside hypotheses; record NaN there
                Err(_) => samples.push(vec![f64::NAN; f.codim()]),
            }
        } else {
            samples.push(vec![f64::NAN; f.codim()]);
        }
    }
    Ok(PointNet::new(
        f.grid.clone(),
        samples,
        Ambient::All(f.codim()),
    )?)
}

/// Per-probe result of the pointwise equality test.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeSliceReport {
    pub probe_limit: Vec<f64>,
    pub per_level: Vec<GrowthClass>,
    pub negligible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EqualByPointsReport {
    pub equal: bool,
    pub m_test: i32,
    pub probes: Vec<ProbeSliceReport>,
    /// The universal statement is over all near-standard points; this test
    /// samples finitely many probes, listed above.
    pub coverage: String,
}

struct SliceDiffMap {
    f: Arc<dyn EpsMap>,
    g: Arc<dyn EpsMap>,
    split: usize,
    probe: Vec<Vec<f64>>,
}

impl EpsMap for SliceDiffMap {
    fn dim_in(&self) -> usize {
        self.split
    }

    fn dim_out(&self) -> usize {
        self.f.dim_out()
    }

    fn eval(&self, eps: EpsVal, x: &[f64], out: &mut [f64]) -> Result<(), GfError> {
        let mut full = Vec::with_capacity(self.f.dim_in());
        full.extend_from_slice(x);
        full.extend_from_slice(&self.probe[eps.index]);
        let mut fv = vec![0.0; self.dim_out()];
        let mut gv = vec![0.0; self.dim_out()];
        self.f.eval(eps, &full, &mut fv)?;
        self.g.eval(eps, &full, &mut gv)?;
        for i in 0..self.dim_out() {
            out[i] = fv[i] - gv[i];
        }
        Ok(())
    }
}

/// Exhaustion levels used for slice sup classification.
const SLICE_LEVELS: [i32; 4] = [1, 2, 3, 4];

/// Pointwise equality test on a product domain: freeze near-standard probes
/// in the trailing slot, classify the sup of the difference slice over a
/// compact exhaustion of the leading slot.
pub fn equal_by_points(
    f: &FunctionNet,
    g: &FunctionNet,
    split: usize,
    probes: &[PointNet],
    m_test: i32,
) -> Result<EqualByPointsReport, GfError> {
    if f.grid != g.grid {
        return Err(GfError::Eps(crate::error::EpsError::GridMismatch));
    }
    if f.domain != g.domain || f.codim() != g.codim() {
        return Err(GfError::MissingCertificate(
            "pointwise equality needs identical domains and codomains".into(),
        ));
    }
    let u_box = f.domain.slice(0, split);
    let tols = geometric_tolerances(f.grid.len());
    let mut reports = Vec::new();
    let mut all_ok = true;
    for (i, p) in probes.iter().enumerate() {
        let limit = near_standard_limit(p, &tols)
            .ok_or(GfError::ProbeNotNearStandard { index: i })?;
        let slice = FunctionNet::new(
            f.grid.clone(),
            u_box.clone(),
            Arc::new(SliceDiffMap {
                f: f.map.clone(),
                g: g.map.clone(),
                split,
                probe: p.samples().to_vec(),
            }),
        )?;
        let orders: Vec<i32> = (0..=m_test.max(0)).collect();
        let mut per_level = Vec::new();
        let mut ok = true;
        for j in SLICE_LEVELS {
            let k_j = u_box.shrink(u_box.min_width() * 0.5f64.powi(j) * 0.5);
            let sup = sup_on_compact(&slice, &k_j, &[])?;
            let class = classify_growth(&sup, &orders)?;
            ok &= class.is_negligible();
            per_level.push(class);
        }
        all_ok &= ok;
        reports.push(ProbeSliceReport {
            probe_limit: limit.limit,
            per_level,
            negligible: ok,
        });
    }
    Ok(EqualByPointsReport {
        equal: all_ok,
        m_test,
        probes: reports,
        coverage: format!(
            "checked {} near-standard probe(s) on {} exhaustion level(s); finite surrogate for the universal quantifier",
            probes.len(),
            SLICE_LEVELS.len()
        ),
    })
}
