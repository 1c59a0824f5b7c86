//! Finite ε-grid semantics for nets of numbers and points: moderateness and
//! negligibility classification by asymptotic fitting, equivalence of
//! representatives, and near-standard detection.
//!
//! The grid is finite, so every `O(ε^{±N})` statement turns into a bound
//! check over the grid plus a log-log regression. A "certificate" produced
//! here is a numerical surrogate for the existential O-constants of the
//! underlying asymptotics, not a proof; the bound constant is calibrated at
//! the three largest grid points below `ε₀` and then required to hold at
//! every grid point below `ε₀`.

use serde::Serialize;

use crate::error::EpsError;
use crate::geom::Ambient;

/// Net samples below this magnitude are treated as exact zeros.
const ZERO_FLOOR: f64 = 1e-250;
/// Certification slack on bound checks. Sup nets of bounded families
/// typically still increase toward their limit on the coarse calibration
/// points; 10% mirrors the 5% sup inflation used by the solvers and keeps
/// convergent-monotone nets certifiable while rejecting genuine growth.
const BOUND_SLACK: f64 = 1.10;
/// Maximum admissible log-space regression residual for a moderate certificate.
const FIT_RESIDUAL_LIMIT: f64 = 0.1;

/// Strictly decreasing finite set of ε values in (0, 1], with the threshold
/// ε₀ below which all hypotheses are asserted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsGrid {
    values: Vec<f64>,
    eps0: f64,
}

impl EpsGrid {
    /// At least 8 grid points must lie below `eps0` so that log-log fits are
    /// stable.
    pub fn new(values: Vec<f64>, eps0: f64) -> Result<Self, EpsError> {
        if values.is_empty() {
            return Err(EpsError::EmptyGrid);
        }
        for w in values.windows(2) {
            if !(w[1] < w[0]) {
                return Err(EpsError::InvalidGrid(
                    "grid values must be strictly decreasing".into(),
                ));
            }
        }
        if values.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return Err(EpsError::InvalidGrid("grid values must lie in (0, 1]".into()));
        }
        if !(eps0 > 0.0 && eps0 <= 1.0) {
            return Err(EpsError::InvalidGrid("eps0 must lie in (0, 1]".into()));
        }
        let active = values.iter().filter(|&&e| e <= eps0).count();
        if active < 8 {
            return Err(EpsError::InvalidGrid(format!(
                "need at least 8 grid points <= eps0, found {active}"
            )));
        }
        Ok(Self { values, eps0 })
    }

    /// Geometric grid ε_k = 2^{-k} for k in `k_min..=k_max`.
    pub fn geometric(k_min: u32, k_max: u32, eps0: f64) -> Result<Self, EpsError> {
        if k_min > k_max {
            return Err(EpsError::InvalidGrid("k_min > k_max".into()));
        }
        let values = (k_min..=k_max).map(|k| 0.5f64.powi(k as i32)).collect();
        Self::new(values, eps0)
    }

    /// Default grid: ε_k = 2^{-k}, k = 0..24, ε₀ = 2^{-2}.
    pub fn standard() -> Self {
        Self::geometric(0, 24, 0.25).expect("standard grid is valid")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn smallest(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Indices and values with ε ≤ ε₀, in decreasing ε order.
    pub fn active(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .copied()
            .enumerate()
            .filter(move |&(_, e)| e <= self.eps0)
    }

    pub fn active_indices(&self) -> Vec<usize> {
        self.active().map(|(i, _)| i).collect()
    }

    /// Same grid values with a smaller ε₀. Fails if fewer than 8 points remain.
    pub fn with_eps0(&self, eps0: f64) -> Result<Self, EpsError> {
        Self::new(self.values.clone(), eps0)
    }
}

/// ε-indexed real scalars: a representative (r_ε)_ε of a generalized number.
#[derive(Debug, Clone, Serialize)]
pub struct NumberNet {
    grid: EpsGrid,
    samples: Vec<f64>,
}

impl NumberNet {
    /// Samples must be finite for every ε ≤ ε₀.
    pub fn new(grid: EpsGrid, samples: Vec<f64>) -> Result<Self, EpsError> {
        if samples.len() != grid.len() {
            return Err(EpsError::DimensionMismatch {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        for (i, e) in grid.active() {
            if !samples[i].is_finite() {
                return Err(EpsError::NonFiniteSample {
                    eps: e,
                    value: samples[i],
                });
            }
        }
        Ok(Self { grid, samples })
    }

    pub fn from_fn<F: FnMut(f64) -> f64>(grid: EpsGrid, mut f: F) -> Result<Self, EpsError> {
        let samples = grid.values().iter().map(|&e| f(e)).collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &EpsGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn at(&self, idx: usize) -> f64 {
        self.samples[idx]
    }

    /// Pointwise |a - b| on a shared grid.
    pub fn abs_diff(&self, other: &NumberNet) -> Result<NumberNet, EpsError> {
        if self.grid != other.grid {
            return Err(EpsError::GridMismatch);
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).abs())
            .collect();
        NumberNet::new(self.grid.clone(), samples)
    }

    pub fn add(&self, other: &NumberNet) -> Result<NumberNet, EpsError> {
        if self.grid != other.grid {
            return Err(EpsError::GridMismatch);
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + b)
            .collect();
        NumberNet::new(self.grid.clone(), samples)
    }

    /// Same samples viewed under a smaller hypothesis threshold ε₀.
    pub fn with_eps0(&self, eps0: f64) -> Result<NumberNet, EpsError> {
        NumberNet::new(self.grid.with_eps0(eps0)?, self.samples.clone())
    }

    /// Max over the active part of the grid.
    pub fn active_max(&self) -> f64 {
        self.grid
            .active()
            .map(|(i, _)| self.samples[i].abs())
            .fold(0.0, f64::max)
    }
}

/// ε-indexed vectors: a representative (x_ε)_ε of a generalized point,
/// optionally constrained to an ambient box.
#[derive(Debug, Clone, Serialize)]
pub struct PointNet {
    grid: EpsGrid,
    samples: Vec<Vec<f64>>,
    ambient: Ambient,
}

impl PointNet {
    /// If the ambient is a box, samples must lie in it for all ε ≤ ε₀.
    pub fn new(grid: EpsGrid, samples: Vec<Vec<f64>>, ambient: Ambient) -> Result<Self, EpsError> {
        if samples.len() != grid.len() {
            return Err(EpsError::DimensionMismatch {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        let dim = ambient.dim();
        for s in &samples {
            if s.len() != dim {
                return Err(EpsError::DimensionMismatch {
                    expected: dim,
                    got: s.len(),
                });
            }
        }
        for (i, e) in grid.active() {
            if samples[i].iter().any(|v| !v.is_finite()) {
                return Err(EpsError::NonFiniteSample {
                    eps: e,
                    value: f64::NAN,
                });
            }
            if !ambient.contains(&samples[i], 0.0) {
                return Err(EpsError::PointOutsideAmbient { eps: e });
            }
        }
        Ok(Self {
            grid,
            samples,
            ambient,
        })
    }

    pub fn from_fn<F: FnMut(f64) -> Vec<f64>>(
        grid: EpsGrid,
        ambient: Ambient,
        mut f: F,
    ) -> Result<Self, EpsError> {
        let samples = grid.values().iter().map(|&e| f(e)).collect();
        Self::new(grid, samples, ambient)
    }

    /// Constant (standard) point.
    pub fn constant(grid: EpsGrid, x: &[f64]) -> Result<Self, EpsError> {
        let n = x.len();
        let count = grid.len();
        Self::new(grid, vec![x.to_vec(); count], Ambient::All(n))
    }

    pub fn grid(&self) -> &EpsGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim()
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn at(&self, idx: usize) -> &[f64] {
        &self.samples[idx]
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    pub fn component(&self, axis: usize) -> Result<NumberNet, EpsError> {
        NumberNet::new(
            self.grid.clone(),
            self.samples.iter().map(|s| s[axis]).collect(),
        )
    }

    /// Net of Euclidean norms |x_ε|.
    pub fn norm_net(&self) -> Result<NumberNet, EpsError> {
        NumberNet::new(
            self.grid.clone(),
            self.samples.iter().map(|s| crate::geom::norm2(s)).collect(),
        )
    }
}

/// Result of the asymptotic classification of a number net.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GrowthKind {
    /// |r_ε| ≤ C ε^{-N} certified on the grid; N is the smallest tested order
    /// that passes.
    Moderate(i32),
    /// |r_ε| ≤ C ε^{m} certified for every tested m up to the stored maximum.
    Negligible(i32),
    /// log|r_ε| grows faster than every tested linear-in-log(1/ε) model.
    SuperPolynomial,
    Inconclusive,
}

/// Least-squares line through (log ε, log |r_ε|), with the largest absolute
/// residual in log space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

impl LogLogFit {
    /// Fitted growth order: r_ε ~ ε^{slope}, so the ε^{-N}-order is -slope.
    pub fn order(&self) -> f64 {
        -self.slope
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthClass {
    pub kind: GrowthKind,
    /// Absent for an exactly zero net.
    pub fit: Option<LogLogFit>,
}

impl GrowthClass {
    pub fn is_negligible(&self) -> bool {
        matches!(self.kind, GrowthKind::Negligible(_))
    }

    /// Bounded uniformly in ε at desk scale: order-0 moderate or negligible.
    pub fn is_bounded(&self) -> bool {
        matches!(self.kind, GrowthKind::Negligible(_) | GrowthKind::Moderate(0))
    }
}

impl std::fmt::Display for GrowthClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            GrowthKind::Moderate(n) => write!(f, "Moderate({n})")?,
            GrowthKind::Negligible(m) => write!(f, "Negligible({m})")?,
            GrowthKind::SuperPolynomial => write!(f, "SuperPolynomial")?,
            GrowthKind::Inconclusive => write!(f, "Inconclusive")?,
        }
        if let Some(fit) = &self.fit {
            write!(
                f,
                " [slope {:.3}, residual {:.3}]",
                fit.slope, fit.max_residual
            )?;
        }
        Ok(())
    }
}

fn log_log_fit(points: &[(f64, f64)]) -> LogLogFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let max_residual = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).abs())
        .fold(0.0, f64::max);
    LogLogFit {
        slope,
        intercept,
        max_residual,
    }
}

/// Bound check |r_ε| ≤ C ε^{-order} over the active grid, with C calibrated
/// at the three largest active ε.
fn order_bound_holds(active: &[(f64, f64)], order: i32) -> bool {
    let c = active
        .iter()
        .take(3)
        .map(|&(e, s)| s * e.powi(order))
        .fold(0.0, f64::max);
    active
        .iter()
        .all(|&(e, s)| s * e.powi(order) <= c * BOUND_SLACK + f64::MIN_POSITIVE)
}

/// Classify the asymptotic growth of |r_ε| as ε → 0 over the tested orders.
///
/// Decision order: exact zero, negligible at every tested order, moderate at
/// the smallest passing order (bound check plus regression residual below
/// 0.1 in log space), super-polynomial (fitted slope magnitude above the
/// largest tested order plus one, with residuals still growing toward small
/// ε), otherwise inconclusive.
pub fn classify_growth(net: &NumberNet, orders_to_test: &[i32]) -> Result<GrowthClass, EpsError> {
    if orders_to_test.is_empty() {
        return Err(EpsError::NoOrders);
    }
    let active: Vec<(f64, f64)> = net
        .grid
        .active()
        .map(|(i, e)| (e, net.samples[i].abs()))
        .collect();
    if active.is_empty() {
        return Err(EpsError::EmptyGrid);
    }
    for &(e, s) in &active {
        if !s.is_finite() {
            return Err(EpsError::NonFiniteSample { eps: e, value: s });
        }
    }

    let mut orders = orders_to_test.to_vec();
    orders.sort_unstable();
    orders.dedup();
    let max_order = *orders.last().unwrap();

    if active.iter().all(|&(_, s)| s <= ZERO_FLOOR) {
        return Ok(GrowthClass {
            kind: GrowthKind::Negligible(max_order),
            fit: None,
        });
    }

    // The regression runs on the asymptotic (fine-ε) half of the active
    // grid, at least 8 points: coarse-ε transients would otherwise dominate
    // the residual of nets like C + O(ε).
    let window = (active.len() / 2).max(8).min(active.len());
    let logs: Vec<(f64, f64)> = active
        .iter()
        .skip(active.len() - window)
        .map(|&(e, s)| (e.ln(), s.max(ZERO_FLOOR).ln()))
        .collect();
    let fit = log_log_fit(&logs);

    // Negligibility: |r_ε| ε^{-m} stays bounded for every tested order m.
    if orders
        .iter()
        .all(|&m| order_bound_holds(&active, -m))
    {
        return Ok(GrowthClass {
            kind: GrowthKind::Negligible(max_order),
            fit: Some(fit),
        });
    }

    if fit.max_residual < FIT_RESIDUAL_LIMIT {
        for &n in &orders {
            if n >= 0 && order_bound_holds(&active, n) {
                return Ok(GrowthClass {
                    kind: GrowthKind::Moderate(n),
                    fit: Some(fit),
                });
            }
        }
    }

    // Super-polynomial growth: steeper than any tested power and convex in
    // log-log (residuals still increasing at the small-ε end).
    if fit.slope < -(max_order as f64 + 1.0) {
        let resid = |k: usize| {
            let (x, y) = logs[logs.len() - 1 - k];
            y - (fit.intercept + fit.slope * x)
        };
        if logs.len() >= 3 && resid(0) > 0.05 && resid(0) > resid(2) {
            return Ok(GrowthClass {
                kind: GrowthKind::SuperPolynomial,
                fit: Some(fit),
            });
        }
    }

    Ok(GrowthClass {
        kind: GrowthKind::Inconclusive,
        fit: Some(fit),
    })
}

/// Default order list 0..=8 used when callers have no special needs.
pub const DEFAULT_ORDERS: [i32; 9] = [0, 1, 2, 3, 4, 5, 6, 7, 8];

/// Equivalence of representatives: the difference must certify negligible at
/// every order up to `m_test`.
pub fn nets_equivalent(
    a: &NumberNet,
    b: &NumberNet,
    m_test: i32,
) -> Result<(bool, GrowthClass), EpsError> {
    let diff = a.abs_diff(b)?;
    let orders: Vec<i32> = (0..=m_test.max(0)).collect();
    let class = classify_growth(&diff, &orders)?;
    Ok((class.is_negligible(), class))
}

/// Outcome of a successful near-standard detection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearStandardLimit {
    pub limit: Vec<f64>,
    /// All active samples are equal.
    pub standard: bool,
}

/// Cauchy-style limit detection along the grid: successive active samples
/// must contract within the tolerance schedule (the last tolerance repeats).
/// Returns the value at the smallest ε as the limit estimate.
pub fn near_standard_limit(p: &PointNet, tol_schedule: &[f64]) -> Option<NearStandardLimit> {
    let idx = p.grid.active_indices();
    if idx.is_empty() || tol_schedule.is_empty() {
        return None;
    }
    let mut standard = true;
    for (j, w) in idx.windows(2).enumerate() {
        let d = crate::geom::dist2(p.at(w[0]), p.at(w[1]));
        let tol = tol_schedule[j.min(tol_schedule.len() - 1)];
        if d > tol {
            return None;
        }
        if d > 0.0 {
            standard = false;
        }
    }
    Some(NearStandardLimit {
        limit: p.at(*idx.last().unwrap()).to_vec(),
        standard,
    })
}

/// Geometric tolerance schedule matched to the standard grid: tol_j = 2^{-j}.
pub fn geometric_tolerances(len: usize) -> Vec<f64> {
    (0..len.max(1)).map(|j| 0.5f64.powi(j as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_k(k0: u32, k1: u32, eps0: f64) -> EpsGrid {
        EpsGrid::geometric(k0, k1, eps0).unwrap()
    }

    #[test]
    fn grid_requires_eight_active_points() {
        assert!(EpsGrid::geometric(0, 8, 0.25).is_err());
        assert!(EpsGrid::geometric(0, 9, 0.25).is_ok());
    }

    #[test]
    fn exact_power_law_is_moderate_three() {
        // r_ε = ε^{-3} on ε = 2^{-k}, k = 3..20
        let grid = grid_k(3, 20, 0.125);
        let net = NumberNet::from_fn(grid, |e| e.powi(-3)).unwrap();
        let class = classify_growth(&net, &DEFAULT_ORDERS).unwrap();
        assert_eq!(class.kind, GrowthKind::Moderate(3));
        let fit = class.fit.unwrap();
        assert!((fit.slope + 3.0).abs() < 1e-9, "slope {}", fit.slope);
        assert!(fit.max_residual < 1e-9);
    }

    #[test]
    fn exponential_net_is_super_polynomial() {
        // e^{1/ε} overflows below ε ≈ 2^{-9.5}, so use a short grid.
        let grid = grid_k(1, 9, 0.5);
        let net = NumberNet::from_fn(grid, |e| (1.0 / e).exp()).unwrap();
        let class = classify_growth(&net, &DEFAULT_ORDERS).unwrap();
        assert_eq!(class.kind, GrowthKind::SuperPolynomial);
    }

    #[test]
    fn zero_net_is_negligible_at_all_orders() {
        let grid = EpsGrid::standard();
        let net = NumberNet::from_fn(grid, |_| 0.0).unwrap();
        let class = classify_growth(&net, &DEFAULT_ORDERS).unwrap();
        assert_eq!(class.kind, GrowthKind::Negligible(8));
        assert!(class.fit.is_none());
    }

    #[test]
    fn decaying_power_law_is_negligible_up_to_its_order() {
        let grid = EpsGrid::standard();
        let net = NumberNet::from_fn(grid, |e| e.powi(10)).unwrap();
        let class = classify_growth(&net, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(class.kind, GrowthKind::Negligible(5));
    }

    #[test]
    fn bounded_net_is_moderate_zero() {
        let grid = EpsGrid::standard();
        let net = NumberNet::from_fn(grid, |e| 1.0 + e).unwrap();
        let class = classify_growth(&net, &DEFAULT_ORDERS).unwrap();
        assert_eq!(class.kind, GrowthKind::Moderate(0));
    }

    #[test]
    fn moderate_is_monotone_in_the_order() {
        let grid = EpsGrid::standard();
        let net = NumberNet::from_fn(grid, |e| e.powi(-2) * (1.0 + 0.01 * e)).unwrap();
        for n in 2..=8 {
            let class = classify_growth(&net, &[n]).unwrap();
            assert_eq!(class.kind, GrowthKind::Moderate(n), "order {n}");
        }
        let class = classify_growth(&net, &[1]).unwrap();
        assert_ne!(class.kind, GrowthKind::Moderate(1));
    }

    #[test]
    fn equivalence_examples() {
        let grid = EpsGrid::standard();
        let a = NumberNet::from_fn(grid.clone(), |_| 1.0).unwrap();
        // reflexivity
        let (eq, _) = nets_equivalent(&a, &a, 5).unwrap();
        assert!(eq);
        // 1 vs 1 + ε^{10} at m_test = 5
        let b = NumberNet::from_fn(grid.clone(), |e| 1.0 + e.powi(10)).unwrap();
        let (eq, _) = nets_equivalent(&a, &b, 5).unwrap();
        assert!(eq);
        // 1 vs 1 + ε² fails at m = 3
        let c = NumberNet::from_fn(grid.clone(), |e| 1.0 + e * e).unwrap();
        let (eq, class) = nets_equivalent(&a, &c, 5).unwrap();
        assert!(!eq);
        assert!(!class.is_negligible());
        let (eq2, _) = nets_equivalent(&a, &c, 2).unwrap();
        assert!(eq2, "ε² is negligible when only m <= 2 is tested");
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = NumberNet::from_fn(EpsGrid::standard(), |_| 1.0).unwrap();
        let b = NumberNet::from_fn(grid_k(0, 20, 0.25), |_| 1.0).unwrap();
        assert!(matches!(
            nets_equivalent(&a, &b, 3),
            Err(EpsError::GridMismatch)
        ));
    }

    #[test]
    fn near_standard_detection() {
        let grid = EpsGrid::standard();
        let t0 = 0.75;
        let conv = PointNet::from_fn(grid.clone(), Ambient::All(1), |e| vec![t0 + e]).unwrap();
        let tols = geometric_tolerances(grid.len());
        let lim = near_standard_limit(&conv, &tols).unwrap();
        assert!((lim.limit[0] - t0).abs() < 1e-6);
        assert!(!lim.standard);

        let osc = PointNet::from_fn(grid.clone(), Ambient::All(1), |e| vec![(1.0 / e).sin()])
            .unwrap();
        assert!(near_standard_limit(&osc, &tols).is_none());

        let cst = PointNet::constant(grid, &[2.5]).unwrap();
        let lim = near_standard_limit(&cst, &tols).unwrap();
        assert_eq!(lim.limit, vec![2.5]);
        assert!(lim.standard);
    }

    #[test]
    fn non_finite_sample_rejected() {
        let grid = EpsGrid::standard();
        let r = NumberNet::from_fn(grid, |e| if e < 1e-4 { f64::INFINITY } else { 1.0 });
        assert!(matches!(r, Err(EpsError::NonFiniteSample { .. })));
    }

    #[test]
    fn negligible_plus_moderate_keeps_order() {
        let grid = EpsGrid::standard();
        let m = NumberNet::from_fn(grid.clone(), |e| e.powi(-2)).unwrap();
        let n = NumberNet::from_fn(grid, |e| e.powi(9)).unwrap();
        let sum = m.add(&n).unwrap();
        let class = classify_growth(&sum, &DEFAULT_ORDERS).unwrap();
        assert_eq!(class.kind, GrowthKind::Moderate(2));
    }

    #[test]
    fn point_net_respects_box_ambient() {
        let grid = EpsGrid::standard();
        let b = crate::geom::BoxDomain::interval(0.0, 1.0).unwrap();
        let ok = PointNet::from_fn(grid.clone(), Ambient::Boxed(b.clone()), |e| vec![0.5 + e / 8.0]);
        assert!(ok.is_ok());
        let bad = PointNet::from_fn(grid, Ambient::Boxed(b), |e| vec![1.0 + e]);
        assert!(matches!(bad, Err(EpsError::PointOutsideAmbient { .. })));
    }
}
