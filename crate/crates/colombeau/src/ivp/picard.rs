//! Picard fixed-point solver: iterates f ↦ x₀ + ∫ F(s, f(s)) ds on a fixed
//! node grid. The desk-scale mirror of the contraction construction, used to
//! cross-check the adaptive integrator; limited to small state dimensions.

use crate::geom::BoxDomain;

use super::rk::RhsFn;

#[derive(Debug, Clone)]
pub struct PicardOptions {
    /// Nodes per side of the expansion point (total 2·half_nodes + 1).
    pub half_nodes: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub bounds: Option<BoxDomain>,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            half_nodes: 512,
            max_iters: 60,
            tol: 1e-12,
            bounds: None,
        }
    }
}

/// Piecewise-cubic Hermite interpolant through Picard nodes, with slopes
/// from the RHS along the fixed point.
#[derive(Debug, Clone)]
pub struct PicardTrajectory {
    pub nodes: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub slopes: Vec<Vec<f64>>,
    pub iterations: usize,
    pub final_delta: f64,
    /// Measured second-slot Lipschitz surrogate γ and the contraction budget
    /// Σ (hγ)^k / k! = e^{hγ}.
    pub lipschitz: f64,
    pub weissinger_budget: f64,
    pub center_index: usize,
}

impl PicardTrajectory {
    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn t_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    fn cell(&self, t: f64) -> Option<usize> {
        let slack = 1e-9 * (1.0 + self.t_max().abs() + self.t_min().abs());
        if t < self.t_min() - slack || t > self.t_max() + slack {
            return None;
        }
        let tc = t.clamp(self.t_min(), self.t_max());
        match self.nodes.binary_search_by(|n| n.partial_cmp(&tc).unwrap()) {
            Ok(i) => Some(i.min(self.nodes.len() - 2)),
            Err(i) => Some(i.saturating_sub(1).min(self.nodes.len() - 2)),
        }
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> bool {
        // exact at nodes, cubic Hermite between them
        let Some(i) = self.cell(t) else { return false };
        if t == self.nodes[i] {
            out.copy_from_slice(&self.values[i]);
            return true;
        }
        let h = self.nodes[i + 1] - self.nodes[i];
        let s = ((t - self.nodes[i]) / h).clamp(0.0, 1.0);
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        for d in 0..out.len() {
            out[d] = h00 * self.values[i][d]
                + h10 * h * self.slopes[i][d]
                + h01 * self.values[i + 1][d]
                + h11 * h * self.slopes[i + 1][d];
        }
        true
    }

    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        if self.eval_into(t, &mut out) {
            Some(out)
        } else {
            None
        }
    }

    /// Hermite-interpolant derivative (independent of re-evaluating the RHS).
    pub fn deriv_interp(&self, t: f64) -> Option<Vec<f64>> {
        let i = self.cell(t)?;
        let h = self.nodes[i + 1] - self.nodes[i];
        let s = ((t - self.nodes[i]) / h).clamp(0.0, 1.0);
        let s2 = s * s;
        let dh00 = (6.0 * s2 - 6.0 * s) / h;
        let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
        let dh01 = (-6.0 * s2 + 6.0 * s) / h;
        let dh11 = 3.0 * s2 - 2.0 * s;
        let mut out = vec![0.0; self.dim()];
        for d in 0..self.dim() {
            out[d] = dh00 * self.values[i][d]
                + dh10 * self.slopes[i][d]
                + dh01 * self.values[i + 1][d]
                + dh11 * self.slopes[i + 1][d];
        }
        Some(out)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PicardError {
    #[error("iteration did not contract after {iters} iterations (delta {delta})")]
    NoContraction { iters: usize, delta: f64 },
    #[error("iterate left the admissible box at t = {t}")]
    LeftBounds { t: f64 },
    #[error("RHS evaluation failed at t = {t}: {reason}")]
    RhsFailure { t: f64, reason: String },
}

/// Cumulative Simpson from the centre node outward along a uniform grid.
fn cumulative_outward(g: &[Vec<f64>], h: f64, center: usize, dim: usize) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut out = vec![vec![0.0; dim]; n];
    // rightward
    let mut j = center;
    while j + 2 <= n - 1 {
        for d in 0..dim {
            out[j + 2][d] = out[j][d] + h / 3.0 * (g[j][d] + 4.0 * g[j + 1][d] + g[j + 2][d]);
            out[j + 1][d] = out[j][d] + h / 12.0 * (5.0 * g[j][d] + 8.0 * g[j + 1][d] - g[j + 2][d]);
        }
        j += 2;
    }
    // leftward (mirror)
    let mut j = center;
    while j >= 2 {
        for d in 0..dim {
            out[j - 2][d] = out[j][d] - h / 3.0 * (g[j][d] + 4.0 * g[j - 1][d] + g[j - 2][d]);
            out[j - 1][d] = out[j][d] - h / 12.0 * (5.0 * g[j][d] + 8.0 * g[j - 1][d] - g[j - 2][d]);
        }
        j -= 2;
    }
    out
}

/// Solve u' = F(t, u), u(t_center) = y0 on [t_lo, t_hi] by Picard iteration.
/// `lipschitz` is the measured second-slot bound used for the Weissinger
/// budget in the report.
pub fn picard_solve(
    rhs: &RhsFn<'_>,
    t_center: f64,
    y0: &[f64],
    t_lo: f64,
    t_hi: f64,
    lipschitz: f64,
    opts: &PicardOptions,
) -> Result<PicardTrajectory, PicardError> {
    assert!(t_lo <= t_center && t_center <= t_hi);
    let dim = y0.len();
    let half = opts.half_nodes.max(2) & !1; // even per side
    // uniform per side, center exactly a node
    let mut nodes = Vec::with_capacity(2 * half + 1);
    for i in 0..half {
        nodes.push(t_center + (t_lo - t_center) * (half - i) as f64 / half as f64);
    }
    nodes.push(t_center);
    for i in 1..=half {
        nodes.push(t_center + (t_hi - t_center) * i as f64 / half as f64);
    }
    // the two sides may have different widths; handle each side uniformly
    let center = half;
    let h_left = if half > 0 { nodes[1] - nodes[0] } else { 0.0 };
    let h_right = if half > 0 { nodes[center + 1] - nodes[center] } else { 0.0 };

    let mut values = vec![y0.to_vec(); nodes.len()];
    let mut g = vec![vec![0.0; dim]; nodes.len()];
    let mut iterations = 0;
    let mut final_delta = f64::INFINITY;

    for iter in 0..opts.max_iters {
        iterations = iter + 1;
        // g = F(t, f(t)) at all nodes
        for (i, &t) in nodes.iter().enumerate() {
            let mut out = vec![0.0; dim];
            rhs(t, &values[i], &mut out).map_err(|e| PicardError::RhsFailure {
                t,
                reason: e.to_string(),
            })?;
            if out.iter().any(|v| !v.is_finite()) {
                return Err(PicardError::RhsFailure {
                    t,
                    reason: "non-finite RHS value".into(),
                });
            }
            g[i] = out;
        }
        // integrate each side with its own spacing
        let right_part: Vec<Vec<f64>> = g[center..].to_vec();
        let cum_right = cumulative_outward(&right_part, h_right, 0, dim);
        let left_part: Vec<Vec<f64>> = g[..=center].to_vec();
        let cum_left = cumulative_outward(&left_part, h_left, center, dim);

        let mut delta: f64 = 0.0;
        for (i, v) in values.iter_mut().enumerate() {
            let integral = if i >= center {
                &cum_right[i - center]
            } else {
                &cum_left[i]
            };
            for d in 0..dim {
                let new = y0[d] + integral[d];
                delta = delta.max((new - v[d]).abs());
                v[d] = new;
            }
        }
        if let Some(bounds) = &opts.bounds {
            for (i, v) in values.iter().enumerate() {
                if bounds.violation(v) > 1e-9 {
                    return Err(PicardError::LeftBounds { t: nodes[i] });
                }
            }
        }
        final_delta = delta;
        let scale = values
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()));
        if delta <= opts.tol * (1.0 + scale) {
            break;
        }
        if iter + 1 == opts.max_iters {
            return Err(PicardError::NoContraction {
                iters: iterations,
                delta,
            });
        }
    }

    // slopes from the RHS at the fixed point
    let mut slopes = vec![vec![0.0; dim]; nodes.len()];
    for (i, &t) in nodes.iter().enumerate() {
        let mut out = vec![0.0; dim];
        rhs(t, &values[i], &mut out).map_err(|e| PicardError::RhsFailure {
            t,
            reason: e.to_string(),
        })?;
        slopes[i] = out;
    }

    let h_span = (t_hi - t_center).abs().max((t_center - t_lo).abs());
    Ok(PicardTrajectory {
        nodes,
        values,
        slopes,
        iterations,
        final_delta,
        lipschitz,
        weissinger_budget: (h_span * lipschitz).exp(),
        center_index: center,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::GfError;

    #[test]
    fn fixed_point_of_linear_problem_is_exponential() {
        let rhs = |_t: f64, y: &[f64], out: &mut [f64]| -> Result<(), GfError> {
            out[0] = y[0];
            Ok(())
        };
        let traj = picard_solve(
            &rhs,
            0.0,
            &[1.0],
            -0.5,
            0.5,
            1.0,
            &PicardOptions::default(),
        )
        .unwrap();
        for i in 0..=20 {
            let t = -0.5 + i as f64 / 20.0;
            let y = traj.eval(t).unwrap()[0];
            assert!((y - t.exp()).abs() < 1e-9, "t={t}: {y}");
        }
        assert!(traj.weissinger_budget >= 1.0);
        assert_eq!(traj.eval(0.0).unwrap()[0], 1.0);
    }

    #[test]
    fn quadrature_rhs_matches_integral() {
        let rhs = |t: f64, _y: &[f64], out: &mut [f64]| -> Result<(), GfError> {
            out[0] = t.cos();
            Ok(())
        };
        let traj = picard_solve(
            &rhs,
            0.0,
            &[0.0],
            -1.0,
            1.0,
            0.0,
            &PicardOptions::default(),
        )
        .unwrap();
        // a t-only RHS converges in two sweeps
        assert!(traj.iterations <= 3);
        for i in 0..=10 {
            let t = -1.0 + 2.0 * i as f64 / 10.0;
            assert!((traj.eval(t).unwrap()[0] - t.sin()).abs() < 1e-10);
        }
    }
}
