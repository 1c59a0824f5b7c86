//! Embedded Dormand-Prince 5(4) integrator with a 4th-order continuous
//! extension and box-escape detection on the dense output.

use crate::error::GfError;
use crate::geom::BoxDomain;

pub type RhsFn<'a> = dyn Fn(f64, &[f64], &mut [f64]) -> Result<(), GfError> + 'a;

#[derive(Debug, Clone)]
pub struct RkOptions {
    pub atol: f64,
    pub rtol: f64,
    /// 0.0 selects span/4.
    pub h_max: f64,
    /// Integration stops (with an escape record) when the state leaves this box.
    pub bounds: Option<BoxDomain>,
    pub max_steps: usize,
}

impl Default for RkOptions {
    fn default() -> Self {
        Self {
            atol: 1e-9,
            rtol: 1e-9,
            h_max: 0.0,
            bounds: None,
            max_steps: 1_000_000,
        }
    }
}

impl RkOptions {
    pub fn tight() -> Self {
        Self {
            atol: 1e-12,
            rtol: 1e-12,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
struct DenseStep {
    t0: f64,
    h: f64,
    rcont: [Vec<f64>; 5],
}

impl DenseStep {
    fn eval(&self, theta: f64, out: &mut [f64]) {
        let th1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        for i in 0..out.len() {
            out[i] = r1[i] + theta * (r2[i] + th1 * (r3[i] + theta * (r4[i] + th1 * r5[i])));
        }
    }

    fn eval_deriv(&self, theta: f64, out: &mut [f64]) {
        let [_, r2, r3, r4, r5] = &self.rcont;
        for i in 0..out.len() {
            let d = r2[i]
                + (1.0 - 2.0 * theta) * r3[i]
                + theta * (2.0 - 3.0 * theta) * r4[i]
                + 2.0 * theta * (1.0 - theta) * (1.0 - 2.0 * theta) * r5[i];
            out[i] = d / self.h;
        }
    }
}

/// Piecewise-polynomial solution with evaluation anywhere on the integration
/// span (both integration directions supported).
#[derive(Debug, Clone)]
pub struct DenseTrajectory {
    pub t_start: f64,
    pub t_end: f64,
    dim: usize,
    y_start: Vec<f64>,
    steps: Vec<DenseStep>,
}

impl DenseTrajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    fn locate(&self, t: f64) -> Option<(&DenseStep, f64)> {
        if self.steps.is_empty() {
            return None;
        }
        let dir = (self.t_end - self.t_start).signum();
        let lo = self.t_start.min(self.t_end);
        let hi = self.t_start.max(self.t_end);
        let slack = 1e-9 * (1.0 + hi.abs() + lo.abs());
        if t < lo - slack || t > hi + slack {
            return None;
        }
        let tc = t.clamp(lo, hi);
        // binary search over monotone step starts
        let mut a = 0usize;
        let mut b = self.steps.len() - 1;
        while a < b {
            let mid = (a + b + 1) / 2;
            if (tc - self.steps[mid].t0) * dir >= 0.0 {
                a = mid;
            } else {
                b = mid - 1;
            }
        }
        let step = &self.steps[a];
        let theta = ((tc - step.t0) / step.h).clamp(0.0, 1.0);
        Some((step, theta))
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> bool {
        if t == self.t_start {
            out.copy_from_slice(&self.y_start);
            return true;
        }
        match self.locate(t) {
            Some((step, theta)) => {
                step.eval(theta, out);
                true
            }
            None => false,
        }
    }

    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        if self.eval_into(t, &mut out) {
            Some(out)
        } else {
            None
        }
    }

    /// Derivative of the interpolating polynomial (an independent route from
    /// re-evaluating the RHS; used by residual diagnostics).
    pub fn deriv_interp(&self, t: f64) -> Option<Vec<f64>> {
        let (step, theta) = self.locate(t)?;
        let mut out = vec![0.0; self.dim];
        step.eval_deriv(theta, &mut out);
        Some(out)
    }

    /// Largest local tolerance-per-step-width ratio: the resolution limit of
    /// the interpolant derivative.
    pub fn deriv_resolution(&self, atol: f64, rtol: f64) -> f64 {
        self.steps
            .iter()
            .map(|s| {
                let scale = s.rcont[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
                (atol + rtol * scale) / s.h.abs()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug)]
pub enum RkOutcome {
    Complete(DenseTrajectory),
    Escaped {
        traj: DenseTrajectory,
        t_escape: f64,
        y_escape: Vec<f64>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum RkError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    StepBudget { t: f64 },
    #[error("non-finite state at start")]
    BadStart,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// b - b*: weights of the embedded error estimate.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// continuous-extension weights
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

pub fn integrate(
    rhs: &RhsFn<'_>,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &RkOptions,
) -> Result<RkOutcome, RkError> {
    let dim = y0.len();
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(RkError::BadStart);
    }
    let span = t_end - t0;
    let empty = DenseTrajectory {
        t_start: t0,
        t_end: t0,
        dim,
        y_start: y0.to_vec(),
        steps: Vec::new(),
    };
    if span == 0.0 {
        return Ok(RkOutcome::Complete(empty));
    }
    let dir = span.signum();
    let h_max = if opts.h_max > 0.0 {
        opts.h_max.min(span.abs())
    } else {
        span.abs() / 4.0
    };
    let h_min = span.abs() * 1e-14 + f64::MIN_POSITIVE;

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = (span.abs() / 100.0).min(h_max) * dir;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    let mut steps: Vec<DenseStep> = Vec::new();
    let mut k1_fresh = false;

    let eval_ok = |t: f64, y: &[f64], out: &mut [f64]| -> bool {
        rhs(t, y, out).is_ok() && out.iter().all(|v| v.is_finite())
    };

    for _ in 0..opts.max_steps {
        if (t - t_end) * dir >= 0.0 {
            return Ok(RkOutcome::Complete(DenseTrajectory {
                t_start: t0,
                t_end: t,
                dim,
                y_start: y0.to_vec(),
                steps,
            }));
        }
        if h.abs() < h_min {
            return Err(RkError::StepUnderflow { t });
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }

        if !k1_fresh {
            let mut out = vec![0.0; dim];
            if !eval_ok(t, &y, &mut out) {
                h *= 0.5;
                continue;
            }
            k[0] = out;
            k1_fresh = true;
        }

        // stages 2..7
        let mut failed = false;
        let mut ytmp = vec![0.0; dim];
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                ytmp[i] = y[i] + h * acc;
            }
            let mut out = vec![0.0; dim];
            if !eval_ok(t + C[s] * h, &ytmp, &mut out) {
                failed = true;
                break;
            }
            k[s] = out;
        }
        if failed {
            h *= 0.5;
            k1_fresh = true; // k1 unchanged at same t
            continue;
        }
        // FSAL: stage 7 state is the 5th-order solution.
        let y1 = ytmp.clone();

        let mut err_acc = 0.0;
        for i in 0..dim {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let sk = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            err_acc += (e / sk) * (e / sk);
        }
        let err = (err_acc / dim as f64).sqrt();

        if !err.is_finite() || err > 1.0 {
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).max(0.2)
            } else {
                0.5
            };
            h *= factor;
            continue;
        }

        // accept; build the continuous extension
        let dy: Vec<f64> = (0..dim).map(|i| y1[i] - y[i]).collect();
        let r1 = y.clone();
        let r2 = dy.clone();
        let r3: Vec<f64> = (0..dim).map(|i| h * k[0][i] - dy[i]).collect();
        let r4: Vec<f64> = (0..dim).map(|i| dy[i] - h * k[6][i] - r3[i]).collect();
        let r5: Vec<f64> = (0..dim)
            .map(|i| {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    acc += D[j] * kj[i];
                }
                h * acc
            })
            .collect();
        let step = DenseStep {
            t0: t,
            h,
            rcont: [r1, r2, r3, r4, r5],
        };

        // escape detection against the bounding box
        if let Some(bounds) = &opts.bounds {
            if bounds.violation(&y1) > 0.0 {
                let mut lo = 0.0;
                let mut hi = 1.0;
                let mut buf = vec![0.0; dim];
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    step.eval(mid, &mut buf);
                    if bounds.violation(&buf) > 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                step.eval(hi, &mut buf);
                let t_escape = t + hi * h;
                steps.push(step);
                return Ok(RkOutcome::Escaped {
                    traj: DenseTrajectory {
                        t_start: t0,
                        t_end: t_escape,
                        dim,
                        y_start: y0.to_vec(),
                        steps,
                    },
                    t_escape,
                    y_escape: buf,
                });
            }
        }

        steps.push(step);
        t += h;
        y = y1;
        k[0] = k[6].clone(); // FSAL
        k1_fresh = true;

        let factor = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        h = (h * factor).clamp(-h_max, h_max);
        if h == 0.0 {
            h = h_min * dir;
        }
    }
    Err(RkError::StepBudget { t })
}
