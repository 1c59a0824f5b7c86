//! Smooth extension of a trajectory from a subinterval to a larger interval
//! via an e^{-1/x} cutoff: the extension copies the trajectory on the inner
//! interval exactly, flattens to the endpoint values outside, and its range
//! stays inside range(f) ∪ B_δ(f(a₁)) ∪ B_δ(f(b₁)).

use std::sync::Arc;

use crate::error::SolveError;
use crate::geom::dist2;
use crate::quad::fd_step;

/// e^{-1/x} glue: 0 for x ≤ 0, 1 for x ≥ 1, smooth and monotone between.
pub fn smoothstep(x: f64) -> f64 {
    fn phi(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (-1.0 / x).exp()
        }
    }
    let a = phi(x);
    let b = phi(1.0 - x);
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        1.0
    } else {
        a / (a + b)
    }
}

fn smoothstep_deriv(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let h = 1e-6;
    let lo = (x - h).max(0.0);
    let hi = (x + h).min(1.0);
    (smoothstep(hi) - smoothstep(lo)) / (hi - lo)
}

/// Cutoff ψ: 1 on [a₁+2η, b₁-2η], 0 outside (a₁+η, b₁-η).
#[derive(Debug, Clone)]
pub struct SmoothCutoff {
    pub a1: f64,
    pub b1: f64,
    pub eta: f64,
}

impl SmoothCutoff {
    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.a1 + self.eta || t >= self.b1 - self.eta {
            0.0
        } else if t < self.a1 + 2.0 * self.eta {
            smoothstep((t - self.a1 - self.eta) / self.eta)
        } else if t > self.b1 - 2.0 * self.eta {
            smoothstep((self.b1 - self.eta - t) / self.eta)
        } else {
            1.0
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        if t <= self.a1 + self.eta || t >= self.b1 - self.eta {
            0.0
        } else if t < self.a1 + 2.0 * self.eta {
            smoothstep_deriv((t - self.a1 - self.eta) / self.eta) / self.eta
        } else if t > self.b1 - 2.0 * self.eta {
            -smoothstep_deriv((self.b1 - self.eta - t) / self.eta) / self.eta
        } else {
            0.0
        }
    }
}

pub type TrajFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// The extended function: equal to the trajectory on [a₁+2η, b₁-2η]
/// (bit-for-bit, the values are copied), blended toward the frozen endpoint
/// values on the cutoff collars, constant outside [a₁, b₁].
pub struct SmoothExtension {
    pub outer: (f64, f64),
    pub source: (f64, f64),
    pub inner: (f64, f64),
    pub eta: f64,
    pub delta: f64,
    pub psi: SmoothCutoff,
    pub fa1: Vec<f64>,
    pub fb1: Vec<f64>,
    traj: TrajFn,
    traj_deriv: Option<TrajFn>,
}

impl SmoothExtension {
    pub fn dim(&self) -> usize {
        self.fa1.len()
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let (a1, b1) = self.source;
        let eta = self.eta;
        if t <= a1 + eta {
            return self.fa1.clone();
        }
        if t >= b1 - eta {
            return self.fb1.clone();
        }
        if t >= a1 + 2.0 * eta && t <= b1 - 2.0 * eta {
            return (self.traj)(t);
        }
        let psi = self.psi.eval(t);
        let f = (self.traj)(t);
        let c = if t < a1 + 2.0 * eta { &self.fa1 } else { &self.fb1 };
        f.iter()
            .zip(c)
            .map(|(fv, cv)| cv + psi * (fv - cv))
            .collect()
    }

    pub fn deriv(&self, t: f64) -> Vec<f64> {
        let (a1, b1) = self.source;
        let eta = self.eta;
        if t <= a1 + eta || t >= b1 - eta {
            return vec![0.0; self.dim()];
        }
        let fprime = |s: f64| -> Vec<f64> {
            match &self.traj_deriv {
                Some(d) => d(s),
                None => {
                    let h = fd_step(s) * 1e-2;
                    let fp = (self.traj)(s + h);
                    let fm = (self.traj)(s - h);
                    fp.iter().zip(&fm).map(|(p, m)| (p - m) / (2.0 * h)).collect()
                }
            }
        };
        if t >= a1 + 2.0 * eta && t <= b1 - 2.0 * eta {
            return fprime(t);
        }
        let psi = self.psi.eval(t);
        let dpsi = self.psi.deriv(t);
        let f = (self.traj)(t);
        let df = fprime(t);
        let c = if t < a1 + 2.0 * eta { &self.fa1 } else { &self.fb1 };
        (0..self.dim())
            .map(|i| dpsi * (f[i] - c[i]) + psi * df[i])
            .collect()
    }
}

/// Extend `traj` (defined on [a₁, b₁]) to the outer interval, equal to the
/// input on a neighbourhood of the inner interval. The collar width η is
/// chosen against the trajectory's modulus of continuity so that the blended
/// values stay within `delta` of the frozen endpoint values.
pub fn extend_smoothly(
    traj: TrajFn,
    traj_deriv: Option<TrajFn>,
    source: (f64, f64),
    outer: (f64, f64),
    inner: (f64, f64),
    delta: f64,
) -> Result<SmoothExtension, SolveError> {
    let (a, b) = outer;
    let (a1, b1) = source;
    let (a2, b2) = inner;
    if !(a < a1 && a1 < a2 && a2 < b2 && b2 < b1 && b1 < b) {
        return Err(SolveError::InvalidProblem(format!(
            "extension needs a < a1 < a2 < b2 < b1 < b, got {a} {a1} {a2} {b2} {b1} {b}"
        )));
    }
    if !(delta > 0.0) {
        return Err(SolveError::EtaNotFound { delta });
    }
    let fa1 = traj(a1);
    let fb1 = traj(b1);

    let eta_cap = (a2 - a1).min(b1 - b2) / 3.0 * (1.0 - 1e-12);
    let feasible = |eta: f64| -> bool {
        if !(eta > 0.0) {
            return false;
        }
        let m = 129;
        for i in 0..=m {
            let tl = a1 + 2.0 * eta * i as f64 / m as f64;
            if dist2(&traj(tl), &fa1) > delta * (1.0 - 1e-9) {
                return false;
            }
            let tr = b1 - 2.0 * eta * i as f64 / m as f64;
            if dist2(&traj(tr), &fb1) > delta * (1.0 - 1e-9) {
                return false;
            }
        }
        true
    };

    let eta = if feasible(eta_cap) {
        eta_cap
    } else {
        let mut lo = 0.0f64;
        let mut hi = eta_cap;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let eta = 0.95 * lo;
        if !feasible(eta) {
            return Err(SolveError::EtaNotFound { delta });
        }
        eta
    };

    Ok(SmoothExtension {
        outer,
        source,
        inner,
        eta,
        delta,
        psi: SmoothCutoff { a1, b1, eta },
        fa1,
        fb1,
        traj,
        traj_deriv,
    })
}

/// Extension with a caller-chosen collar width (no modulus search); the
/// parameterized solvers use a deterministic η so the collar does not jump
/// between neighbouring parameter values.
pub(crate) fn extension_with_eta(
    traj: TrajFn,
    traj_deriv: Option<TrajFn>,
    source: (f64, f64),
    outer: (f64, f64),
    inner: (f64, f64),
    delta: f64,
    eta: f64,
) -> Result<SmoothExtension, SolveError> {
    let (a1, b1) = source;
    let cap = (inner.0 - a1).min(b1 - inner.1) / 3.0;
    if !(eta > 0.0 && eta <= cap) {
        return Err(SolveError::EtaNotFound { delta });
    }
    let fa1 = traj(a1);
    let fb1 = traj(b1);
    Ok(SmoothExtension {
        outer,
        source,
        inner,
        eta,
        delta,
        psi: SmoothCutoff { a1, b1, eta },
        fa1,
        fb1,
        traj,
        traj_deriv,
    })
}
