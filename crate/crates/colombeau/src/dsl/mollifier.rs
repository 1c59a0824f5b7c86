//! The built-in mollifier: a nonnegative smooth bump supported on [-1, 1]
//! with unit integral, together with its derivatives and its antiderivative
//! ramp.
//!
//! ρ(x) = c · exp(-1/(1 - x²)) on (-1, 1), 0 outside, with c fixed so that
//! ∫ρ = 1. The ramp R(x) = ∫_{-∞}^x ρ satisfies R(-1) = 0, R(1) = 1 and
//! R' = ρ; the mollified Heaviside is H_ε(t) = R(t/ε), and the scaled
//! derivative family ε^{-(k+1)} ρ^{(k)}(t/ε) backs the symbolic chain rule.
//!
//! Note: this ρ does not have vanishing higher moments. Only ∫ρ = 1, the
//! L¹ bound and smoothness are relied upon anywhere in this crate.

use std::sync::{Mutex, OnceLock};

use crate::quad::gl_integrate;

/// Number of cells in the precomputed cumulative table for the ramp.
const RAMP_CELLS: usize = 2048;
/// Gauss-Legendre points per cell / per partial-cell evaluation.
const GL_POINTS: usize = 15;

pub struct Mollifier {
    /// Normalisation constant c = 1 / ∫_{-1}^{1} exp(-1/(1-x²)) dx.
    c: f64,
    /// Cumulative integrals of ρ at cell boundaries -1 + 2i/N, scaled so the
    /// final entry is exactly 1.
    cumulative: Vec<f64>,
    cell_width: f64,
    /// Polynomials N_k in ρ^{(k)} = ρ · N_k / (1-x²)^{2k}, by coefficient
    /// (index = degree).
    deriv_polys: Mutex<Vec<Vec<f64>>>,
}

fn raw_bump(x: f64) -> f64 {
    let u = 1.0 - x * x;
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

impl Mollifier {
    fn build() -> Self {
        let total = gl_panels(raw_bump, -1.0, 1.0, RAMP_CELLS);
        let c = 1.0 / total;

        let mut cumulative = Vec::with_capacity(RAMP_CELLS + 1);
        cumulative.push(0.0);
        let w = 2.0 / RAMP_CELLS as f64;
        let mut acc = 0.0;
        for i in 0..RAMP_CELLS {
            let a = -1.0 + i as f64 * w;
            acc += gl_integrate(raw_bump, a, a + w, GL_POINTS);
            cumulative.push(acc);
        }
        // Scale so that R(1) = 1 exactly.
        let end = *cumulative.last().unwrap();
        for v in &mut cumulative {
            *v /= end;
        }
        Mollifier {
            c,
            cumulative,
            cell_width: w,
            deriv_polys: Mutex::new(vec![vec![1.0]]),
        }
    }

    /// ρ(x).
    pub fn rho(&self, x: f64) -> f64 {
        self.c * raw_bump(x)
    }

    /// ‖ρ‖_{L¹} = ∫ρ = 1 for a nonnegative normalised profile.
    pub fn l1_norm(&self) -> f64 {
        1.0
    }

    /// ρ^{(k)}(x). Evaluated as ρ(x) · N_k(x) / (1-x²)^{2k} in a form that
    /// avoids 0·∞ near the support boundary.
    pub fn rho_deriv(&self, x: f64, k: u32) -> f64 {
        if k == 0 {
            return self.rho(x);
        }
        let u = 1.0 - x * x;
        if u <= 0.0 {
            return 0.0;
        }
        let nk = self.deriv_poly_eval(k as usize, x);
        // c · N_k(x) · exp(-1/u - 2k·ln u); the exponent → -∞ as u → 0.
        let exponent = -1.0 / u - 2.0 * k as f64 * u.ln();
        if exponent < -700.0 {
            return 0.0;
        }
        self.c * nk * exponent.exp()
    }

    fn deriv_poly_eval(&self, k: usize, x: f64) -> f64 {
        let mut polys = self.deriv_polys.lock().unwrap();
        while polys.len() <= k {
            let last = polys.last().unwrap();
            let next = next_deriv_poly(last, polys.len() - 1);
            polys.push(next);
        }
        horner(&polys[k], x)
    }

    /// R(x) = ∫_{-∞}^x ρ, exactly 0 for x ≤ -1 and exactly 1 for x ≥ 1.
    pub fn ramp(&self, x: f64) -> f64 {
        if x <= -1.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let pos = (x + 1.0) / self.cell_width;
        let cell = (pos as usize).min(RAMP_CELLS - 1);
        let a = -1.0 + cell as f64 * self.cell_width;
        let partial = gl_integrate(raw_bump, a, x, GL_POINTS) / self.total_raw();
        (self.cumulative[cell] + partial).clamp(0.0, 1.0)
    }

    fn total_raw(&self) -> f64 {
        1.0 / self.c
    }

    /// Independent consistency checks: ∫ρ re-integrated with a different
    /// panelling, and R' compared against ρ by Richardson extrapolation.
    pub fn verify(&self) -> MollifierCheck {
        let integral = gl_panels(|x| self.rho(x), -1.0, 1.0, 1537);
        let mut max_ramp_deriv_err: f64 = 0.0;
        let d = 1e-3;
        for i in 0..=400 {
            let x = -0.999 + 1.998 * i as f64 / 400.0;
            let d1 = (self.ramp(x + d) - self.ramp(x - d)) / (2.0 * d);
            let d2 = (self.ramp(x + d / 2.0) - self.ramp(x - d / 2.0)) / d;
            let richardson = (4.0 * d2 - d1) / 3.0;
            max_ramp_deriv_err = max_ramp_deriv_err.max((richardson - self.rho(x)).abs());
        }
        MollifierCheck {
            integral,
            max_ramp_deriv_err,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MollifierCheck {
    pub integral: f64,
    pub max_ramp_deriv_err: f64,
}

/// N_{k+1} = (1-x²)² N_k' + 2x N_k (2k(1-x²) - 1).
fn next_deriv_poly(nk: &[f64], k: usize) -> Vec<f64> {
    let dnk = poly_deriv(nk);
    // (1 - x²)² = 1 - 2x² + x⁴
    let sq = [1.0, 0.0, -2.0, 0.0, 1.0];
    let term1 = poly_mul(&sq, &dnk);
    // 2x(2k(1-x²) - 1) = (4k - 2)x - 4k x³
    let kf = k as f64;
    let lin = [0.0, 4.0 * kf - 2.0, 0.0, -4.0 * kf];
    let term2 = poly_mul(&lin, nk);
    poly_add(&term1, &term2)
}

fn poly_deriv(p: &[f64]) -> Vec<f64> {
    if p.len() <= 1 {
        return vec![0.0];
    }
    (1..p.len()).map(|i| p[i] * i as f64).collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, &v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, &v) in b.iter().enumerate() {
        out[i] += v;
    }
    out
}

fn horner(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn gl_panels<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|i| gl_integrate(f, a + i as f64 * w, a + (i + 1) as f64 * w, GL_POINTS))
        .sum()
}

/// The process-wide mollifier profile.
pub fn std_mollifier() -> &'static Mollifier {
    static INSTANCE: OnceLock<Mollifier> = OnceLock::new();
    INSTANCE.get_or_init(Mollifier::build)
}
