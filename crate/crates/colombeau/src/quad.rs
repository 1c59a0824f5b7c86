//! Small quadrature and finite-difference kernels shared by the solvers.

use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1], computed once by Newton
/// iteration on the Legendre recurrence (accurate to ~1e-15, no literal
/// tables to mistype).
pub fn gauss_legendre(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Vec<OnceLock<(Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| (0..64).map(|_| OnceLock::new()).collect());
    cache[n].get_or_init(|| compute_gauss_legendre(n))
}

fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-style initial guess, refined by Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Legendre polynomial P_n and derivative P_n' at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// ∫_a^b f via a single Gauss-Legendre rule with `n` points.
pub fn gl_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Composite Simpson rule with `n` (even) intervals; exact layout is part of
/// the deterministic-output contract.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 2 && n % 2 == 0, "simpson needs an even interval count");
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Simpson weights for samples on a uniform grid with `n` (even) intervals.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2 && n % 2 == 0);
    let mut w = vec![0.0; n + 1];
    w[0] = 1.0;
    w[n] = 1.0;
    for (i, wi) in w.iter_mut().enumerate().take(n).skip(1) {
        *wi = if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    for wi in &mut w {
        *wi *= h / 3.0;
    }
    w
}

/// Step size for central differences: cbrt(machine eps) times the local scale.
pub fn fd_step(scale: f64) -> f64 {
    f64::EPSILON.cbrt() * scale.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl15_integrates_polynomials_exactly() {
        // degree up to 2n-1 = 29
        let v = gl_integrate(|x| x.powi(8) - 3.0 * x.powi(5) + 2.0, -1.0, 1.0, 15);
        let exact = 2.0 / 9.0 + 4.0;
        assert!((v - exact).abs() < 1e-14);
    }

    #[test]
    fn gl_handles_shifted_interval() {
        let v = gl_integrate(|x| x.exp(), 0.0, 1.0, 15);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn simpson_converges() {
        let v = simpson(|x| (2.0 * x).sin(), 0.0, 1.0, 512);
        let exact = 0.5 * (1.0 - (2.0f64).cos());
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn simpson_weights_sum_to_span() {
        let w = simpson_weights(8, 0.25);
        let sum: f64 = w.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
    }
}
