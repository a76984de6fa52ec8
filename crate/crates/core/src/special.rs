//! Scalar special functions and one-dimensional Gauss–Legendre rules.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Below this magnitude `sinh(t)/t` and friends switch to their Taylor polynomial.
pub const SERIES_THRESHOLD: f64 = 1e-4;

/// `sinh(t)/t`, continuous through `t = 0`.
pub fn sinhc(t: f64) -> f64 {
    if t.abs() < SERIES_THRESHOLD {
        let t2 = t * t;
        1.0 + t2 / 6.0 * (1.0 + t2 / 20.0 * (1.0 + t2 / 42.0))
    } else {
        t.sinh() / t
    }
}

/// `ln(sinh(t)/t)` without overflow for large `|t|`.
pub fn ln_sinhc(t: f64) -> f64 {
    let a = t.abs();
    if a < 20.0 {
        sinhc(a).ln()
    } else {
        // sinh(a) = e^a (1 - e^{-2a}) / 2
        a + (-(-2.0 * a).exp()).ln_1p() - std::f64::consts::LN_2 - a.ln()
    }
}

/// `sin(w)/w` for complex `w`.
pub fn sinc_complex(w: Complex64) -> Complex64 {
    if w.norm() < SERIES_THRESHOLD {
        let w2 = w * w;
        Complex64::new(1.0, 0.0) - w2 / 6.0 * (Complex64::new(1.0, 0.0) - w2 / 20.0 * (1.0 - w2 / 42.0))
    } else {
        w.sin() / w
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1], ascending in the node.
///
/// Newton iteration on the three-term recurrence, seeded with the
/// Tricomi asymptotic guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos() * (1.0 - (1.0 - 1.0 / nf) / (8.0 * nf * nf));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_interval(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&v| v * half).collect(),
    )
}
