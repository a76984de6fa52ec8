//! 2×2 matrix helpers for SU(2) and SL(2,C).
//!
//! The Lie algebra basis is `X_k = -i σ_k / 2`, orthonormal for
//! `(X, Y) = -2 tr(XY)`.

use crate::special::sinc_complex;
use nalgebra::Matrix2;
use num_complex::Complex64;

pub type Mat2 = Matrix2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn pauli() -> [Mat2; 3] {
    [
        Mat2::new(ZERO, ONE, ONE, ZERO),
        Mat2::new(ZERO, -I, I, ZERO),
        Mat2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

/// The orthonormal basis `X_k = -i σ_k / 2` of su(2).
pub fn basis() -> [Mat2; 3] {
    let s = pauli();
    let f = Complex64::new(0.0, -0.5);
    [s[0] * f, s[1] * f, s[2] * f]
}

/// The Ad-invariant inner product `-2 tr(AB)`.
pub fn inner(a: &Mat2, b: &Mat2) -> Complex64 {
    (a * b).trace() * -2.0
}

/// `exp(Σ z_k X_k)` for complex coefficients, in closed form.
///
/// With `w² = z·z`, `exp(-i z·σ/2) = cos(w/2) I - i (sin(w/2)/w) z·σ`.
/// Both coefficient functions are even in `w`, so the square-root branch is irrelevant.
pub fn exp_algebra(z: [Complex64; 3]) -> Mat2 {
    let w2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
    let w = w2.sqrt();
    let c = (w * 0.5).cos();
    // sin(w/2)/w = sinc(w/2)/2
    let k = -I * sinc_complex(w * 0.5) * 0.5;
    Mat2::new(c + k * z[2], k * (z[0] - I * z[1]), k * (z[0] + I * z[1]), c - k * z[2])
}

/// `exp(Σ θ_k X_k)` for a real algebra element.
pub fn exp_real(theta: &[f64]) -> Mat2 {
    exp_algebra([
        Complex64::new(theta[0], 0.0),
        Complex64::new(theta[1], 0.0),
        Complex64::new(theta[2], 0.0),
    ])
}

/// ZYZ Euler angles: `exp(α X_3) exp(β X_2) exp(γ X_3)`.
pub fn euler(alpha: f64, beta: f64, gamma: f64) -> Mat2 {
    let ea = Complex64::from_polar(1.0, -0.5 * alpha);
    let eg = Complex64::from_polar(1.0, -0.5 * gamma);
    let (s, c) = (0.5 * beta).sin_cos();
    let rz = |e: Complex64| Mat2::new(e, ZERO, ZERO, e.conj());
    let ry = Mat2::new(
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(c, 0.0),
    );
    rz(ea) * ry * rz(eg)
}

/// Max-norm of `u u* - I`.
pub fn unitarity_residual(u: &Mat2) -> f64 {
    let p = u * u.adjoint() - Mat2::identity();
    p.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn det(u: &Mat2) -> Complex64 {
    u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)]
}

/// Inverse of a determinant-one matrix.
pub fn sl2_inverse(g: &Mat2) -> Mat2 {
    Mat2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)])
}

/// Coefficients of `[A, B]` in the orthonormal basis, for real algebra elements.
pub fn structure_matrix(a: &Mat2) -> nalgebra::Matrix3<f64> {
    let b = basis();
    let mut m = nalgebra::Matrix3::zeros();
    for (col, xb) in b.iter().enumerate() {
        let comm = a * xb - xb * a;
        for (row, xr) in b.iter().enumerate() {
            m[(row, col)] = inner(xr, &comm).re;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &Mat2, b: &Mat2) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn series_exp(a: &Mat2) -> Mat2 {
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for k in 1..60 {
            term = term * a / Complex64::new(k as f64, 0.0);
            sum += term;
        }
        sum
    }

    #[test]
    fn basis_is_orthonormal() {
        let b = basis();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((inner(&b[i], &b[j]) - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn closed_form_exponential_matches_series() {
        let b = basis();
        let zs = [
            [
                Complex64::new(0.3, 0.1),
                Complex64::new(-1.2, 0.4),
                Complex64::new(0.5, -0.7),
            ],
            [
                Complex64::new(0.0, 2.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
            ],
            [
                Complex64::new(1e-6, 0.0),
                Complex64::new(0.0, 3e-7),
                Complex64::new(0.0, 0.0),
            ],
        ];
        for z in zs {
            let a = b[0] * z[0] + b[1] * z[1] + b[2] * z[2];
            let want = series_exp(&a);
            assert!(max_diff(&exp_algebra(z), &want) < 1e-13);
            assert!((det(&exp_algebra(z)) - 1.0).norm() < 1e-13);
        }
    }

    #[test]
    fn imaginary_direction_along_x3_is_diagonal_boost() {
        let r = 1.7;
        let g = exp_algebra([ZERO, ZERO, Complex64::new(0.0, r)]);
        assert!((g[(0, 0)] - (r / 2.0).exp()).norm() < 1e-14);
        assert!((g[(1, 1)] - (-r / 2.0).exp()).norm() < 1e-14);
        assert!(g[(0, 1)].norm() < 1e-15 && g[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn euler_angles_give_unitary_matrices() {
        let u = euler(0.4, 2.1, 5.9);
        assert!(unitarity_residual(&u) < 1e-15);
        assert!((det(&u) - 1.0).norm() < 1e-15);
        let direct = exp_real(&[0.0, 0.0, 0.4]) * exp_real(&[0.0, 2.1, 0.0]) * exp_real(&[0.0, 0.0, 5.9]);
        assert!(max_diff(&u, &direct) < 1e-14);
    }

    #[test]
    fn ad_x3_rotates_x1_into_x2() {
        let m = structure_matrix(&basis()[2]);
        assert!((m[(1, 0)] - 1.0).abs() < 1e-15);
        assert!((m[(0, 1)] + 1.0).abs() < 1e-15);
        assert!(m[(2, 2)].abs() < 1e-15);
    }
}
