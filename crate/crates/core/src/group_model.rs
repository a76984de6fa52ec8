//! The compact group `K`, its Lie algebra data, and the closed-form densities
//! on `T*K ≅ K × 𝔨` used throughout the crate.
//!
//! Two families are supported: the torus `U(1)^n` and `SU(2)`. For SU(2) the
//! basis `X_k = -iσ_k/2` is orthonormal for `(X, Y) = -2 tr(XY)`, so the
//! Casimir eigenvalue on spin `j` is `j(j+1)`.

use crate::error::{require_positive, CstError, Result};
use crate::special::{ln_sinhc, sinhc};
use crate::su2::{self, Mat2};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Unitarity residual allowed for SU(2) points.
pub const UNITARY_TOL: f64 = 1e-12;
/// Determinant residual allowed for complexified products, relative to `‖g‖_F² / 2`.
pub const DET_TOL: f64 = 1e-10;

pub const SU2_CASIMIR_CONVENTION: &str =
    "X_k = -i sigma_k / 2, orthonormal for (X,Y) = -2 tr(XY); Delta = sum X_k^2; c_j = j(j+1)";
pub const TORUS_CASIMIR_CONVENTION: &str =
    "standard basis of R^n = Lie(U(1)^n), angles theta_k in [0, 2pi); c_m = |m|^2";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Torus,
    Su2,
}

/// Immutable description of `K`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "GroupDescriptor", into = "GroupDescriptor")]
pub struct GroupSpec {
    family: Family,
    n: usize,
    rank: usize,
    positive_roots: Vec<Vec<f64>>,
    weyl_vector_norm_sq: f64,
    casimir_convention: &'static str,
}

/// Wire form of a [`GroupSpec`]: `{"family": "torus", "n": 2}` or `{"family": "su2"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDescriptor {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl TryFrom<GroupDescriptor> for GroupSpec {
    type Error = CstError;

    fn try_from(d: GroupDescriptor) -> Result<Self> {
        match d.family {
            Family::Torus => GroupSpec::torus(d.n.unwrap_or(1)),
            Family::Su2 => match d.n {
                None | Some(3) => Ok(GroupSpec::su2()),
                Some(n) => Err(CstError::InvalidArgument(format!("su2 has dimension 3, got n = {n}"))),
            },
        }
    }
}

impl From<GroupSpec> for GroupDescriptor {
    fn from(g: GroupSpec) -> Self {
        GroupDescriptor {
            family: g.family,
            n: Some(g.n),
        }
    }
}

impl PartialEq for GroupSpec {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.n == other.n
    }
}

impl GroupSpec {
    pub fn torus(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(CstError::InvalidArgument("torus dimension must be at least 1".into()));
        }
        Ok(GroupSpec {
            family: Family::Torus,
            n,
            rank: n,
            positive_roots: Vec::new(),
            weyl_vector_norm_sq: 0.0,
            casimir_convention: TORUS_CASIMIR_CONVENTION,
        })
    }

    /// SU(2), with the root data read off from the spectrum of `ad(X_3)`.
    pub fn su2() -> Self {
        let slope = su2_root_slope();
        GroupSpec {
            family: Family::Su2,
            n: 3,
            rank: 1,
            positive_roots: vec![vec![0.0, 0.0, slope]],
            // ρ = α/2
            weyl_vector_norm_sq: slope * slope / 4.0,
            casimir_convention: SU2_CASIMIR_CONVENTION,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// `dim K`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Each root `α` as the vector `H_α` with `α(Y) = (H_α, Y)` on the Cartan subalgebra.
    pub fn positive_roots(&self) -> &[Vec<f64>] {
        &self.positive_roots
    }

    /// `|ρ|²`.
    pub fn weyl_vector_norm_sq(&self) -> f64 {
        self.weyl_vector_norm_sq
    }

    pub fn casimir_convention(&self) -> &'static str {
        self.casimir_convention
    }

    /// The slope `a` in `α(r X_3) = a r` (zero for tori).
    pub fn root_slope(&self) -> f64 {
        self.positive_roots
            .first()
            .map(|h| h.iter().map(|v| v * v).sum::<f64>().sqrt())
            .unwrap_or(0.0)
    }

    pub fn descriptor(&self) -> GroupDescriptor {
        self.clone().into()
    }

    pub(crate) fn check_same(&self, other: &GroupSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(CstError::GroupMismatch(format!(
                "{:?}(n={}) vs {:?}(n={})",
                self.family, self.n, other.family, other.n
            )))
        }
    }
}

/// Positive imaginary eigenvalue of `ad(X_3)` on the complexified algebra.
fn su2_root_slope() -> f64 {
    let ad = su2::structure_matrix(&su2::basis()[2]);
    ad.complex_eigenvalues().iter().map(|l| l.im.abs()).fold(0.0, f64::max)
}

/// `Y ∈ 𝔨` in orthonormal coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraPoint {
    pub y: Vec<f64>,
}

impl AlgebraPoint {
    pub fn new(y: Vec<f64>) -> Self {
        AlgebraPoint { y }
    }

    pub fn zero(n: usize) -> Self {
        AlgebraPoint { y: vec![0.0; n] }
    }

    pub fn norm_sq(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        AlgebraPoint {
            y: self.y.iter().map(|v| v * s).collect(),
        }
    }

    /// Uniform sample from the ball of the given radius.
    pub fn random_ball<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R, radius: f64) -> Self {
        loop {
            let y: Vec<f64> = (0..spec.n()).map(|_| rng.gen_range(-radius..radius)).collect();
            let p = AlgebraPoint { y };
            if p.norm() <= radius {
                return p;
            }
        }
    }
}

/// A point of `K`.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupPoint {
    /// Angles in `[0, 2π)`.
    Torus(Vec<f64>),
    Su2(Mat2),
}

impl GroupPoint {
    pub fn torus(angles: &[f64]) -> Self {
        GroupPoint::Torus(angles.iter().map(|a| a.rem_euclid(TAU)).collect())
    }

    pub fn su2(u: Mat2) -> Result<Self> {
        let unit = su2::unitarity_residual(&u);
        let det = (su2::det(&u) - 1.0).norm();
        let residual = unit.max(det);
        if residual < UNITARY_TOL {
            Ok(GroupPoint::Su2(u))
        } else {
            Err(CstError::MatrixResidual {
                what: "SU(2) unitarity/determinant",
                residual,
                tolerance: UNITARY_TOL,
            })
        }
    }

    pub fn su2_euler(alpha: f64, beta: f64, gamma: f64) -> Self {
        GroupPoint::Su2(su2::euler(alpha, beta, gamma))
    }

    pub fn identity(spec: &GroupSpec) -> Self {
        match spec.family() {
            Family::Torus => GroupPoint::Torus(vec![0.0; spec.n()]),
            Family::Su2 => GroupPoint::Su2(Mat2::identity()),
        }
    }

    /// Haar-random point.
    pub fn random<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R) -> Self {
        match spec.family() {
            Family::Torus => GroupPoint::Torus((0..spec.n()).map(|_| rng.gen_range(0.0..TAU)).collect()),
            Family::Su2 => {
                // Uniform unit quaternion via Gaussian normalization (Box–Muller).
                let mut q = [0.0f64; 4];
                for pair in q.chunks_mut(2) {
                    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                    let u2: f64 = rng.gen_range(0.0..1.0);
                    let r = (-2.0 * u1.ln()).sqrt();
                    pair[0] = r * (TAU * u2).cos();
                    pair[1] = r * (TAU * u2).sin();
                }
                let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                let [a, b, c, d] = q.map(|v| v / norm);
                GroupPoint::Su2(Mat2::new(
                    Complex64::new(a, b),
                    Complex64::new(c, d),
                    Complex64::new(-c, d),
                    Complex64::new(a, -b),
                ))
            }
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            GroupPoint::Torus(t) => GroupPoint::torus(&t.iter().map(|a| -a).collect::<Vec<_>>()),
            GroupPoint::Su2(u) => GroupPoint::Su2(u.adjoint()),
        }
    }

    /// `x · exp(t X)` for a real algebra element `X`.
    pub fn mul_exp(&self, t: &AlgebraPoint) -> Self {
        match self {
            GroupPoint::Torus(a) => GroupPoint::torus(&a.iter().zip(&t.y).map(|(x, y)| x + y).collect::<Vec<_>>()),
            GroupPoint::Su2(u) => GroupPoint::Su2(u * su2::exp_real(&t.y)),
        }
    }

    pub fn embed(&self) -> ComplexGroupPoint {
        match self {
            GroupPoint::Torus(a) => ComplexGroupPoint::Torus(a.iter().map(|&v| Complex64::new(v, 0.0)).collect()),
            GroupPoint::Su2(u) => ComplexGroupPoint::Su2(*u),
        }
    }
}

/// A point `g = x e^{iY}` of `K_C`.
#[derive(Debug, Clone, PartialEq)]
pub enum ComplexGroupPoint {
    /// Complex angles `θ + i y`.
    Torus(Vec<Complex64>),
    Su2(Mat2),
}

impl ComplexGroupPoint {
    /// Group product `self · other`.
    pub fn mul(&self, other: &ComplexGroupPoint) -> Result<Self> {
        match (self, other) {
            (ComplexGroupPoint::Torus(a), ComplexGroupPoint::Torus(b)) if a.len() == b.len() => {
                Ok(ComplexGroupPoint::Torus(a.iter().zip(b).map(|(x, y)| x + y).collect()))
            }
            (ComplexGroupPoint::Su2(a), ComplexGroupPoint::Su2(b)) => checked_sl2(a * b),
            _ => Err(CstError::GroupMismatch(
                "product of points from different groups".into(),
            )),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            ComplexGroupPoint::Torus(a) => ComplexGroupPoint::Torus(a.iter().map(|z| -z).collect()),
            ComplexGroupPoint::Su2(g) => ComplexGroupPoint::Su2(su2::sl2_inverse(g)),
        }
    }

    /// `self · exp(Σ z_k X_k)` for complex coefficients.
    pub fn mul_exp_complex(&self, z: &[Complex64]) -> Result<Self> {
        match self {
            ComplexGroupPoint::Torus(a) => Ok(ComplexGroupPoint::Torus(a.iter().zip(z).map(|(x, y)| x + y).collect())),
            ComplexGroupPoint::Su2(g) => checked_sl2(g * su2::exp_algebra([z[0], z[1], z[2]])),
        }
    }
}

fn checked_sl2(g: Mat2) -> Result<ComplexGroupPoint> {
    // ‖g‖_F² / 2 ≥ 1 on SL(2,C), with equality exactly on SU(2).
    let scale = (g.norm_squared() / 2.0).max(1.0);
    let residual = (su2::det(&g) - 1.0).norm() / scale;
    if residual < DET_TOL {
        Ok(ComplexGroupPoint::Su2(g))
    } else {
        Err(CstError::MatrixResidual {
            what: "SL(2,C) determinant",
            residual,
            tolerance: DET_TOL,
        })
    }
}

/// `η(Y) = Π_{α>0} sinh α(Y) / α(Y)`, in the Ad-invariant radial form.
pub fn eta(spec: &GroupSpec, y: &AlgebraPoint) -> f64 {
    match spec.family() {
        Family::Torus => 1.0,
        Family::Su2 => sinhc(spec.root_slope() * y.norm()),
    }
}

pub fn ln_eta(spec: &GroupSpec, y: &AlgebraPoint) -> f64 {
    match spec.family() {
        Family::Torus => 0.0,
        Family::Su2 => ln_sinhc(spec.root_slope() * y.norm()),
    }
}

/// Kähler potential `κ_s = s|Y|²` of the structure `J_s`.
pub fn kahler_potential(s: f64, y: &AlgebraPoint) -> Result<f64> {
    let s = require_positive("s", s)?;
    Ok(s * y.norm_sq())
}

/// `|Ω_s|(Y) = s^{n/2} η(sY)`.
pub fn half_form_density(spec: &GroupSpec, s: f64, y: &AlgebraPoint) -> Result<f64> {
    let s = require_positive("s", s)?;
    Ok(s.powf(spec.n() as f64 / 2.0) * eta(spec, &y.scaled(s)))
}

/// Density of the pulled-back Haar measure of `K_C` against the Liouville measure: `s^n η(sY)²`.
pub fn kc_haar_density(spec: &GroupSpec, s: f64, y: &AlgebraPoint) -> Result<f64> {
    let h = half_form_density(spec, s, y)?;
    Ok(h * h)
}

/// `c_ℏ = (πℏ)^{-n/2} e^{-|ρ|²ℏ}`.
pub fn c_hbar(spec: &GroupSpec, hbar: f64) -> Result<f64> {
    let hbar = require_positive("hbar", hbar)?;
    Ok(ln_c_hbar(spec, hbar).exp())
}

pub(crate) fn ln_c_hbar(spec: &GroupSpec, hbar: f64) -> f64 {
    -(spec.n() as f64 / 2.0) * (PI * hbar).ln() - spec.weyl_vector_norm_sq() * hbar
}

/// Density of `dν_ℏ` against the Liouville measure: `c_ℏ e^{-|Y|²/ℏ} η(Y)`.
pub fn nu_density_vs_liouville(spec: &GroupSpec, hbar: f64, y: &AlgebraPoint) -> Result<f64> {
    let hbar = require_positive("hbar", hbar)?;
    Ok((ln_c_hbar(spec, hbar) - y.norm_sq() / hbar + ln_eta(spec, y)).exp())
}

/// `ψ_s(x, Y)` without argument validation; `s > 0` and matching dimensions are the caller's burden.
pub(crate) fn psi(x: &GroupPoint, s: f64, y: &AlgebraPoint) -> ComplexGroupPoint {
    match x {
        GroupPoint::Torus(theta) => ComplexGroupPoint::Torus(
            theta
                .iter()
                .zip(&y.y)
                .map(|(&t, &v)| Complex64::new(t, s * v))
                .collect(),
        ),
        GroupPoint::Su2(u) => ComplexGroupPoint::Su2(u * imaginary_exp(s, y)),
    }
}

/// `e^{isY}` in SL(2,C).
pub(crate) fn imaginary_exp(s: f64, y: &AlgebraPoint) -> Mat2 {
    su2::exp_algebra([0, 1, 2].map(|k| Complex64::new(0.0, s * y.y[k])))
}

/// `ψ_s(x, Y) = x e^{isY}`.
pub fn compose_complex(x: &GroupPoint, s: f64, y: &AlgebraPoint) -> Result<ComplexGroupPoint> {
    let s = require_positive("s", s)?;
    match x {
        GroupPoint::Torus(theta) => {
            if theta.len() != y.y.len() {
                return Err(CstError::InvalidArgument("dimension mismatch".into()));
            }
            Ok(ComplexGroupPoint::Torus(
                theta
                    .iter()
                    .zip(&y.y)
                    .map(|(&t, &v)| Complex64::new(t, s * v))
                    .collect(),
            ))
        }
        GroupPoint::Su2(u) => {
            if y.y.len() != 3 {
                return Err(CstError::InvalidArgument("su(2) points have 3 coordinates".into()));
            }
            checked_sl2(u * imaginary_exp(s, y))
        }
    }
}
