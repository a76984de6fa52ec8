//! Quantum fibers over the family of complex structures `J_s`, the quantum
//! connection, and the unitary map from the Hall bundle.
//!
//! A section is `F̂(x e^{isY}) e^{-s|Y|²/2ℏ₀} √Ω_s`, optionally divided by `√a_s`.
//! The connection acts on the moving frame by the heat operator; its direct
//! form is a weighted integral over `K_C`, evaluated here by quadrature and
//! compared against the spectral action.

use crate::cst::{check_vector, evaluate_on_kc, parallel_transport_h, PeterWeylVector};
use crate::error::{require_positive, CstError, Result};
use crate::group_model::{eta, half_form_density, AlgebraPoint, GroupDescriptor, GroupPoint, GroupSpec};
use crate::irreps::{IrrepLabel, MatrixElementIndex};
use crate::quadrature::{inner_quantum, integrate_liouville, quantum_weight, weighted_grams, GridSpec, QuadratureRule};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A section of the quantum bundle at `s`, held through its holomorphic datum `F̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSection {
    s: f64,
    hbar0: f64,
    f: PeterWeylVector,
    normalized: bool,
}

impl QuantumSection {
    /// The section `F̂ e^{-s|Y|²/2ℏ₀} √Ω_s`.
    pub fn new(s: f64, hbar0: f64, f: PeterWeylVector) -> Result<Self> {
        Ok(QuantumSection {
            s: require_positive("s", s)?,
            hbar0: require_positive("hbar0", hbar0)?,
            f,
            normalized: false,
        })
    }

    /// The section `a_s^{-1/2} F̂ e^{-s|Y|²/2ℏ₀} √Ω_s`.
    pub fn normalized(s: f64, hbar0: f64, f: PeterWeylVector) -> Result<Self> {
        Ok(QuantumSection {
            normalized: true,
            ..Self::new(s, hbar0, f)?
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn hbar0(&self) -> f64 {
        self.hbar0
    }

    /// `ℏ = sℏ₀`.
    pub fn hbar(&self) -> f64 {
        self.s * self.hbar0
    }

    pub fn datum(&self) -> &PeterWeylVector {
        &self.f
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn spec(&self) -> &GroupSpec {
        self.f.spec()
    }

    fn with_datum(&self, f: PeterWeylVector) -> Self {
        QuantumSection { f, ..self.clone() }
    }

    fn check_compatible(&self, other: &QuantumSection) -> Result<()> {
        self.spec().check_same(other.spec())?;
        if self.s != other.s || self.hbar0 != other.hbar0 || self.normalized != other.normalized {
            return Err(CstError::InvalidArgument(
                "sections live in different fibers or frames".into(),
            ));
        }
        Ok(())
    }

    /// Frame factor relating the quantum inner product to `∫ conj(F̂)Ĝ e^{-s|Y|²/ℏ₀}|Ω_s| ε`.
    fn frame_factor(&self) -> f64 {
        if self.normalized {
            1.0 / a_factor(self.spec(), self.s, self.hbar0).unwrap_or(f64::NAN)
        } else {
            1.0
        }
    }
}

/// `a_s = (πℏ₀)^{n/2} e^{|ρ|²ℏ₀ s}`.
pub fn a_factor(spec: &GroupSpec, s: f64, hbar0: f64) -> Result<f64> {
    let s = require_positive("s", s)?;
    let hbar0 = require_positive("hbar0", hbar0)?;
    Ok((PI * hbar0).powf(spec.n() as f64 / 2.0) * (spec.weyl_vector_norm_sq() * hbar0 * s).exp())
}

/// Eigenvalue of `δ^Q_{∂/∂s}` on the frame vector of label `R`.
pub fn connection_eigenvalue(spec: &GroupSpec, hbar0: f64, label: &IrrepLabel, normalized: bool) -> f64 {
    let shift = if normalized { 0.0 } else { spec.weyl_vector_norm_sq() };
    hbar0 / 2.0 * (label.casimir() + shift)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumNorm {
    /// Quadrature of the quantum inner product on `T*K`.
    pub direct: f64,
    /// `a_s Σ |c|² e^{sℏ₀c_R}`, divided by `a_s` for normalized sections.
    pub spectral: f64,
}

/// `‖σ‖` by both evaluation paths.
pub fn quantum_norm(rule: &QuadratureRule, sigma: &QuantumSection) -> Result<QuantumNorm> {
    check_vector(rule, &sigma.f)?;
    let spec = sigma.spec();
    let direct_sq = quantum_inner(rule, sigma, sigma)?.re;
    let a_s = a_factor(spec, sigma.s, sigma.hbar0)?;
    let hbar = sigma.hbar();
    let spectral_sq: f64 = sigma
        .f
        .iter()
        .map(|(k, c)| c.norm_sqr() * (hbar * k.label.casimir()).exp())
        .sum::<f64>()
        * a_s
        * sigma.frame_factor();
    Ok(QuantumNorm {
        direct: direct_sq.max(0.0).sqrt(),
        spectral: spectral_sq.sqrt(),
    })
}

/// `⟨σ, ζ⟩^Q` by quadrature on `T*K`.
pub fn quantum_inner(rule: &QuadratureRule, sigma: &QuantumSection, zeta: &QuantumSection) -> Result<Complex64> {
    sigma.check_compatible(zeta)?;
    check_vector(rule, &sigma.f)?;
    check_vector(rule, &zeta.f)?;
    let (f, g) = (&sigma.f, &zeta.f);
    let v = inner_quantum(
        rule,
        sigma.spec(),
        sigma.s,
        sigma.hbar0,
        |p| evaluate_on_kc(f, p).unwrap_or(Complex64::new(f64::NAN, 0.0)),
        |p| evaluate_on_kc(g, p).unwrap_or(Complex64::new(f64::NAN, 0.0)),
    )?;
    Ok(v * sigma.frame_factor())
}

/// `δ^Q_{∂/∂s} σ` for a section with `s`-independent datum: every coefficient
/// times `(ℏ₀/2)(c_R + |ρ|²)`, or `(ℏ₀/2)c_R` in the normalized frame.
pub fn delta_q_apply(sigma: &QuantumSection) -> QuantumSection {
    let spec = sigma.spec().clone();
    let (h0, norm) = (sigma.hbar0, sigma.normalized);
    sigma.with_datum(
        sigma
            .f
            .map_labels(|l| Complex64::new(connection_eigenvalue(&spec, h0, l, norm), 0.0)),
    )
}

/// Weight of the direct connection pairing against `ε` at `K_C` coordinates
/// `g = x e^{iY}`: `s^{-n/2} ℏ₀ (|Y|²/2ℏ² - n/4ℏ) e^{-|Y|²/ℏ} η(Y)`.
pub fn connection_weight(spec: &GroupSpec, s: f64, hbar0: f64, y: &AlgebraPoint) -> f64 {
    let hbar = s * hbar0;
    let n = spec.n() as f64;
    let r2 = y.norm_sq();
    let poly = r2 / (2.0 * hbar * hbar) - n / (4.0 * hbar);
    s.powf(-n / 2.0) * hbar0 * poly * (-r2 / hbar + crate::group_model::ln_eta(spec, y)).exp()
}

/// Density of `a_s dν_ℏ` against `ε` at `K_C` coordinates.
fn scaled_nu_weight(spec: &GroupSpec, s: f64, hbar0: f64, y: &AlgebraPoint) -> f64 {
    let a_s = a_factor(spec, s, hbar0).unwrap_or(f64::NAN);
    a_s * crate::group_model::nu_density_vs_liouville(spec, s * hbar0, y).unwrap_or(0.0)
}

/// `⟨δ^Q σ, ζ⟩` from the weighted integral over `K_C`, never touching the spectral action.
///
/// The rule must be in `K_C` coordinates and reach `ℏ = sℏ₀`. In the normalized
/// frame the derivative of `a_s^{-1/2}` contributes `-(ℏ₀|ρ|²/2)⟨σ, ζ⟩`.
pub fn delta_q_pairing_direct(
    rule: &QuadratureRule,
    sigma: &QuantumSection,
    zeta: &QuantumSection,
) -> Result<Complex64> {
    sigma.check_compatible(zeta)?;
    check_vector(rule, &sigma.f)?;
    check_vector(rule, &zeta.f)?;
    let spec = sigma.spec().clone();
    let (s, h0) = (sigma.s, sigma.hbar0);
    rule.spec().check_same(&spec)?;
    rule.check_truncation(1.0, s * h0)?;
    let (f, g) = (&sigma.f, &zeta.f);
    let normalized = sigma.normalized;
    let shift = spec.weyl_vector_norm_sq() * h0 / 2.0;
    let raw = integrate_liouville(rule, |x, y| {
        let mut w = connection_weight(&spec, s, h0, y);
        if normalized {
            w -= shift * scaled_nu_weight(&spec, s, h0, y);
        }
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let p = crate::group_model::psi(x, 1.0, y);
        let a = evaluate_on_kc(f, &p).unwrap_or(Complex64::new(f64::NAN, 0.0));
        let b = evaluate_on_kc(g, &p).unwrap_or(Complex64::new(f64::NAN, 0.0));
        a.conj() * b * w
    });
    Ok(raw * sigma.frame_factor())
}

/// One cross-checked pairing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairingRow {
    pub a: MatrixElementIndex,
    pub b: MatrixElementIndex,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConnectionReport {
    pub group: GroupDescriptor,
    pub grid: GridSpec,
    pub nodes_total: usize,
    pub s: f64,
    pub hbar0: f64,
    pub rows: Vec<PairingRow>,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
}

fn rows_from(
    probes: &[MatrixElementIndex],
    lhs: &DMatrix<Complex64>,
    rhs: &DMatrix<Complex64>,
    scale: impl Fn(usize, usize) -> f64,
) -> (Vec<PairingRow>, f64, f64) {
    let mut rows = Vec::new();
    let (mut max_abs, mut max_rel): (f64, f64) = (0.0, 0.0);
    for a in 0..probes.len() {
        for b in 0..probes.len() {
            let (l, r) = (lhs[(a, b)], rhs[(a, b)]);
            let abs_err = (l - r).norm();
            let rel_err = abs_err / scale(a, b);
            max_abs = max_abs.max(abs_err);
            max_rel = max_rel.max(rel_err);
            rows.push(PairingRow {
                a: probes[a].clone(),
                b: probes[b].clone(),
                lhs_re: l.re,
                lhs_im: l.im,
                rhs_re: r.re,
                rhs_im: r.im,
                abs_err,
                rel_err,
            });
        }
    }
    (rows, max_abs, max_rel)
}

/// Direct pairings `⟨δ^Q e_a, e_b⟩` (left) against `⟨δ^Q_spectral e_a, e_b⟩^Q` (right)
/// for every pair of probe basis vectors, unnormalized frame.
///
/// The left side uses `rule` in `K_C` coordinates; the right side integrates the
/// quantum inner product on the fiber rule for `s`. Errors are scaled by
/// `(ℏ₀/2) max(1, c_a + |ρ|², c_b + |ρ|²) ‖e_a‖ ‖e_b‖`.
pub fn connection_battery(
    rule: &QuadratureRule,
    spec: &GroupSpec,
    s: f64,
    hbar0: f64,
    probes: &[MatrixElementIndex],
) -> Result<ConnectionReport> {
    rule.spec().check_same(spec)?;
    let s = require_positive("s", s)?;
    let hbar0 = require_positive("hbar0", hbar0)?;
    rule.check_truncation(1.0, s * hbar0)?;
    let direct_w = |y: &AlgebraPoint| connection_weight(spec, s, hbar0, y);
    let lhs = weighted_grams(rule, probes, 1.0, &[&direct_w])?.remove(0);
    let fiber = QuadratureRule::for_quantum_fiber(spec, rule.grid(), s, hbar0)?;
    let q_w = |y: &AlgebraPoint| quantum_weight(spec, s, hbar0, y);
    let q = weighted_grams(&fiber, probes, s, &[&q_w])?.remove(0);
    let lambda: Vec<f64> = probes
        .iter()
        .map(|p| connection_eigenvalue(spec, hbar0, &p.label, false))
        .collect();
    let rhs = DMatrix::from_fn(probes.len(), probes.len(), |a, b| q[(a, b)] * lambda[a]);
    let unit = hbar0 / 2.0;
    let (rows, max_abs_err, max_rel_err) = rows_from(probes, &lhs, &rhs, |a, b| {
        unit.max(lambda[a]).max(lambda[b]) * (q[(a, a)].re * q[(b, b)].re).sqrt()
    });
    Ok(ConnectionReport {
        group: spec.descriptor(),
        grid: rule.grid().clone(),
        nodes_total: rule.len() + fiber.len(),
        s,
        hbar0,
        rows,
        max_abs_err,
        max_rel_err,
    })
}

/// Weak form of the identity
/// `(|Y|²/2ℏ² - n/4ℏ) e^{-|Y|²/ℏ}/η = (-Δ_C/8 + |ρ|²/2) e^{-|Y|²/ℏ}/η`:
/// for each probe pair, the left weight integrated against `conj(e_a) e_b dg`
/// versus `(c_b + |ρ|²)/2 ∫ conj(e_a) e_b e^{-|Y|²/ℏ}/η dg`, both by quadrature.
///
/// Returns the largest deviation, scaled by `max(1, (c + |ρ|²)/2)` times the
/// diagonal Gaussian moments of the two probes.
pub fn gaussian_laplacian_residual(
    rule: &QuadratureRule,
    spec: &GroupSpec,
    hbar: f64,
    probes: &[MatrixElementIndex],
) -> Result<f64> {
    rule.spec().check_same(spec)?;
    let hbar = require_positive("hbar", hbar)?;
    rule.check_truncation(1.0, hbar)?;
    let n = spec.n() as f64;
    // dg = η² ε, so e^{-|Y|²/ℏ}/η dg = e^{-|Y|²/ℏ} η ε.
    let gauss = |y: &AlgebraPoint| (-y.norm_sq() / hbar).exp() * eta(spec, y);
    let poly = |y: &AlgebraPoint| (y.norm_sq() / (2.0 * hbar * hbar) - n / (4.0 * hbar)) * gauss(y);
    let grams = weighted_grams(rule, probes, 1.0, &[&poly, &gauss])?;
    let (lhs, m) = (&grams[0], &grams[1]);
    let rho2 = spec.weyl_vector_norm_sq();
    let lam: Vec<f64> = probes.iter().map(|p| (p.label.casimir() + rho2) / 2.0).collect();
    let mut worst: f64 = 0.0;
    for a in 0..probes.len() {
        for b in 0..probes.len() {
            let rhs = m[(a, b)] * lam[b];
            let scale = lam[a].max(lam[b]).max(1.0) * (m[(a, a)].re * m[(b, b)].re).sqrt();
            worst = worst.max((lhs[(a, b)] - rhs).norm() / scale);
        }
    }
    Ok(worst)
}

/// Central-difference test of the heat equation `∂F̃/∂s = (ℏ₀/4)Δ_C F̃` at one step.
///
/// Per coefficient, `|(F(s+ds) - F(s-ds))/2ds + (ℏ₀/2)c_R F(s)| / |F(s)|`; the maximum is returned.
pub fn horizontality_residual<Fam>(spec: &GroupSpec, hbar0: f64, family: Fam, s: f64, ds: f64) -> Result<f64>
where
    Fam: Fn(f64) -> PeterWeylVector,
{
    let hbar0 = require_positive("hbar0", hbar0)?;
    let s = require_positive("s", s)?;
    let ds = require_positive("ds", ds)?;
    if ds >= s {
        return Err(CstError::InvalidArgument(format!("step {ds} must be below s = {s}")));
    }
    let (plus, mid, minus) = (family(s + ds), family(s), family(s - ds));
    for v in [&plus, &mid, &minus] {
        spec.check_same(v.spec())?;
    }
    let mut worst: f64 = 0.0;
    for (k, c) in mid.iter() {
        if c.norm() == 0.0 {
            continue;
        }
        let derivative = (plus.get(k) - minus.get(k)) / (2.0 * ds);
        let heat = -c * (hbar0 / 2.0 * k.label.casimir());
        worst = worst.max((derivative - heat).norm() / c.norm());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HorizontalityReport {
    pub ds: f64,
    pub residual: f64,
    pub residual_half: f64,
    /// `residual / residual_half`; near 4 for genuine second-order convergence.
    pub ratio: f64,
}

/// Runs [`horizontality_residual`] at `ds` and `ds/2`.
pub fn horizontality_check<Fam>(
    spec: &GroupSpec,
    hbar0: f64,
    family: Fam,
    s: f64,
    ds: f64,
) -> Result<HorizontalityReport>
where
    Fam: Fn(f64) -> PeterWeylVector,
{
    let residual = horizontality_residual(spec, hbar0, &family, s, ds)?;
    let residual_half = horizontality_residual(spec, hbar0, &family, s, ds / 2.0)?;
    Ok(HorizontalityReport {
        ds,
        residual,
        residual_half,
        ratio: residual / residual_half,
    })
}

/// The horizontal normalized family through `F̂` at `s0`: coefficients `e^{-(s-s0)ℏ₀c_R/2}`.
pub fn horizontal_family(
    spec: &GroupSpec,
    hbar0: f64,
    f: &PeterWeylVector,
    s0: f64,
) -> impl Fn(f64) -> PeterWeylVector {
    let spec = spec.clone();
    let f = f.clone();
    move |s| parallel_transport_h(&spec, s0 * hbar0, s * hbar0, &f).expect("positive parameters")
}

/// Parallel transport of `δ^Q` from `σ.s` to `s2`.
pub fn parallel_transport_q(sigma: &QuantumSection, s2: f64) -> Result<QuantumSection> {
    let s2 = require_positive("s2", s2)?;
    let ds = s2 - sigma.s;
    let spec = sigma.spec().clone();
    let (h0, norm) = (sigma.hbar0, sigma.normalized);
    Ok(QuantumSection {
        s: s2,
        ..sigma.with_datum(
            sigma
                .f
                .map_labels(|l| Complex64::new((-ds * connection_eigenvalue(&spec, h0, l, norm)).exp(), 0.0)),
        )
    })
}

/// `S: F̂ ↦ ψ_s*(F̂) e^{-s|Y|²/2ℏ₀} √(Ω_s / a_s)`.
pub fn s_isomorphism(spec: &GroupSpec, hbar0: f64, s: f64, f: &PeterWeylVector) -> Result<QuantumSection> {
    spec.check_same(f.spec())?;
    QuantumSection::normalized(s, hbar0, f.clone())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HermiticityReport {
    /// Central difference of `‖σ_s‖²` for the fixed datum, quadrature at `s ± ds`.
    pub norm_derivative: f64,
    /// `2 Re⟨δ^Q σ, σ⟩` from the direct weighted integral at `s`.
    pub twice_pairing: f64,
    pub rel_err: f64,
    /// Central difference of `‖σ_s‖²` along the normalized horizontal family, relative to the norm.
    pub horizontal_rel_derivative: f64,
}

/// Compatibility of `δ^Q` with the Hermitian structure, every term by quadrature on `grid`.
pub fn hermiticity_check(
    spec: &GroupSpec,
    grid: &GridSpec,
    hbar0: f64,
    f: &PeterWeylVector,
    s: f64,
    ds: f64,
) -> Result<HermiticityReport> {
    let ds = require_positive("ds", ds)?;
    if ds >= s {
        return Err(CstError::InvalidArgument(format!("step {ds} must be below s = {s}")));
    }
    let norm_sq = |sec: &QuantumSection| -> Result<f64> {
        let fiber = QuadratureRule::for_quantum_fiber(spec, grid, sec.s, hbar0)?;
        Ok(quantum_inner(&fiber, sec, sec)?.re)
    };
    let plus = norm_sq(&QuantumSection::new(s + ds, hbar0, f.clone())?)?;
    let minus = norm_sq(&QuantumSection::new(s - ds, hbar0, f.clone())?)?;
    let norm_derivative = (plus - minus) / (2.0 * ds);
    let rule = crate::quadrature::build_rule(spec, grid, s * hbar0)?;
    let sigma = QuantumSection::new(s, hbar0, f.clone())?;
    let twice_pairing = 2.0 * delta_q_pairing_direct(&rule, &sigma, &sigma)?.re;

    let fam = horizontal_family(spec, hbar0, f, s);
    let hp = norm_sq(&QuantumSection::normalized(s + ds, hbar0, fam(s + ds))?)?;
    let hm = norm_sq(&QuantumSection::normalized(s - ds, hbar0, fam(s - ds))?)?;
    let h0 = norm_sq(&QuantumSection::normalized(s, hbar0, f.clone())?)?;
    Ok(HermiticityReport {
        norm_derivative,
        twice_pairing,
        rel_err: (norm_derivative - twice_pairing).abs() / twice_pairing.abs().max(f64::MIN_POSITIVE),
        horizontal_rel_derivative: ((hp - hm) / (2.0 * ds)).abs() / h0,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntertwiningReport {
    /// `⟨δ^Q_{∂/∂ℏ} S F̂, S Ĝ⟩` from the direct weighted integral.
    pub lhs_re: f64,
    pub lhs_im: f64,
    /// `⟨S δ^H F̂, S Ĝ⟩^Q` by quadrature on the fiber.
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub abs_err: f64,
    /// Relative to `max(1, c_R/2) ‖S F̂‖ ‖S Ĝ‖`, the largest `c_R` over both supports.
    pub rel_err: f64,
}

/// `δ^Q_{∂/∂ℏ} ∘ S = S ∘ δ^H_{∂/∂ℏ}` tested by pairing against `S Ĝ`; `∂/∂ℏ = (1/ℏ₀)∂/∂s`.
pub fn intertwining_check(
    spec: &GroupSpec,
    grid: &GridSpec,
    hbar0: f64,
    s: f64,
    f: &PeterWeylVector,
    g: &PeterWeylVector,
) -> Result<IntertwiningReport> {
    let rule = crate::quadrature::build_rule(spec, grid, s * hbar0)?;
    let fiber = QuadratureRule::for_quantum_fiber(spec, grid, s, hbar0)?;
    let (sf, sg) = (s_isomorphism(spec, hbar0, s, f)?, s_isomorphism(spec, hbar0, s, g)?);
    let lhs = delta_q_pairing_direct(&rule, &sf, &sg)? / hbar0;
    let rhs = quantum_inner(
        &fiber,
        &s_isomorphism(spec, hbar0, s, &crate::cst::delta_h_generator(spec, f)?)?,
        &sg,
    )?;
    let top = f
        .iter()
        .chain(g.iter())
        .map(|(k, _)| k.label.casimir() / 2.0)
        .fold(1.0, f64::max);
    let scale = top * (quantum_inner(&fiber, &sf, &sf)?.re * quantum_inner(&fiber, &sg, &sg)?.re).sqrt();
    let abs_err = (lhs - rhs).norm();
    Ok(IntertwiningReport {
        lhs_re: lhs.re,
        lhs_im: lhs.im,
        rhs_re: rhs.re,
        rhs_im: rhs.im,
        abs_err,
        rel_err: abs_err / scale,
    })
}

/// Prequantum norm squared of `f |Ω_s|^{-1/2} √Ω_s`, i.e. `∫ |f|² |Ω_s|⁻¹ |Ω_s| ε`.
pub fn prequantum_norm_sq<F>(rule: &QuadratureRule, spec: &GroupSpec, s: f64, f: F) -> Result<f64>
where
    F: Fn(&GroupPoint, &AlgebraPoint) -> Complex64 + Sync + Send,
{
    let s = require_positive("s", s)?;
    rule.spec().check_same(spec)?;
    Ok(integrate_liouville(rule, |x, y| {
        let omega = half_form_density(spec, s, y).unwrap_or(f64::NAN);
        Complex64::new(f(x, y).norm_sqr() / omega * omega, 0.0)
    })
    .re)
}
