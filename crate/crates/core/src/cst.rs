//! The coherent state transform, its inverse, the heat kernel and the
//! Hall-side parallel transport, all acting diagonally on Peter–Weyl
//! coefficients in the frame `e_Rij = √d_R R_ij`.
//!
//! A convolution path evaluates the transform by quadrature over `K` and serves
//! as an oracle for the spectral path.

use crate::error::{require_positive, CstError, Result};
use crate::group_model::{ComplexGroupPoint, Family, GroupDescriptor, GroupPoint, GroupSpec};
use crate::irreps::{
    all_matrix_elements, enumerate_irreps, representation_matrix, su2_characters, IrrepLabel, MatrixElementIndex,
    MAX_TWICE_SPIN,
};
use crate::quadrature::{band_of, integrate_liouville, integrate_liouville_vec, GridSpec, HaarRule, QuadratureRule};
use crate::summation::pairwise_sum;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Dropped heat-kernel mass allowed by the automatic cutoff.
pub const TAIL_LIMIT: f64 = 1e-14;
/// Series terms below this are treated as the end of the tail.
const TAIL_INCREMENT: f64 = 1e-16;
/// Amplification allowed by [`cst_invert`], relative to the input norm.
pub const INVERSE_AMPLIFICATION_LIMIT: f64 = 1e12;

/// Finite Peter–Weyl expansion `Σ c_Rij √d_R R_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeterWeylVector {
    spec: GroupSpec,
    cutoff: f64,
    coefficients: BTreeMap<MatrixElementIndex, Complex64>,
}

impl PeterWeylVector {
    pub fn zero(spec: &GroupSpec, cutoff: f64) -> Self {
        PeterWeylVector {
            spec: spec.clone(),
            cutoff,
            coefficients: BTreeMap::new(),
        }
    }

    /// Unit coefficient on the trivial representation, i.e. the constant 1.
    pub fn constant(spec: &GroupSpec, value: Complex64) -> Self {
        let mut v = Self::zero(spec, 0.0);
        v.coefficients.insert(
            MatrixElementIndex {
                label: IrrepLabel::trivial(spec),
                i: 1,
                j: 1,
            },
            value,
        );
        v
    }

    /// A single basis vector `e_Rij`.
    pub fn basis(spec: &GroupSpec, index: MatrixElementIndex) -> Result<Self> {
        let mut v = Self::zero(spec, index.label.casimir());
        v.set(index, Complex64::new(1.0, 0.0))?;
        Ok(v)
    }

    /// Independent uniform coefficients in the unit square for every element with `c_R ≤ cutoff`.
    pub fn random<R: Rng + ?Sized>(spec: &GroupSpec, cutoff: f64, rng: &mut R) -> Self {
        let mut v = Self::zero(spec, cutoff);
        for idx in MatrixElementIndex::all(&enumerate_irreps(spec, cutoff)) {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            v.coefficients.insert(idx, z);
        }
        v
    }

    pub fn set(&mut self, index: MatrixElementIndex, value: Complex64) -> Result<()> {
        if !index.label.belongs_to(&self.spec) {
            return Err(CstError::GroupMismatch(format!(
                "label {} does not belong to this group",
                index.label
            )));
        }
        let checked = MatrixElementIndex::new(index.label, index.i, index.j)?;
        let c = checked.label.casimir();
        if c > self.cutoff {
            self.cutoff = c;
        }
        self.coefficients.insert(checked, value);
        Ok(())
    }

    pub fn get(&self, index: &MatrixElementIndex) -> Complex64 {
        self.coefficients.get(index).copied().unwrap_or_default()
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    /// Largest `c_R` the vector is allowed to carry.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MatrixElementIndex, &Complex64)> {
        self.coefficients.iter()
    }

    /// Distinct labels carrying coefficients, in ascending order.
    pub fn labels(&self) -> Vec<IrrepLabel> {
        let mut out: Vec<IrrepLabel> = Vec::new();
        for idx in self.coefficients.keys() {
            if out.last() != Some(&idx.label) {
                out.push(idx.label.clone());
            }
        }
        out
    }

    /// Band limit in [`GridSpec`] units.
    pub fn band(&self) -> u32 {
        band_of(&self.labels())
    }

    /// `Σ |c|²`, which equals the `L²(K)` norm squared.
    pub fn coefficient_norm_sq(&self) -> f64 {
        self.coefficients.values().map(|z| z.norm_sqr()).sum()
    }

    /// Multiplies every coefficient by `factor(label)`.
    pub fn map_labels<F: Fn(&IrrepLabel) -> Complex64>(&self, factor: F) -> Self {
        PeterWeylVector {
            spec: self.spec.clone(),
            cutoff: self.cutoff,
            coefficients: self
                .coefficients
                .iter()
                .map(|(k, v)| (k.clone(), v * factor(&k.label)))
                .collect(),
        }
    }

    /// Largest coefficient difference, scaled by the larger of the two coefficient norms.
    pub fn relative_distance(&self, other: &PeterWeylVector) -> f64 {
        let scale = self
            .coefficient_norm_sq()
            .max(other.coefficient_norm_sq())
            .sqrt()
            .max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for (k, v) in &self.coefficients {
            worst = worst.max((v - other.get(k)).norm());
        }
        for (k, v) in &other.coefficients {
            if !self.coefficients.contains_key(k) {
                worst = worst.max(v.norm());
            }
        }
        worst / scale
    }

    fn synthesize(&self, g: &ComplexGroupPoint) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut current: Option<(&IrrepLabel, nalgebra::DMatrix<Complex64>)> = None;
        for (idx, c) in &self.coefficients {
            if current.as_ref().map(|(l, _)| *l != &idx.label).unwrap_or(true) {
                current = Some((&idx.label, representation_matrix(&idx.label, g)?));
            }
            let (_, m) = current.as_ref().expect("set above");
            acc += c * m[(idx.i - 1, idx.j - 1)] * (idx.label.dim() as f64).sqrt();
        }
        Ok(acc)
    }

    pub fn to_document(&self) -> PeterWeylDocument {
        PeterWeylDocument {
            group: self.spec.descriptor(),
            cutoff: self.cutoff,
            entries: self
                .coefficients
                .iter()
                .map(|(k, v)| PeterWeylEntry {
                    label: k.label.clone(),
                    i: k.i,
                    j: k.j,
                    re: v.re,
                    im: v.im,
                })
                .collect(),
        }
    }

    pub fn from_document(doc: PeterWeylDocument) -> Result<Self> {
        let spec = GroupSpec::try_from(doc.group)?;
        if doc.cutoff.is_nan() || doc.cutoff < 0.0 {
            return Err(CstError::InvalidArgument(format!(
                "cutoff must be nonnegative, got {}",
                doc.cutoff
            )));
        }
        let mut v = Self::zero(&spec, doc.cutoff);
        for e in doc.entries {
            let c = e.label.casimir();
            if c > doc.cutoff + 1e-12 {
                return Err(CstError::InvalidArgument(format!(
                    "entry {} has c_R = {c} above the cutoff {}",
                    e.label, doc.cutoff
                )));
            }
            v.set(
                MatrixElementIndex {
                    label: e.label,
                    i: e.i,
                    j: e.j,
                },
                Complex64::new(e.re, e.im),
            )?;
        }
        v.cutoff = doc.cutoff;
        Ok(v)
    }
}

impl Serialize for PeterWeylVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_document().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PeterWeylVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = PeterWeylDocument::deserialize(d)?;
        PeterWeylVector::from_document(doc).map_err(serde::de::Error::custom)
    }
}

/// JSON wire form: `{group, cutoff, entries: [{label, i, j, re, im}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeterWeylDocument {
    pub group: GroupDescriptor,
    pub cutoff: f64,
    pub entries: Vec<PeterWeylEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeterWeylEntry {
    pub label: IrrepLabel,
    pub i: usize,
    pub j: usize,
    pub re: f64,
    pub im: f64,
}

/// `Σ c √d_R R_ij(x)`.
pub fn evaluate_on_k(v: &PeterWeylVector, x: &GroupPoint) -> Result<Complex64> {
    v.synthesize(&x.embed())
}

/// The holomorphic extension of [`evaluate_on_k`] to `K_C`.
pub fn evaluate_on_kc(v: &PeterWeylVector, g: &ComplexGroupPoint) -> Result<Complex64> {
    v.synthesize(g)
}

/// `‖f‖²_{L²(K)}` by quadrature.
pub fn l2k_norm_sq(rule: &QuadratureRule, v: &PeterWeylVector) -> Result<f64> {
    check_vector(rule, v)?;
    Ok(rule
        .haar()
        .integrate(|x| Complex64::new(evaluate_on_k(v, x).map(|z| z.norm_sqr()).unwrap_or(f64::NAN), 0.0))
        .re)
}

/// `‖F‖²_{HL²(ν_ℏ)}` by quadrature.
pub fn hl2_norm_sq(rule: &QuadratureRule, spec: &GroupSpec, hbar: f64, v: &PeterWeylVector) -> Result<f64> {
    check_vector(rule, v)?;
    rule.spec().check_same(spec)?;
    let hbar = require_positive("hbar", hbar)?;
    rule.check_truncation(1.0, hbar)?;
    Ok(integrate_liouville(rule, |x, y| {
        let w = crate::group_model::nu_density_vs_liouville(spec, hbar, y).unwrap_or(0.0);
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let value = evaluate_on_kc(v, &crate::group_model::psi(x, 1.0, y))
            .map(|z| z.norm_sqr())
            .unwrap_or(f64::NAN);
        Complex64::new(value * w, 0.0)
    })
    .re)
}

/// [`hl2_norm_sq`] for many vectors, evaluating each matrix element once per node.
pub fn hl2_norms_sq(rule: &QuadratureRule, spec: &GroupSpec, hbar: f64, vs: &[PeterWeylVector]) -> Result<Vec<f64>> {
    rule.spec().check_same(spec)?;
    let hbar = require_positive("hbar", hbar)?;
    rule.check_truncation(1.0, hbar)?;
    for v in vs {
        check_vector(rule, v)?;
    }
    let mut labels: Vec<IrrepLabel> = vs.iter().flat_map(|v| v.labels()).collect();
    labels.sort();
    labels.dedup();
    let index = MatrixElementIndex::all(&labels);
    let dense: Vec<Vec<Complex64>> = vs
        .iter()
        .map(|v| index.iter().map(|k| v.get(k) * (k.label.dim() as f64).sqrt()).collect())
        .collect();
    let sums = integrate_liouville_vec(rule, vs.len(), |x, y, w, acc| {
        let density = crate::group_model::nu_density_vs_liouville(spec, hbar, y).unwrap_or(0.0);
        if density == 0.0 {
            return;
        }
        let elements = all_matrix_elements(&labels, &crate::group_model::psi(x, 1.0, y))
            .unwrap_or_else(|_| vec![Complex64::new(f64::NAN, 0.0); index.len()]);
        for (slot, coeffs) in acc.iter_mut().zip(&dense) {
            let value: Complex64 = coeffs.iter().zip(&elements).map(|(c, r)| c * r).sum();
            *slot += value.norm_sqr() * density * w;
        }
    });
    Ok(sums.into_iter().map(|z| z.re).collect())
}

pub(crate) fn check_vector(rule: &QuadratureRule, v: &PeterWeylVector) -> Result<()> {
    rule.spec().check_same(v.spec())?;
    if v.band() > rule.grid().band_limit() {
        return Err(CstError::GridTooSmall {
            factor: "band limit",
            detail: format!(
                "vector needs band {}, grid is exact to {}",
                v.band(),
                rule.grid().band_limit()
            ),
        });
    }
    Ok(())
}

/// Truncated heat kernel `ρ_ℏ = Σ_{c_R ≤ cutoff} d_R e^{-ℏc_R/2} χ_R`.
#[derive(Debug, Clone)]
pub struct HeatKernel {
    spec: GroupSpec,
    hbar: f64,
    cutoff: f64,
    tail: f64,
    reach: f64,
    labels: Vec<IrrepLabel>,
}

/// `d_R e^{γ_R·reach}`: bound on `|χ_R|` at points `x e^{iY}` with `|Y| ≤ reach`.
fn character_bound(spec: &GroupSpec, label: &IrrepLabel, reach: f64) -> f64 {
    label.dim() as f64 * (label.growth_rate(spec) * reach).exp()
}

/// Casimir values in ascending order with the summed `d_R · bound` of each shell.
fn shells(spec: &GroupSpec, hbar: f64, reach: f64) -> Result<Vec<(f64, f64)>> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    match spec.family() {
        Family::Su2 => {
            for t in 0..=MAX_TWICE_SPIN {
                let l = IrrepLabel::su2(t);
                let term = l.dim() as f64 * (-hbar * l.casimir() / 2.0).exp() * character_bound(spec, &l, reach);
                out.push((l.casimir(), term));
                if t > 0 && term < TAIL_INCREMENT && term < out[out.len() - 2].1 {
                    return Ok(out);
                }
            }
        }
        Family::Torus => {
            // Grow the enumeration radius until the outermost shell is negligible.
            let mut radius = 4.0;
            loop {
                let labels = enumerate_irreps(spec, radius * radius);
                let mut map: BTreeMap<u64, f64> = BTreeMap::new();
                for l in &labels {
                    let term = (-hbar * l.casimir() / 2.0).exp() * character_bound(spec, l, reach);
                    *map.entry(l.casimir() as u64).or_default() += term;
                }
                let boundary: f64 = map
                    .iter()
                    .filter(|(c, _)| (**c as f64).sqrt() > radius - 1.0)
                    .map(|(_, t)| t)
                    .sum();
                if boundary < TAIL_INCREMENT {
                    return Ok(map.into_iter().map(|(c, t)| (c as f64, t)).collect());
                }
                radius *= 1.5;
                if radius > 1e4 {
                    break;
                }
            }
        }
    }
    Err(CstError::TailBoundViolated {
        hbar,
        cutoff: f64::INFINITY,
        tail: f64::INFINITY,
        limit: TAIL_LIMIT,
    })
}

impl HeatKernel {
    /// Smallest cutoff whose dropped tail `Σ d_R² e^{-ℏc_R/2}` is below [`TAIL_LIMIT`].
    pub fn new(spec: &GroupSpec, hbar: f64) -> Result<Self> {
        Self::with_reach(spec, hbar, 0.0)
    }

    /// As [`HeatKernel::new`], with the tail weighted by the growth of `χ_R` out to `|Y| ≤ reach`.
    pub fn with_reach(spec: &GroupSpec, hbar: f64, reach: f64) -> Result<Self> {
        let hbar = require_positive("hbar", hbar)?;
        let sh = shells(spec, hbar, reach)?;
        for (c, _) in &sh {
            let remaining: f64 = sh.iter().filter(|(c2, _)| c2 > c).map(|(_, t)| t).sum();
            if remaining < TAIL_LIMIT {
                return Self::build(spec, hbar, *c, remaining, reach);
            }
        }
        Err(CstError::TailBoundViolated {
            hbar,
            cutoff: sh.last().map(|s| s.0).unwrap_or(0.0),
            tail: f64::INFINITY,
            limit: TAIL_LIMIT,
        })
    }

    /// Fixed cutoff; fails when the dropped tail exceeds [`TAIL_LIMIT`].
    pub fn with_cutoff(spec: &GroupSpec, hbar: f64, cutoff: f64) -> Result<Self> {
        let hbar = require_positive("hbar", hbar)?;
        let sh = match shells(spec, hbar, 0.0) {
            Ok(sh) => sh,
            Err(_) => {
                return Err(CstError::TailBoundViolated {
                    hbar,
                    cutoff,
                    tail: f64::INFINITY,
                    limit: TAIL_LIMIT,
                })
            }
        };
        let tail: f64 = sh.iter().filter(|(c, _)| *c > cutoff).map(|(_, t)| t).sum();
        if tail >= TAIL_LIMIT {
            return Err(CstError::TailBoundViolated {
                hbar,
                cutoff,
                tail,
                limit: TAIL_LIMIT,
            });
        }
        Self::build(spec, hbar, cutoff, tail, 0.0)
    }

    fn build(spec: &GroupSpec, hbar: f64, cutoff: f64, tail: f64, reach: f64) -> Result<Self> {
        let labels = enumerate_irreps(spec, cutoff);
        if spec.family() == Family::Su2 && band_of(&labels) >= MAX_TWICE_SPIN {
            return Err(CstError::TailBoundViolated {
                hbar,
                cutoff,
                tail,
                limit: TAIL_LIMIT,
            });
        }
        Ok(HeatKernel {
            spec: spec.clone(),
            hbar,
            cutoff,
            tail,
            reach,
            labels,
        })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Bound on the dropped terms.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// `|Y|` up to which the tail bound holds.
    pub fn reach(&self) -> f64 {
        self.reach
    }

    pub fn band(&self) -> u32 {
        band_of(&self.labels)
    }

    /// `ρ_ℏ(g)`.
    pub fn evaluate(&self, g: &ComplexGroupPoint) -> Result<Complex64> {
        match (self.spec.family(), g) {
            (Family::Su2, ComplexGroupPoint::Su2(m)) => {
                let t_max = self.band() as usize;
                let chi = su2_characters(m.trace(), t_max);
                Ok(pairwise_sum(t_max + 1, &|t| {
                    let l = IrrepLabel::su2(t as u32);
                    chi[t] * (l.dim() as f64 * (-self.hbar * l.casimir() / 2.0).exp())
                }))
            }
            (Family::Torus, ComplexGroupPoint::Torus(z)) if z.len() == self.spec.n() => {
                Ok(pairwise_sum(self.labels.len(), &|k| {
                    let IrrepLabel::Torus(m) = &self.labels[k] else {
                        unreachable!()
                    };
                    let phase: Complex64 = m.iter().zip(z).map(|(&a, &b)| b * a as f64).sum();
                    (Complex64::new(0.0, 1.0) * phase).exp() * (-self.hbar * self.labels[k].casimir() / 2.0).exp()
                }))
            }
            _ => Err(CstError::GroupMismatch(
                "heat kernel evaluated at a point of another group".into(),
            )),
        }
    }

    /// Smallest real part of `ρ_ℏ` over the given points of `K`.
    pub fn min_on(&self, points: &[GroupPoint]) -> Result<f64> {
        let mut lo = f64::INFINITY;
        for x in points {
            lo = lo.min(self.evaluate(&x.embed())?.re);
        }
        Ok(lo)
    }
}

/// `ρ_ℏ(g)` with the automatic cutoff.
pub fn heat_kernel(spec: &GroupSpec, hbar: f64, g: &ComplexGroupPoint) -> Result<Complex64> {
    HeatKernel::new(spec, hbar)?.evaluate(g)
}

/// `C_ℏ f`: every coefficient times `e^{-ℏc_R/2}`.
pub fn cst_apply(spec: &GroupSpec, hbar: f64, f: &PeterWeylVector) -> Result<PeterWeylVector> {
    spec.check_same(f.spec())?;
    let hbar = require_positive("hbar", hbar)?;
    Ok(f.map_labels(|l| Complex64::new((-hbar * l.casimir() / 2.0).exp(), 0.0)))
}

/// `C_ℏ^{-1} F`: every coefficient times `e^{ℏc_R/2}`, refused when any amplified
/// coefficient would exceed [`INVERSE_AMPLIFICATION_LIMIT`] times the input norm.
pub fn cst_invert(spec: &GroupSpec, hbar: f64, f: &PeterWeylVector) -> Result<PeterWeylVector> {
    spec.check_same(f.spec())?;
    let hbar = require_positive("hbar", hbar)?;
    let norm = f.coefficient_norm_sq().sqrt();
    for (idx, c) in f.iter() {
        let amplified = (hbar * idx.label.casimir() / 2.0).exp() * c.norm();
        if !amplified.is_finite() || amplified > INVERSE_AMPLIFICATION_LIMIT * norm {
            return Err(CstError::Amplification {
                casimir: idx.label.casimir(),
                amplified,
                limit: INVERSE_AMPLIFICATION_LIMIT * norm,
            });
        }
    }
    Ok(f.map_labels(|l| Complex64::new((hbar * l.casimir() / 2.0).exp(), 0.0)))
}

/// `U^H_{ℏ₂ℏ₁}`: every coefficient times `e^{-(ℏ₂-ℏ₁)c_R/2}`.
pub fn parallel_transport_h(spec: &GroupSpec, hbar1: f64, hbar2: f64, f: &PeterWeylVector) -> Result<PeterWeylVector> {
    spec.check_same(f.spec())?;
    require_positive("hbar1", hbar1)?;
    require_positive("hbar2", hbar2)?;
    let dh = hbar2 - hbar1;
    Ok(f.map_labels(|l| Complex64::new((-dh * l.casimir() / 2.0).exp(), 0.0)))
}

/// `δ^H_{∂/∂ℏ}`: every coefficient times `c_R/2`.
pub fn delta_h_generator(spec: &GroupSpec, f: &PeterWeylVector) -> Result<PeterWeylVector> {
    spec.check_same(f.spec())?;
    Ok(f.map_labels(|l| Complex64::new(l.casimir() / 2.0, 0.0)))
}

/// Convolution path `(C_ℏf)(g) = ∫_K f(x) ρ_ℏ(x⁻¹g) dx`, by quadrature over `K`.
#[derive(Debug, Clone)]
pub struct ConvolutionOracle {
    kernel: HeatKernel,
    haar: HaarRule,
    values: Vec<Complex64>,
}

impl ConvolutionOracle {
    /// Prepares the oracle for points `x e^{iY}` with `|Y| ≤ reach`.
    pub fn new(spec: &GroupSpec, hbar: f64, f: &PeterWeylVector, reach: f64) -> Result<Self> {
        spec.check_same(f.spec())?;
        let kernel = HeatKernel::with_reach(spec, hbar, reach)?;
        let band = kernel.band().max(f.band());
        let haar = HaarRule::build(spec, &GridSpec::recommended(spec, band))?;
        let values = haar
            .nodes()
            .iter()
            .map(|x| evaluate_on_k(f, x))
            .collect::<Result<_>>()?;
        Ok(ConvolutionOracle { kernel, haar, values })
    }

    pub fn kernel(&self) -> &HeatKernel {
        &self.kernel
    }

    pub fn nodes(&self) -> usize {
        self.haar.len()
    }

    pub fn evaluate(&self, g: &ComplexGroupPoint) -> Result<Complex64> {
        let shifted: Vec<ComplexGroupPoint> = self
            .haar
            .nodes()
            .iter()
            .map(|x| x.embed().inverse().mul(g))
            .collect::<Result<_>>()?;
        let rho: Vec<Complex64> = shifted.iter().map(|p| self.kernel.evaluate(p)).collect::<Result<_>>()?;
        Ok(pairwise_sum(self.haar.len(), &|k| {
            self.values[k] * rho[k] * self.haar.weights()[k]
        }))
    }
}
