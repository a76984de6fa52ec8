//! Deterministic product rules on `K` and on `K × 𝔨`.
//!
//! A rule is stored as the tensor product of a Haar rule on `K` and a Lebesgue
//! rule on a truncated region of `𝔨`. Integration iterates the `𝔨` nodes in
//! parallel, sums each inner `K` pass serially, and combines the per-node
//! results with a fixed pairwise tree, so results do not depend on the number
//! of threads.
//!
//! Exactness on `K` is stated in terms of a band limit `B`: on the torus every
//! mode component satisfies `|m_k| ≤ B`, on SU(2) every spin satisfies `2j ≤ B`.
//! The rule integrates products of two such functions exactly on `K`.

use crate::error::{require_positive, CstError, Result};
use crate::group_model::{
    imaginary_exp, nu_density_vs_liouville, psi, AlgebraPoint, ComplexGroupPoint, Family, GroupDescriptor, GroupPoint,
    GroupSpec,
};
use crate::irreps::{all_matrix_elements, IrrepLabel, MatrixElementIndex};
use crate::special::gauss_legendre_interval;
use crate::summation::{pairwise_sum, par_pairwise_sum, par_pairwise_sum_vec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

pub const DEFAULT_TRUNCATION_SIGMAS: f64 = 12.0;
/// Default Gauss–Legendre counts on the radial interval `[0, R]` (SU(2)) and per axis on `[-R, R]` (torus).
pub const DEFAULT_RADIAL_NODES_SU2: usize = 48;
pub const DEFAULT_RADIAL_NODES_TORUS: usize = 80;

/// `𝔨` nodes handled by one serial accumulation task.
const Y_CHUNK: usize = 8;

fn default_sigmas() -> f64 {
    DEFAULT_TRUNCATION_SIGMAS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum GridSpec {
    Torus {
        points_per_angle: usize,
        radial_nodes: usize,
        #[serde(default = "default_sigmas")]
        radial_truncation_sigmas: f64,
        band_limit: u32,
    },
    Su2 {
        euler_alpha_points: usize,
        euler_gamma_points: usize,
        legendre_beta_nodes: usize,
        radial_nodes: usize,
        /// Gauss–Legendre order in `cos θ`; the azimuth uses `2L - 1` points.
        angular_sphere_rule: usize,
        #[serde(default = "default_sigmas")]
        radial_truncation_sigmas: f64,
        band_limit: u32,
    },
}

impl GridSpec {
    /// Smallest grid that is exact on `K` for the given band limit.
    pub fn recommended(spec: &GroupSpec, band_limit: u32) -> Self {
        let t = band_limit as usize;
        match spec.family() {
            Family::Torus => GridSpec::Torus {
                points_per_angle: (2 * t + 1).max(2),
                radial_nodes: DEFAULT_RADIAL_NODES_TORUS,
                radial_truncation_sigmas: DEFAULT_TRUNCATION_SIGMAS,
                band_limit,
            },
            Family::Su2 => GridSpec::Su2 {
                euler_alpha_points: t + 1,
                euler_gamma_points: 2 * t + 1,
                legendre_beta_nodes: (t + 2) / 2,
                radial_nodes: DEFAULT_RADIAL_NODES_SU2,
                angular_sphere_rule: t + 1,
                radial_truncation_sigmas: DEFAULT_TRUNCATION_SIGMAS,
                band_limit,
            },
        }
    }

    pub fn family(&self) -> Family {
        match self {
            GridSpec::Torus { .. } => Family::Torus,
            GridSpec::Su2 { .. } => Family::Su2,
        }
    }

    pub fn band_limit(&self) -> u32 {
        match self {
            GridSpec::Torus { band_limit, .. } | GridSpec::Su2 { band_limit, .. } => *band_limit,
        }
    }

    pub fn radial_nodes(&self) -> usize {
        match self {
            GridSpec::Torus { radial_nodes, .. } | GridSpec::Su2 { radial_nodes, .. } => *radial_nodes,
        }
    }

    pub fn radial_truncation_sigmas(&self) -> f64 {
        match self {
            GridSpec::Torus {
                radial_truncation_sigmas,
                ..
            }
            | GridSpec::Su2 {
                radial_truncation_sigmas,
                ..
            } => *radial_truncation_sigmas,
        }
    }

    pub fn with_radial_nodes(&self, n: usize) -> Self {
        let mut g = self.clone();
        match &mut g {
            GridSpec::Torus { radial_nodes, .. } | GridSpec::Su2 { radial_nodes, .. } => *radial_nodes = n,
        }
        g
    }

    pub fn with_band_limit(&self, b: u32) -> Self {
        let mut g = self.clone();
        match &mut g {
            GridSpec::Torus { band_limit, .. } | GridSpec::Su2 { band_limit, .. } => *band_limit = b,
        }
        g
    }

    /// Every node count multiplied by `factor`.
    pub fn scaled(&self, factor: usize) -> Self {
        match self.clone() {
            GridSpec::Torus {
                points_per_angle,
                radial_nodes,
                radial_truncation_sigmas,
                band_limit,
            } => GridSpec::Torus {
                points_per_angle: points_per_angle * factor,
                radial_nodes: radial_nodes * factor,
                radial_truncation_sigmas,
                band_limit,
            },
            GridSpec::Su2 {
                euler_alpha_points,
                euler_gamma_points,
                legendre_beta_nodes,
                radial_nodes,
                angular_sphere_rule,
                radial_truncation_sigmas,
                band_limit,
            } => GridSpec::Su2 {
                euler_alpha_points: euler_alpha_points * factor,
                euler_gamma_points: euler_gamma_points * factor,
                legendre_beta_nodes: legendre_beta_nodes * factor,
                radial_nodes: radial_nodes * factor,
                angular_sphere_rule: angular_sphere_rule * factor,
                radial_truncation_sigmas,
                band_limit,
            },
        }
    }

    /// Number of `K` nodes and of `𝔨` nodes for a group of dimension `n`.
    pub fn node_counts(&self, n: usize) -> (usize, usize) {
        match self {
            GridSpec::Torus {
                points_per_angle,
                radial_nodes,
                ..
            } => (points_per_angle.pow(n as u32), radial_nodes.pow(n as u32)),
            GridSpec::Su2 {
                euler_alpha_points,
                euler_gamma_points,
                legendre_beta_nodes,
                radial_nodes,
                angular_sphere_rule,
                ..
            } => (
                euler_alpha_points * euler_gamma_points * legendre_beta_nodes,
                radial_nodes * angular_sphere_rule * (2 * angular_sphere_rule).saturating_sub(1),
            ),
        }
    }

    fn validate_k(&self, spec: &GroupSpec) -> Result<()> {
        if self.family() != spec.family() {
            return Err(CstError::GroupMismatch(format!(
                "{:?} grid for a {:?} group",
                self.family(),
                spec.family()
            )));
        }
        let t = self.band_limit() as usize;
        let need = |factor: &'static str, have: usize, want: usize| {
            if have < want {
                Err(CstError::GridTooSmall {
                    factor,
                    detail: format!("{have} nodes, band limit {t} needs at least {want}"),
                })
            } else {
                Ok(())
            }
        };
        match self {
            GridSpec::Torus { points_per_angle, .. } => need("torus angle", *points_per_angle, (2 * t + 1).max(2)),
            GridSpec::Su2 {
                euler_alpha_points,
                euler_gamma_points,
                legendre_beta_nodes,
                ..
            } => {
                need("euler alpha", *euler_alpha_points, t + 1)?;
                need("euler gamma", *euler_gamma_points, 2 * t + 1)?;
                need("legendre beta", *legendre_beta_nodes, (t + 2) / 2)
            }
        }
    }

    /// Checks positivity and the exactness conditions for the band limit.
    pub fn validate(&self, spec: &GroupSpec) -> Result<()> {
        self.validate_k(spec)?;
        require_positive("radial_truncation_sigmas", self.radial_truncation_sigmas())?;
        let t = self.band_limit() as usize;
        if self.radial_nodes() == 0 {
            return Err(CstError::GridTooSmall {
                factor: "radial",
                detail: "at least one radial node is required".into(),
            });
        }
        if let GridSpec::Su2 {
            angular_sphere_rule, ..
        } = self
        {
            if *angular_sphere_rule < t + 1 {
                return Err(CstError::GridTooSmall {
                    factor: "sphere",
                    detail: format!("order {angular_sphere_rule}, band limit {t} needs at least {}", t + 1),
                });
            }
        }
        Ok(())
    }
}

/// Largest band limit among the labels, in [`GridSpec`] units.
pub fn band_of(labels: &[IrrepLabel]) -> u32 {
    labels
        .iter()
        .map(|l| match l {
            IrrepLabel::Torus(m) => m.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0) as u32,
            IrrepLabel::Su2 { twice_spin } => *twice_spin,
        })
        .max()
        .unwrap_or(0)
}

/// Truncation radius `σ√ℏ + γℏ`, with `γ` the exponential growth rate of the band.
///
/// On SU(2) this is the radius of a ball; on the torus the half-width of a cube.
pub fn truncation_radius(spec: &GroupSpec, sigmas: f64, band_limit: u32, hbar: f64) -> f64 {
    let growth = match spec.family() {
        Family::Torus => band_limit as f64,
        Family::Su2 => band_limit as f64 / 2.0 * spec.root_slope(),
    };
    sigmas * hbar.sqrt() + growth * hbar
}

/// Normalized Haar rule on `K`.
#[derive(Debug, Clone)]
pub struct HaarRule {
    nodes: Vec<GroupPoint>,
    weights: Vec<f64>,
}

impl HaarRule {
    pub fn build(spec: &GroupSpec, grid: &GridSpec) -> Result<Self> {
        grid.validate_k(spec)?;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        match grid {
            GridSpec::Torus { points_per_angle, .. } => {
                let n = spec.n();
                let p = *points_per_angle;
                let w = (p as f64).powi(-(n as i32));
                let total = p.pow(n as u32);
                for flat in 0..total {
                    let mut rem = flat;
                    let mut angles = vec![0.0; n];
                    for a in angles.iter_mut() {
                        *a = TAU * (rem % p) as f64 / p as f64;
                        rem /= p;
                    }
                    nodes.push(GroupPoint::Torus(angles));
                    weights.push(w);
                }
            }
            GridSpec::Su2 {
                euler_alpha_points,
                euler_gamma_points,
                legendre_beta_nodes,
                ..
            } => {
                let (xs, wx) = gauss_legendre_interval(*legendre_beta_nodes, -1.0, 1.0);
                let (na, ng) = (*euler_alpha_points, *euler_gamma_points);
                let base = (TAU / na as f64) * (2.0 * TAU / ng as f64) / (16.0 * PI * PI);
                for ia in 0..na {
                    let alpha = TAU * ia as f64 / na as f64;
                    for (x, w) in xs.iter().zip(&wx) {
                        let beta = x.clamp(-1.0, 1.0).acos();
                        for ig in 0..ng {
                            let gamma = 2.0 * TAU * ig as f64 / ng as f64;
                            nodes.push(GroupPoint::su2_euler(alpha, beta, gamma));
                            weights.push(base * w);
                        }
                    }
                }
            }
        }
        Ok(HaarRule { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[GroupPoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_K f dx`.
    pub fn integrate<F>(&self, f: F) -> Complex64
    where
        F: Fn(&GroupPoint) -> Complex64 + Sync + Send,
    {
        par_pairwise_sum(self.len(), |k| f(&self.nodes[k]) * self.weights[k])
    }
}

/// Product rule for `ε = dx × dY` on `K × 𝔨`, truncated to a ball (SU(2)) or cube (torus).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    spec: GroupSpec,
    grid: GridSpec,
    hbar_ref: f64,
    radius: f64,
    haar: HaarRule,
    y_nodes: Vec<AlgebraPoint>,
    y_weights: Vec<f64>,
}

/// Builds the rule whose truncation radius suits `ν_ℏ` at `ℏ = ℏ_ref`.
pub fn build_rule(spec: &GroupSpec, grid: &GridSpec, hbar_ref: f64) -> Result<QuadratureRule> {
    let hbar_ref = require_positive("hbar_ref", hbar_ref)?;
    grid.validate(spec)?;
    let haar = HaarRule::build(spec, grid)?;
    let radius = truncation_radius(spec, grid.radial_truncation_sigmas(), grid.band_limit(), hbar_ref);
    let (y_nodes, y_weights) = fiber_nodes(spec, grid, radius);
    Ok(QuadratureRule {
        spec: spec.clone(),
        grid: grid.clone(),
        hbar_ref,
        radius,
        haar,
        y_nodes,
        y_weights,
    })
}

fn fiber_nodes(spec: &GroupSpec, grid: &GridSpec, radius: f64) -> (Vec<AlgebraPoint>, Vec<f64>) {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    match grid {
        GridSpec::Torus { radial_nodes, .. } => {
            let n = spec.n();
            let (xs, ws) = gauss_legendre_interval(*radial_nodes, -radius, radius);
            let p = xs.len();
            for flat in 0..p.pow(n as u32) {
                let mut rem = flat;
                let mut y = vec![0.0; n];
                let mut w = 1.0;
                for c in y.iter_mut() {
                    *c = xs[rem % p];
                    w *= ws[rem % p];
                    rem /= p;
                }
                nodes.push(AlgebraPoint::new(y));
                weights.push(w);
            }
        }
        GridSpec::Su2 {
            radial_nodes,
            angular_sphere_rule,
            ..
        } => {
            let (rs, wr) = gauss_legendre_interval(*radial_nodes, 0.0, radius);
            let (cs, wc) = gauss_legendre_interval(*angular_sphere_rule, -1.0, 1.0);
            let np = 2 * angular_sphere_rule - 1;
            let wphi = TAU / np as f64;
            for (r, w_r) in rs.iter().zip(&wr) {
                for (c, w_c) in cs.iter().zip(&wc) {
                    let sin_t = (1.0 - c * c).max(0.0).sqrt();
                    for ip in 0..np {
                        let phi = TAU * ip as f64 / np as f64;
                        nodes.push(AlgebraPoint::new(vec![
                            r * sin_t * phi.cos(),
                            r * sin_t * phi.sin(),
                            r * c,
                        ]));
                        weights.push(r * r * w_r * w_c * wphi);
                    }
                }
            }
        }
    }
    (nodes, weights)
}

impl QuadratureRule {
    /// The rule for the quantum fiber at `s`: `𝔨` nodes of the rule at `ℏ_ref = sℏ₀`,
    /// pulled back by `Y ↦ Y/s`, so that `ψ_s` sends them to the same points of `K_C`.
    pub fn for_quantum_fiber(spec: &GroupSpec, grid: &GridSpec, s: f64, hbar0: f64) -> Result<Self> {
        let s = require_positive("s", s)?;
        let hbar0 = require_positive("hbar0", hbar0)?;
        let base = build_rule(spec, grid, s * hbar0)?;
        let jac = s.powi(-(spec.n() as i32));
        Ok(QuadratureRule {
            radius: base.radius / s,
            y_nodes: base.y_nodes.iter().map(|y| y.scaled(1.0 / s)).collect(),
            y_weights: base.y_weights.iter().map(|w| w * jac).collect(),
            ..base
        })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn hbar_ref(&self) -> f64 {
        self.hbar_ref
    }

    /// Truncation radius in `𝔨` coordinates.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn haar(&self) -> &HaarRule {
        &self.haar
    }

    pub fn y_nodes(&self) -> &[AlgebraPoint] {
        &self.y_nodes
    }

    pub fn y_weights(&self) -> &[f64] {
        &self.y_weights
    }

    pub fn len(&self) -> usize {
        self.haar.len() * self.y_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All `(x, Y, weight)` triples, `𝔨` index outermost.
    pub fn nodes(&self) -> impl Iterator<Item = (&GroupPoint, &AlgebraPoint, f64)> + '_ {
        self.y_nodes.iter().zip(&self.y_weights).flat_map(move |(y, wy)| {
            self.haar
                .nodes
                .iter()
                .zip(&self.haar.weights)
                .map(move |(x, wx)| (x, y, wx * wy))
        })
    }

    /// Fails unless the rule reaches the radius required by a Gaussian of variance
    /// `ℏ` observed through `ψ_s`.
    pub fn check_truncation(&self, s: f64, hbar: f64) -> Result<()> {
        let required = truncation_radius(
            &self.spec,
            self.grid.radial_truncation_sigmas(),
            self.grid.band_limit(),
            hbar,
        );
        let reach = self.radius * s;
        if reach < required * (1.0 - 1e-12) {
            Err(CstError::TruncationMismatch {
                radius: reach,
                required,
                hbar,
            })
        } else {
            Ok(())
        }
    }
}

/// `∫ f(x, Y) ε` over the truncated phase space.
pub fn integrate_liouville<F>(rule: &QuadratureRule, f: F) -> Complex64
where
    F: Fn(&GroupPoint, &AlgebraPoint) -> Complex64 + Sync + Send,
{
    let haar = &rule.haar;
    par_pairwise_sum(rule.y_nodes.len(), |iy| {
        let y = &rule.y_nodes[iy];
        let inner = pairwise_sum(haar.len(), &|ik| f(&haar.nodes[ik], y) * haar.weights[ik]);
        inner * rule.y_weights[iy]
    })
}

/// Vector-valued integration: `f(x, Y, w, acc)` adds `w`-weighted contributions into `acc`.
pub fn integrate_liouville_vec<F>(rule: &QuadratureRule, len: usize, f: F) -> Vec<Complex64>
where
    F: Fn(&GroupPoint, &AlgebraPoint, f64, &mut [Complex64]) + Sync + Send,
{
    let ny = rule.y_nodes.len();
    let chunks = ny.div_ceil(Y_CHUNK);
    par_pairwise_sum_vec(chunks, len, |c| {
        let mut acc = vec![Complex64::new(0.0, 0.0); len];
        for iy in c * Y_CHUNK..((c + 1) * Y_CHUNK).min(ny) {
            let y = &rule.y_nodes[iy];
            let wy = rule.y_weights[iy];
            for (x, wx) in rule.haar.nodes.iter().zip(&rule.haar.weights) {
                f(x, y, wx * wy, &mut acc);
            }
        }
        acc
    })
}

/// `⟨f, g⟩_{L²(K)}` with normalized Haar measure.
pub fn inner_l2k<F, G>(rule: &QuadratureRule, f: F, g: G) -> Complex64
where
    F: Fn(&GroupPoint) -> Complex64 + Sync + Send,
    G: Fn(&GroupPoint) -> Complex64 + Sync + Send,
{
    rule.haar.integrate(|x| f(x).conj() * g(x))
}

/// `∫_{K_C} conj(F) G dν_ℏ`, with `F, G` evaluated at `x e^{iY}`.
pub fn inner_hl2<F, G>(rule: &QuadratureRule, spec: &GroupSpec, hbar: f64, f: F, g: G) -> Result<Complex64>
where
    F: Fn(&ComplexGroupPoint) -> Complex64 + Sync + Send,
    G: Fn(&ComplexGroupPoint) -> Complex64 + Sync + Send,
{
    rule.spec.check_same(spec)?;
    let hbar = require_positive("hbar", hbar)?;
    rule.check_truncation(1.0, hbar)?;
    Ok(integrate_liouville(rule, |x, y| {
        let weight = nu_density_vs_liouville(spec, hbar, y).unwrap_or(0.0);
        if weight == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let p = psi(x, 1.0, y);
        f(&p).conj() * g(&p) * weight
    }))
}

/// `∫ conj(F) G e^{-s|Y|²/ℏ₀} |Ω_s| ε`, with `F, G` evaluated at `x e^{isY}`.
pub fn inner_quantum<F, G>(rule: &QuadratureRule, spec: &GroupSpec, s: f64, hbar0: f64, f: F, g: G) -> Result<Complex64>
where
    F: Fn(&ComplexGroupPoint) -> Complex64 + Sync + Send,
    G: Fn(&ComplexGroupPoint) -> Complex64 + Sync + Send,
{
    rule.spec.check_same(spec)?;
    let s = require_positive("s", s)?;
    let hbar0 = require_positive("hbar0", hbar0)?;
    rule.check_truncation(s, s * hbar0)?;
    Ok(integrate_liouville(rule, |x, y| {
        let weight = quantum_weight(spec, s, hbar0, y);
        if weight == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let p = psi(x, s, y);
        f(&p).conj() * g(&p) * weight
    }))
}

/// `e^{-s|Y|²/ℏ₀} |Ω_s|(Y)`, computed in log space.
pub(crate) fn quantum_weight(spec: &GroupSpec, s: f64, hbar0: f64, y: &AlgebraPoint) -> f64 {
    let ln =
        -s * y.norm_sq() / hbar0 + (spec.n() as f64 / 2.0) * s.ln() + crate::group_model::ln_eta(spec, &y.scaled(s));
    ln.exp()
}

/// Gram matrix `∫_K conj(R_a) R_b dx` over all matrix elements of the labels.
pub fn schur_gram(rule: &QuadratureRule, labels: &[IrrepLabel]) -> Result<DMatrix<Complex64>> {
    let n = labels.iter().map(|l| l.dim() * l.dim()).sum::<usize>();
    check_band(rule, labels)?;
    let haar = &rule.haar;
    let values: Vec<Vec<Complex64>> = haar
        .nodes
        .iter()
        .map(|x| all_matrix_elements(labels, &x.embed()))
        .collect::<Result<_>>()?;
    let flat = par_pairwise_sum_vec(haar.len(), n * n, |k| {
        let v = &values[k];
        let w = haar.weights[k];
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for a in 0..n {
            let ca = v[a].conj() * w;
            for b in a..n {
                out[a * n + b] = ca * v[b];
            }
        }
        out
    });
    Ok(hermitian_from_upper(&flat, n))
}

/// Gram matrix `∫ conj(R_a) R_b dν_ℏ` over all matrix elements of the labels.
pub fn nu_gram(
    rule: &QuadratureRule,
    spec: &GroupSpec,
    hbar: f64,
    labels: &[IrrepLabel],
) -> Result<DMatrix<Complex64>> {
    rule.spec.check_same(spec)?;
    let hbar = require_positive("hbar", hbar)?;
    rule.check_truncation(1.0, hbar)?;
    check_band(rule, labels)?;
    let n = labels.iter().map(|l| l.dim() * l.dim()).sum::<usize>();
    let ny = rule.y_nodes.len();
    let chunks = ny.div_ceil(Y_CHUNK);
    let flat = par_pairwise_sum_vec(chunks, n * n, |c| {
        let mut acc = vec![Complex64::new(0.0, 0.0); n * n];
        for iy in c * Y_CHUNK..((c + 1) * Y_CHUNK).min(ny) {
            let y = &rule.y_nodes[iy];
            let wy = rule.y_weights[iy] * nu_density_vs_liouville(spec, hbar, y).unwrap_or(0.0);
            if wy == 0.0 {
                continue;
            }
            let boost = match spec.family() {
                Family::Su2 => Some(imaginary_exp(1.0, y)),
                Family::Torus => None,
            };
            for (x, wx) in rule.haar.nodes.iter().zip(&rule.haar.weights) {
                let g = match (&boost, x) {
                    (Some(e), GroupPoint::Su2(u)) => ComplexGroupPoint::Su2(u * e),
                    _ => psi(x, 1.0, y),
                };
                let v = all_matrix_elements(labels, &g).expect("labels validated against the group");
                let w = wx * wy;
                for a in 0..n {
                    let ca = v[a].conj() * w;
                    for b in a..n {
                        acc[a * n + b] += ca * v[b];
                    }
                }
            }
        }
        acc
    });
    Ok(hermitian_from_upper(&flat, n))
}

/// Node weight in `𝔨` coordinates, applied on top of the rule weight.
pub type FiberWeight<'a> = &'a (dyn Fn(&AlgebraPoint) -> f64 + Sync);

/// Gram matrices `∫ conj(e_a) e_b w_k(Y) ε` for each weight `w_k`, with the
/// basis vectors `e = √d_R R_ij` of `probes` evaluated at `x e^{isY}`.
pub fn weighted_grams(
    rule: &QuadratureRule,
    probes: &[MatrixElementIndex],
    s: f64,
    weights: &[FiberWeight<'_>],
) -> Result<Vec<DMatrix<Complex64>>> {
    let s = require_positive("s", s)?;
    let mut labels: Vec<IrrepLabel> = probes.iter().map(|p| p.label.clone()).collect();
    labels.sort();
    labels.dedup();
    check_band(rule, &labels)?;
    // Position of each probe inside the concatenated matrices of `labels`.
    let mut offsets = Vec::with_capacity(labels.len());
    let mut acc = 0;
    for l in &labels {
        offsets.push(acc);
        acc += l.dim() * l.dim();
    }
    let slots: Vec<(usize, f64)> = probes
        .iter()
        .map(|p| {
            let k = labels.binary_search(&p.label).expect("label collected above");
            (
                offsets[k] + (p.i - 1) * p.label.dim() + (p.j - 1),
                (p.label.dim() as f64).sqrt(),
            )
        })
        .collect();
    let n = probes.len();
    let m = weights.len();
    let flat = integrate_liouville_vec(rule, m * n * n, |x, y, w, out| {
        let ws: Vec<f64> = weights.iter().map(|f| f(y) * w).collect();
        if ws.iter().all(|v| *v == 0.0) {
            return;
        }
        let all = all_matrix_elements(&labels, &psi(x, s, y)).expect("labels validated against the group");
        let v: Vec<Complex64> = slots.iter().map(|(k, sd)| all[*k] * sd).collect();
        for a in 0..n {
            let ca = v[a].conj();
            for b in a..n {
                let p = ca * v[b];
                for (k, wk) in ws.iter().enumerate() {
                    out[k * n * n + a * n + b] += p * wk;
                }
            }
        }
    });
    Ok((0..m)
        .map(|k| hermitian_from_upper(&flat[k * n * n..(k + 1) * n * n], n))
        .collect())
}

fn hermitian_from_upper(flat: &[Complex64], n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |a, b| {
        if a <= b {
            flat[a * n + b]
        } else {
            flat[b * n + a].conj()
        }
    })
}

fn check_band(rule: &QuadratureRule, labels: &[IrrepLabel]) -> Result<()> {
    for l in labels {
        if !l.belongs_to(&rule.spec) {
            return Err(CstError::GroupMismatch(format!(
                "label {l} is not a label of this group"
            )));
        }
    }
    let need = band_of(labels);
    if need > rule.grid.band_limit() {
        return Err(CstError::GridTooSmall {
            factor: "band limit",
            detail: format!("labels need band {need}, grid is exact to {}", rule.grid.band_limit()),
        });
    }
    Ok(())
}

/// Largest deviation of a Gram matrix from `diag(expected)`, scaled by
/// `sqrt(expected_a · expected_b)`, with the offending pair.
pub fn gram_deviation(gram: &DMatrix<Complex64>, expected: &[f64]) -> (f64, usize, usize) {
    let mut worst = (0.0, 0, 0);
    for a in 0..gram.nrows() {
        for b in 0..gram.ncols() {
            let want = if a == b { expected[a] } else { 0.0 };
            let err = (gram[(a, b)] - want).norm() / (expected[a] * expected[b]).sqrt();
            if err > worst.0 {
                worst = (err, a, b);
            }
        }
    }
    worst
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificationReport {
    pub group: GroupDescriptor,
    pub grid: GridSpec,
    pub hbar: f64,
    pub rep_cutoff: f64,
    pub nodes_total: usize,
    pub elements: usize,
    pub schur_max_error: f64,
    pub nu_max_error: f64,
    pub max_error: f64,
    pub worst: String,
    pub tolerance: f64,
    pub passed: bool,
}

/// Runs the Schur and `ν_ℏ`-orthogonality integrals at `ℏ = ℏ_ref` for every label
/// with `c_R ≤ rep_cutoff` and reports the largest scaled deviation.
pub fn certification_battery(
    rule: &QuadratureRule,
    spec: &GroupSpec,
    rep_cutoff: f64,
    tolerance: f64,
) -> Result<CertificationReport> {
    let labels = crate::irreps::enumerate_irreps(spec, rep_cutoff);
    let index = MatrixElementIndex::all(&labels);
    let hbar = rule.hbar_ref;
    let schur = schur_gram(rule, &labels)?;
    let nu = nu_gram(rule, spec, hbar, &labels)?;
    let dims: Vec<f64> = index.iter().map(|e| 1.0 / e.label.dim() as f64).collect();
    let nu_want: Vec<f64> = index
        .iter()
        .map(|e| (hbar * e.label.casimir()).exp() / e.label.dim() as f64)
        .collect();
    let (schur_err, sa, sb) = gram_deviation(&schur, &dims);
    let (nu_err, na, nb) = gram_deviation(&nu, &nu_want);
    let describe = |kind: &str, a: usize, b: usize| {
        let (p, q) = (&index[a], &index[b]);
        format!(
            "{kind} ({}, {}, {}) x ({}, {}, {})",
            p.label, p.i, p.j, q.label, q.i, q.j
        )
    };
    let worst = if nu_err >= schur_err {
        describe("nu", na, nb)
    } else {
        describe("schur", sa, sb)
    };
    let max_error = schur_err.max(nu_err);
    Ok(CertificationReport {
        group: spec.descriptor(),
        grid: rule.grid.clone(),
        hbar,
        rep_cutoff,
        nodes_total: rule.len(),
        elements: index.len(),
        schur_max_error: schur_err,
        nu_max_error: nu_err,
        max_error,
        worst,
        tolerance,
        passed: max_error <= tolerance,
    })
}

/// As [`certification_battery`], failing when the error exceeds the tolerance.
pub fn certify(
    rule: &QuadratureRule,
    spec: &GroupSpec,
    rep_cutoff: f64,
    tolerance: f64,
) -> Result<CertificationReport> {
    let report = certification_battery(rule, spec, rep_cutoff, tolerance)?;
    if report.passed {
        Ok(report)
    } else {
        Err(CstError::Certification {
            max_error: report.max_error,
            tolerance,
            worst: report.worst,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irreps::matrix_element;

    fn one(_: &ComplexGroupPoint) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    /// `∫_0^∞ r² e^{-r²/ℏ} sinh(r)/r dr · 4π` times `c_ℏ`, in closed form.
    fn su2_mass_oracle(hbar: f64) -> f64 {
        // ∫_0^∞ r sinh(r) e^{-r²/ℏ} dr = (ℏ/4) √(πℏ) e^{ℏ/4}
        let radial = hbar / 4.0 * (PI * hbar).sqrt() * (hbar / 4.0).exp();
        let c = (PI * hbar).powf(-1.5) * (-hbar / 4.0).exp();
        4.0 * PI * radial * c
    }

    #[test]
    fn torus_trapezoid_kills_modes() {
        let t1 = GroupSpec::torus(1).unwrap();
        let grid = GridSpec::Torus {
            points_per_angle: 8,
            radial_nodes: 4,
            radial_truncation_sigmas: 12.0,
            band_limit: 3,
        };
        let rule = build_rule(&t1, &grid, 1.0).unwrap();
        let got = inner_l2k(
            &rule,
            |_| Complex64::new(1.0, 0.0),
            |x| {
                let GroupPoint::Torus(t) = x else { unreachable!() };
                Complex64::from_polar(1.0, t[0])
            },
        );
        assert!(got.norm() < 1e-15);
        let total = inner_l2k(&rule, |_| Complex64::new(1.0, 0.0), |_| Complex64::new(1.0, 0.0));
        assert_eq!(total, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn su2_haar_normalization_and_schur() {
        let s = GroupSpec::su2();
        let grid = GridSpec::recommended(&s, 2);
        let rule = build_rule(&s, &grid, 1.0).unwrap();
        let total = rule.haar().integrate(|_| Complex64::new(1.0, 0.0));
        assert!((total - 1.0).norm() < 1e-13);
        let idx = MatrixElementIndex::new(IrrepLabel::su2(1), 1, 1).unwrap();
        let f = |x: &GroupPoint| matrix_element(&idx, &x.embed()).unwrap();
        let got = inner_l2k(&rule, f, f);
        assert!((got - 0.5).norm() < 1e-14);
        let g = |x: &GroupPoint| f(x) * 2f64.sqrt();
        assert!((inner_l2k(&rule, g, g) - 1.0).norm() < 1e-14);
    }

    #[test]
    fn schur_integral_matches_exact_euler_integral() {
        // |D^{1/2}_{11}|² = cos²(β/2); ∫ cos²(β/2) sinβ dβ / 2 = 1/2.
        let s = GroupSpec::su2();
        let rule = build_rule(&s, &GridSpec::recommended(&s, 1), 1.0).unwrap();
        let got = rule.haar().integrate(|x| {
            let GroupPoint::Su2(u) = x else { unreachable!() };
            Complex64::new(u[(0, 0)].norm_sqr(), 0.0)
        });
        assert!((got.re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn undersized_grids_name_the_failing_factor() {
        let s = GroupSpec::su2();
        let mut grid = GridSpec::recommended(&s, 4);
        if let GridSpec::Su2 { euler_gamma_points, .. } = &mut grid {
            *euler_gamma_points = 8;
        }
        match build_rule(&s, &grid, 1.0) {
            Err(CstError::GridTooSmall { factor, .. }) => assert_eq!(factor, "euler gamma"),
            other => panic!("unexpected {other:?}"),
        }
        let t = GroupSpec::torus(1).unwrap();
        let grid = GridSpec::Torus {
            points_per_angle: 4,
            radial_nodes: 8,
            radial_truncation_sigmas: 12.0,
            band_limit: 2,
        };
        assert!(matches!(
            build_rule(&t, &grid, 1.0),
            Err(CstError::GridTooSmall {
                factor: "torus angle",
                ..
            })
        ));
        assert!(build_rule(&t, &GridSpec::recommended(&s, 1), 1.0).is_err());
    }

    #[test]
    fn nu_mass_is_one() {
        for hbar in [0.25, 0.5, 1.0] {
            for spec in [
                GroupSpec::torus(1).unwrap(),
                GroupSpec::torus(2).unwrap(),
                GroupSpec::su2(),
            ] {
                let rule = build_rule(&spec, &GridSpec::recommended(&spec, 0), hbar).unwrap();
                let m = inner_hl2(&rule, &spec, hbar, one, one).unwrap();
                assert!((m - 1.0).norm() < 1e-12, "{spec:?} hbar={hbar}: {m}");
            }
        }
        for hbar in [0.3, 1.7] {
            assert!((su2_mass_oracle(hbar) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn truncation_mismatch_is_reported() {
        let t = GroupSpec::torus(1).unwrap();
        let rule = build_rule(&t, &GridSpec::recommended(&t, 0), 0.25).unwrap();
        assert!(matches!(
            inner_hl2(&rule, &t, 1.0, one, one),
            Err(CstError::TruncationMismatch { .. })
        ));
        assert!(inner_hl2(&rule, &t, 0.1, one, one).is_ok());
    }

    #[test]
    fn torus_mode_norm() {
        let t = GroupSpec::torus(1).unwrap();
        let rule = build_rule(&t, &GridSpec::recommended(&t, 2), 0.3).unwrap();
        let f = |g: &ComplexGroupPoint| {
            let ComplexGroupPoint::Torus(z) = g else { unreachable!() };
            (Complex64::new(0.0, 2.0) * z[0]).exp()
        };
        let got = inner_hl2(&rule, &t, 0.3, f, f).unwrap();
        assert!((got.re / 1.2f64.exp() - 1.0).abs() < 1e-12 && got.im.abs() < 1e-12);
    }

    #[test]
    fn su2_spin_half_norm() {
        let s = GroupSpec::su2();
        let rule = build_rule(&s, &GridSpec::recommended(&s, 1), 0.5).unwrap();
        let idx = MatrixElementIndex::new(IrrepLabel::su2(1), 1, 1).unwrap();
        let f = |g: &ComplexGroupPoint| matrix_element(&idx, g).unwrap();
        let got = inner_hl2(&rule, &s, 0.5, f, f).unwrap();
        let want = (0.5f64 * 0.75).exp() / 2.0;
        assert!((got.re - want).abs() < 1e-12 * want, "{got} vs {want}");
    }

    #[test]
    fn quantum_inner_product_is_scaled_hl2() {
        let t = GroupSpec::torus(1).unwrap();
        let grid = GridSpec::recommended(&t, 2);
        let hbar0 = 0.7;
        for s in [0.5, 1.0, 2.0] {
            let fiber = QuadratureRule::for_quantum_fiber(&t, &grid, s, hbar0).unwrap();
            let a_s = (PI * hbar0).sqrt();
            let f = |g: &ComplexGroupPoint| {
                let ComplexGroupPoint::Torus(z) = g else { unreachable!() };
                (Complex64::new(0.0, 2.0) * z[0]).exp()
            };
            let got = inner_quantum(&fiber, &t, s, hbar0, f, f).unwrap();
            let want = a_s * (s * hbar0 * 4.0).exp();
            assert!((got.re / want - 1.0).abs() < 1e-12, "s={s}: {got} vs {want}");
            let mass = inner_quantum(&fiber, &t, s, hbar0, one, one).unwrap();
            assert!((mass.re / a_s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn small_certification_passes() {
        let s = GroupSpec::su2();
        let rule = build_rule(&s, &GridSpec::recommended(&s, 2), 0.5).unwrap();
        let report = certify(&rule, &s, 2.0, 1e-9).unwrap();
        assert!(report.passed);
        assert_eq!(report.elements, 1 + 4 + 9);
        let t = GroupSpec::torus(2).unwrap();
        let rule = build_rule(&t, &GridSpec::recommended(&t, 1), 1.0).unwrap();
        let report = certify(&rule, &t, 2.0, 1e-9).unwrap();
        assert_eq!(report.elements, 9);
    }

    #[test]
    fn certification_rejects_labels_beyond_band() {
        let s = GroupSpec::su2();
        let rule = build_rule(&s, &GridSpec::recommended(&s, 1), 0.5).unwrap();
        assert!(matches!(
            certify(&rule, &s, 2.0, 1e-9),
            Err(CstError::GridTooSmall { .. })
        ));
    }

    #[test]
    fn coarse_radial_grid_fails_certification_loudly() {
        let s = GroupSpec::su2();
        let grid = GridSpec::recommended(&s, 2).with_radial_nodes(6);
        let rule = build_rule(&s, &grid, 1.0).unwrap();
        assert!(matches!(
            certify(&rule, &s, 2.0, 1e-9),
            Err(CstError::Certification { .. })
        ));
    }

    #[test]
    fn refinement_changes_results_less_than_reported_error() {
        let s = GroupSpec::su2();
        let grid = GridSpec::recommended(&s, 2).with_radial_nodes(24);
        let coarse = build_rule(&s, &grid, 1.0).unwrap();
        let fine = build_rule(&s, &grid.scaled(2), 1.0).unwrap();
        let rc = certification_battery(&coarse, &s, 2.0, 1.0).unwrap();
        let labels = crate::irreps::enumerate_irreps(&s, 2.0);
        let gc = nu_gram(&coarse, &s, 1.0, &labels).unwrap();
        let gf = nu_gram(&fine, &s, 1.0, &labels).unwrap();
        let index = MatrixElementIndex::all(&labels);
        let want: Vec<f64> = index
            .iter()
            .map(|e| e.label.casimir().exp() / e.label.dim() as f64)
            .collect();
        let mut change: f64 = 0.0;
        for a in 0..index.len() {
            for b in 0..index.len() {
                change = change.max((gc[(a, b)] - gf[(a, b)]).norm() / (want[a] * want[b]).sqrt());
            }
        }
        assert!(
            change <= rc.max_error * (1.0 + 1e-6) + 1e-15,
            "{change} vs {}",
            rc.max_error
        );
    }

    #[test]
    fn integration_is_bitwise_deterministic() {
        let s = GroupSpec::su2();
        let rule = build_rule(&s, &GridSpec::recommended(&s, 2), 1.0).unwrap();
        let labels = crate::irreps::enumerate_irreps(&s, 0.75);
        let a = nu_gram(&rule, &s, 1.0, &labels).unwrap();
        let b = nu_gram(&rule, &s, 1.0, &labels).unwrap();
        assert!(a
            .iter()
            .zip(b.iter())
            .all(|(p, q)| p.re.to_bits() == q.re.to_bits() && p.im.to_bits() == q.im.to_bits()));
    }

    #[test]
    fn grid_json_round_trip() {
        let g = GridSpec::recommended(&GroupSpec::su2(), 3);
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.contains(r#""family":"su2""#));
        assert_eq!(serde_json::from_str::<GridSpec>(&text).unwrap(), g);
        let t: GridSpec =
            serde_json::from_str(r#"{"family":"torus","points_per_angle":9,"radial_nodes":40,"band_limit":4}"#)
                .unwrap();
        assert_eq!(t.radial_truncation_sigmas(), DEFAULT_TRUNCATION_SIGMAS);
    }
}
