//! Irreducible representations of `K`, holomorphically extended to `K_C`.
//!
//! SU(2) matrices are evaluated with the symmetric-power formula, which is a
//! polynomial in the four entries of `g ∈ SL(2,C)` and therefore valid off the
//! unitary locus. Rows and columns follow the weight basis from the highest
//! weight down: index `i` (1-based) carries weight `m = j - (i - 1)`.

use crate::error::{CstError, Result};
use crate::group_model::{ComplexGroupPoint, Family, GroupSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::sync::OnceLock;

/// Largest supported `2j`; binomials up to this order are exact in `u64`.
pub const MAX_TWICE_SPIN: u32 = 60;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IrrepLabel {
    /// Weight vector `m ∈ ℤ^n`.
    Torus(Vec<i64>),
    /// Spin `j = twice_spin / 2`.
    Su2 { twice_spin: u32 },
}

impl IrrepLabel {
    pub fn trivial(spec: &GroupSpec) -> Self {
        match spec.family() {
            Family::Torus => IrrepLabel::Torus(vec![0; spec.n()]),
            Family::Su2 => IrrepLabel::Su2 { twice_spin: 0 },
        }
    }

    pub fn su2(twice_spin: u32) -> Self {
        IrrepLabel::Su2 { twice_spin }
    }

    pub fn dim(&self) -> usize {
        match self {
            IrrepLabel::Torus(_) => 1,
            IrrepLabel::Su2 { twice_spin } => *twice_spin as usize + 1,
        }
    }

    /// Eigenvalue of `-Δ`: `|m|²` on the torus, `j(j+1)` on SU(2).
    pub fn casimir(&self) -> f64 {
        match self {
            IrrepLabel::Torus(_) => self.casimir_key() as f64,
            IrrepLabel::Su2 { .. } => self.casimir_key() as f64 / 4.0,
        }
    }

    /// Integer proportional to the Casimir eigenvalue (`|m|²`, or `2j(2j+2)` = 4c).
    fn casimir_key(&self) -> i64 {
        match self {
            IrrepLabel::Torus(m) => m.iter().map(|v| v * v).sum(),
            IrrepLabel::Su2 { twice_spin } => {
                let t = *twice_spin as i64;
                t * (t + 2)
            }
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.casimir_key() == 0
    }

    pub fn belongs_to(&self, spec: &GroupSpec) -> bool {
        match (self, spec.family()) {
            (IrrepLabel::Torus(m), Family::Torus) => m.len() == spec.n(),
            (IrrepLabel::Su2 { twice_spin }, Family::Su2) => *twice_spin <= MAX_TWICE_SPIN,
            _ => false,
        }
    }

    /// Bound on the exponential growth rate of the matrix elements along `e^{iY}`,
    /// i.e. `|R_ij(x e^{iY})| ≤ C e^{rate·|Y|}`.
    pub fn growth_rate(&self, spec: &GroupSpec) -> f64 {
        match self {
            IrrepLabel::Torus(_) => (self.casimir_key() as f64).sqrt(),
            IrrepLabel::Su2 { twice_spin } => *twice_spin as f64 / 2.0 * spec.root_slope(),
        }
    }
}

impl Ord for IrrepLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (IrrepLabel::Torus(a), IrrepLabel::Torus(b)) => {
                self.casimir_key().cmp(&other.casimir_key()).then_with(|| a.cmp(b))
            }
            (IrrepLabel::Su2 { twice_spin: a }, IrrepLabel::Su2 { twice_spin: b }) => a.cmp(b),
            (IrrepLabel::Torus(_), IrrepLabel::Su2 { .. }) => Ordering::Less,
            (IrrepLabel::Su2 { .. }, IrrepLabel::Torus(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for IrrepLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IrrepLabel::Torus(m) => write!(f, "m={m:?}"),
            IrrepLabel::Su2 { twice_spin } if twice_spin % 2 == 0 => write!(f, "j={}", twice_spin / 2),
            IrrepLabel::Su2 { twice_spin } => write!(f, "j={twice_spin}/2"),
        }
    }
}

/// Matrix entry `(R, i, j)` with 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatrixElementIndex {
    pub label: IrrepLabel,
    pub i: usize,
    pub j: usize,
}

impl MatrixElementIndex {
    pub fn new(label: IrrepLabel, i: usize, j: usize) -> Result<Self> {
        let d = label.dim();
        if i == 0 || j == 0 || i > d || j > d {
            return Err(CstError::InvalidArgument(format!(
                "matrix indices ({i}, {j}) outside 1..={d} for {label}"
            )));
        }
        Ok(MatrixElementIndex { label, i, j })
    }

    /// All entries of the given labels, in label order then row-major.
    pub fn all(labels: &[IrrepLabel]) -> Vec<MatrixElementIndex> {
        let mut out = Vec::new();
        for l in labels {
            for i in 1..=l.dim() {
                for j in 1..=l.dim() {
                    out.push(MatrixElementIndex { label: l.clone(), i, j });
                }
            }
        }
        out
    }
}

/// All labels with `c_R ≤ cutoff`, sorted by Casimir then label.
pub fn enumerate_irreps(spec: &GroupSpec, cutoff: f64) -> Vec<IrrepLabel> {
    let cutoff = cutoff.max(0.0);
    let mut out = match spec.family() {
        Family::Torus => {
            let bound = (cutoff + 1e-9).sqrt().floor() as i64;
            let mut labels = Vec::new();
            let mut current = vec![-bound; spec.n()];
            loop {
                let c: i64 = current.iter().map(|v| v * v).sum();
                if (c as f64) <= cutoff + 1e-9 {
                    labels.push(IrrepLabel::Torus(current.clone()));
                }
                // odometer increment
                let mut k = 0;
                loop {
                    if k == current.len() {
                        break;
                    }
                    current[k] += 1;
                    if current[k] > bound {
                        current[k] = -bound;
                        k += 1;
                    } else {
                        break;
                    }
                }
                if k == current.len() {
                    break;
                }
            }
            labels
        }
        Family::Su2 => (0..=MAX_TWICE_SPIN)
            .map(IrrepLabel::su2)
            .take_while(|l| l.casimir() <= cutoff + 1e-9)
            .collect(),
    };
    out.sort();
    out
}

fn binomials() -> &'static Vec<Vec<u64>> {
    static TABLE: OnceLock<Vec<Vec<u64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = MAX_TWICE_SPIN as usize;
        let mut t = vec![vec![0u64; n + 1]; n + 1];
        for row in 0..=n {
            t[row][0] = 1;
            for k in 1..=row {
                t[row][k] = t[row - 1][k - 1] + if k < row { t[row - 1][k] } else { 0 };
            }
        }
        t
    })
}

fn binom(n: usize, k: usize) -> f64 {
    binomials()[n][k] as f64
}

fn check_label(label: &IrrepLabel, g: &ComplexGroupPoint) -> Result<()> {
    match (label, g) {
        (IrrepLabel::Torus(m), ComplexGroupPoint::Torus(z)) if m.len() == z.len() => Ok(()),
        (IrrepLabel::Su2 { twice_spin }, ComplexGroupPoint::Su2(_)) => {
            if *twice_spin > MAX_TWICE_SPIN {
                Err(CstError::SpinTooLarge {
                    twice_spin: *twice_spin,
                    max: MAX_TWICE_SPIN,
                })
            } else {
                Ok(())
            }
        }
        _ => Err(CstError::GroupMismatch(format!(
            "label {label} does not match the point's group"
        ))),
    }
}

fn torus_exp(m: &[i64], z: &[Complex64]) -> Complex64 {
    let phase: Complex64 = m.iter().zip(z).map(|(&k, &w)| w * k as f64).sum();
    (Complex64::new(0.0, 1.0) * phase).exp()
}

struct Powers {
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
    d: Vec<Complex64>,
}

impl Powers {
    fn new(g: &crate::su2::Mat2, order: usize) -> Self {
        let table = |z: Complex64| {
            let mut v = Vec::with_capacity(order + 1);
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..=order {
                v.push(acc);
                acc *= z;
            }
            v
        };
        Powers {
            a: table(g[(0, 0)]),
            b: table(g[(0, 1)]),
            c: table(g[(1, 0)]),
            d: table(g[(1, 1)]),
        }
    }
}

/// Entry at 0-based `(row, col)` of the spin-`t/2` matrix.
fn su2_entry(t: usize, pw: &Powers, row: usize, col: usize) -> Complex64 {
    let p = t - col; // j + m for the column weight
    let q = col;
    let pp = t - row; // j + m' for the row weight
    let lo = pp.saturating_sub(q);
    let hi = p.min(pp);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in lo..=hi {
        let l = pp - k;
        let coef = binom(p, k) * binom(q, l);
        acc += pw.a[k] * pw.c[p - k] * pw.b[l] * pw.d[q - l] * coef;
    }
    acc * (binom(t, p) / binom(t, pp)).sqrt()
}

/// The full matrix `D^R(g)`.
pub fn representation_matrix(label: &IrrepLabel, g: &ComplexGroupPoint) -> Result<DMatrix<Complex64>> {
    check_label(label, g)?;
    match (label, g) {
        (IrrepLabel::Torus(m), ComplexGroupPoint::Torus(z)) => Ok(DMatrix::from_element(1, 1, torus_exp(m, z))),
        (IrrepLabel::Su2 { twice_spin }, ComplexGroupPoint::Su2(u)) => {
            let t = *twice_spin as usize;
            let pw = Powers::new(u, t);
            Ok(DMatrix::from_fn(t + 1, t + 1, |r, c| su2_entry(t, &pw, r, c)))
        }
        _ => unreachable!("checked above"),
    }
}

/// A single entry `R_ij(g)`.
pub fn matrix_element(index: &MatrixElementIndex, g: &ComplexGroupPoint) -> Result<Complex64> {
    check_label(&index.label, g)?;
    let d = index.label.dim();
    if index.i == 0 || index.j == 0 || index.i > d || index.j > d {
        return Err(CstError::InvalidArgument(format!(
            "index out of range for {}",
            index.label
        )));
    }
    match (&index.label, g) {
        (IrrepLabel::Torus(m), ComplexGroupPoint::Torus(z)) => Ok(torus_exp(m, z)),
        (IrrepLabel::Su2 { twice_spin }, ComplexGroupPoint::Su2(u)) => {
            let t = *twice_spin as usize;
            let pw = Powers::new(u, t);
            Ok(su2_entry(t, &pw, index.i - 1, index.j - 1))
        }
        _ => unreachable!("checked above"),
    }
}

/// Every matrix entry of every label at `g`, in [`MatrixElementIndex::all`] order.
pub fn all_matrix_elements(labels: &[IrrepLabel], g: &ComplexGroupPoint) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(labels.iter().map(|l| l.dim() * l.dim()).sum());
    for l in labels {
        let m = representation_matrix(l, g)?;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.push(m[(i, j)]);
            }
        }
    }
    Ok(out)
}

/// `χ_R(g) = tr D^R(g)`.
///
/// On SU(2) this uses the Clebsch–Gordan recurrence `χ_{1/2} χ_j = χ_{j+1/2} + χ_{j-1/2}`,
/// which depends on `g` only through `tr g`.
pub fn character(label: &IrrepLabel, g: &ComplexGroupPoint) -> Result<Complex64> {
    check_label(label, g)?;
    match (label, g) {
        (IrrepLabel::Torus(m), ComplexGroupPoint::Torus(z)) => Ok(torus_exp(m, z)),
        (IrrepLabel::Su2 { twice_spin }, ComplexGroupPoint::Su2(u)) => {
            Ok(su2_characters(u.trace(), *twice_spin as usize)[*twice_spin as usize])
        }
        _ => unreachable!("checked above"),
    }
}

/// `χ_{t/2}` for `t = 0..=max_twice_spin` from the trace of `g`.
pub fn su2_characters(trace: Complex64, max_twice_spin: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(max_twice_spin + 1);
    out.push(Complex64::new(1.0, 0.0));
    if max_twice_spin >= 1 {
        out.push(trace);
    }
    for t in 2..=max_twice_spin {
        let next = trace * out[t - 1] - out[t - 2];
        out.push(next);
    }
    out
}

/// `‖D(g1 g2) - D(g1) D(g2)‖_F / (‖D(g1)‖_F ‖D(g2)‖_F)`.
///
/// The denominator is the rounding scale of the matrix product.
pub fn representation_homomorphism_residual(
    label: &IrrepLabel,
    g1: &ComplexGroupPoint,
    g2: &ComplexGroupPoint,
) -> Result<f64> {
    let prod = g1.mul(g2)?;
    let lhs = representation_matrix(label, &prod)?;
    let d1 = representation_matrix(label, g1)?;
    let d2 = representation_matrix(label, g2)?;
    let scale = d1.norm() * d2.norm();
    Ok((lhs - d1 * d2).norm() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_model::{compose_complex, AlgebraPoint, GroupPoint};
    use crate::su2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn enumerate_examples() {
        let t1 = GroupSpec::torus(1).unwrap();
        let got = enumerate_irreps(&t1, 4.5);
        let ms: Vec<i64> = got
            .iter()
            .map(|l| match l {
                IrrepLabel::Torus(m) => m[0],
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(ms, vec![0, -1, 1, -2, 2]);

        let s = GroupSpec::su2();
        assert_eq!(enumerate_irreps(&s, 0.0), vec![IrrepLabel::su2(0)]);
        assert_eq!(enumerate_irreps(&t1, 0.0), vec![IrrepLabel::Torus(vec![0])]);
        let got = enumerate_irreps(&s, 2.0);
        assert_eq!(got, vec![IrrepLabel::su2(0), IrrepLabel::su2(1), IrrepLabel::su2(2)]);
        let cs: Vec<f64> = got.iter().map(|l| l.casimir()).collect();
        assert_eq!(cs, vec![0.0, 0.75, 2.0]);
    }

    #[test]
    fn torus_enumeration_matches_direct_scan() {
        let t2 = GroupSpec::torus(2).unwrap();
        let got = enumerate_irreps(&t2, 6.0);
        let mut scan = Vec::new();
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                if a * a + b * b <= 6 {
                    scan.push(IrrepLabel::Torus(vec![a, b]));
                }
            }
        }
        scan.sort();
        assert_eq!(got, scan);
        assert_eq!(got.len(), 21);
        assert!(got.windows(2).all(|w| w[0].casimir() <= w[1].casimir()));
    }

    #[test]
    fn dims_and_casimirs() {
        let t1 = GroupSpec::torus(1).unwrap();
        assert_eq!(IrrepLabel::trivial(&t1).dim(), 1);
        assert_eq!(IrrepLabel::su2(1).dim(), 2);
        assert_eq!(IrrepLabel::su2(6).dim(), 7);
        assert_eq!(IrrepLabel::trivial(&GroupSpec::su2()).casimir(), 0.0);
        assert_eq!(IrrepLabel::Torus(vec![3]).casimir(), 9.0);
        assert_eq!(IrrepLabel::su2(1).casimir(), 0.75);
    }

    #[test]
    fn torus_casimir_matches_second_derivative() {
        // -d²/dθ² e^{imθ} = m² e^{imθ}, by central differences.
        let m = 3i64;
        let h = 1e-4;
        let f = |t: f64| torus_exp(&[m], &[c(t, 0.0)]);
        let t0 = 0.37;
        let lap = (f(t0 + h) - 2.0 * f(t0) + f(t0 - h)) / (h * h);
        let ratio = -lap / f(t0);
        assert!((ratio.re - 9.0).abs() < 1e-5 && ratio.im.abs() < 1e-5);
    }

    #[test]
    fn su2_half_casimir_matches_finite_difference_laplacian() {
        // Σ_k d²/dt² D(x e^{t X_k}) at t = 0, compared with -c D(x).
        let s = GroupSpec::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = GroupPoint::random(&s, &mut rng);
        let h = 1e-3;
        let label = IrrepLabel::su2(1);
        let at = |t: f64, k: usize| {
            let mut y = vec![0.0; 3];
            y[k] = t;
            representation_matrix(&label, &x.mul_exp(&AlgebraPoint::new(y)).embed()).unwrap()
        };
        let base = representation_matrix(&label, &x.embed()).unwrap();
        let mut lap = DMatrix::<Complex64>::zeros(2, 2);
        for k in 0..3 {
            lap += (at(h, k) - base.clone() * c(2.0, 0.0) + at(-h, k)) / c(h * h, 0.0);
        }
        for (l, b) in lap.iter().zip(base.iter()) {
            assert!((l + b * 0.75).norm() < 1e-6);
        }
    }

    #[test]
    fn defining_rep_is_identity_map() {
        let s = GroupSpec::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let x = GroupPoint::random(&s, &mut rng);
            let y = AlgebraPoint::random_ball(&s, &mut rng, 2.0);
            let g = compose_complex(&x, 1.0, &y).unwrap();
            let ComplexGroupPoint::Su2(m) = &g else { unreachable!() };
            let d = representation_matrix(&IrrepLabel::su2(1), &g).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((d[(i, j)] - m[(i, j)]).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn trivial_rep_is_one() {
        let s = GroupSpec::su2();
        let g = compose_complex(
            &GroupPoint::su2_euler(0.3, 1.0, 2.0),
            1.0,
            &AlgebraPoint::new(vec![0.2, -0.5, 1.0]),
        )
        .unwrap();
        let idx = MatrixElementIndex::new(IrrepLabel::trivial(&s), 1, 1).unwrap();
        assert_eq!(matrix_element(&idx, &g).unwrap(), c(1.0, 0.0));
    }

    /// Symmetric-square oracle: D^1(g) from g ⊗ g restricted to the symmetric subspace.
    fn spin_one_oracle(g: &su2::Mat2) -> DMatrix<Complex64> {
        // Orthonormal symmetric basis: e1⊗e1, (e1⊗e2 + e2⊗e1)/√2, e2⊗e2.
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let basis = [
            [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(r, 0.0), c(r, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ];
        let mut kron = DMatrix::<Complex64>::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        kron[(2 * i + k, 2 * j + l)] = g[(i, j)] * g[(k, l)];
                    }
                }
            }
        }
        DMatrix::from_fn(3, 3, |a, b| {
            let mut acc = c(0.0, 0.0);
            for p in 0..4 {
                for q in 0..4 {
                    acc += basis[a][p].conj() * kron[(p, q)] * basis[b][q];
                }
            }
            acc
        })
    }

    #[test]
    fn spin_one_matches_tensor_square_oracle() {
        let w = c(1.3, -0.4);
        let g = su2::Mat2::new(w, c(0.0, 0.0), c(0.0, 0.0), w.inv());
        let d = representation_matrix(&IrrepLabel::su2(2), &ComplexGroupPoint::Su2(g)).unwrap();
        assert!((d[(0, 0)] - w * w).norm() < 1e-14);
        assert!((d[(1, 1)] - 1.0).norm() < 1e-14);
        assert!((d[(2, 2)] - (w * w).inv()).norm() < 1e-14);
        let s = GroupSpec::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let g = compose_complex(
                &GroupPoint::random(&s, &mut rng),
                1.0,
                &AlgebraPoint::random_ball(&s, &mut rng, 2.0),
            )
            .unwrap();
            let ComplexGroupPoint::Su2(m) = &g else { unreachable!() };
            let d = representation_matrix(&IrrepLabel::su2(2), &g).unwrap();
            let oracle = spin_one_oracle(m);
            assert!((d - oracle).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-13);
        }
    }

    #[test]
    fn unitary_on_k_and_homomorphic_on_kc() {
        let s = GroupSpec::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for t in [1u32, 2, 3, 4, 7, 12] {
            let label = IrrepLabel::su2(t);
            for _ in 0..5 {
                let x = GroupPoint::random(&s, &mut rng).embed();
                let d = representation_matrix(&label, &x).unwrap();
                let resid = (d.adjoint() * &d - DMatrix::identity(d.nrows(), d.nrows()))
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                assert!(resid < 1e-12, "unitarity at 2j={t}: {resid}");

                let g1 = compose_complex(
                    &GroupPoint::random(&s, &mut rng),
                    1.0,
                    &AlgebraPoint::random_ball(&s, &mut rng, 3.0),
                )
                .unwrap();
                let g2 = compose_complex(
                    &GroupPoint::random(&s, &mut rng),
                    1.0,
                    &AlgebraPoint::random_ball(&s, &mut rng, 3.0),
                )
                .unwrap();
                let r = representation_homomorphism_residual(&label, &g1, &g2).unwrap();
                assert!(r < 1e-10, "homomorphism at 2j={t}: {r}");
            }
        }
    }

    /// Central difference of `D(g e^{zX_k})` at `z = 0` along `z = εw`.
    fn directional(label: &IrrepLabel, g: &ComplexGroupPoint, k: usize, w: Complex64, eps: f64) -> DMatrix<Complex64> {
        let n = match g {
            ComplexGroupPoint::Torus(a) => a.len(),
            ComplexGroupPoint::Su2(_) => 3,
        };
        let step = |sign: f64| {
            let mut z = vec![c(0.0, 0.0); n];
            z[k] = w * (sign * eps);
            representation_matrix(label, &g.mul_exp_complex(&z).unwrap()).unwrap()
        };
        (step(1.0) - step(-1.0)) / c(2.0 * eps, 0.0)
    }

    #[test]
    fn matrix_elements_satisfy_cauchy_riemann() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let t2 = GroupSpec::torus(2).unwrap();
        let s = GroupSpec::su2();
        let cases = [
            (t2.clone(), IrrepLabel::Torus(vec![2, -1])),
            (s.clone(), IrrepLabel::su2(1)),
            (s.clone(), IrrepLabel::su2(4)),
        ];
        for (spec, label) in cases {
            for _ in 0..5 {
                let g = compose_complex(
                    &GroupPoint::random(&spec, &mut rng),
                    1.0,
                    &AlgebraPoint::random_ball(&spec, &mut rng, 1.0),
                )
                .unwrap();
                for k in 0..spec.n() {
                    let along_real = directional(&label, &g, k, c(1.0, 0.0), 1e-4);
                    let along_imag = directional(&label, &g, k, c(0.0, 1.0), 1e-4);
                    let scale = along_real.norm().max(1.0);
                    let resid = (along_imag - along_real * c(0.0, 1.0)).norm() / scale;
                    assert!(resid < 1e-6, "{label} axis {k}: {resid}");
                }
            }
        }
    }

    #[test]
    fn characters_match_traces() {
        let s = GroupSpec::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let id = GroupPoint::identity(&s).embed();
        for t in 0..8u32 {
            assert!((character(&IrrepLabel::su2(t), &id).unwrap() - (t as f64 + 1.0)).norm() < 1e-13);
        }
        for _ in 0..10 {
            let g = compose_complex(
                &GroupPoint::random(&s, &mut rng),
                1.0,
                &AlgebraPoint::random_ball(&s, &mut rng, 1.5),
            )
            .unwrap();
            for t in 0..10u32 {
                let label = IrrepLabel::su2(t);
                let tr = representation_matrix(&label, &g).unwrap().trace();
                let ch = character(&label, &g).unwrap();
                assert!((tr - ch).norm() < 1e-11 * tr.norm().max(1.0));
            }
        }
        let tt = 0.8;
        let g = ComplexGroupPoint::Su2(su2::Mat2::new(
            c((tt / 2.0f64).exp(), 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c((-tt / 2.0f64).exp(), 0.0),
        ));
        assert!((character(&IrrepLabel::su2(1), &g).unwrap() - 2.0 * (tt / 2.0).cosh()).norm() < 1e-15);

        let t1 = GroupSpec::torus(1).unwrap();
        let _ = t1;
        let z = ComplexGroupPoint::Torus(vec![c(0.4, 0.3)]);
        let got = character(&IrrepLabel::Torus(vec![2]), &z).unwrap();
        let want = Complex64::from_polar(1.0, 0.8) * (-0.6f64).exp();
        assert!((got - want).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_indices_and_spins() {
        assert!(MatrixElementIndex::new(IrrepLabel::su2(1), 3, 1).is_err());
        assert!(MatrixElementIndex::new(IrrepLabel::su2(1), 0, 1).is_err());
        let g = GroupPoint::identity(&GroupSpec::su2()).embed();
        assert!(matches!(
            representation_matrix(&IrrepLabel::su2(61), &g),
            Err(CstError::SpinTooLarge { .. })
        ));
        assert!(representation_matrix(&IrrepLabel::Torus(vec![1]), &g).is_err());
    }

    #[test]
    fn label_json_shapes() {
        assert_eq!(
            serde_json::to_string(&IrrepLabel::Torus(vec![1, -2])).unwrap(),
            "[1,-2]"
        );
        assert_eq!(
            serde_json::to_string(&IrrepLabel::su2(3)).unwrap(),
            r#"{"twice_spin":3}"#
        );
        let l: IrrepLabel = serde_json::from_str(r#"{"twice_spin":4}"#).unwrap();
        assert_eq!(l, IrrepLabel::su2(4));
    }
}
