//! Randomized algebraic laws over seeds, group families and parameters.

use approx::assert_relative_eq;
use cstlab::cst::{cst_apply, cst_invert, evaluate_on_kc, parallel_transport_h, PeterWeylVector};
use cstlab::group_model::{c_hbar, compose_complex, AlgebraPoint, GroupPoint, GroupSpec};
use cstlab::irreps::{enumerate_irreps, representation_matrix};
use cstlab::quantization::{a_factor, parallel_transport_q, QuantumSection};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn family(k: usize) -> GroupSpec {
    match k {
        0 => GroupSpec::torus(1).unwrap(),
        1 => GroupSpec::torus(2).unwrap(),
        _ => GroupSpec::su2(),
    }
}

fn max_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hall_transport_composes(k in 0usize..3, seed in any::<u64>(), h1 in 0.05f64..2.0, h2 in 0.05f64..2.0, h3 in 0.05f64..2.0) {
        let spec = family(k);
        let f = PeterWeylVector::random(&spec, 6.0, &mut ChaCha8Rng::seed_from_u64(seed));
        let two_step = parallel_transport_h(&spec, h2, h3, &parallel_transport_h(&spec, h1, h2, &f).unwrap()).unwrap();
        let direct = parallel_transport_h(&spec, h1, h3, &f).unwrap();
        prop_assert!(two_step.relative_distance(&direct) <= 1e-14);
    }

    #[test]
    fn inverse_undoes_transform(k in 0usize..3, seed in any::<u64>(), hbar in 0.05f64..1.0) {
        let spec = family(k);
        let f = PeterWeylVector::random(&spec, 6.0, &mut ChaCha8Rng::seed_from_u64(seed));
        let back = cst_invert(&spec, hbar, &cst_apply(&spec, hbar, &f).unwrap()).unwrap();
        prop_assert!(back.relative_distance(&f) <= 1e-14);
    }

    #[test]
    fn quantum_transport_composes(k in 0usize..3, seed in any::<u64>(), s1 in 0.1f64..3.0, s2 in 0.1f64..3.0, s3 in 0.1f64..3.0) {
        let spec = family(k);
        let f = PeterWeylVector::random(&spec, 2.0, &mut ChaCha8Rng::seed_from_u64(seed));
        let sigma = QuantumSection::new(s1, 1.0, f).unwrap();
        let two_step = parallel_transport_q(&parallel_transport_q(&sigma, s2).unwrap(), s3).unwrap();
        let direct = parallel_transport_q(&sigma, s3).unwrap();
        prop_assert_eq!(two_step.s(), s3);
        prop_assert!(two_step.datum().relative_distance(direct.datum()) <= 1e-13);
    }

    #[test]
    fn constants_cancel(k in 0usize..3, s in 0.01f64..10.0, hbar0 in 0.01f64..5.0) {
        let spec = family(k);
        let product = a_factor(&spec, s, hbar0).unwrap() * c_hbar(&spec, s * hbar0).unwrap() * s.powf(spec.n() as f64 / 2.0);
        assert_relative_eq!(product, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn representations_are_homomorphisms_on_the_complexification(
        k in 0usize..3, seed in any::<u64>(), r1 in 0.0f64..1.5, r2 in 0.0f64..1.5,
    ) {
        let spec = family(k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = compose_complex(&GroupPoint::random(&spec, &mut rng), 1.0, &AlgebraPoint::random_ball(&spec, &mut rng, r1)).unwrap();
        let h = compose_complex(&GroupPoint::random(&spec, &mut rng), 1.0, &AlgebraPoint::random_ball(&spec, &mut rng, r2)).unwrap();
        let gh = g.mul(&h).unwrap();
        for label in enumerate_irreps(&spec, 6.0) {
            let lhs = representation_matrix(&label, &gh).unwrap();
            let rhs = representation_matrix(&label, &g).unwrap() * representation_matrix(&label, &h).unwrap();
            prop_assert!(max_entry(&(&lhs - &rhs)) <= 1e-12 * max_entry(&rhs).max(1.0), "label {}", label);
        }
    }

    #[test]
    fn representations_are_unitary_on_k(k in 0usize..3, seed in any::<u64>()) {
        let spec = family(k);
        let x = GroupPoint::random(&spec, &mut ChaCha8Rng::seed_from_u64(seed)).embed();
        for label in enumerate_irreps(&spec, 12.0) {
            let m = representation_matrix(&label, &x).unwrap();
            let gram = m.adjoint() * &m;
            let id = DMatrix::<Complex64>::identity(m.nrows(), m.ncols());
            prop_assert!(max_entry(&(gram - id)) <= 1e-13, "label {}", label);
        }
    }

    #[test]
    fn transform_is_equivariant_under_left_translation(k in 0usize..3, seed in any::<u64>(), hbar in 0.1f64..1.0) {
        // C_ℏ commutes with left translation: (C_ℏ L_a f)(g) = (C_ℏ f)(a⁻¹ g).
        let spec = family(k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = PeterWeylVector::random(&spec, 2.0, &mut rng);
        let a = GroupPoint::random(&spec, &mut rng);
        let g = compose_complex(&GroupPoint::random(&spec, &mut rng), 1.0, &AlgebraPoint::random_ball(&spec, &mut rng, 0.5)).unwrap();
        let shifted = a.inverse().embed().mul(&g).unwrap();
        let cf = cst_apply(&spec, hbar, &f).unwrap();
        let translated = left_translate(&spec, &f, &a);
        let lhs = evaluate_on_kc(&cst_apply(&spec, hbar, &translated).unwrap(), &g).unwrap();
        let rhs = evaluate_on_kc(&cf, &shifted).unwrap();
        assert_relative_eq!(lhs.re, rhs.re, epsilon = 1e-12, max_relative = 1e-12);
        assert_relative_eq!(lhs.im, rhs.im, epsilon = 1e-12, max_relative = 1e-12);
    }
}

/// Coefficients of `x ↦ f(a⁻¹x)`: `R(a⁻¹x)_ij = Σ_k R(a⁻¹)_ik R(x)_kj`.
fn left_translate(spec: &GroupSpec, f: &PeterWeylVector, a: &GroupPoint) -> PeterWeylVector {
    let mut out = PeterWeylVector::zero(spec, f.cutoff());
    let ainv = a.inverse().embed();
    for label in f.labels() {
        let m = representation_matrix(&label, &ainv).unwrap();
        for (idx, c) in f.iter().filter(|(i, _)| i.label == label) {
            for kk in 1..=label.dim() {
                let target = cstlab::irreps::MatrixElementIndex {
                    label: label.clone(),
                    i: kk,
                    j: idx.j,
                };
                let prev = out.get(&target);
                out.set(target, prev + c * m[(idx.i - 1, kk - 1)]).unwrap();
            }
        }
    }
    out
}
