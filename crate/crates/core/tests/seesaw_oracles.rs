use cbdec::algebra::AlgebraElement;
use cbdec::cbmin::{cb_norm_linf, evaluate_tensor_norm, min_norm_factorization_sdp, seesaw_min_norm, SeeSawOptions, Verdict};
use cbdec::decnorm::dec_norm_linf;
use cbdec::matrix::{herm_eigensystem, ComplexMatrix, C64};
use cbdec::testkit::{grid_oracle_min_norm, random_coefficients, random_haar_unitary, SeededGenerator};
use proptest::prelude::*;

fn elems(x: &[ComplexMatrix]) -> Vec<AlgebraElement> {
    x.iter().map(|m| AlgebraElement::from_matrix(m.clone()).unwrap()).collect()
}

/// `‖Σ u_i ⊗ x_i‖` by explicit index arithmetic and `λ_max(T*T)`.
fn assembled_norm(u: &[ComplexMatrix], x: &[ComplexMatrix]) -> f64 {
    let (k, d) = (u[0].rows(), x[0].rows());
    let t = ComplexMatrix::from_fn(k * d, k * d, |r, c| {
        let (a, i) = (r / d, r % d);
        let (b, j) = (c / d, c % d);
        u.iter().zip(x).map(|(ui, xi)| ui[(a, b)] * xi[(i, j)]).sum::<C64>()
    });
    herm_eigensystem(&(&t.adjoint() * &t)).unwrap().max_value().max(0.0).sqrt()
}

#[test]
fn tensor_norm_matches_direct_assembly() {
    let mut g = SeededGenerator::new(100);
    for _ in 0..20 {
        let n = 1 + g.index(4);
        let (k, d) = (1 + g.index(3), 1 + g.index(3));
        let u: Vec<ComplexMatrix> = (0..n).map(|_| random_haar_unitary(&mut g, k)).collect();
        let x = random_coefficients(&mut g, n, d);
        let a = evaluate_tensor_norm(&u, &x).unwrap();
        assert!((a - assembled_norm(&u, &x)).abs() <= 1e-12 * a.max(1.0), "{a}");
    }
}

#[test]
fn grid_oracle_agrees_with_seesaw() {
    let mut g = SeededGenerator::new(2024);
    for i in 0..20 {
        let n = 2 + g.index(2);
        let d = 1 + g.index(2);
        let x = random_coefficients(&mut g, n, d);
        let grid = grid_oracle_min_norm(&x).unwrap();
        let see = seesaw_min_norm(&x, &SeeSawOptions { seed: i, ..Default::default() }).unwrap();
        let upper = min_norm_factorization_sdp(&x).unwrap().value;
        assert!((grid - see.lower_bound).abs() <= 1e-3, "instance {i}: grid {grid} see-saw {}", see.lower_bound);
        assert!(grid <= upper + 1e-5, "instance {i}: grid {grid} above upper {upper}");
    }
}

#[test]
fn unitary_coefficients_reach_n() {
    let mut g = SeededGenerator::new(31);
    for n in 1..=4 {
        for d in 1..=3 {
            let x: Vec<ComplexMatrix> = (0..n).map(|_| random_haar_unitary(&mut g, d)).collect();
            for k in [d, d + 1] {
                let r = seesaw_min_norm(&x, &SeeSawOptions { k: Some(k), restarts: 1, ..Default::default() }).unwrap();
                assert!((r.lower_bound - n as f64).abs() <= 1e-8, "n {n} d {d} k {k}: {}", r.lower_bound);
            }
            let f = min_norm_factorization_sdp(&x).unwrap();
            assert!((f.value - n as f64).abs() <= 1e-6);
        }
    }
}

#[test]
fn scalar_agreement_is_tight() {
    let mut g = SeededGenerator::new(7);
    for _ in 0..10 {
        let n = 1 + g.index(5);
        let z: Vec<C64> = (0..n).map(|_| g.complex_normal()).collect();
        let x: Vec<ComplexMatrix> = z.iter().map(|&z| ComplexMatrix::from_diag(&[z])).collect();
        let r = cb_norm_linf(&x, &SeeSawOptions::default()).unwrap();
        assert!(r.gap.abs() <= 1e-8, "gap {}", r.gap);
        let l1: f64 = z.iter().map(|z| z.norm()).sum();
        assert!((r.upper - l1).abs() <= 1e-8);
    }
}

#[test]
fn factorization_value_is_the_dec_value() {
    let mut g = SeededGenerator::new(64);
    for _ in 0..10 {
        let (n, d) = (1 + g.index(4), 1 + g.index(3));
        let x = random_coefficients(&mut g, n, d);
        let f = min_norm_factorization_sdp(&x).unwrap();
        let dec = dec_norm_linf(&elems(&x)).unwrap();
        assert!((f.value - dec.value).abs() <= 1e-7);
        assert!(f.residual <= 1e-6);
        // The factorization attains the value.
        assert!((f.attained - f.value).abs() <= 1e-5, "attained {} value {}", f.attained, f.value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn seesaw_is_monotone_sound_and_unitary(seed in any::<u64>(), n in 1usize..=4, d in 1usize..=3) {
        let x = random_coefficients(&mut SeededGenerator::new(seed), n, d);
        let r = seesaw_min_norm(&x, &SeeSawOptions { restarts: 4, seed, ..Default::default() }).unwrap();
        prop_assert!(r.max_decrease <= 1e-12);
        for u in &r.unitaries {
            prop_assert!(u.unitarity_defect() <= 1e-9);
        }
        prop_assert!(evaluate_tensor_norm(&r.unitaries, &x).unwrap() >= r.lower_bound - 1e-10);
        let upper = min_norm_factorization_sdp(&x).unwrap().value;
        prop_assert!(r.lower_bound <= upper + 1e-6);
    }

    #[test]
    fn larger_auxiliary_space_never_hurts(seed in any::<u64>(), n in 2usize..=3, d in 2usize..=3) {
        let x = random_coefficients(&mut SeededGenerator::new(seed), n, d);
        let base = SeeSawOptions { restarts: 8, seed, ..Default::default() };
        let small = seesaw_min_norm(&x, &SeeSawOptions { k: Some(d), ..base.clone() }).unwrap();
        let large = seesaw_min_norm(&x, &SeeSawOptions { k: Some(2 * d), ..base }).unwrap();
        prop_assert!(large.lower_bound >= small.lower_bound - 1e-9,
            "k=2d {} below k=d {}", large.lower_bound, small.lower_bound);
    }

    #[test]
    fn agreement_on_small_instances(seed in any::<u64>(), n in 2usize..=4, d in 2usize..=3) {
        let x = random_coefficients(&mut SeededGenerator::new(seed), n, d);
        let r = cb_norm_linf(&x, &SeeSawOptions { seed, ..Default::default() }).unwrap();
        prop_assert_eq!(r.verdict, Verdict::Agree, "upper {} lower {}", r.upper, r.lower);
    }
}
