use cbdec::algebra::{AlgebraElement, AlgebraShape};
use cbdec::cpmap::LinearMapRep;
use cbdec::decnorm::{
    dec_norm, dec_norm_direct_sum, dec_norm_linf, dec_norm_matrix_domain, dec_upper_bound_factored,
    extract_factorization, factored_map, sandwich_map, selfadjoint_dec_norm,
};
use cbdec::matrix::{operator_norm, ComplexMatrix, C64};
use cbdec::testkit::{random_element, random_ginibre, random_map, random_psd, random_self_adjoint, SeededGenerator};
use proptest::prelude::*;

fn random_list(g: &mut SeededGenerator, n: usize, shape: &AlgebraShape) -> Vec<AlgebraElement> {
    (0..n).map(|_| random_element(g, shape)).collect()
}

fn shape_from(g: &mut SeededGenerator) -> AlgebraShape {
    match g.index(4) {
        0 => AlgebraShape::matrix(1),
        1 => AlgebraShape::matrix(2),
        2 => AlgebraShape::matrix(3),
        _ => AlgebraShape::new(vec![2, 1]).unwrap(),
    }
}

/// `min_θ (Σ|x|^{2θ})^{1/2} (Σ|x|^{2−2θ})^{1/2}` over a grid in `θ ∈ [0, 1]`,
/// from the scalar factorizations `a_j = |x_j|^θ`, `b_j = x_j / a_j`.
fn scalar_sweep(z: &[C64]) -> f64 {
    (0..=2000)
        .map(|k| {
            let t = k as f64 / 2000.0;
            let a: f64 = z.iter().map(|z| z.norm().powf(2.0 * t)).sum();
            let b: f64 = z.iter().map(|z| z.norm().powf(2.0 - 2.0 * t)).sum();
            (a * b).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn scalar_value_matches_sweep_oracle() {
    let mut g = SeededGenerator::new(11);
    for _ in 0..10 {
        let z: Vec<C64> = (0..1 + g.index(6)).map(|_| g.complex_normal()).collect();
        let x: Vec<AlgebraElement> = z.iter().map(|&z| AlgebraElement::scalar(z)).collect();
        let v = dec_norm_linf(&x).unwrap().value;
        assert!((v - scalar_sweep(&z)).abs() <= 1e-8, "{v} vs {}", scalar_sweep(&z));
    }
}

#[test]
fn matrix_domain_scalar_map_is_trace_norm() {
    let mut g = SeededGenerator::new(12);
    for n in 1..=4 {
        let c = random_ginibre(&mut g, n, n);
        let u = LinearMapRep::from_fn(AlgebraShape::matrix(n), AlgebraShape::matrix(1), |x| {
            let m = x.block(0);
            let mut z = C64::new(0.0, 0.0);
            for r in 0..n {
                for s in 0..n {
                    z += m[(r, s)] * c[(r, s)];
                }
            }
            Ok(AlgebraElement::scalar(z))
        })
        .unwrap();
        let v = dec_norm_matrix_domain(&u).unwrap().value;
        let tn = cbdec::matrix::trace_norm(&c).unwrap();
        assert!((v - tn).abs() <= 1e-7, "{v} vs {tn}");
    }
}

#[test]
fn selfadjoint_examples() {
    let shape = AlgebraShape::matrix(2);
    let x = AlgebraElement::from_matrix(ComplexMatrix::from_real_diag(&[1.0, -1.0])).unwrap();
    assert!((selfadjoint_dec_norm(&[x]).unwrap().value - 1.0).abs() <= 2e-6);
    let mut g = SeededGenerator::new(13);
    let pos: Vec<AlgebraElement> = (0..3)
        .map(|_| AlgebraElement::from_matrix(random_psd(&mut g, 2, 2)).unwrap())
        .collect();
    let sum = cbdec::algebra::sum_elements(&pos).unwrap();
    assert!((selfadjoint_dec_norm(&pos).unwrap().value - sum.norm()).abs() <= 2e-6);
    let sa: Vec<AlgebraElement> = (0..3).map(|_| random_self_adjoint(&mut g, &shape)).collect();
    let a = selfadjoint_dec_norm(&sa).unwrap().value;
    let b = dec_norm_linf(&sa).unwrap().value;
    assert!((a - b).abs() <= 2e-6);
}

#[test]
fn extract_factorization_unitary() {
    let mut g = SeededGenerator::new(14);
    let u = cbdec::testkit::random_haar_unitary(&mut g, 3);
    let x = AlgebraElement::from_matrix(u).unwrap();
    let one = AlgebraElement::unit(&AlgebraShape::matrix(3));
    let f = extract_factorization(&[x.clone()], &[one.clone()], &[one]).unwrap();
    assert!(f.residual <= 1e-10);
    assert!(f.a[0].adjoint().multiply(&f.b[0]).unwrap().sub(&x).unwrap().norm() <= 1e-10);
}

#[test]
fn sandwich_bound() {
    let mut g = SeededGenerator::new(15);
    for _ in 0..5 {
        let a = random_ginibre(&mut g, 2, 3);
        let b = random_ginibre(&mut g, 2, 3);
        let u = sandwich_map(&a, &b).unwrap();
        let v = dec_norm(&u).unwrap().value;
        assert!(v <= operator_norm(&a) * operator_norm(&b) + 1e-7);
    }
}

#[test]
fn identity_is_one_and_copies_do_not_change_direct_sums() {
    for n in 1..=3 {
        let id = LinearMapRep::identity(&AlgebraShape::matrix(n));
        assert!((dec_norm(&id).unwrap().value - 1.0).abs() <= 1e-7);
        let r = dec_norm_direct_sum(&[id.clone(), id]).unwrap();
        assert!((r.joint - 1.0).abs() <= 1e-6 && r.discrepancy <= 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn certificate_invariants(seed in any::<u64>(), n in 1usize..=4) {
        let mut g = SeededGenerator::new(seed);
        let shape = shape_from(&mut g);
        let x = random_list(&mut g, n, &shape);
        let c = dec_norm_linf(&x).unwrap();
        let chk = c.check().unwrap();
        prop_assert!(chk.coupling_min_eigenvalue >= -1e-7);
        prop_assert!(chk.sum_p_norm <= c.value + 1e-7);
        prop_assert!(chk.sum_q_norm <= c.value + 1e-7);
        prop_assert!(chk.reconstruction_residual <= 1e-6);
        prop_assert!(chk.factor_bound <= c.value + 1e-5);
        prop_assert!(c.lower_bound <= c.value + 1e-7);
    }

    #[test]
    fn homogeneous(seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let mut g = SeededGenerator::new(seed);
        let x = random_list(&mut g, 3, &AlgebraShape::matrix(2));
        let lambda = C64::new(re, im);
        let scaled: Vec<AlgebraElement> = x.iter().map(|e| e.scale(lambda)).collect();
        let a = dec_norm_linf(&x).unwrap().value;
        let b = dec_norm_linf(&scaled).unwrap().value;
        prop_assert!((b - lambda.norm() * a).abs() <= 1e-8 * (lambda.norm() * a).max(1.0));
    }

    #[test]
    fn triangle(seed in any::<u64>(), n in 1usize..=3) {
        let mut g = SeededGenerator::new(seed);
        let shape = shape_from(&mut g);
        let x = random_list(&mut g, n, &shape);
        let y = random_list(&mut g, n, &shape);
        let s: Vec<AlgebraElement> = x.iter().zip(&y).map(|(a, b)| a.add(b).unwrap()).collect();
        let (vx, vy, vs) = (
            dec_norm_linf(&x).unwrap().value,
            dec_norm_linf(&y).unwrap().value,
            dec_norm_linf(&s).unwrap().value,
        );
        prop_assert!(vs <= vx + vy + 1e-7);
    }

    #[test]
    fn cp_case_is_norm_of_sum(seed in any::<u64>(), n in 1usize..=4, d in 1usize..=3) {
        let mut g = SeededGenerator::new(seed);
        let x: Vec<AlgebraElement> = (0..n)
            .map(|_| {
                let r = 1 + g.index(d);
                AlgebraElement::from_matrix(random_psd(&mut g, d, r)).unwrap()
            })
            .collect();
        let sum = cbdec::algebra::sum_elements(&x).unwrap();
        let v = dec_norm_linf(&x).unwrap().value;
        prop_assert!((v - sum.norm()).abs() <= 1e-7 * sum.norm().max(1.0));
    }

    #[test]
    fn submultiplicative(seed in any::<u64>(), a in 1usize..=2, b in 1usize..=2, c in 1usize..=2) {
        let mut g = SeededGenerator::new(seed);
        let u = random_map(&mut g, &AlgebraShape::matrix(a), &AlgebraShape::matrix(b));
        let v = random_map(&mut g, &AlgebraShape::matrix(b), &AlgebraShape::matrix(c));
        let vu = LinearMapRep::compose(&v, &u).unwrap();
        let lhs = dec_norm(&vu).unwrap().value;
        prop_assert!(lhs <= dec_norm(&v).unwrap().value * dec_norm(&u).unwrap().value + 1e-6);
    }

    #[test]
    fn factored_bound_dominates(seed in any::<u64>(), n in 1usize..=3, d in 1usize..=2, k in 1usize..=2) {
        let mut g = SeededGenerator::new(seed);
        let shape = AlgebraShape::matrix(d);
        let a: Vec<Vec<AlgebraElement>> = (0..k).map(|_| random_list(&mut g, n, &shape)).collect();
        let b: Vec<Vec<AlgebraElement>> = (0..k).map(|_| random_list(&mut g, n, &shape)).collect();
        let bound = dec_upper_bound_factored(&a, &b).unwrap();
        let v = dec_norm(&factored_map(&a, &b).unwrap()).unwrap().value;
        prop_assert!(bound >= v - 1e-6);
    }

    #[test]
    fn tensor_submultiplicative(seed in any::<u64>(), n1 in 1usize..=2, d1 in 1usize..=2, n2 in 1usize..=2, d2 in 1usize..=2) {
        let mut g = SeededGenerator::new(seed);
        let u1 = random_map(&mut g, &AlgebraShape::matrix(n1), &AlgebraShape::matrix(d1));
        let u2 = random_map(&mut g, &AlgebraShape::matrix(n2), &AlgebraShape::matrix(d2));
        let t = dec_norm(&LinearMapRep::tensor(&u1, &u2).unwrap()).unwrap().value;
        prop_assert!(t <= dec_norm(&u1).unwrap().value * dec_norm(&u2).unwrap().value + 1e-5);
    }

    #[test]
    fn direct_sum_is_blockwise_max(seed in any::<u64>(), n in 1usize..=3) {
        let mut g = SeededGenerator::new(seed);
        let domain = AlgebraShape::commutative(n);
        let maps: Vec<LinearMapRep> = (0..2)
            .map(|_| {
                let d = 1 + g.index(2);
                random_map(&mut g, &domain, &AlgebraShape::matrix(d))
            })
            .collect();
        let r = dec_norm_direct_sum(&maps).unwrap();
        prop_assert!(r.discrepancy <= 1e-6);
    }
}
