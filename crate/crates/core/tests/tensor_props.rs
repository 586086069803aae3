use cbdec::algebra::{AlgebraElement, AlgebraShape};
use cbdec::cbmin::{SeeSawOptions, Verdict};
use cbdec::cpmap::LinearMapRep;
use cbdec::decnorm::{dec_norm, sandwich_map};
use cbdec::matrix::{operator_norm, ComplexMatrix, C64};
use cbdec::tensor::{check_finite_rank_contraction, max_norm, min_norm, nuclearity_gap, FreeTensor};
use cbdec::testkit::{random_cp_map, random_free_tensor, random_ginibre, random_haar_unitary, SeededGenerator};
use proptest::prelude::*;

fn opts(seed: u64) -> SeeSawOptions {
    SeeSawOptions {
        restarts: 8,
        seed,
        ..Default::default()
    }
}

#[test]
fn all_ones_scalar_tensor_is_n() {
    for n in 1..=5 {
        let t = FreeTensor::new(vec![AlgebraElement::scalar(C64::new(1.0, 0.0)); n]).unwrap();
        assert!((max_norm(&t).unwrap().0 - n as f64).abs() <= 1e-8);
        assert!((min_norm(&t, &opts(0)).unwrap().lower - n as f64).abs() <= 1e-8);
    }
}

#[test]
fn unit_tensor_min_is_norm_of_coefficient() {
    let mut g = SeededGenerator::new(3);
    let x = random_ginibre(&mut g, 3, 3);
    let t = FreeTensor::from_matrices(vec![x.clone()]).unwrap();
    let r = min_norm(&t, &opts(1)).unwrap();
    assert!((r.lower - operator_norm(&x)).abs() <= 1e-10);
    assert_eq!(r.verdict, Verdict::Agree);
}

#[test]
fn multi_block_min_is_blockwise() {
    let mut g = SeededGenerator::new(4);
    let shape = AlgebraShape::new(vec![2, 1]).unwrap();
    let coeffs: Vec<AlgebraElement> = (0..3).map(|_| cbdec::testkit::random_element(&mut g, &shape)).collect();
    let t = FreeTensor::new(coeffs).unwrap();
    let r = min_norm(&t, &opts(2)).unwrap();
    assert_eq!(r.blocks.len(), 2);
    let (max, _) = max_norm(&t).unwrap();
    assert!((max - r.upper).abs() <= 1e-6, "max {max} upper {}", r.upper);
}

#[test]
fn sandwich_contraction() {
    let mut g = SeededGenerator::new(5);
    for _ in 0..5 {
        let t = random_free_tensor(&mut g, 3, 2);
        let mut a = random_ginibre(&mut g, 2, 2);
        a = a.scale_real(1.0 / operator_norm(&a));
        let u = sandwich_map(&a, &a).unwrap();
        let dec_u = dec_norm(&u).unwrap().value;
        assert!(dec_u <= 1.0 + 1e-7);
        let r = check_finite_rank_contraction(&u, dec_u, &t).unwrap();
        assert!(r.holds, "{r:?}");
    }
}

#[test]
fn random_cp_contractions() {
    let mut g = SeededGenerator::new(6);
    for _ in 0..50 {
        let n = 2 + g.index(3);
        let t = random_free_tensor(&mut g, n, 2);
        let target = AlgebraShape::matrix(1 + g.index(3));
        let u = random_cp_map(&mut g, t.shape(), &target);
        let unit_norm = u.unit_image().norm();
        let r = check_finite_rank_contraction(&u, unit_norm, &t).unwrap();
        assert!(r.holds, "{r:?}");
    }
}

#[test]
fn shape_mismatch_is_an_error() {
    let mut g = SeededGenerator::new(7);
    let t = random_free_tensor(&mut g, 2, 2);
    let u = LinearMapRep::identity(&AlgebraShape::matrix(3));
    assert!(check_finite_rank_contraction(&u, 1.0, &t).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn max_norm_is_unitarily_invariant(seed in any::<u64>(), n in 1usize..=4, d in 1usize..=3) {
        let mut g = SeededGenerator::new(seed);
        let t = random_free_tensor(&mut g, n, d);
        let w = AlgebraElement::from_matrix(random_haar_unitary(&mut g, d)).unwrap();
        let a = max_norm(&t).unwrap().0;
        let b = max_norm(&t.conjugate_by(&w).unwrap()).unwrap().0;
        prop_assert!((a - b).abs() <= 1e-7 * a.max(1.0));
    }

    #[test]
    fn permuting_free_generators(seed in any::<u64>(), n in 2usize..=4, d in 1usize..=2) {
        let mut g = SeededGenerator::new(seed);
        let t = random_free_tensor(&mut g, n, d);
        let mut perm: Vec<usize> = (1..n).collect();
        perm.rotate_left(1);
        perm.insert(0, 0);
        let p = t.permute(&perm).unwrap();
        let (a, b) = (max_norm(&t).unwrap().0, max_norm(&p).unwrap().0);
        prop_assert!((a - b).abs() <= 1e-8 * a.max(1.0));
        let (ma, mb) = (min_norm(&t, &opts(seed)).unwrap(), min_norm(&p, &opts(seed)).unwrap());
        prop_assert!((ma.upper - mb.upper).abs() <= 1e-8 * ma.upper.max(1.0));
    }

    #[test]
    fn min_below_max_and_gap_closes(seed in any::<u64>(), n in 2usize..=4, d in 2usize..=3) {
        let t = random_free_tensor(&mut SeededGenerator::new(seed), n, d);
        let r = nuclearity_gap(&t, &SeeSawOptions { seed, ..Default::default() }).unwrap();
        prop_assert!(r.min_lower <= r.max + 1e-6);
        prop_assert_eq!(r.verdict, Verdict::Agree, "{:?}", r);
    }

    #[test]
    fn identity_contraction_is_the_gap_check(seed in any::<u64>(), n in 1usize..=3, d in 1usize..=3) {
        let t = random_free_tensor(&mut SeededGenerator::new(seed), n, d);
        let id = LinearMapRep::identity(t.shape());
        let r = check_finite_rank_contraction(&id, 1.0, &t).unwrap();
        prop_assert!(r.holds);
        prop_assert!((r.lhs - r.min_upper).abs() <= 1e-6 * r.lhs.max(1.0));
    }
}

#[test]
fn unitary_coefficients_give_n() {
    let mut g = SeededGenerator::new(8);
    for d in 1..=3 {
        let coeffs: Vec<ComplexMatrix> = (0..3).map(|_| random_haar_unitary(&mut g, d)).collect();
        let t = FreeTensor::from_matrices(coeffs).unwrap();
        let r = nuclearity_gap(&t, &opts(9)).unwrap();
        assert!((r.max - 3.0).abs() <= 1e-6);
        assert!(r.gap <= 1e-6 && r.seesaw_gap.abs() <= 1e-6);
    }
}
