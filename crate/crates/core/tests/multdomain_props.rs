use cbdec::algebra::{AlgebraElement, AlgebraShape};
use cbdec::cpmap::LinearMapRep;
use cbdec::matrix::{ComplexMatrix, C64};
use cbdec::multdomain::{depolarizing, multiplicative_domain, pinching, verify_bimodularity};
use cbdec::testkit::{random_haar_unitary, random_unital_cp_map, SeededGenerator};
use proptest::prelude::*;

/// Dimension of the pinching's domain by enumerating the matrix-unit conditions:
/// `e_rs` passes iff every left and right product with a matrix unit commutes with the map.
fn pinching_oracle(d: usize) -> usize {
    let diag = |r: usize, s: usize| r == s;
    let mut count = 0;
    for r in 0..d {
        for s in 0..d {
            // u(e_ij e_rs) = u(e_ij) u(e_rs) for all i, j, and the mirrored identity.
            let ok = (0..d).all(|i| {
                (0..d).all(|j| {
                    let prod_left = if j == r { diag(i, s) } else { false };
                    let maps_left = diag(i, j) && diag(r, s) && j == r;
                    let prod_right = if s == i { diag(r, j) } else { false };
                    let maps_right = diag(r, s) && diag(i, j) && s == i;
                    prod_left == maps_left && prod_right == maps_right
                })
            });
            count += usize::from(ok);
        }
    }
    count
}

#[test]
fn pinching_matches_enumeration() {
    for d in 1..=4 {
        let m = multiplicative_domain(&pinching(d)).unwrap();
        assert_eq!(m.basis.dimension, pinching_oracle(d));
        assert_eq!(m.basis.dimension, d);
    }
}

#[test]
fn depolarizing_and_identity() {
    for d in 1..=3 {
        assert_eq!(multiplicative_domain(&depolarizing(d)).unwrap().basis.dimension, 1);
        let id = LinearMapRep::identity(&AlgebraShape::matrix(d));
        let m = multiplicative_domain(&id).unwrap();
        assert_eq!(m.basis.dimension, d * d);
        let r = verify_bimodularity(&id, &m.basis, 16, 1).unwrap();
        assert!(r.max_residual <= 1e-13);
    }
}

/// `x ↦ w* x w ⊕ x` from `M_d` into `M_d ⊕ M_d`, a unital *-homomorphism.
fn homomorphism(d: usize, w: &ComplexMatrix) -> LinearMapRep {
    let codomain = AlgebraShape::new(vec![d, d]).unwrap();
    LinearMapRep::from_fn(AlgebraShape::matrix(d), codomain.clone(), |x| {
        let m = x.block(0);
        AlgebraElement::new(codomain.clone(), vec![&(&w.adjoint() * m) * w, m.clone()])
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn homomorphisms_are_multiplicative_everywhere(seed in any::<u64>(), d in 1usize..=3) {
        let w = random_haar_unitary(&mut SeededGenerator::new(seed), d);
        let u = homomorphism(d, &w);
        let m = multiplicative_domain(&u).unwrap();
        prop_assert_eq!(m.basis.dimension, d * d);
        for a in &m.basis.basis {
            for b in &m.basis.basis {
                let lhs = u.apply(&a.multiply(b).unwrap()).unwrap();
                let rhs = u.apply(a).unwrap().multiply(&u.apply(b).unwrap()).unwrap();
                prop_assert!(lhs.sub(&rhs).unwrap().norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn domain_is_a_unital_star_algebra(seed in any::<u64>(), d in 2usize..=3, kraus in 1usize..=3) {
        let u = random_unital_cp_map(&mut SeededGenerator::new(seed), d, d, kraus).unwrap();
        let m = multiplicative_domain(&u).unwrap();
        prop_assert!(m.closure.unit <= 1e-9);
        prop_assert!(m.closure.adjoint <= 1e-9);
        prop_assert!(m.closure.product <= 1e-9);
        prop_assert!(m.schwarz_residual <= 1e-9);
        let r = verify_bimodularity(&u, &m.basis, 8, seed).unwrap();
        prop_assert!(r.max_residual <= 1e-8);
    }

    #[test]
    fn composition_keeps_common_elements(seed in any::<u64>(), d in 2usize..=3) {
        let mut g = SeededGenerator::new(seed);
        let w = random_haar_unitary(&mut g, d);
        // v is conjugation by w (domain everything), u a pinching after it.
        let v = LinearMapRep::from_fn(AlgebraShape::matrix(d), AlgebraShape::matrix(d), |x| {
            AlgebraElement::from_matrix(&(&w.adjoint() * x.block(0)) * &w)
        })
        .unwrap();
        let u = pinching(d);
        let uv = LinearMapRep::compose(&u, &v).unwrap();
        let dv = multiplicative_domain(&v).unwrap().basis;
        let du = multiplicative_domain(&u).unwrap().basis;
        let duv = multiplicative_domain(&uv).unwrap().basis;
        // Elements a in D_v with v(a) in D_u lie in D_{uv}.
        let mut common = 0;
        for b in &du.basis {
            let a = v_inverse(&w, b);
            if dv.contains(&a, 1e-9).unwrap() {
                prop_assert!(duv.contains(&a, 1e-8).unwrap());
                common += 1;
            }
        }
        prop_assert!(duv.dimension >= common);
    }
}

fn v_inverse(w: &ComplexMatrix, b: &AlgebraElement) -> AlgebraElement {
    AlgebraElement::from_matrix(&(w * b.block(0)) * &w.adjoint()).unwrap()
}

#[test]
fn non_member_is_flagged() {
    let u = pinching(3);
    let shape = AlgebraShape::matrix(3);
    let mut a = AlgebraElement::unit(&shape);
    a.axpy(C64::new(1.0, 0.0), &AlgebraElement::matrix_unit(&shape, 0, 0, 2)).unwrap();
    let x = AlgebraElement::matrix_unit(&shape, 0, 2, 0);
    let (l, _, t) = cbdec::multdomain::bimodularity_residual(&u, &a, &x, &AlgebraElement::unit(&shape)).unwrap();
    assert!(l.max(t) > 1e-3);
}
