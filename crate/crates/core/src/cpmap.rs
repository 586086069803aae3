//! Linear maps between finite-dimensional C*-algebras.
//!
//! A map is stored by the images of the matrix-unit basis of its domain, in
//! the order of [`AlgebraShape::basis_index`]. The Choi matrix of domain
//! block `i` (size `d_i`) is
//!
//! ```text
//! C_i = Σ_{r,s} e_{rs} ⊗ u(e^{(i)}_{rs})
//! ```
//!
//! with the domain index major: row `(r, α)` sits at `r·m + α`, where `m` is
//! the representation size of the codomain and `u(·)` is assembled block
//! diagonally. For the identity on `M_2` this gives
//!
//! ```text
//!        (0,0) (0,1) (1,0) (1,1)
//! (0,0) [  1     0     0     1  ]
//! (0,1) [  0     0     0     0  ]
//! (1,0) [  0     0     0     0  ]
//! (1,1) [  1     0     0     1  ]
//! ```
//!
//! i.e. twice the projector onto the maximally entangled vector.

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::error::{Error, Result};
use crate::matrix::{self, ComplexMatrix, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct LinearMapRep {
    domain: AlgebraShape,
    codomain: AlgebraShape,
    images: Vec<AlgebraElement>,
}

impl LinearMapRep {
    pub fn new(domain: AlgebraShape, codomain: AlgebraShape, images: Vec<AlgebraElement>) -> Result<Self> {
        if images.len() != domain.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} images supplied for a domain of dimension {}",
                images.len(),
                domain.total_dim()
            )));
        }
        if let Some(k) = images.iter().position(|x| x.shape() != &codomain) {
            return Err(Error::DimensionMismatch(format!(
                "image {k} has shape {:?}, expected {:?}",
                images[k].shape().block_dims(),
                codomain.block_dims()
            )));
        }
        Ok(Self {
            domain,
            codomain,
            images,
        })
    }

    /// Tabulates `f` on the matrix units of `domain`.
    pub fn from_fn(
        domain: AlgebraShape,
        codomain: AlgebraShape,
        mut f: impl FnMut(&AlgebraElement) -> Result<AlgebraElement>,
    ) -> Result<Self> {
        let images = (0..domain.total_dim())
            .map(|k| f(&AlgebraElement::basis_element(&domain, k)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, codomain, images)
    }

    /// The map `ℓ_∞^n → A`, `e_j ↦ x_j`.
    pub fn from_linf(coeffs: &[AlgebraElement]) -> Result<Self> {
        LinfMap::new(coeffs.to_vec())?.to_map()
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let images = (0..shape.total_dim())
            .map(|k| AlgebraElement::basis_element(shape, k))
            .collect();
        Self {
            domain: shape.clone(),
            codomain: shape.clone(),
            images,
        }
    }

    pub fn zero(domain: &AlgebraShape, codomain: &AlgebraShape) -> Self {
        Self {
            domain: domain.clone(),
            codomain: codomain.clone(),
            images: vec![AlgebraElement::zeros(codomain); domain.total_dim()],
        }
    }

    pub fn domain(&self) -> &AlgebraShape {
        &self.domain
    }

    pub fn codomain(&self) -> &AlgebraShape {
        &self.codomain
    }

    pub fn images(&self) -> &[AlgebraElement] {
        &self.images
    }

    /// `u(e^{(block)}_{rs})`.
    pub fn image(&self, block: usize, r: usize, s: usize) -> &AlgebraElement {
        &self.images[self.domain.basis_index(block, r, s)]
    }

    /// The coefficients `x_j = u(e_j)` when the domain is `ℓ_∞^n`.
    pub fn linf_coefficients(&self) -> Option<&[AlgebraElement]> {
        self.domain.is_commutative().then_some(self.images.as_slice())
    }

    /// `u(x) = Σ x_{rs} u(e_{rs})`.
    pub fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        if x.shape() != &self.domain {
            return Err(Error::DimensionMismatch(format!(
                "argument shape {:?} does not match domain {:?}",
                x.shape().block_dims(),
                self.domain.block_dims()
            )));
        }
        let mut out = AlgebraElement::zeros(&self.codomain);
        for (c, img) in x.coordinates().into_iter().zip(&self.images) {
            if c != C64::new(0.0, 0.0) {
                out.axpy(c, img)?;
            }
        }
        Ok(out)
    }

    pub fn unit_image(&self) -> AlgebraElement {
        self.apply(&AlgebraElement::unit(&self.domain))
            .expect("unit has the domain shape")
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.unit_image()
            .sub(&AlgebraElement::unit(&self.codomain))
            .map(|d| d.norm() <= tol)
            .unwrap_or(false)
    }

    /// `v ∘ u`.
    pub fn compose(v: &Self, u: &Self) -> Result<Self> {
        if u.codomain != v.domain {
            return Err(Error::DimensionMismatch(format!(
                "codomain {:?} of the inner map does not match domain {:?} of the outer map",
                u.codomain.block_dims(),
                v.domain.block_dims()
            )));
        }
        let images = u
            .images
            .iter()
            .map(|x| v.apply(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            domain: u.domain.clone(),
            codomain: v.codomain.clone(),
            images,
        })
    }

    /// `u1 ⊗ u2 : M_{n1 n2} → M_{m1 m2}`, with Kronecker index ordering on both sides.
    pub fn tensor(u1: &Self, u2: &Self) -> Result<Self> {
        for (name, s) in [
            ("first domain", &u1.domain),
            ("first codomain", &u1.codomain),
            ("second domain", &u2.domain),
            ("second codomain", &u2.codomain),
        ] {
            if !s.is_single_block() {
                return Err(Error::InvalidInput(format!(
                    "tensor product needs matrix algebras; {name} has blocks {:?}",
                    s.block_dims()
                )));
            }
        }
        let (n1, n2) = (u1.domain.block_dims()[0], u2.domain.block_dims()[0]);
        let domain = AlgebraShape::matrix(n1 * n2);
        let codomain = AlgebraShape::matrix(u1.codomain.block_dims()[0] * u2.codomain.block_dims()[0]);
        let n = n1 * n2;
        let mut images = Vec::with_capacity(n * n);
        for row in 0..n {
            for col in 0..n {
                let (r1, r2) = (row / n2, row % n2);
                let (s1, s2) = (col / n2, col % n2);
                let a = u1.image(0, r1, s1).block(0);
                let b = u2.image(0, r2, s2).block(0);
                images.push(AlgebraElement::from_matrix(a.kron(b))?);
            }
        }
        Ok(Self {
            domain,
            codomain,
            images,
        })
    }

    /// `u_*(x) = u(x*)*`.
    pub fn star_map(&self) -> Self {
        let images = (0..self.domain.total_dim())
            .map(|k| {
                let (b, r, s) = self.domain.basis_label(k);
                self.image(b, s, r).adjoint()
            })
            .collect();
        Self {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            images,
        }
    }

    /// One Choi matrix per domain block, each of size `d_i · rep_size(codomain)`.
    pub fn choi(&self) -> Vec<ComplexMatrix> {
        let m = self.codomain.rep_size();
        self.domain
            .block_dims()
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let mut c = ComplexMatrix::zeros(d * m, d * m);
                for r in 0..d {
                    for s in 0..d {
                        c.set_submatrix(r * m, s * m, &self.image(i, r, s).to_block_diag());
                    }
                }
                c
            })
            .collect()
    }

    /// Choi matrices split by codomain block: entry `[i][b]` has size `d_i · m_b`.
    /// The full Choi matrix of domain block `i` is a permutation of the
    /// direct sum over `b`.
    pub fn choi_split(&self) -> Vec<Vec<ComplexMatrix>> {
        self.domain
            .block_dims()
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                self.codomain
                    .block_dims()
                    .iter()
                    .enumerate()
                    .map(|(b, &m)| {
                        let mut c = ComplexMatrix::zeros(d * m, d * m);
                        for r in 0..d {
                            for s in 0..d {
                                c.set_submatrix(r * m, s * m, self.image(i, r, s).block(b));
                            }
                        }
                        c
                    })
                    .collect()
            })
            .collect()
    }

    /// Inverse of [`choi`](Self::choi). Entries outside the codomain's block
    /// diagonal are ignored.
    pub fn from_choi(domain: &AlgebraShape, codomain: &AlgebraShape, blocks: &[ComplexMatrix]) -> Result<Self> {
        let m = codomain.rep_size();
        if blocks.len() != domain.num_blocks() {
            return Err(Error::DimensionMismatch(format!(
                "{} Choi blocks for {} domain blocks",
                blocks.len(),
                domain.num_blocks()
            )));
        }
        let mut images = Vec::with_capacity(domain.total_dim());
        for (i, (&d, c)) in domain.block_dims().iter().zip(blocks).enumerate() {
            if c.rows() != d * m || c.cols() != d * m {
                return Err(Error::DimensionMismatch(format!(
                    "Choi block {i} is {}x{}, expected {}x{}",
                    c.rows(),
                    c.cols(),
                    d * m,
                    d * m
                )));
            }
            for r in 0..d {
                for s in 0..d {
                    images.push(AlgebraElement::from_block_diag(codomain, &c.submatrix(r * m, s * m, m, m))?);
                }
            }
        }
        Self::new(domain.clone(), codomain.clone(), images)
    }

    /// Inverse of [`choi_split`](Self::choi_split).
    pub fn from_choi_split(
        domain: &AlgebraShape,
        codomain: &AlgebraShape,
        blocks: &[Vec<ComplexMatrix>],
    ) -> Result<Self> {
        if blocks.len() != domain.num_blocks() {
            return Err(Error::DimensionMismatch("Choi block count".into()));
        }
        let mut images = Vec::with_capacity(domain.total_dim());
        for (&d, per_b) in domain.block_dims().iter().zip(blocks) {
            if per_b.len() != codomain.num_blocks() {
                return Err(Error::DimensionMismatch("Choi codomain block count".into()));
            }
            for r in 0..d {
                for s in 0..d {
                    let parts = codomain
                        .block_dims()
                        .iter()
                        .zip(per_b)
                        .map(|(&m, c)| {
                            if c.rows() != d * m || c.cols() != d * m {
                                return Err(Error::DimensionMismatch("Choi block size".into()));
                            }
                            Ok(c.submatrix(r * m, s * m, m, m))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    images.push(AlgebraElement::new(codomain.clone(), parts)?);
                }
            }
        }
        Self::new(domain.clone(), codomain.clone(), images)
    }

    /// Completely positive within `tol`: every Choi block is Hermitian and
    /// has spectrum above `−tol`. For `ℓ_∞^n` domains this is positivity of
    /// each image.
    pub fn is_cp(&self, tol: f64) -> bool {
        self.min_choi_eigenvalue()
            .map(|(defect, l)| defect <= tol && l >= -tol)
            .unwrap_or(false)
    }

    /// `(Hermitian defect, smallest eigenvalue)` over all Choi blocks.
    pub fn min_choi_eigenvalue(&self) -> Result<(f64, f64)> {
        let mut defect: f64 = 0.0;
        let mut lmin = f64::INFINITY;
        for per_b in self.choi_split() {
            for c in per_b {
                defect = defect.max(c.hermitian_defect());
                lmin = lmin.min(matrix::min_eigenvalue(&c)?);
            }
        }
        Ok((defect, lmin))
    }

    fn check_same_spaces(&self, other: &Self) -> Result<()> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::DimensionMismatch("maps act between different algebras".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_spaces(other)?;
        let images = self
            .images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            images,
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            images: self.images.iter().map(|x| x.scale(s)).collect(),
        }
    }

    /// Largest image-wise difference.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_same_spaces(other)?;
        let mut d: f64 = 0.0;
        for (a, b) in self.images.iter().zip(&other.images) {
            d = d.max(a.sub(b)?.norm());
        }
        Ok(d)
    }

    /// The compressed map `p_b u` into codomain block `b`.
    pub fn codomain_block(&self, b: usize) -> Result<Self> {
        let dims = self.codomain.block_dims();
        if b >= dims.len() {
            return Err(Error::InvalidInput(format!("codomain has no block {b}")));
        }
        let codomain = AlgebraShape::matrix(dims[b]);
        let images = self
            .images
            .iter()
            .map(|x| AlgebraElement::new(codomain.clone(), vec![x.block(b).clone()]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            domain: self.domain.clone(),
            codomain,
            images,
        })
    }

    /// Joins maps with a common domain into one map into the direct sum of their codomains.
    pub fn direct_sum(maps: &[Self]) -> Result<Self> {
        let first = maps
            .first()
            .ok_or_else(|| Error::InvalidInput("direct sum of no maps".into()))?;
        let mut codomain = first.codomain.clone();
        for u in &maps[1..] {
            if u.domain != first.domain {
                return Err(Error::DimensionMismatch("direct sum needs a common domain".into()));
            }
            codomain = codomain.direct_sum(&u.codomain);
        }
        let images = (0..first.domain.total_dim())
            .map(|k| {
                let blocks = maps
                    .iter()
                    .flat_map(|u| u.images[k].blocks().iter().cloned())
                    .collect();
                AlgebraElement::new(codomain.clone(), blocks)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            domain: first.domain.clone(),
            codomain,
            images,
        })
    }
}

/// Compact form of a map `ℓ_∞^n → A`: the coefficient list `x_j = T(e_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinfMap {
    coeffs: Vec<AlgebraElement>,
}

impl LinfMap {
    pub fn new(coeffs: Vec<AlgebraElement>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidInput("at least one coefficient is required".into()))?;
        if let Some(j) = coeffs.iter().position(|x| x.shape() != first.shape()) {
            return Err(Error::DimensionMismatch(format!(
                "coefficient {j} has shape {:?}, expected {:?}",
                coeffs[j].shape().block_dims(),
                first.shape().block_dims()
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[AlgebraElement] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn codomain(&self) -> &AlgebraShape {
        self.coeffs[0].shape()
    }

    pub fn to_map(&self) -> Result<LinearMapRep> {
        LinearMapRep::new(
            AlgebraShape::commutative(self.coeffs.len()),
            self.codomain().clone(),
            self.coeffs.clone(),
        )
    }

    pub fn from_map(u: &LinearMapRep) -> Result<Self> {
        let coeffs = u
            .linf_coefficients()
            .ok_or_else(|| Error::InvalidInput("domain is not commutative".into()))?;
        Self::new(coeffs.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample_map(domain: &AlgebraShape, codomain: &AlgebraShape, seed: f64) -> LinearMapRep {
        let images = (0..domain.total_dim())
            .map(|k| {
                let coords: Vec<C64> = (0..codomain.total_dim())
                    .map(|l| c(((k * 7 + l) as f64 * 0.37 + seed).sin(), ((k + 3 * l) as f64 * 0.91 - seed).cos()))
                    .collect();
                AlgebraElement::from_coordinates(codomain, &coords).unwrap()
            })
            .collect();
        LinearMapRep::new(domain.clone(), codomain.clone(), images).unwrap()
    }

    #[test]
    fn choi_of_identity_on_m2() {
        let choi = LinearMapRep::identity(&AlgebraShape::matrix(2)).choi();
        assert_eq!(choi.len(), 1);
        let expected = ComplexMatrix::from_real(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 1.0,
            ],
        )
        .unwrap();
        assert_eq!(choi[0], expected);
    }

    #[test]
    fn choi_of_depolarizing() {
        let d = 3;
        let shape = AlgebraShape::matrix(d);
        let u = LinearMapRep::from_fn(shape.clone(), shape.clone(), |x| {
            Ok(AlgebraElement::unit(&shape).scale(x.block(0).trace() / d as f64))
        })
        .unwrap();
        let choi = &u.choi()[0];
        let expected = ComplexMatrix::identity(d * d).scale_real(1.0 / d as f64);
        assert!((choi - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn choi_round_trip() {
        let dom = AlgebraShape::new(vec![2, 1]).unwrap();
        let cod = AlgebraShape::new(vec![1, 2]).unwrap();
        let u = sample_map(&dom, &cod, 0.2);
        let back = LinearMapRep::from_choi(&dom, &cod, &u.choi()).unwrap();
        assert!(u.distance(&back).unwrap() <= 1e-12);
        let back = LinearMapRep::from_choi_split(&dom, &cod, &u.choi_split()).unwrap();
        assert!(u.distance(&back).unwrap() <= 1e-12);
    }

    #[test]
    fn sandwich_is_cp_transpose_is_not() {
        let shape = AlgebraShape::matrix(2);
        let a = ComplexMatrix::from_rows(&[vec![c(1.0, 0.5), c(0.0, 0.2)], vec![c(-0.3, 0.0), c(0.7, -1.0)]]).unwrap();
        let u = LinearMapRep::from_fn(shape.clone(), shape.clone(), |x| {
            AlgebraElement::from_matrix(&(&a.adjoint() * x.block(0)) * &a)
        })
        .unwrap();
        assert!(u.is_cp(1e-12));
        assert!(LinearMapRep::identity(&shape).is_cp(1e-12));

        let t = LinearMapRep::from_fn(shape.clone(), shape.clone(), |x| {
            AlgebraElement::from_matrix(x.block(0).transpose())
        })
        .unwrap();
        assert!(!t.is_cp(1e-9));
        let (_, lmin) = t.min_choi_eigenvalue().unwrap();
        assert!((lmin + 1.0).abs() < 1e-12);
    }

    #[test]
    fn star_map_examples() {
        let shape = AlgebraShape::matrix(2);
        let u = LinearMapRep::from_fn(shape.clone(), shape.clone(), |x| {
            Ok(AlgebraElement::unit(&shape).scale(c(0.0, 1.0) * x.block(0).trace()))
        })
        .unwrap();
        let expected = u.scale(c(-1.0, 0.0));
        assert!(u.star_map().distance(&expected).unwrap() < 1e-15);

        let id = LinearMapRep::identity(&shape);
        assert!(id.star_map().distance(&id).unwrap() < 1e-15);

        let v = sample_map(&AlgebraShape::new(vec![2, 1]).unwrap(), &shape, 1.3);
        assert!(v.star_map().star_map().distance(&v).unwrap() <= 1e-12);
    }

    #[test]
    fn compose_tensor_apply() {
        let m2 = AlgebraShape::matrix(2);
        let u = sample_map(&m2, &AlgebraShape::matrix(3), 0.4);
        let id3 = LinearMapRep::identity(&AlgebraShape::matrix(3));
        assert!(LinearMapRep::compose(&id3, &u).unwrap().distance(&u).unwrap() < 1e-15);

        let id2 = LinearMapRep::identity(&m2);
        let t = LinearMapRep::tensor(&id2, &id2).unwrap();
        let id4 = LinearMapRep::identity(&AlgebraShape::matrix(4));
        assert!(t.distance(&id4).unwrap() < 1e-15);

        let x = AlgebraElement::from_matrix(
            ComplexMatrix::from_rows(&[vec![c(0.3, 0.1), c(-1.0, 0.0)], vec![c(0.0, 2.0), c(0.5, 0.5)]]).unwrap(),
        )
        .unwrap();
        let mut expected = AlgebraElement::zeros(u.codomain());
        for r in 0..2 {
            for s in 0..2 {
                expected.axpy(x.block(0)[(r, s)], u.image(0, r, s)).unwrap();
            }
        }
        assert!(u.apply(&x).unwrap().sub(&expected).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn tensor_rejects_direct_sums() {
        let u = LinearMapRep::identity(&AlgebraShape::commutative(2));
        assert!(matches!(LinearMapRep::tensor(&u, &u), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn compose_rejects_mismatch() {
        let u = LinearMapRep::identity(&AlgebraShape::matrix(2));
        let v = LinearMapRep::identity(&AlgebraShape::matrix(3));
        assert!(LinearMapRep::compose(&v, &u).is_err());
    }

    #[test]
    fn choi_is_linear() {
        let dom = AlgebraShape::matrix(2);
        let cod = AlgebraShape::new(vec![2, 1]).unwrap();
        let u = sample_map(&dom, &cod, 0.1);
        let v = sample_map(&dom, &cod, 0.9);
        let alpha = c(0.3, -1.2);
        let lhs = u.scale(alpha).add(&v).unwrap().choi();
        let (cu, cv) = (u.choi(), v.choi());
        for i in 0..lhs.len() {
            let rhs = &cu[i].scale(alpha) + &cv[i];
            assert!((&lhs[i] - &rhs).max_abs() <= 1e-13);
        }
    }

    #[test]
    fn direct_sum_and_block_projection() {
        let dom = AlgebraShape::commutative(2);
        let u1 = sample_map(&dom, &AlgebraShape::matrix(2), 0.5);
        let u2 = sample_map(&dom, &AlgebraShape::matrix(1), 0.8);
        let joint = LinearMapRep::direct_sum(&[u1.clone(), u2.clone()]).unwrap();
        assert_eq!(joint.codomain().block_dims(), &[2, 1]);
        assert_eq!(joint.codomain_block(0).unwrap(), u1);
        assert_eq!(joint.codomain_block(1).unwrap(), u2);
    }

    #[test]
    fn linf_round_trip() {
        let x: Vec<AlgebraElement> = (0..3)
            .map(|j| AlgebraElement::from_matrix(ComplexMatrix::from_real_diag(&[j as f64, 1.0])).unwrap())
            .collect();
        let u = LinearMapRep::from_linf(&x).unwrap();
        assert_eq!(u.linf_coefficients().unwrap(), x.as_slice());
        assert_eq!(LinfMap::from_map(&u).unwrap().coeffs(), x.as_slice());
        assert!(LinfMap::new(vec![]).is_err());
    }
}
