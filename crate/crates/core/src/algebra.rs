//! Finite-dimensional C*-algebras `⊕_i M_{d_i}` and their elements.
//!
//! The commutative algebra `ℓ_∞^n` is the shape `(1, 1, …, 1)` and the full
//! matrix algebra `M_n` is the shape `(n)`. Elements are lists of square
//! blocks; every operation acts blockwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, ComplexMatrix, C64};

/// Relative tolerance used by [`AlgebraElement::approx_eq`].
pub const ELEMENT_EQ_TOL: f64 = 1e-10;

/// Block sizes `(d_1, …, d_k)` of a direct sum of matrix algebras.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct AlgebraShape {
    block_dims: Vec<usize>,
}

impl TryFrom<Vec<usize>> for AlgebraShape {
    type Error = Error;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<AlgebraShape> for Vec<usize> {
    fn from(s: AlgebraShape) -> Self {
        s.block_dims
    }
}

impl AlgebraShape {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::InvalidInput("algebra shape needs at least one block".into()));
        }
        if let Some(i) = block_dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidInput(format!("block {i} has dimension 0")));
        }
        Ok(Self { block_dims })
    }

    /// `M_n`.
    pub fn matrix(n: usize) -> Self {
        assert!(n > 0, "matrix algebra dimension must be positive");
        Self { block_dims: vec![n] }
    }

    /// `ℓ_∞^n`, i.e. `n` blocks of size one.
    pub fn commutative(n: usize) -> Self {
        assert!(n > 0, "commutative algebra dimension must be positive");
        Self {
            block_dims: vec![1; n],
        }
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// Vector-space dimension `Σ d_i²`.
    pub fn total_dim(&self) -> usize {
        self.block_dims.iter().map(|d| d * d).sum()
    }

    /// Size of the block-diagonal representation, `Σ d_i`.
    pub fn rep_size(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub fn is_single_block(&self) -> bool {
        self.block_dims.len() == 1
    }

    pub fn is_commutative(&self) -> bool {
        self.block_dims.iter().all(|&d| d == 1)
    }

    /// Concatenation `A ⊕ B`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut block_dims = self.block_dims.clone();
        block_dims.extend_from_slice(&other.block_dims);
        Self { block_dims }
    }

    /// Offset of block `i` in the matrix-unit basis.
    pub fn basis_offset(&self, block: usize) -> usize {
        self.block_dims[..block].iter().map(|d| d * d).sum()
    }

    /// Position of `e^{(block)}_{rs}` in the matrix-unit basis (blocks in
    /// order, row-major inside each block).
    pub fn basis_index(&self, block: usize, r: usize, s: usize) -> usize {
        self.basis_offset(block) + r * self.block_dims[block] + s
    }

    /// Inverse of [`basis_index`](Self::basis_index).
    pub fn basis_label(&self, mut index: usize) -> (usize, usize, usize) {
        for (b, &d) in self.block_dims.iter().enumerate() {
            if index < d * d {
                return (b, index / d, index % d);
            }
            index -= d * d;
        }
        panic!("basis index out of range");
    }
}

/// An element of `⊕_i M_{d_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    shape: AlgebraShape,
    blocks: Vec<ComplexMatrix>,
}

impl AlgebraElement {
    pub fn new(shape: AlgebraShape, blocks: Vec<ComplexMatrix>) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(Error::DimensionMismatch(format!(
                "{} blocks supplied for shape {:?}",
                blocks.len(),
                shape.block_dims
            )));
        }
        for (i, (b, &d)) in blocks.iter().zip(&shape.block_dims).enumerate() {
            if b.rows() != d || b.cols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "block {i} is {}x{}, expected {d}x{d}",
                    b.rows(),
                    b.cols()
                )));
            }
            if !b.is_finite() {
                return Err(Error::NonFinite(format!("block {i}")));
            }
        }
        Ok(Self { shape, blocks })
    }

    /// Single-block element of `M_n`.
    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let shape = AlgebraShape::matrix(m.rows());
        Self::new(shape, vec![m])
    }

    pub fn scalar(z: C64) -> Self {
        Self {
            shape: AlgebraShape::matrix(1),
            blocks: vec![ComplexMatrix::from_diag(&[z])],
        }
    }

    pub fn zeros(shape: &AlgebraShape) -> Self {
        Self {
            blocks: shape.block_dims.iter().map(|&d| ComplexMatrix::zeros(d, d)).collect(),
            shape: shape.clone(),
        }
    }

    pub fn unit(shape: &AlgebraShape) -> Self {
        Self {
            blocks: shape.block_dims.iter().map(|&d| ComplexMatrix::identity(d)).collect(),
            shape: shape.clone(),
        }
    }

    /// The matrix unit `e^{(block)}_{rs}`.
    pub fn matrix_unit(shape: &AlgebraShape, block: usize, r: usize, s: usize) -> Self {
        let mut e = Self::zeros(shape);
        e.blocks[block][(r, s)] = C64::new(1.0, 0.0);
        e
    }

    /// The `k`-th element of the matrix-unit basis.
    pub fn basis_element(shape: &AlgebraShape, k: usize) -> Self {
        let (b, r, s) = shape.basis_label(k);
        Self::matrix_unit(shape, b, r, s)
    }

    /// Coordinates in the matrix-unit basis, of length `total_dim`.
    pub fn coordinates(&self) -> Vec<C64> {
        self.blocks.iter().flat_map(|b| b.as_slice().iter().copied()).collect()
    }

    pub fn from_coordinates(shape: &AlgebraShape, coords: &[C64]) -> Result<Self> {
        if coords.len() != shape.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates for an algebra of dimension {}",
                coords.len(),
                shape.total_dim()
            )));
        }
        let mut blocks = Vec::with_capacity(shape.num_blocks());
        let mut offset = 0;
        for &d in &shape.block_dims {
            blocks.push(ComplexMatrix::from_vec(d, d, coords[offset..offset + d * d].to_vec())?);
            offset += d * d;
        }
        Ok(Self {
            shape: shape.clone(),
            blocks,
        })
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &ComplexMatrix {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<ComplexMatrix> {
        self.blocks
    }

    /// The block-diagonal matrix representing this element.
    pub fn to_block_diag(&self) -> ComplexMatrix {
        ComplexMatrix::block_diag(&self.blocks)
    }

    /// Reads the diagonal blocks of a block-diagonal matrix.
    pub fn from_block_diag(shape: &AlgebraShape, m: &ComplexMatrix) -> Result<Self> {
        if m.rows() != shape.rep_size() || m.cols() != shape.rep_size() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for representation size {}",
                m.rows(),
                m.cols(),
                shape.rep_size()
            )));
        }
        let mut blocks = Vec::with_capacity(shape.num_blocks());
        let mut o = 0;
        for &d in &shape.block_dims {
            blocks.push(m.submatrix(o, o, d, d));
            o += d;
        }
        Ok(Self {
            shape: shape.clone(),
            blocks,
        })
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch(format!(
                "shapes {:?} and {:?} differ",
                self.shape.block_dims, other.shape.block_dims
            )));
        }
        Ok(())
    }

    fn zip_blocks(
        &self,
        other: &Self,
        f: impl Fn(&ComplexMatrix, &ComplexMatrix) -> ComplexMatrix,
    ) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        })
    }

    fn map_blocks(&self, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        Self {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| a - b)
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(ComplexMatrix::adjoint)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_blocks(|b| b.scale(s))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map_blocks(|b| b.scale_real(s))
    }

    /// `x + s·y`, in place.
    pub fn axpy(&mut self, s: C64, y: &Self) -> Result<()> {
        self.check_same_shape(y)?;
        for (a, b) in self.blocks.iter_mut().zip(&y.blocks) {
            *a += &b.scale(s);
        }
        Ok(())
    }

    /// C*-norm: the largest block operator norm.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(matrix::operator_norm).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Hilbert–Schmidt inner product `tr(x* y)` over all blocks.
    pub fn hs_inner(&self, other: &Self) -> Result<C64> {
        self.check_same_shape(other)?;
        Ok(self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.inner(b)).sum())
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.blocks.iter().map(|b| b.hermitian_defect()).fold(0.0, f64::max)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Every block Hermitian within `tol` and with spectrum above `−tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| {
            b.hermitian_defect() <= tol
                && matrix::min_eigenvalue(b).map(|l| l >= -tol).unwrap_or(false)
        })
    }

    /// Smallest eigenvalue across blocks of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut m = f64::INFINITY;
        for b in &self.blocks {
            m = m.min(matrix::min_eigenvalue(b)?);
        }
        Ok(m)
    }

    /// `‖x − y‖ ≤ 1e-10 · max(1, ‖x‖)`.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.approx_eq_tol(other, ELEMENT_EQ_TOL)
    }

    pub fn approx_eq_tol(&self, other: &Self, rel_tol: f64) -> bool {
        match self.sub(other) {
            Ok(diff) => diff.norm() <= rel_tol * self.norm().max(1.0),
            Err(_) => false,
        }
    }

    /// Applies a spectral function to each (Hermitian) block.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64 + Copy) -> Result<Self> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            blocks.push(matrix::herm_eigensystem(b)?.map_spectrum(f));
        }
        Ok(Self {
            shape: self.shape.clone(),
            blocks,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.max_abs() == 0.0)
    }
}

/// `Σ_j x_j`, erroring on an empty list or mismatched shapes.
pub fn sum_elements<'a>(items: impl IntoIterator<Item = &'a AlgebraElement>) -> Result<AlgebraElement> {
    let mut iter = items.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::InvalidInput("empty sum".into()))?;
    let mut acc = first.clone();
    for x in iter {
        acc.axpy(C64::new(1.0, 0.0), x)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample(shape: &AlgebraShape, seed: f64) -> AlgebraElement {
        let coords: Vec<C64> = (0..shape.total_dim())
            .map(|k| c((k as f64 * 0.71 + seed).sin(), (k as f64 * 1.37 - seed).cos()))
            .collect();
        AlgebraElement::from_coordinates(shape, &coords).unwrap()
    }

    #[test]
    fn shape_validation() {
        assert!(AlgebraShape::new(vec![]).is_err());
        assert!(AlgebraShape::new(vec![2, 0]).is_err());
        let s = AlgebraShape::new(vec![1, 2]).unwrap();
        assert_eq!(s.total_dim(), 5);
        assert_eq!(s.rep_size(), 3);
        for k in 0..5 {
            let (b, r, q) = s.basis_label(k);
            assert_eq!(s.basis_index(b, r, q), k);
        }
    }

    #[test]
    fn involution_and_unit() {
        let shape = AlgebraShape::new(vec![2, 1, 3]).unwrap();
        let x = sample(&shape, 0.3);
        assert_eq!(x.adjoint().adjoint(), x);
        let u = AlgebraElement::unit(&shape);
        assert!(u.multiply(&x).unwrap().approx_eq(&x));
    }

    #[test]
    fn adjoint_reverses_products() {
        let shape = AlgebraShape::new(vec![3, 2]).unwrap();
        let x = sample(&shape, 0.1);
        let y = sample(&shape, 2.0);
        let lhs = x.multiply(&y).unwrap().adjoint();
        let rhs = y.adjoint().multiply(&x.adjoint()).unwrap();
        assert!(lhs.sub(&rhs).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let x = AlgebraElement::unit(&AlgebraShape::matrix(2));
        let y = AlgebraElement::unit(&AlgebraShape::commutative(2));
        assert!(matches!(x.multiply(&y), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn norm_is_max_over_blocks() {
        let shape = AlgebraShape::new(vec![1, 2]).unwrap();
        assert!((AlgebraElement::unit(&shape).norm() - 1.0).abs() < 1e-15);
        let x = AlgebraElement::new(
            shape,
            vec![
                ComplexMatrix::from_real_diag(&[2.0]),
                ComplexMatrix::from_real_diag(&[1.0, 3.0]),
            ],
        )
        .unwrap();
        assert!((x.norm() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn norm_matches_assembled_matrix() {
        let shape = AlgebraShape::new(vec![2, 3, 1]).unwrap();
        let x = sample(&shape, 0.7);
        let direct = matrix::operator_norm(&x.to_block_diag());
        assert!((x.norm() - direct).abs() <= 1e-12);
    }

    #[test]
    fn positivity() {
        let shape = AlgebraShape::new(vec![2, 2]).unwrap();
        let x = sample(&shape, 1.1);
        assert!(x.adjoint().multiply(&x).unwrap().is_positive(1e-12));
        assert!(!AlgebraElement::unit(&shape).scale_real(-1.0).is_positive(1e-12));
        let tol = 1e-9;
        let h = AlgebraElement::new(
            shape,
            vec![
                ComplexMatrix::from_real_diag(&[1.0, -2.0 * tol]),
                ComplexMatrix::identity(2),
            ],
        )
        .unwrap();
        assert!(!h.is_positive(tol));
    }

    #[test]
    fn c_star_identity() {
        let shape = AlgebraShape::new(vec![3, 2]).unwrap();
        let x = sample(&shape, 0.4);
        let lhs = x.adjoint().multiply(&x).unwrap().norm();
        let rhs = x.norm().powi(2);
        assert!((lhs - rhs).abs() <= 1e-9 * rhs);
    }

    #[test]
    fn shape_serde_validates() {
        let s: AlgebraShape = serde_json::from_str("[2,1]").unwrap();
        assert_eq!(s.block_dims(), &[2, 1]);
        assert!(serde_json::from_str::<AlgebraShape>("[]").is_err());
        assert!(serde_json::from_str::<AlgebraShape>("[0]").is_err());
    }
}
