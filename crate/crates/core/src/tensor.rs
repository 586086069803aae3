//! Tensors `t = Σ_{j<n} U_j ⊗ x_j` in `E_n ⊗ A`, where `U_0 = 1` and
//! `U_1, …, U_{n−1}` are free unitary generators.
//!
//! * [`max_norm`]: the max-norm of `t` is the dec-norm of `T: ℓ_∞^n → A`,
//!   `T(e_j) = x_j`, with the unit index included.
//! * [`min_norm`]: the min-norm is `‖T‖_cb`, computed by the see-saw with
//!   `u_0` pinned to the identity and bounded above by the factorization
//!   program.
//!
//! Both norms agree for matrix coefficients; [`nuclearity_gap`] measures how
//! closely the computed values do.

use serde::Serialize;

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::cbmin::{self, AgreementReport, SeeSawOptions, Verdict};
use crate::cpmap::LinearMapRep;
use crate::decnorm::{self, DecCertificate};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// `Σ_j U_j ⊗ x_j` with `coeffs[0]` the coefficient of the unit.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeTensor {
    coeffs: Vec<AlgebraElement>,
}

impl FreeTensor {
    pub fn new(coeffs: Vec<AlgebraElement>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidInput("a free tensor needs at least the unit coefficient".into()))?;
        if let Some(j) = coeffs.iter().position(|x| x.shape() != first.shape()) {
            return Err(Error::DimensionMismatch(format!(
                "coefficient {j} has shape {:?}, expected {:?}",
                coeffs[j].shape().block_dims(),
                first.shape().block_dims()
            )));
        }
        Ok(Self { coeffs })
    }

    /// `U_0 ⊗ x`.
    pub fn unit(x: AlgebraElement) -> Self {
        Self { coeffs: vec![x] }
    }

    pub fn from_matrices(coeffs: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(
            coeffs
                .into_iter()
                .map(AlgebraElement::from_matrix)
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[AlgebraElement] {
        &self.coeffs
    }

    pub fn shape(&self) -> &AlgebraShape {
        self.coeffs[0].shape()
    }

    /// `(Id ⊗ u)(t)`.
    pub fn map_coefficients(&self, u: &LinearMapRep) -> Result<Self> {
        Self::new(self.coeffs.iter().map(|x| u.apply(x)).collect::<Result<Vec<_>>>()?)
    }

    /// Coefficients `w* x_j w`.
    pub fn conjugate_by(&self, w: &AlgebraElement) -> Result<Self> {
        let wa = w.adjoint();
        Self::new(
            self.coeffs
                .iter()
                .map(|x| wa.multiply(x)?.multiply(w))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Coefficient `j` of the result is `coeffs[perm[j]]`; `perm[0]` must be 0.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.first() != Some(&0) {
            return Err(Error::InvalidInput("permutation must fix the unit index".into()));
        }
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidInput(format!("{perm:?} is not a permutation")));
            }
        }
        Ok(Self {
            coeffs: perm.iter().map(|&p| self.coeffs[p].clone()).collect(),
        })
    }

    fn block_coefficients(&self, b: usize) -> Vec<ComplexMatrix> {
        self.coeffs.iter().map(|x| x.block(b).clone()).collect()
    }
}

/// `‖t‖_max` with its dec certificate.
pub fn max_norm(t: &FreeTensor) -> Result<(f64, DecCertificate)> {
    let cert = decnorm::dec_norm_linf(t.coeffs())?;
    Ok((cert.value, cert))
}

#[derive(Clone, Debug)]
pub struct MinNormReport {
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
    pub relative_gap: f64,
    pub verdict: Verdict,
    /// One report per codomain block.
    pub blocks: Vec<AgreementReport>,
}

/// Bounds for `‖t‖_min`: the see-saw keeps `u_0 = 1`. Multi-block
/// coefficients are handled block by block and the largest bounds kept.
pub fn min_norm(t: &FreeTensor, opts: &SeeSawOptions) -> Result<MinNormReport> {
    let pinned = SeeSawOptions {
        pin_first: true,
        ..opts.clone()
    };
    let blocks = (0..t.shape().num_blocks())
        .map(|b| cbmin::cb_norm_linf(&t.block_coefficients(b), &pinned))
        .collect::<Result<Vec<_>>>()?;
    let upper = blocks.iter().map(|r| r.upper).fold(0.0, f64::max);
    let lower = blocks.iter().map(|r| r.lower).fold(0.0, f64::max);
    let gap = upper - lower;
    Ok(MinNormReport {
        upper,
        lower,
        gap,
        relative_gap: gap / upper.max(1.0),
        verdict: cbmin::verdict(upper, lower),
        blocks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NuclearityReport {
    pub max: f64,
    pub min_lower: f64,
    pub min_upper: f64,
    /// `|max − min_upper|`.
    pub gap: f64,
    /// `max − min_lower`.
    pub seesaw_gap: f64,
    pub verdict: Verdict,
}

/// Compares `‖t‖_max` with both bounds for `‖t‖_min`.
pub fn nuclearity_gap(t: &FreeTensor, opts: &SeeSawOptions) -> Result<NuclearityReport> {
    let (max, _) = max_norm(t)?;
    let min = min_norm(t, opts)?;
    let gap = (max - min.upper).abs();
    let seesaw_gap = max - min.lower;
    let verdict = match cbmin::verdict(max, min.lower) {
        Verdict::Agree if gap > cbmin::AGREE_REL_TOL * max.max(1.0) => Verdict::Disagree,
        v => v,
    };
    Ok(NuclearityReport {
        max,
        min_lower: min.lower,
        min_upper: min.upper,
        gap,
        seesaw_gap,
        verdict,
    })
}

/// Upper bound for `‖t‖_min` from the factorization program alone.
pub fn min_norm_upper(t: &FreeTensor) -> Result<f64> {
    let mut best: f64 = 0.0;
    for b in 0..t.shape().num_blocks() {
        best = best.max(cbmin::min_norm_factorization_sdp(&t.block_coefficients(b))?.value);
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    /// `‖(Id ⊗ u)(t)‖_max`.
    pub lhs: f64,
    /// `‖u‖_dec · ‖t‖_min` (upper bound).
    pub rhs: f64,
    pub dec_u: f64,
    pub min_upper: f64,
    pub holds: bool,
}

pub const CONTRACTION_TOL: f64 = 1e-5;

/// `‖(Id ⊗ u)(t)‖_max ≤ ‖u‖_dec ‖t‖_min`, with `dec_u` a value for `‖u‖_dec`.
pub fn check_finite_rank_contraction(u: &LinearMapRep, dec_u: f64, t: &FreeTensor) -> Result<ContractionReport> {
    if u.domain() != t.shape() {
        return Err(Error::DimensionMismatch(format!(
            "map domain {:?} does not match coefficient shape {:?}",
            u.domain().block_dims(),
            t.shape().block_dims()
        )));
    }
    let (lhs, _) = max_norm(&t.map_coefficients(u)?)?;
    let min_upper = min_norm_upper(t)?;
    let rhs = dec_u * min_upper;
    Ok(ContractionReport {
        lhs,
        rhs,
        dec_u,
        min_upper,
        holds: lhs <= rhs + CONTRACTION_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C64;
    use crate::testkit::{random_free_tensor, random_haar_unitary, SeededGenerator};

    fn quick() -> SeeSawOptions {
        SeeSawOptions {
            restarts: 8,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn unit_tensor() {
        let t = FreeTensor::unit(AlgebraElement::unit(&AlgebraShape::matrix(2)));
        assert!((max_norm(&t).unwrap().0 - 1.0).abs() < 1e-7);
        let m = min_norm(&t, &quick()).unwrap();
        assert!((m.lower - 1.0).abs() < 1e-10);
        assert_eq!(m.verdict, Verdict::Agree);
    }

    #[test]
    fn scalar_coefficients() {
        let z = [C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(-1.0, 1.0)];
        let t = FreeTensor::new(z.iter().map(|&z| AlgebraElement::scalar(z)).collect()).unwrap();
        let l1 = 3.0 + 2f64.sqrt();
        let r = nuclearity_gap(&t, &quick()).unwrap();
        assert!((r.max - l1).abs() < 1e-8);
        assert!((r.min_lower - l1).abs() < 1e-8);
        assert!(r.gap <= 1e-8);
    }

    #[test]
    fn unitary_coefficients() {
        let mut g = SeededGenerator::new(5);
        let t = FreeTensor::from_matrices((0..3).map(|_| random_haar_unitary(&mut g, 2)).collect()).unwrap();
        let r = nuclearity_gap(&t, &quick()).unwrap();
        assert!((r.max - 3.0).abs() < 1e-6);
        assert!(r.seesaw_gap.abs() < 1e-6);
    }

    #[test]
    fn random_tensor_agrees() {
        let mut g = SeededGenerator::new(21);
        let t = random_free_tensor(&mut g, 3, 2);
        let r = nuclearity_gap(&t, &quick()).unwrap();
        assert_eq!(r.verdict, Verdict::Agree, "{r:?}");
    }

    #[test]
    fn identity_contraction() {
        let mut g = SeededGenerator::new(8);
        let t = random_free_tensor(&mut g, 2, 2);
        let id = LinearMapRep::identity(t.shape());
        let r = check_finite_rank_contraction(&id, 1.0, &t).unwrap();
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn permutation_must_fix_unit() {
        let mut g = SeededGenerator::new(1);
        let t = random_free_tensor(&mut g, 3, 2);
        assert!(t.permute(&[1, 0, 2]).is_err());
        assert!(t.permute(&[0, 2, 2]).is_err());
        let p = t.permute(&[0, 2, 1]).unwrap();
        assert_eq!(p.coeffs()[1], t.coeffs()[2]);
    }

    #[test]
    fn mismatched_shapes_rejected() {
        let a = AlgebraElement::unit(&AlgebraShape::matrix(2));
        let b = AlgebraElement::unit(&AlgebraShape::matrix(3));
        assert!(FreeTensor::new(vec![a, b]).is_err());
        assert!(FreeTensor::new(vec![]).is_err());
    }
}
