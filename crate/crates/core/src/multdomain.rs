//! Multiplicative domains of unital CP maps.
//!
//! For a unital CP map `u` the multiplicative domain
//! `D_u = {a : u(a*a) = u(a)*u(a), u(aa*) = u(a)u(a)*}` is a C*-subalgebra,
//! and `u(axb) = u(a)u(x)u(b)` for `a, b ∈ D_u` and all `x`. Conversely every
//! `a` with `u(ea) = u(e)u(a)` and `u(ae) = u(a)u(e)` for all matrix units
//! `e` satisfies the Schwarz equalities (take `x = a*`), so `D_u` is the null
//! space of a linear system, which is what [`multiplicative_domain`] solves.

use serde::Serialize;

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::cpmap::LinearMapRep;
use crate::error::{Error, Result};
use crate::matrix::{self, ComplexMatrix, C64};
use crate::testkit::{random_element, SeededGenerator};

/// Singular values below `RANK_CUTOFF · max(s_max, 1)` count as zero.
pub const RANK_CUTOFF: f64 = 1e-9;
pub const PRECONDITION_TOL: f64 = 1e-9;

/// A Hilbert–Schmidt orthonormal basis of a subspace of the algebra.
#[derive(Clone, Debug)]
pub struct SubalgebraBasis {
    pub ambient: AlgebraShape,
    pub basis: Vec<AlgebraElement>,
    pub dimension: usize,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct ClosureReport {
    /// Distance from `1` to the span, relative to `‖1‖_2`.
    pub unit: f64,
    /// `max_k dist(b_k*, span)`.
    pub adjoint: f64,
    /// `max_{k,l} dist(b_k b_l, span)`.
    pub product: f64,
}

impl SubalgebraBasis {
    /// Orthogonal projection onto the span.
    pub fn project(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        let mut p = AlgebraElement::zeros(&self.ambient);
        for v in &self.basis {
            p.axpy(v.hs_inner(a)?, v)?;
        }
        Ok(p)
    }

    /// Hilbert–Schmidt distance from `a` to the span.
    pub fn distance(&self, a: &AlgebraElement) -> Result<f64> {
        Ok(a.sub(&self.project(a)?)?.frobenius_norm())
    }

    pub fn contains(&self, a: &AlgebraElement, tol: f64) -> Result<bool> {
        Ok(self.distance(a)? <= tol * a.frobenius_norm().max(1.0))
    }

    pub fn combination(&self, coords: &[C64]) -> Result<AlgebraElement> {
        if coords.len() != self.dimension {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates for a basis of size {}",
                coords.len(),
                self.dimension
            )));
        }
        let mut a = AlgebraElement::zeros(&self.ambient);
        for (c, v) in coords.iter().zip(&self.basis) {
            a.axpy(*c, v)?;
        }
        Ok(a)
    }

    pub fn closure(&self) -> Result<ClosureReport> {
        let one = AlgebraElement::unit(&self.ambient);
        let mut r = ClosureReport {
            unit: self.distance(&one)? / one.frobenius_norm(),
            ..Default::default()
        };
        for a in &self.basis {
            r.adjoint = r.adjoint.max(self.distance(&a.adjoint())?);
            for b in &self.basis {
                r.product = r.product.max(self.distance(&a.multiply(b)?)?);
            }
        }
        Ok(r)
    }
}

#[derive(Clone, Debug)]
pub struct MultiplicativeDomain {
    pub basis: SubalgebraBasis,
    pub closure: ClosureReport,
    /// `max_k max(‖u(b*b) − u(b)*u(b)‖, ‖u(bb*) − u(b)u(b)*‖)` over the basis.
    pub schwarz_residual: f64,
    /// Singular values of the bimodularity system, descending.
    pub singular_values: Vec<f64>,
}

fn check_preconditions(u: &LinearMapRep) -> Result<()> {
    if !u.is_cp(PRECONDITION_TOL) {
        let (_, l) = u.min_choi_eigenvalue()?;
        return Err(Error::Precondition(format!(
            "map is not completely positive (Choi eigenvalue {l:.3e})"
        )));
    }
    if !u.is_unital(PRECONDITION_TOL) {
        return Err(Error::Precondition("map is not unital".into()));
    }
    Ok(())
}

/// `max(‖u(b*b) − u(b)*u(b)‖, ‖u(bb*) − u(b)u(b)*‖)`.
pub fn schwarz_residual(u: &LinearMapRep, b: &AlgebraElement) -> Result<f64> {
    let ub = u.apply(b)?;
    let ba = b.adjoint();
    let uba = ub.adjoint();
    let left = u.apply(&ba.multiply(b)?)?.sub(&uba.multiply(&ub)?)?.norm();
    let right = u.apply(&b.multiply(&ba)?)?.sub(&ub.multiply(&uba)?)?.norm();
    Ok(left.max(right))
}

/// The multiplicative domain of a unital CP map.
pub fn multiplicative_domain(u: &LinearMapRep) -> Result<MultiplicativeDomain> {
    check_preconditions(u)?;
    let dom = u.domain().clone();
    let dim = dom.total_dim();
    let units: Vec<AlgebraElement> = (0..dim).map(|k| AlgebraElement::basis_element(&dom, k)).collect();
    let images: Vec<AlgebraElement> = units.iter().map(|e| u.apply(e)).collect::<Result<_>>()?;
    let cdim = u.codomain().total_dim();

    // Column k: the defects of a = e_k against every matrix unit.
    let rows = 2 * dim * cdim;
    let mut system = ComplexMatrix::zeros(rows, dim);
    for (k, a) in units.iter().enumerate() {
        let ua = &images[k];
        let mut r = 0;
        for (e, ue) in units.iter().zip(&images) {
            let left = u.apply(&e.multiply(a)?)?.sub(&ue.multiply(ua)?)?;
            let right = u.apply(&a.multiply(e)?)?.sub(&ua.multiply(ue)?)?;
            for z in left.coordinates().into_iter().chain(right.coordinates()) {
                system[(r, k)] = z;
                r += 1;
            }
        }
    }
    let (singular_values, kernel) = null_space(&system)?;
    let basis: Vec<AlgebraElement> = kernel
        .iter()
        .map(|c| AlgebraElement::from_coordinates(&dom, c))
        .collect::<Result<_>>()?;
    let basis = SubalgebraBasis {
        ambient: dom,
        dimension: basis.len(),
        basis,
    };
    let closure = basis.closure()?;
    let mut schwarz: f64 = 0.0;
    for b in &basis.basis {
        schwarz = schwarz.max(schwarz_residual(u, b)?);
    }
    Ok(MultiplicativeDomain {
        basis,
        closure,
        schwarz_residual: schwarz,
        singular_values,
    })
}

/// Singular values of `a` and an orthonormal basis of its numerical kernel.
fn null_space(a: &ComplexMatrix) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    let n = a.cols();
    let smax = if a.max_abs() == 0.0 { 0.0 } else { matrix::operator_norm(a) };
    if smax == 0.0 {
        let id = ComplexMatrix::identity(n);
        return Ok((vec![0.0; n], (0..n).map(|k| id.column(k)).collect()));
    }
    let s = matrix::svd(a)?;
    let cut = RANK_CUTOFF * s.singular_values[0].max(1.0);
    let kernel = (0..n)
        .filter(|&k| s.singular_values[k] <= cut)
        .map(|k| s.v.column(k))
        .collect();
    Ok((s.singular_values, kernel))
}

#[derive(Clone, Debug, Serialize)]
pub struct BimodularityReport {
    pub samples: usize,
    /// `max ‖u(ax) − u(a)u(x)‖`.
    pub left: f64,
    /// `max ‖u(xb) − u(x)u(b)‖`.
    pub right: f64,
    /// `max ‖u(axb) − u(a)u(x)u(b)‖`.
    pub two_sided: f64,
    pub max_residual: f64,
}

/// The three bimodularity defects for one triple `(a, x, b)`.
pub fn bimodularity_residual(
    u: &LinearMapRep,
    a: &AlgebraElement,
    x: &AlgebraElement,
    b: &AlgebraElement,
) -> Result<(f64, f64, f64)> {
    let (ua, ux, ub) = (u.apply(a)?, u.apply(x)?, u.apply(b)?);
    let left = u.apply(&a.multiply(x)?)?.sub(&ua.multiply(&ux)?)?.norm();
    let right = u.apply(&x.multiply(b)?)?.sub(&ux.multiply(&ub)?)?.norm();
    let two = u
        .apply(&a.multiply(x)?.multiply(b)?)?
        .sub(&ua.multiply(&ux)?.multiply(&ub)?)?
        .norm();
    Ok((left, right, two))
}

fn normalized(a: AlgebraElement) -> AlgebraElement {
    let n = a.norm();
    if n > 0.0 {
        a.scale_real(1.0 / n)
    } else {
        a
    }
}

/// Worst bimodularity defects over `samples` random triples with `a, b` in
/// the span of `d` and all three of unit norm.
pub fn verify_bimodularity(
    u: &LinearMapRep,
    d: &SubalgebraBasis,
    samples: usize,
    seed: u64,
) -> Result<BimodularityReport> {
    if &d.ambient != u.domain() {
        return Err(Error::DimensionMismatch("basis and map domain differ".into()));
    }
    let mut g = SeededGenerator::new(seed);
    let mut r = BimodularityReport {
        samples,
        left: 0.0,
        right: 0.0,
        two_sided: 0.0,
        max_residual: 0.0,
    };
    let draw = |g: &mut SeededGenerator| -> Result<AlgebraElement> {
        let c: Vec<C64> = (0..d.dimension).map(|_| g.complex_normal()).collect();
        Ok(normalized(d.combination(&c)?))
    };
    for _ in 0..samples {
        let a = draw(&mut g)?;
        let b = draw(&mut g)?;
        let x = normalized(random_element(&mut g, &d.ambient));
        let (l, rr, t) = bimodularity_residual(u, &a, &x, &b)?;
        r.left = r.left.max(l);
        r.right = r.right.max(rr);
        r.two_sided = r.two_sided.max(t);
    }
    r.max_residual = r.left.max(r.right).max(r.two_sided);
    Ok(r)
}

/// `x ↦ Σ_r e_rr x e_rr` on `M_d`.
pub fn pinching(d: usize) -> LinearMapRep {
    let shape = AlgebraShape::matrix(d);
    LinearMapRep::from_fn(shape.clone(), shape, |x| {
        let m = x.block(0);
        let diag: Vec<C64> = (0..d).map(|r| m[(r, r)]).collect();
        AlgebraElement::from_matrix(ComplexMatrix::from_diag(&diag))
    })
    .expect("shapes match")
}

/// `x ↦ tr(x)/d · 1` on `M_d`.
pub fn depolarizing(d: usize) -> LinearMapRep {
    let shape = AlgebraShape::matrix(d);
    LinearMapRep::from_fn(shape.clone(), shape.clone(), |x| {
        Ok(AlgebraElement::unit(&shape).scale(x.block(0).trace() / d as f64))
    })
    .expect("shapes match")
}
