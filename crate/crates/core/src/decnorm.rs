//! Decomposable norms.
//!
//! For `u : A → B` with `A = ⊕_i M_{n_i}` and `B = ⊕_b M_{m_b}`, `‖u‖_dec` is
//! the least `s` for which there are CP maps `S_1, S_2` with
//! `‖S_1(1)‖, ‖S_2(1)‖ ≤ s` and `[[S_1, u], [u_*, S_2]]` completely positive.
//! In Choi form this is the program solved by [`dec_norm`]:
//!
//! ```text
//! minimize s  subject to, for every domain block i and codomain block b,
//!     [[C1_ib, J_ib], [J_ib*, C2_ib]] ⪰ 0
//!     s·1 − Σ_i Tr_{n_i} C1_ib ⪰ 0,   s·1 − Σ_i Tr_{n_i} C2_ib ⪰ 0
//! ```
//!
//! where `J_ib` is the Choi matrix of `u` restricted to that pair of blocks
//! and `Tr_{n_i}` traces out the domain factor. For `ℓ_∞^n` domains `C1_j`,
//! `C2_j` are just elements `P_j, Q_j ∈ B` and the blocks read
//! `[[P_j, x_j], [x_j*, Q_j]] ⪰ 0`, `Σ P_j ⪯ s`, `Σ Q_j ⪯ s`.
//!
//! Every certificate carries a factorization `J = a* b` with
//! `‖Σ Tr a*a‖^{1/2} ‖Σ Tr b*b‖^{1/2}` as an independent upper bound.
//!
//! At finite dimension the infimum defining the norm is attained by
//! compactness; the solver returns a near-optimal feasible point, not an
//! exact minimizer.

use serde::Serialize;

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::conic::{self, ConicProgram, ConicSolution, SolveStatus, SolverOptions};
use crate::cpmap::LinearMapRep;
use crate::error::{Error, Result};
use crate::matrix::{self, ComplexMatrix, C64};

/// Eigenvalue cutoff, relative to `‖P‖`, for the pseudo-inverse square roots
/// used in factorization extraction.
pub const FACTOR_CUTOFF: f64 = 1e-9;

/// Solver settings used by the dec-norm programs.
pub fn dec_solver_options() -> SolverOptions {
    SolverOptions {
        gap_tol: 1e-10,
        feas_tol: 1e-10,
        max_iter: 300,
    }
}

/// Largest relative gap accepted from a solve that stopped short of its tolerances.
const ACCEPT_GAP: f64 = 1e-7;

#[derive(Clone, Debug, Serialize)]
pub struct SolveSummary {
    pub status: SolveStatus,
    pub iterations: usize,
    pub gap: f64,
    pub psd_residual: f64,
    pub dual_residual: f64,
    pub message: String,
}

impl SolveSummary {
    fn from_solution(s: &ConicSolution) -> Self {
        Self {
            status: s.status,
            iterations: s.iterations,
            gap: s.gap,
            psd_residual: s.psd_residual,
            dual_residual: s.dual_residual,
            message: s.message.clone(),
        }
    }

    fn trivial() -> Self {
        Self {
            status: SolveStatus::Optimal,
            iterations: 0,
            gap: 0.0,
            psd_residual: 0.0,
            dual_residual: 0.0,
            message: "zero map".into(),
        }
    }
}

/// Optimal dilation blocks and a factorization witnessing `‖u‖_dec`.
///
/// Entry `i` of `coefficients`, `p`, `q`, `factor_a`, `factor_b` belongs to
/// domain block `i` and lives in `M_{n_i}(B)`, stored as an element of shape
/// `(n_i·m_b)_b`. For `ℓ_∞^n` domains these are elements of `B` itself.
#[derive(Clone, Debug)]
pub struct DecCertificate {
    /// `max(‖Σ Tr P_i‖, ‖Σ Tr Q_i‖)` at the returned feasible point.
    pub value: f64,
    /// Dual objective; `‖u‖_dec` lies in `[lower_bound, value]` up to solver accuracy.
    pub lower_bound: f64,
    pub domain_dims: Vec<usize>,
    pub coefficients: Vec<AlgebraElement>,
    pub p: Vec<AlgebraElement>,
    pub q: Vec<AlgebraElement>,
    pub factor_a: Vec<AlgebraElement>,
    pub factor_b: Vec<AlgebraElement>,
    /// `max_i ‖J_i − a_i* b_i‖`.
    pub reconstruction_residual: f64,
    /// `‖Σ Tr a*a‖^{1/2} ‖Σ Tr b*b‖^{1/2}`.
    pub factor_bound: f64,
    /// Multiple of the identity added to `P`, `Q` to make the coupling blocks exactly PSD.
    pub repair_shift: f64,
    pub solver: SolveSummary,
}

/// Independently recomputed certificate invariants.
#[derive(Clone, Debug, Serialize)]
pub struct DecCheck {
    /// Smallest eigenvalue over all `[[P_i, J_i], [J_i*, Q_i]]`.
    pub coupling_min_eigenvalue: f64,
    pub sum_p_norm: f64,
    pub sum_q_norm: f64,
    pub reconstruction_residual: f64,
    pub factor_bound: f64,
}

impl DecCertificate {
    pub fn check(&self) -> Result<DecCheck> {
        let mut lmin = f64::INFINITY;
        for ((j, p), q) in self.coefficients.iter().zip(&self.p).zip(&self.q) {
            for b in 0..j.shape().num_blocks() {
                let w = coupling_matrix(p.block(b), j.block(b), q.block(b));
                lmin = lmin.min(matrix::min_eigenvalue(&w)?);
            }
        }
        let (sp, sq) = (
            traced_sum(&self.p, &self.domain_dims)?,
            traced_sum(&self.q, &self.domain_dims)?,
        );
        let mut recon: f64 = 0.0;
        for ((j, a), b) in self.coefficients.iter().zip(&self.factor_a).zip(&self.factor_b) {
            recon = recon.max(j.sub(&a.adjoint().multiply(b)?)?.norm());
        }
        Ok(DecCheck {
            coupling_min_eigenvalue: if lmin.is_finite() { lmin } else { 0.0 },
            sum_p_norm: sp.map_or(0.0, |x| x.norm()),
            sum_q_norm: sq.map_or(0.0, |x| x.norm()),
            reconstruction_residual: recon,
            factor_bound: factorization_bound(&self.factor_a, &self.factor_b, &self.domain_dims)?,
        })
    }
}

fn coupling_matrix(p: &ComplexMatrix, x: &ComplexMatrix, q: &ComplexMatrix) -> ComplexMatrix {
    let (n, m) = (p.rows(), q.rows());
    let mut w = ComplexMatrix::zeros(n + m, n + m);
    w.set_submatrix(0, 0, p);
    w.set_submatrix(0, n, x);
    w.set_submatrix(n, 0, &x.adjoint());
    w.set_submatrix(n, n, q);
    w
}

/// `Tr_n` over the leading factor of an `(n·m) × (n·m)` matrix.
pub fn partial_trace(c: &ComplexMatrix, n: usize) -> ComplexMatrix {
    let m = c.rows() / n;
    ComplexMatrix::from_fn(m, m, |a, b| (0..n).map(|r| c[(r * m + a, r * m + b)]).sum())
}

/// `Σ_i Tr_{n_i} x_i` as an element of `B`; `None` for an empty list.
fn traced_sum(xs: &[AlgebraElement], ns: &[usize]) -> Result<Option<AlgebraElement>> {
    let mut acc: Option<AlgebraElement> = None;
    for (x, &n) in xs.iter().zip(ns) {
        let blocks: Vec<ComplexMatrix> = x.blocks().iter().map(|b| partial_trace(b, n)).collect();
        let dims = blocks.iter().map(|b| b.rows()).collect();
        let t = AlgebraElement::new(AlgebraShape::new(dims)?, blocks)?;
        acc = Some(match acc {
            None => t,
            Some(a) => a.add(&t)?,
        });
    }
    Ok(acc)
}

/// `‖Σ_i Tr_{n_i} a_i*a_i‖^{1/2} ‖Σ_i Tr_{n_i} b_i*b_i‖^{1/2}`.
pub fn factorization_bound(a: &[AlgebraElement], b: &[AlgebraElement], ns: &[usize]) -> Result<f64> {
    let aa: Vec<AlgebraElement> = a.iter().map(|x| x.adjoint().multiply(x)).collect::<Result<_>>()?;
    let bb: Vec<AlgebraElement> = b.iter().map(|x| x.adjoint().multiply(x)).collect::<Result<_>>()?;
    let na = traced_sum(&aa, ns)?.map_or(0.0, |x| x.norm());
    let nb = traced_sum(&bb, ns)?.map_or(0.0, |x| x.norm());
    Ok(na.sqrt() * nb.sqrt())
}

/// Result of [`extract_factorization`].
#[derive(Clone, Debug)]
pub struct Factorization {
    pub a: Vec<AlgebraElement>,
    pub b: Vec<AlgebraElement>,
    /// `max_j ‖x_j − a_j* b_j‖`.
    pub residual: f64,
}

fn factor_pair(x: &ComplexMatrix, p: &ComplexMatrix, q: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let pe = matrix::herm_eigensystem(p)?;
    let qe = matrix::herm_eigensystem(q)?;
    let cut = |e: &matrix::HermitianEigen| FACTOR_CUTOFF * e.max_value().max(0.0);
    let (pc, qc) = (cut(&pe), cut(&qe));
    let p_half = pe.map_spectrum(|l| l.max(0.0).sqrt());
    let p_inv_half = pe.map_spectrum(|l| if l > pc && l > 0.0 { 1.0 / l.sqrt() } else { 0.0 });
    let q_half = qe.map_spectrum(|l| l.max(0.0).sqrt());
    let q_inv_half = qe.map_spectrum(|l| if l > qc && l > 0.0 { 1.0 / l.sqrt() } else { 0.0 });
    let contraction = &(&p_inv_half * x) * &q_inv_half;
    let a = (&p_half * &contraction).adjoint();
    Ok((a, q_half))
}

/// Factorizes `x_j = a_j* b_j` from PSD coupling blocks `[[P_j, x_j], [x_j*, Q_j]]`.
///
/// `a_j = (P_j^{1/2} C_j)*` and `b_j = Q_j^{1/2}`, where
/// `C_j = P_j^{+1/2} x_j Q_j^{+1/2}` uses pseudo-inverse square roots with
/// cutoff [`FACTOR_CUTOFF`]. Then `a_j*a_j ⪯ P_j` and `b_j*b_j = Q_j`.
pub fn extract_factorization(
    x: &[AlgebraElement],
    p: &[AlgebraElement],
    q: &[AlgebraElement],
) -> Result<Factorization> {
    if x.len() != p.len() || x.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients, {} P blocks, {} Q blocks",
            x.len(),
            p.len(),
            q.len()
        )));
    }
    let mut a = Vec::with_capacity(x.len());
    let mut b = Vec::with_capacity(x.len());
    let mut residual: f64 = 0.0;
    for (j, ((xj, pj), qj)) in x.iter().zip(p).zip(q).enumerate() {
        if pj.shape() != xj.shape() || qj.shape() != xj.shape() {
            return Err(Error::DimensionMismatch(format!("shapes differ at index {j}")));
        }
        let mut ab = Vec::new();
        let mut bb = Vec::new();
        for k in 0..xj.shape().num_blocks() {
            let (ak, bk) = factor_pair(xj.block(k), pj.block(k), qj.block(k))?;
            ab.push(ak);
            bb.push(bk);
        }
        let aj = AlgebraElement::new(xj.shape().clone(), ab)?;
        let bj = AlgebraElement::new(xj.shape().clone(), bb)?;
        residual = residual.max(xj.sub(&aj.adjoint().multiply(&bj)?)?.norm());
        a.push(aj);
        b.push(bj);
    }
    Ok(Factorization { a, b, residual })
}

/// Real parametrization of an `n × n` Hermitian matrix by `n²` variables
/// starting at `first`: slot `r·n + r` is the diagonal entry, slot `r·n + c`
/// with `r < c` the real part and slot `c·n + r` the imaginary part of entry `(r, c)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct HermVar {
    pub first: usize,
    pub n: usize,
}

impl HermVar {
    /// `(variable, row, col, value)` with `row ≤ col`; the `(col, row)` entry is the conjugate.
    pub fn entries(self) -> impl Iterator<Item = (usize, usize, usize, C64)> {
        let n = self.n;
        (0..n).flat_map(move |r| {
            (r..n).flat_map(move |c| {
                if r == c {
                    vec![(self.first + r * n + r, r, r, C64::new(1.0, 0.0))]
                } else {
                    vec![
                        (self.first + r * n + c, r, c, C64::new(1.0, 0.0)),
                        (self.first + c * n + r, r, c, C64::new(0.0, 1.0)),
                    ]
                }
            })
        })
    }

    pub fn read(self, y: &[f64]) -> ComplexMatrix {
        let n = self.n;
        let mut m = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            m[(r, r)] = C64::new(y[self.first + r * n + r], 0.0);
            for c in r + 1..n {
                let z = C64::new(y[self.first + r * n + c], y[self.first + c * n + r]);
                m[(r, c)] = z;
                m[(c, r)] = z.conj();
            }
        }
        m
    }

    /// Adds `sign · H` at offset `(off, off)` of `block`.
    pub fn add_to(self, p: &mut ConicProgram, block: usize, off: usize, sign: f64) -> Result<()> {
        for (v, r, c, z) in self.entries() {
            p.add_term(block, v, off + r, off + c, z * sign)?;
        }
        Ok(())
    }

    /// Adds `sign · Tr_d H` (trace over the leading factor of size `d`) to `block`.
    pub fn add_partial_trace_to(self, p: &mut ConicProgram, block: usize, d: usize, sign: f64) -> Result<()> {
        let m = self.n / d;
        for (v, r, c, z) in self.entries() {
            if r / m == c / m {
                p.add_term(block, v, r % m, c % m, z * sign)?;
            }
        }
        Ok(())
    }
}

fn solve_checked(p: &ConicProgram, opts: &SolverOptions, what: &str) -> Result<ConicSolution> {
    let s = conic::solve(p, opts)?;
    match s.status {
        SolveStatus::Optimal => Ok(s),
        SolveStatus::MaxIterations if s.gap <= ACCEPT_GAP && s.psd_residual <= 1e-7 => Ok(s),
        _ => Err(Error::Solver(format!(
            "{what}: status {}, gap {:.3e}, cone residual {:.3e}, {} iterations ({})",
            s.status.as_str(),
            s.gap,
            s.psd_residual,
            s.iterations,
            s.message
        ))),
    }
}

/// `‖u‖_dec` for any map between finite-dimensional C*-algebras.
pub fn dec_norm(u: &LinearMapRep) -> Result<DecCertificate> {
    dec_norm_with(u, &dec_solver_options())
}

pub fn dec_norm_with(u: &LinearMapRep, opts: &SolverOptions) -> Result<DecCertificate> {
    let ns = u.domain().block_dims().to_vec();
    let ms = u.codomain().block_dims().to_vec();
    let choi = u.choi_split();
    let scale = choi
        .iter()
        .flatten()
        .map(matrix::operator_norm)
        .fold(0.0, f64::max);
    let coefficients: Vec<AlgebraElement> = choi
        .iter()
        .zip(&ns)
        .map(|(blocks, &n)| {
            let shape = AlgebraShape::new(ms.iter().map(|m| n * m).collect())?;
            AlgebraElement::new(shape, blocks.clone())
        })
        .collect::<Result<_>>()?;
    if !scale.is_finite() {
        return Err(Error::NonFinite("map images".into()));
    }
    if scale == 0.0 {
        let zeros: Vec<AlgebraElement> = coefficients.iter().map(|c| AlgebraElement::zeros(c.shape())).collect();
        return Ok(DecCertificate {
            value: 0.0,
            lower_bound: 0.0,
            domain_dims: ns,
            p: zeros.clone(),
            q: zeros.clone(),
            factor_a: zeros.clone(),
            factor_b: zeros,
            coefficients,
            reconstruction_residual: 0.0,
            factor_bound: 0.0,
            repair_shift: 0.0,
            solver: SolveSummary::trivial(),
        });
    }

    // Active (i, b) pairs: zero Choi blocks get C1 = C2 = 0.
    let mut vars = 1;
    let mut active: Vec<(usize, usize, HermVar, HermVar)> = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        for (b, &m) in ms.iter().enumerate() {
            if choi[i][b].max_abs() == 0.0 {
                continue;
            }
            let d = n * m;
            let h1 = HermVar { first: vars, n: d };
            let h2 = HermVar { first: vars + d * d, n: d };
            vars += 2 * d * d;
            active.push((i, b, h1, h2));
        }
    }
    let mut prog = ConicProgram::new(vars);
    prog.set_objective(0, 1.0)?;
    for &(i, b, h1, h2) in &active {
        let d = h1.n;
        let j = choi[i][b].scale_real(1.0 / scale);
        let zero = ComplexMatrix::zeros(d, d);
        let blk = prog.add_block(coupling_matrix(&zero, &j, &zero))?;
        h1.add_to(&mut prog, blk, 0, 1.0)?;
        h2.add_to(&mut prog, blk, d, 1.0)?;
    }
    for (b, &m) in ms.iter().enumerate() {
        let here: Vec<_> = active.iter().filter(|t| t.1 == b).collect();
        if here.is_empty() {
            continue;
        }
        for side in 0..2 {
            let blk = prog.add_zero_block(m);
            for r in 0..m {
                prog.add_term(blk, 0, r, r, C64::new(1.0, 0.0))?;
            }
            for &&(i, _, h1, h2) in &here {
                let h = if side == 0 { h1 } else { h2 };
                h.add_partial_trace_to(&mut prog, blk, ns[i], -1.0)?;
            }
        }
    }
    let sol = solve_checked(&prog, opts, "dec-norm program")?;

    let mut p_blocks: Vec<Vec<ComplexMatrix>> = ns
        .iter()
        .map(|&n| ms.iter().map(|&m| ComplexMatrix::zeros(n * m, n * m)).collect())
        .collect();
    let mut q_blocks = p_blocks.clone();
    let mut repair_shift: f64 = 0.0;
    for &(i, b, h1, h2) in &active {
        let j = choi[i][b].scale_real(1.0 / scale);
        let mut c1 = h1.read(&sol.y);
        let mut c2 = h2.read(&sol.y);
        let lmin = matrix::min_eigenvalue(&coupling_matrix(&c1, &j, &c2))?;
        if lmin < 0.0 {
            let shift = -lmin * (1.0 + 1e-9) + 1e-15;
            repair_shift = repair_shift.max(shift);
            for r in 0..c1.rows() {
                c1[(r, r)] += C64::new(shift, 0.0);
                c2[(r, r)] += C64::new(shift, 0.0);
            }
        }
        p_blocks[i][b] = c1.scale_real(scale);
        q_blocks[i][b] = c2.scale_real(scale);
    }
    let to_elems = |blocks: Vec<Vec<ComplexMatrix>>| -> Result<Vec<AlgebraElement>> {
        blocks
            .into_iter()
            .zip(&coefficients)
            .map(|(bl, c)| AlgebraElement::new(c.shape().clone(), bl))
            .collect()
    };
    let p = to_elems(p_blocks)?;
    let q = to_elems(q_blocks)?;
    let value = traced_sum(&p, &ns)?
        .map_or(0.0, |x| x.norm())
        .max(traced_sum(&q, &ns)?.map_or(0.0, |x| x.norm()));
    let f = extract_factorization(&coefficients, &p, &q)?;
    let factor_bound = factorization_bound(&f.a, &f.b, &ns)?;
    Ok(DecCertificate {
        value,
        lower_bound: sol.dual_value * scale,
        domain_dims: ns,
        coefficients,
        p,
        q,
        factor_a: f.a,
        factor_b: f.b,
        reconstruction_residual: f.residual,
        factor_bound,
        repair_shift: repair_shift * scale,
        solver: SolveSummary::from_solution(&sol),
    })
}

/// `‖T‖_dec` for `T : ℓ_∞^n → A`, `T(e_j) = x_j`.
pub fn dec_norm_linf(x: &[AlgebraElement]) -> Result<DecCertificate> {
    dec_norm(&LinearMapRep::from_linf(x)?)
}

/// `‖u‖_dec` for `u` defined on a full matrix algebra `M_n`.
pub fn dec_norm_matrix_domain(u: &LinearMapRep) -> Result<DecCertificate> {
    if !u.domain().is_single_block() {
        return Err(Error::Precondition(format!(
            "domain must be a single matrix block, got {:?}",
            u.domain().block_dims()
        )));
    }
    dec_norm(u)
}

/// Self-adjoint decomposition `u = u_1 − u_2` with `u_1, u_2` CP.
#[derive(Clone, Debug)]
pub struct SelfAdjointDecomposition {
    /// `‖Σ_j (u_1 + u_2)(e_j)‖` at the returned feasible point.
    pub value: f64,
    pub lower_bound: f64,
    /// `u_1(e_j)`, positive.
    pub positive_part: Vec<AlgebraElement>,
    /// `u_2(e_j) = u_1(e_j) − x_j`, positive.
    pub negative_part: Vec<AlgebraElement>,
    pub solver: SolveSummary,
}

/// `inf ‖u_1 + u_2‖` over CP `u_1, u_2 : ℓ_∞^n → A` with `u_1 − u_2 = T`,
/// where `T(e_j) = x_j` has self-adjoint coefficients.
pub fn selfadjoint_dec_norm(x: &[AlgebraElement]) -> Result<SelfAdjointDecomposition> {
    let first = x
        .first()
        .ok_or_else(|| Error::InvalidInput("at least one coefficient is required".into()))?;
    let shape = first.shape().clone();
    for (j, xj) in x.iter().enumerate() {
        if xj.shape() != &shape {
            return Err(Error::DimensionMismatch(format!("coefficient {j} has a different shape")));
        }
        if !xj.is_self_adjoint(1e-10) {
            return Err(Error::Precondition(format!(
                "coefficient {j} is not self-adjoint (defect {:.3e})",
                xj.hermitian_defect()
            )));
        }
    }
    let ms = shape.block_dims().to_vec();
    let scale = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        let z = vec![AlgebraElement::zeros(&shape); x.len()];
        return Ok(SelfAdjointDecomposition {
            value: 0.0,
            lower_bound: 0.0,
            positive_part: z.clone(),
            negative_part: z,
            solver: SolveSummary::trivial(),
        });
    }
    let mut vars = 1;
    let mut hv: Vec<Vec<Option<HermVar>>> = Vec::new();
    for xj in x {
        let row = ms
            .iter()
            .enumerate()
            .map(|(b, &m)| {
                (xj.block(b).max_abs() > 0.0).then(|| {
                    let h = HermVar { first: vars, n: m };
                    vars += m * m;
                    h
                })
            })
            .collect();
        hv.push(row);
    }
    let mut prog = ConicProgram::new(vars);
    prog.set_objective(0, 1.0)?;
    let mut sum_blocks = Vec::with_capacity(ms.len());
    for (b, &m) in ms.iter().enumerate() {
        // s·1 − Σ_j (2 p_j − x_j) ⪰ 0
        let mut c = ComplexMatrix::zeros(m, m);
        for (j, xj) in x.iter().enumerate() {
            if hv[j][b].is_some() {
                c += &xj.block(b).hermitian_part().scale_real(1.0 / scale);
            }
        }
        let blk = prog.add_block(c)?;
        for r in 0..m {
            prog.add_term(blk, 0, r, r, C64::new(1.0, 0.0))?;
        }
        sum_blocks.push(blk);
    }
    for (j, xj) in x.iter().enumerate() {
        for (b, &m) in ms.iter().enumerate() {
            let Some(h) = hv[j][b] else { continue };
            let pb = prog.add_zero_block(m);
            h.add_to(&mut prog, pb, 0, 1.0)?;
            let nb = prog.add_block(-xj.block(b).hermitian_part().scale_real(1.0 / scale))?;
            h.add_to(&mut prog, nb, 0, 1.0)?;
            h.add_to(&mut prog, sum_blocks[b], 0, -2.0)?;
        }
    }
    let sol = solve_checked(&prog, &dec_solver_options(), "self-adjoint decomposition program")?;

    let mut positive_part = Vec::with_capacity(x.len());
    let mut negative_part = Vec::with_capacity(x.len());
    for (j, xj) in x.iter().enumerate() {
        let mut pos = Vec::with_capacity(ms.len());
        let mut neg = Vec::with_capacity(ms.len());
        for (b, &m) in ms.iter().enumerate() {
            match hv[j][b] {
                None => {
                    pos.push(ComplexMatrix::zeros(m, m));
                    neg.push(ComplexMatrix::zeros(m, m));
                }
                Some(h) => {
                    let xb = xj.block(b).hermitian_part();
                    let mut pj = h.read(&sol.y).scale_real(scale);
                    // Shift so both p_j and p_j − x_j are exactly PSD.
                    let l = matrix::min_eigenvalue(&pj)?.min(matrix::min_eigenvalue(&(&pj - &xb))?);
                    if l < 0.0 {
                        let shift = -l * (1.0 + 1e-9) + 1e-15 * scale;
                        for r in 0..m {
                            pj[(r, r)] += C64::new(shift, 0.0);
                        }
                    }
                    neg.push(&pj - &xb);
                    pos.push(pj);
                }
            }
        }
        positive_part.push(AlgebraElement::new(shape.clone(), pos)?);
        negative_part.push(AlgebraElement::new(shape.clone(), neg)?);
    }
    let mut total = AlgebraElement::zeros(&shape);
    for (p, n) in positive_part.iter().zip(&negative_part) {
        total = total.add(p)?.add(n)?;
    }
    Ok(SelfAdjointDecomposition {
        value: total.norm(),
        lower_bound: sol.dual_value * scale,
        positive_part,
        negative_part,
        solver: SolveSummary::from_solution(&sol),
    })
}

/// `u(e_ij) = Σ_k a_ki* b_kj` on `M_n`, with `a[k][i]`, `b[k][j]` in a common algebra.
pub fn factored_map(a: &[Vec<AlgebraElement>], b: &[Vec<AlgebraElement>]) -> Result<LinearMapRep> {
    let (shape, n) = check_factored(a, b)?;
    let domain = AlgebraShape::matrix(n);
    LinearMapRep::from_fn(domain.clone(), shape.clone(), |e| {
        let (_, i, j) = (0..domain.total_dim())
            .map(|k| domain.basis_label(k))
            .find(|&(_, i, j)| e.block(0)[(i, j)] != C64::new(0.0, 0.0))
            .expect("basis element has a nonzero entry");
        let mut out = AlgebraElement::zeros(&shape);
        for (ak, bk) in a.iter().zip(b) {
            out = out.add(&ak[i].adjoint().multiply(&bk[j])?)?;
        }
        Ok(out)
    })
}

fn check_factored(a: &[Vec<AlgebraElement>], b: &[Vec<AlgebraElement>]) -> Result<(AlgebraShape, usize)> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} rows of a, {} rows of b",
            a.len(),
            b.len()
        )));
    }
    let n = a[0].len();
    if n == 0 {
        return Err(Error::InvalidInput("empty factor rows".into()));
    }
    let shape = a[0][0].shape().clone();
    for (k, (ak, bk)) in a.iter().zip(b).enumerate() {
        if ak.len() != n || bk.len() != n {
            return Err(Error::DimensionMismatch(format!("factor row {k} has the wrong length")));
        }
        if ak.iter().chain(bk).any(|x| x.shape() != &shape) {
            return Err(Error::DimensionMismatch(format!("factor row {k} mixes shapes")));
        }
    }
    Ok((shape, n))
}

/// `‖Σ_{k,i} a_ki* a_ki‖^{1/2} ‖Σ_{k,j} b_kj* b_kj‖^{1/2}`, an upper bound for
/// the dec-norm of [`factored_map`]`(a, b)`.
pub fn dec_upper_bound_factored(a: &[Vec<AlgebraElement>], b: &[Vec<AlgebraElement>]) -> Result<f64> {
    let (shape, _) = check_factored(a, b)?;
    let gram = |rows: &[Vec<AlgebraElement>]| -> Result<f64> {
        let mut acc = AlgebraElement::zeros(&shape);
        for x in rows.iter().flatten() {
            acc = acc.add(&x.adjoint().multiply(x)?)?;
        }
        Ok(acc.norm())
    };
    Ok(gram(a)?.sqrt() * gram(b)?.sqrt())
}

/// `u(x) = a* x b` from `M_n` to `M_m`, for `n × m` matrices `a`, `b`.
/// Its dec-norm is at most `‖a‖ ‖b‖`.
pub fn sandwich_map(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<LinearMapRep> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "a is {}x{}, b is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let domain = AlgebraShape::matrix(a.rows());
    let codomain = AlgebraShape::matrix(a.cols());
    let ad = a.adjoint();
    LinearMapRep::from_fn(domain, codomain, |x| {
        AlgebraElement::from_matrix(&(&ad * x.block(0)) * b)
    })
}

/// Both ways of computing the dec-norm of a map into a direct sum.
#[derive(Clone, Debug, Serialize)]
pub struct DirectSumReport {
    pub per_block: Vec<f64>,
    pub max_of_blocks: f64,
    pub joint: f64,
    pub discrepancy: f64,
}

/// `‖u‖_dec` for `u = ⊕ u_i` into `⊕ B_i`: the largest per-block value, and
/// the same quantity from one joint program over the direct sum.
pub fn dec_norm_direct_sum(maps: &[LinearMapRep]) -> Result<DirectSumReport> {
    let joint_map = LinearMapRep::direct_sum(maps)?;
    let per_block = maps
        .iter()
        .map(|u| dec_norm(u).map(|c| c.value))
        .collect::<Result<Vec<_>>>()?;
    let max_of_blocks = per_block.iter().copied().fold(0.0, f64::max);
    let joint = dec_norm(&joint_map)?.value;
    Ok(DirectSumReport {
        discrepancy: (joint - max_of_blocks).abs(),
        per_block,
        max_of_blocks,
        joint,
    })
}
