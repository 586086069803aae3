//! Dense solver for linear matrix inequalities over complex Hermitian blocks.
//!
//! A [`ConicProgram`] is
//!
//! ```text
//! minimize    c·y
//! subject to  F_0^(b) + Σ_k y_k F_k^(b) ⪰ 0     for every block b
//!             A y = b                           (optional)
//! ```
//!
//! with Hermitian `F`. Its dual is
//!
//! ```text
//! maximize    −Σ_b ⟨F_0^(b), X_b⟩ + b·w
//! subject to  Σ_b ⟨F_k^(b), X_b⟩ + (Aᵀw)_k = c_k,   X_b ⪰ 0
//! ```
//!
//! [`solve`] runs an infeasible primal-dual interior-point iteration with the
//! HKM search direction and a Mehrotra predictor-corrector step. Blocks stay
//! complex throughout. Equality constraints are eliminated up front by a
//! null-space parametrization `y = y_0 + N z`.
//!
//! The diagnostic dump written by [`write_dump`] is line oriented:
//!
//! ```text
//! cbdec-conic-dump 1
//! vars <m>
//! objective <c_0> … <c_{m-1}>
//! block <b> dim <n>
//! constant <nnz>
//! <row> <col> <re> <im>          (one line per nonzero)
//! term <var> <nnz>
//! <row> <col> <re> <im>
//! equality <a_0> … <a_{m-1}> rhs <b>
//! solution <status>
//! primal_value <v>
//! dual_value <v>
//! gap <v>
//! psd_residual <v>
//! equality_residual <v>
//! dual_residual <v>
//! iterations <k>
//! y <y_0> … <y_{m-1}>
//! end
//! ```
//!
//! Floats are written with `{:e}`, which round-trips exactly.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, ComplexMatrix, C64, HERMITIAN_TOL};

type Entries = Vec<(usize, usize, C64)>;

/// One PSD constraint `F_0 + Σ y_k F_k ⪰ 0`; the `F_k` are stored sparsely.
#[derive(Clone, Debug)]
pub struct PsdBlock {
    dim: usize,
    constant: ComplexMatrix,
    terms: BTreeMap<usize, Entries>,
}

impl PsdBlock {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(&self) -> &ComplexMatrix {
        &self.constant
    }

    /// Dense coefficient matrix of variable `var` (zero if it does not appear).
    pub fn coefficient(&self, var: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        if let Some(e) = self.terms.get(&var) {
            add_entries(&mut m, e, 1.0);
        }
        m
    }

    pub fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.keys().copied()
    }
}

#[derive(Clone, Debug)]
pub struct ConicProgram {
    num_vars: usize,
    objective: Vec<f64>,
    blocks: Vec<PsdBlock>,
    eq_rows: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
}

impl ConicProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            blocks: Vec::new(),
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn blocks(&self) -> &[PsdBlock] {
        &self.blocks
    }

    pub fn num_equalities(&self) -> usize {
        self.eq_rows.len()
    }

    fn check_var(&self, var: usize) -> Result<()> {
        if var >= self.num_vars {
            return Err(Error::DimensionMismatch(format!(
                "variable {var} out of range (program has {})",
                self.num_vars
            )));
        }
        Ok(())
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) -> Result<()> {
        self.check_var(var)?;
        if !coeff.is_finite() {
            return Err(Error::NonFinite(format!("objective coefficient {var}")));
        }
        self.objective[var] = coeff;
        Ok(())
    }

    /// Adds a block with constant term `constant` and returns its index.
    pub fn add_block(&mut self, constant: ComplexMatrix) -> Result<usize> {
        if !constant.is_finite() {
            return Err(Error::NonFinite("block constant".into()));
        }
        matrix::ensure_hermitian(&constant)?;
        self.blocks.push(PsdBlock {
            dim: constant.rows(),
            constant: constant.hermitian_part(),
            terms: BTreeMap::new(),
        });
        Ok(self.blocks.len() - 1)
    }

    pub fn add_zero_block(&mut self, dim: usize) -> usize {
        assert!(dim > 0, "block dimension must be positive");
        self.blocks.push(PsdBlock {
            dim,
            constant: ComplexMatrix::zeros(dim, dim),
            terms: BTreeMap::new(),
        });
        self.blocks.len() - 1
    }

    fn check_entry(&self, block: usize, row: usize, col: usize, value: C64) -> Result<()> {
        let b = self
            .blocks
            .get(block)
            .ok_or_else(|| Error::DimensionMismatch(format!("no block {block}")))?;
        if row >= b.dim || col >= b.dim {
            return Err(Error::DimensionMismatch(format!(
                "entry ({row}, {col}) outside block {block} of size {}",
                b.dim
            )));
        }
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::NonFinite(format!("entry ({row}, {col}) of block {block}")));
        }
        if row == col && value.im.abs() > HERMITIAN_TOL * value.norm().max(1.0) {
            return Err(Error::NotHermitian { defect: value.im.abs() });
        }
        Ok(())
    }

    /// Adds `value` at `(row, col)` of `F_var` in `block`, and its conjugate at
    /// `(col, row)` when off the diagonal.
    pub fn add_term(&mut self, block: usize, var: usize, row: usize, col: usize, value: C64) -> Result<()> {
        self.check_var(var)?;
        self.check_entry(block, row, col, value)?;
        let e = self.blocks[block].terms.entry(var).or_default();
        push_hermitian(e, row, col, value);
        Ok(())
    }

    /// Adds a dense Hermitian matrix to `F_var` in `block`.
    pub fn add_dense_term(&mut self, block: usize, var: usize, f: &ComplexMatrix) -> Result<()> {
        self.check_var(var)?;
        let b = self
            .blocks
            .get(block)
            .ok_or_else(|| Error::DimensionMismatch(format!("no block {block}")))?;
        if f.rows() != b.dim || f.cols() != b.dim {
            return Err(Error::DimensionMismatch(format!(
                "term is {}x{}, block {block} has size {}",
                f.rows(),
                f.cols(),
                b.dim
            )));
        }
        if !f.is_finite() {
            return Err(Error::NonFinite(format!("term for variable {var}")));
        }
        matrix::ensure_hermitian(f)?;
        let f = f.hermitian_part();
        let e = self.blocks[block].terms.entry(var).or_default();
        for i in 0..f.rows() {
            for j in 0..f.cols() {
                if f[(i, j)] != C64::new(0.0, 0.0) {
                    e.push((i, j, f[(i, j)]));
                }
            }
        }
        Ok(())
    }

    /// Adds `value` at `(row, col)` of the constant term (and the conjugate at `(col, row)`).
    pub fn add_constant(&mut self, block: usize, row: usize, col: usize, value: C64) -> Result<()> {
        self.check_entry(block, row, col, value)?;
        let c = &mut self.blocks[block].constant;
        if row == col {
            c[(row, row)] += C64::new(value.re, 0.0);
        } else {
            c[(row, col)] += value;
            c[(col, row)] += value.conj();
        }
        Ok(())
    }

    /// Adds the constraint `Σ_k coeffs_k y_k = rhs`.
    pub fn add_equality(&mut self, coeffs: Vec<f64>, rhs: f64) -> Result<()> {
        if coeffs.len() != self.num_vars {
            return Err(Error::DimensionMismatch(format!(
                "equality has {} coefficients, program has {} variables",
                coeffs.len(),
                self.num_vars
            )));
        }
        if !rhs.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("equality constraint".into()));
        }
        self.eq_rows.push(coeffs);
        self.eq_rhs.push(rhs);
        Ok(())
    }

    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective.iter().zip(y).map(|(c, y)| c * y).sum()
    }

    /// `F_0 + Σ y_k F_k` for `block`.
    pub fn evaluate_block(&self, block: usize, y: &[f64]) -> ComplexMatrix {
        let b = &self.blocks[block];
        let mut m = b.constant.clone();
        for (&k, e) in &b.terms {
            if y[k] != 0.0 {
                add_entries(&mut m, e, y[k]);
            }
        }
        m
    }

    /// `(Ay − b)` for the equality constraints.
    pub fn equality_residuals(&self, y: &[f64]) -> Vec<f64> {
        self.eq_rows
            .iter()
            .zip(&self.eq_rhs)
            .map(|(row, rhs)| row.iter().zip(y).map(|(a, y)| a * y).sum::<f64>() - rhs)
            .collect()
    }

    /// `⟨F_k, X⟩` summed over blocks, for every variable `k`.
    pub fn adjoint_map(&self, x: &[ComplexMatrix]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_vars];
        for (b, xb) in self.blocks.iter().zip(x) {
            for (&k, e) in &b.terms {
                out[k] += sparse_trace(e, xb);
            }
        }
        out
    }

    fn compile(&self) -> Compiled {
        Compiled {
            m: self.num_vars,
            c: self.objective.clone(),
            dims: self.blocks.iter().map(|b| b.dim).collect(),
            f0: self.blocks.iter().map(|b| b.constant.clone()).collect(),
            terms: self
                .blocks
                .iter()
                .map(|b| b.terms.iter().map(|(&k, e)| (k, e.clone())).collect())
                .collect(),
        }
    }
}

fn push_hermitian(e: &mut Entries, row: usize, col: usize, value: C64) {
    if row == col {
        e.push((row, row, C64::new(value.re, 0.0)));
    } else {
        e.push((row, col, value));
        e.push((col, row, value.conj()));
    }
}

fn add_entries(m: &mut ComplexMatrix, e: &[(usize, usize, C64)], scale: f64) {
    for &(i, j, v) in e {
        m[(i, j)] += v * scale;
    }
}

/// `Re tr(F G)` for sparse `F`.
fn sparse_trace(e: &[(usize, usize, C64)], g: &ComplexMatrix) -> f64 {
    e.iter().map(|&(i, j, v)| (v * g[(j, i)]).re).sum()
}

fn entries_norm(e: &[(usize, usize, C64)]) -> f64 {
    e.iter().map(|(_, _, v)| v.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    InfeasibleSuspected,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Optimal => "optimal",
            Self::MaxIterations => "max_iterations",
            Self::InfeasibleSuspected => "infeasible_suspected",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Bound on `|primal − dual| / max(1, |primal|)`.
    pub gap_tol: f64,
    /// Bound on the scaled LMI and dual-equation residuals.
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            max_iter: 20000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConicSolution {
    pub status: SolveStatus,
    /// `c·y`.
    pub primal_value: f64,
    pub y: Vec<f64>,
    /// `−Σ⟨F_0, X⟩ + b·w`.
    pub dual_value: f64,
    /// Dual matrices `X_b`, one per block.
    pub x: Vec<ComplexMatrix>,
    /// Multipliers of the equality constraints.
    pub w: Vec<f64>,
    /// `max(0, −λ_min)` over the blocks evaluated at `y`.
    pub psd_residual: f64,
    /// `‖Ay − b‖_∞`.
    pub equality_residual: f64,
    /// `‖c − 𝒜*(X) − Aᵀw‖_∞`.
    pub dual_residual: f64,
    /// `|primal − dual| / max(1, |primal|)`.
    pub gap: f64,
    pub iterations: usize,
    pub message: String,
}

struct Compiled {
    m: usize,
    c: Vec<f64>,
    dims: Vec<usize>,
    f0: Vec<ComplexMatrix>,
    terms: Vec<Vec<(usize, Entries)>>,
}

impl Compiled {
    fn eval(&self, y: &[f64]) -> Vec<ComplexMatrix> {
        self.f0
            .iter()
            .zip(&self.terms)
            .map(|(f0, t)| {
                let mut m = f0.clone();
                for (k, e) in t {
                    if y[*k] != 0.0 {
                        add_entries(&mut m, e, y[*k]);
                    }
                }
                m
            })
            .collect()
    }

    fn op(&self, dy: &[f64]) -> Vec<ComplexMatrix> {
        self.dims
            .iter()
            .zip(&self.terms)
            .map(|(&n, t)| {
                let mut m = ComplexMatrix::zeros(n, n);
                for (k, e) in t {
                    if dy[*k] != 0.0 {
                        add_entries(&mut m, e, dy[*k]);
                    }
                }
                m
            })
            .collect()
    }

    /// `Re tr(F_k G_b)` summed over blocks.
    fn adjoint(&self, g: &[ComplexMatrix]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (t, gb) in self.terms.iter().zip(g) {
            for (k, e) in t {
                out[*k] += sparse_trace(e, gb);
            }
        }
        out
    }

    /// Schur complement `M_kl = Σ_b Re tr(F_k X F_l Z⁻¹)`.
    fn schur(&self, x: &[ComplexMatrix], zinv: &[ComplexMatrix]) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m * m];
        for ((t, xb), zb) in self.terms.iter().zip(x).zip(zinv) {
            let n = xb.rows();
            let xs = xb.as_slice();
            let zs = zb.as_slice();
            let nnz: usize = t.iter().map(|(_, e)| e.len()).sum();
            if nnz <= n * n + t.len() {
                for (a, (k, ek)) in t.iter().enumerate() {
                    for (l, el) in &t[a..] {
                        let mut s = 0.0;
                        for &(i, j, v) in ek {
                            for &(p, q, w) in el {
                                s += (v * xs[j * n + p] * w * zs[q * n + i]).re;
                            }
                        }
                        out[k * m + l] += s;
                        if k != l {
                            out[l * m + k] += s;
                        }
                    }
                }
            } else {
                for (l, el) in t {
                    let mut g = vec![C64::new(0.0, 0.0); n * n];
                    for &(p, q, w) in el {
                        for a in 0..n {
                            let xw = xs[a * n + p] * w;
                            if xw == C64::new(0.0, 0.0) {
                                continue;
                            }
                            for b in 0..n {
                                g[a * n + b] += xw * zs[q * n + b];
                            }
                        }
                    }
                    for (k, ek) in t {
                        let s: f64 = ek.iter().map(|&(i, j, v)| (v * g[j * n + i]).re).sum();
                        out[k * m + l] += s;
                    }
                }
                for k in 0..m {
                    for l in k + 1..m {
                        let s = 0.5 * (out[k * m + l] + out[l * m + k]);
                        out[k * m + l] = s;
                        out[l * m + k] = s;
                    }
                }
            }
        }
        out
    }
}

fn inner(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.real_inner(y)).sum()
}

fn frob(a: &[ComplexMatrix]) -> f64 {
    a.iter().map(|x| x.frobenius_norm().powi(2)).sum::<f64>().sqrt()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Largest `α` with `X + α dX ⪰ 0`, given `X^{-1/2}`; infinite if unrestricted.
fn max_step(xinvhalf: &ComplexMatrix, dx: &ComplexMatrix) -> Result<f64> {
    let t = &(xinvhalf * dx) * xinvhalf;
    let l = matrix::herm_eigensystem(&t)?.min_value();
    Ok(if l < 0.0 { -1.0 / l } else { f64::INFINITY })
}

/// Cholesky factor of a symmetric positive definite matrix after diagonal
/// equilibration, with growing regularization on failure.
struct SchurFactor {
    n: usize,
    l: Vec<f64>,
    scale: Vec<f64>,
}

impl SchurFactor {
    fn new(a: &[f64], n: usize) -> Option<Self> {
        let scale: Vec<f64> = (0..n)
            .map(|i| {
                let d = a[i * n + i];
                if d > 0.0 && d.is_finite() {
                    1.0 / d.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let mut base = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                base[i * n + j] = a[i * n + j] * scale[i] * scale[j];
            }
        }
        let mut reg = 0.0;
        for _ in 0..12 {
            let mut l = base.clone();
            for i in 0..n {
                l[i * n + i] += reg;
            }
            if cholesky_in_place(&mut l, n) {
                return Some(Self { n, l, scale });
            }
            reg = if reg == 0.0 { 1e-15 } else { reg * 100.0 };
        }
        None
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = b.iter().zip(&self.scale).map(|(b, s)| b * s).collect();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.l[i * n + k] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        x.iter().zip(&self.scale).map(|(x, s)| x * s).collect()
    }
}

fn cholesky_in_place(a: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
        for k in j + 1..n {
            a[j * n + k] = 0.0;
        }
    }
    true
}

/// Solves `M x = b` with two steps of iterative refinement against the unregularized `M`.
fn refined_solve(f: &SchurFactor, m: &[f64], b: &[f64]) -> Vec<f64> {
    let n = f.n;
    let mut x = f.solve(b);
    for _ in 0..2 {
        let r: Vec<f64> = (0..n)
            .map(|i| b[i] - (0..n).map(|j| m[i * n + j] * x[j]).sum::<f64>())
            .collect();
        let dx = f.solve(&r);
        for (x, d) in x.iter_mut().zip(dx) {
            *x += d;
        }
    }
    x
}

struct Iterate {
    y: Vec<f64>,
    x: Vec<ComplexMatrix>,
    z: Vec<ComplexMatrix>,
}

struct LmiOutcome {
    status: SolveStatus,
    y: Vec<f64>,
    x: Vec<ComplexMatrix>,
    iterations: usize,
    message: String,
}

/// The step direction for complementarity target `rc` (already including any corrector term).
struct Direction {
    dy: Vec<f64>,
    dx: Vec<ComplexMatrix>,
    dz: Vec<ComplexMatrix>,
}

fn direction(
    p: &Compiled,
    it: &Iterate,
    zinv: &[ComplexMatrix],
    lmi_res: &[ComplexMatrix],
    dual_res: &[f64],
    rc: &[ComplexMatrix],
    factor: &SchurFactor,
    schur: &[f64],
    active: &[bool],
) -> Direction {
    // G = (R_c − X R) Z⁻¹
    let g: Vec<ComplexMatrix> = (0..p.dims.len())
        .map(|b| &(&rc[b] - &(&it.x[b] * &lmi_res[b])) * &zinv[b])
        .collect();
    let mut rhs = p.adjoint(&g);
    for k in 0..p.m {
        rhs[k] = if active[k] { rhs[k] - dual_res[k] } else { 0.0 };
    }
    let dy = if p.m == 0 { Vec::new() } else { refined_solve(factor, schur, &rhs) };
    let fdy = p.op(&dy);
    let dz: Vec<ComplexMatrix> = lmi_res.iter().zip(&fdy).map(|(r, f)| r + f).collect();
    let dx: Vec<ComplexMatrix> = (0..p.dims.len())
        .map(|b| (&(&rc[b] - &(&it.x[b] * &dz[b])) * &zinv[b]).hermitian_part())
        .collect();
    Direction { dy, dx, dz }
}

fn step_lengths(xh: &[ComplexMatrix], zh: &[ComplexMatrix], d: &Direction) -> Result<(f64, f64)> {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for b in 0..xh.len() {
        ap = ap.min(max_step(&xh[b], &d.dx[b])?);
        ad = ad.min(max_step(&zh[b], &d.dz[b])?);
    }
    Ok((ap, ad))
}

fn solve_lmi(p: &Compiled, opts: &SolverOptions) -> Result<LmiOutcome> {
    let nb = p.dims.len();
    let ntot: usize = p.dims.iter().sum();
    let mut active = vec![false; p.m];
    for t in &p.terms {
        for (k, _) in t {
            active[*k] = true;
        }
    }
    if let Some(k) = (0..p.m).find(|&k| !active[k] && p.c[k] != 0.0) {
        return Ok(LmiOutcome {
            status: SolveStatus::InfeasibleSuspected,
            y: vec![0.0; p.m],
            x: p.dims.iter().map(|&n| ComplexMatrix::zeros(n, n)).collect(),
            iterations: 0,
            message: format!("unbounded: variable {k} is unconstrained with nonzero cost"),
        });
    }
    if nb == 0 {
        return Ok(LmiOutcome {
            status: SolveStatus::Optimal,
            y: vec![0.0; p.m],
            x: Vec::new(),
            iterations: 0,
            message: "no constraints".into(),
        });
    }

    let cnorm = norm2(&p.c);
    let f0norm = frob(&p.f0);
    let mut it = Iterate {
        y: vec![0.0; p.m],
        x: Vec::with_capacity(nb),
        z: Vec::with_capacity(nb),
    };
    for b in 0..nb {
        let n = p.dims[b] as f64;
        let mut xi: f64 = 10f64.max(n.sqrt());
        let mut eta: f64 = 10f64.max(n.sqrt()).max(p.f0[b].frobenius_norm());
        for (k, e) in &p.terms[b] {
            let fn_ = entries_norm(e);
            xi = xi.max(n * (1.0 + p.c[*k].abs()) / (1.0 + fn_));
            eta = eta.max(fn_);
        }
        it.x.push(ComplexMatrix::identity(p.dims[b]).scale_real(xi));
        it.z.push(ComplexMatrix::identity(p.dims[b]).scale_real(eta));
    }

    let mut best: Option<(f64, Vec<f64>, Vec<ComplexMatrix>)> = None;
    let mut stalls = 0;
    let mut status = SolveStatus::MaxIterations;
    let mut message = String::from("iteration limit reached");
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let fy = p.eval(&it.y);
        let lmi_res: Vec<ComplexMatrix> = fy.iter().zip(&it.z).map(|(f, z)| f - z).collect();
        let ax = p.adjoint(&it.x);
        let dual_res: Vec<f64> = (0..p.m).map(|k| p.c[k] - ax[k]).collect();
        let pobj: f64 = p.c.iter().zip(&it.y).map(|(c, y)| c * y).sum();
        let dobj = -inner(&p.f0, &it.x);
        let mu = inner(&it.x, &it.z) / ntot as f64;
        let pinf = frob(&lmi_res) / (1.0 + f0norm);
        let dinf = norm2(&dual_res) / (1.0 + cnorm);
        let relgap = (pobj - dobj).abs() / pobj.abs().max(1.0);

        if !(pobj.is_finite() && dobj.is_finite() && mu.is_finite()) {
            message = "numerical breakdown (non-finite iterate)".into();
            break;
        }
        let merit = pinf.max(dinf).max(relgap);
        if best.as_ref().map_or(true, |(m, _, _)| merit < *m) {
            best = Some((merit, it.y.clone(), it.x.clone()));
        }
        if pinf <= opts.feas_tol && dinf <= opts.feas_tol && relgap <= opts.gap_tol {
            status = SolveStatus::Optimal;
            message = "converged".into();
            break;
        }
        // X/⟨−F_0, X⟩ approaching a Farkas certificate: the LMI has no feasible point.
        let t = -inner(&p.f0, &it.x);
        if t > 0.0 && norm2(&ax) <= 1e-8 * t && frob(&it.x) <= 1e6 * t {
            status = SolveStatus::InfeasibleSuspected;
            message = "infeasible: dual ray found (constraint set appears empty)".into();
            break;
        }
        if norm2(&it.y) > 1e12 && pinf <= 1e-6 {
            status = SolveStatus::InfeasibleSuspected;
            message = "unbounded: objective decreasing without bound".into();
            break;
        }

        let zeig: Vec<_> = it.z.iter().map(matrix::herm_eigensystem).collect::<Result<_>>()?;
        let xeig: Vec<_> = it.x.iter().map(matrix::herm_eigensystem).collect::<Result<_>>()?;
        if zeig.iter().chain(&xeig).any(|e| !(e.min_value() > 0.0)) {
            message = "numerical breakdown (iterate left the cone interior)".into();
            break;
        }
        let zinv: Vec<ComplexMatrix> = zeig.iter().map(|e| e.map_spectrum(|l| 1.0 / l)).collect();
        let zh: Vec<ComplexMatrix> = zeig.iter().map(|e| e.map_spectrum(|l| 1.0 / l.sqrt())).collect();
        let xh: Vec<ComplexMatrix> = xeig.iter().map(|e| e.map_spectrum(|l| 1.0 / l.sqrt())).collect();

        let mut schur = p.schur(&it.x, &zinv);
        for k in 0..p.m {
            if !active[k] {
                schur[k * p.m + k] = 1.0;
            }
        }
        let factor = match SchurFactor::new(&schur, p.m) {
            Some(f) => f,
            None => {
                message = "Schur complement could not be factored".into();
                break;
            }
        };

        let xz: Vec<ComplexMatrix> = (0..nb).map(|b| -(&it.x[b] * &it.z[b])).collect();
        let pred = direction(p, &it, &zinv, &lmi_res, &dual_res, &xz, &factor, &schur, &active);
        let (ap, ad) = step_lengths(&xh, &zh, &pred)?;
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mut mu_aff = 0.0;
        for b in 0..nb {
            let xa = &it.x[b] + &pred.dx[b].scale_real(ap);
            let za = &it.z[b] + &pred.dz[b].scale_real(ad);
            mu_aff += xa.real_inner(&za);
        }
        mu_aff /= ntot as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let rc: Vec<ComplexMatrix> = (0..nb)
            .map(|b| {
                let mut r = &xz[b] - &(&pred.dx[b] * &pred.dz[b]);
                for i in 0..p.dims[b] {
                    r[(i, i)] += C64::new(sigma * mu, 0.0);
                }
                r
            })
            .collect();
        let corr = direction(p, &it, &zinv, &lmi_res, &dual_res, &rc, &factor, &schur, &active);
        let (cp, cd) = step_lengths(&xh, &zh, &corr)?;
        let gamma = 0.9 + 0.09 * ap.min(ad);
        let ap = (gamma * cp).min(1.0);
        let ad = (gamma * cd).min(1.0);

        for b in 0..nb {
            it.x[b] = (&it.x[b] + &corr.dx[b].scale_real(ap)).hermitian_part();
            it.z[b] = (&it.z[b] + &corr.dz[b].scale_real(ad)).hermitian_part();
        }
        for k in 0..p.m {
            it.y[k] += ad * corr.dy[k];
        }
        iterations += 1;

        if ap < 1e-9 && ad < 1e-9 {
            stalls += 1;
            if stalls >= 3 {
                message = "stalled: step lengths vanished".into();
                break;
            }
        } else {
            stalls = 0;
        }
    }

    let (y, x) = match (status, best) {
        (SolveStatus::Optimal, _) | (SolveStatus::InfeasibleSuspected, _) | (_, None) => (it.y, it.x),
        (_, Some((_, y, x))) => (y, x),
    };
    Ok(LmiOutcome {
        status,
        y,
        x,
        iterations,
        message,
    })
}

/// Minimizes the program. Errors only on malformed input; numerical
/// difficulties are reported through [`ConicSolution::status`].
pub fn solve(p: &ConicProgram, opts: &SolverOptions) -> Result<ConicSolution> {
    validate(p)?;
    let m = p.num_vars;
    let (outcome, y, w) = if p.eq_rows.is_empty() {
        let out = solve_lmi(&p.compile(), opts)?;
        let y = out.y.clone();
        (out, y, Vec::new())
    } else {
        let red = reduce_equalities(p)?;
        match red {
            Reduction::Inconsistent(msg) => {
                let x = p.blocks.iter().map(|b| ComplexMatrix::zeros(b.dim, b.dim)).collect();
                let out = LmiOutcome {
                    status: SolveStatus::InfeasibleSuspected,
                    y: vec![0.0; m],
                    x,
                    iterations: 0,
                    message: msg,
                };
                (out, vec![0.0; m], vec![0.0; p.eq_rows.len()])
            }
            Reduction::Reduced { compiled, y0, null } => {
                let out = solve_lmi(&compiled, opts)?;
                let mut y = y0;
                for (j, z) in out.y.iter().enumerate() {
                    for k in 0..m {
                        y[k] += null[k][j] * z;
                    }
                }
                let ax = p.adjoint_map(&out.x);
                let resid: Vec<f64> = (0..m).map(|k| p.objective[k] - ax[k]).collect();
                let w = least_squares_transpose(&p.eq_rows, &resid)?;
                (out, y, w)
            }
        }
    };

    let primal_value = p.objective_value(&y);
    let eq_dual: f64 = w.iter().zip(&p.eq_rhs).map(|(w, b)| w * b).sum();
    let dual_value = -p
        .blocks
        .iter()
        .zip(&outcome.x)
        .map(|(b, x)| b.constant.real_inner(x))
        .sum::<f64>()
        + eq_dual;
    let mut psd_residual: f64 = 0.0;
    for b in 0..p.blocks.len() {
        let l = matrix::min_eigenvalue(&p.evaluate_block(b, &y))?;
        psd_residual = psd_residual.max(-l);
    }
    let equality_residual = norm_inf(&p.equality_residuals(&y));
    let dual_residual = dual_equation_residual(p, &outcome.x, &w);
    let gap = (primal_value - dual_value).abs() / primal_value.abs().max(1.0);
    let mut status = outcome.status;
    let mut message = outcome.message;
    if status == SolveStatus::Optimal && psd_residual > opts.feas_tol {
        status = SolveStatus::MaxIterations;
        message = format!("converged iterate violates the cone by {psd_residual:.3e}");
    }
    Ok(ConicSolution {
        status,
        primal_value,
        y,
        dual_value,
        x: outcome.x,
        w,
        psd_residual,
        equality_residual,
        dual_residual,
        gap,
        iterations: outcome.iterations,
        message,
    })
}

fn dual_equation_residual(p: &ConicProgram, x: &[ComplexMatrix], w: &[f64]) -> f64 {
    if x.len() != p.blocks.len() {
        return f64::INFINITY;
    }
    let ax = p.adjoint_map(x);
    let mut r: Vec<f64> = (0..p.num_vars).map(|k| p.objective[k] - ax[k]).collect();
    for (row, wi) in p.eq_rows.iter().zip(w) {
        for k in 0..p.num_vars {
            r[k] -= row[k] * wi;
        }
    }
    norm_inf(&r)
}

fn validate(p: &ConicProgram) -> Result<()> {
    for (b, blk) in p.blocks.iter().enumerate() {
        if !blk.constant.is_finite() {
            return Err(Error::NonFinite(format!("constant of block {b}")));
        }
        if blk.constant.rows() != blk.dim {
            return Err(Error::DimensionMismatch(format!("constant of block {b}")));
        }
    }
    Ok(())
}

enum Reduction {
    Inconsistent(String),
    Reduced {
        compiled: Compiled,
        y0: Vec<f64>,
        null: Vec<Vec<f64>>,
    },
}

const RANK_CUTOFF: f64 = 1e-9;

fn reduce_equalities(p: &ConicProgram) -> Result<Reduction> {
    let m = p.num_vars;
    let rows = p.eq_rows.len();
    let a = ComplexMatrix::from_fn(rows, m.max(1), |i, k| C64::new(if k < m { p.eq_rows[i][k] } else { 0.0 }, 0.0));
    let d = matrix::svd(&a)?;
    let smax = d.singular_values.first().copied().unwrap_or(0.0);
    let rank = d
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_CUTOFF * smax && s > 0.0)
        .count();
    // y0 = V_r Σ⁻¹ U_rᵀ b
    let mut y0 = vec![0.0; m];
    for r in 0..rank {
        let ub: f64 = (0..rows).map(|i| d.u[(i, r)].re * p.eq_rhs[i]).sum();
        for k in 0..m {
            y0[k] += d.v[(k, r)].re * ub / d.singular_values[r];
        }
    }
    let res = p.equality_residuals(&y0);
    let bnorm = norm_inf(&p.eq_rhs);
    if norm_inf(&res) > 1e-9 * (1.0 + bnorm) {
        return Ok(Reduction::Inconsistent(format!(
            "infeasible: equality constraints are inconsistent (residual {:.3e})",
            norm_inf(&res)
        )));
    }
    let null: Vec<Vec<f64>> = (0..m)
        .map(|k| (rank..m).map(|j| d.v[(k, j)].re).collect())
        .collect();
    let nz = m - rank;

    let mut f0 = Vec::with_capacity(p.blocks.len());
    let mut terms = Vec::with_capacity(p.blocks.len());
    for (b, blk) in p.blocks.iter().enumerate() {
        f0.push(p.evaluate_block(b, &y0));
        let mut merged: Vec<BTreeMap<(usize, usize), C64>> = vec![BTreeMap::new(); nz];
        for (&k, e) in &blk.terms {
            for (j, acc) in merged.iter_mut().enumerate() {
                let coef = null[k][j];
                if coef.abs() < 1e-15 {
                    continue;
                }
                for &(r, c, v) in e {
                    *acc.entry((r, c)).or_insert(C64::new(0.0, 0.0)) += v * coef;
                }
            }
        }
        let t: Vec<(usize, Entries)> = merged
            .into_iter()
            .enumerate()
            .filter_map(|(j, acc)| {
                let e: Entries = acc
                    .into_iter()
                    .filter(|(_, v)| v.norm() > 1e-15)
                    .map(|((r, c), v)| (r, c, v))
                    .collect();
                (!e.is_empty()).then_some((j, e))
            })
            .collect();
        terms.push(t);
    }
    let c: Vec<f64> = (0..nz)
        .map(|j| (0..m).map(|k| p.objective[k] * null[k][j]).sum())
        .collect();
    Ok(Reduction::Reduced {
        compiled: Compiled {
            m: nz,
            c,
            dims: p.blocks.iter().map(|b| b.dim).collect(),
            f0,
            terms,
        },
        y0,
        null,
    })
}

/// Least-squares solution of `Aᵀ w = r`.
fn least_squares_transpose(rows: &[Vec<f64>], r: &[f64]) -> Result<Vec<f64>> {
    let p = rows.len();
    let m = r.len();
    let at = ComplexMatrix::from_fn(m.max(1), p, |k, i| C64::new(if k < m { rows[i][k] } else { 0.0 }, 0.0));
    let d = matrix::svd(&at)?;
    let smax = d.singular_values.first().copied().unwrap_or(0.0);
    let mut w = vec![0.0; p];
    for (s_idx, &s) in d.singular_values.iter().enumerate() {
        if !(s > RANK_CUTOFF * smax && s > 0.0) {
            continue;
        }
        let ur: f64 = (0..m).map(|k| d.u[(k, s_idx)].re * r[k]).sum();
        for i in 0..p {
            w[i] += d.v[(i, s_idx)].re * ur / s;
        }
    }
    Ok(w)
}

/// Independent recomputation of a solution's claims.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub objective: f64,
    pub psd_min_eigenvalue: f64,
    pub psd_residual: f64,
    pub equality_residual: f64,
    pub dual_value: Option<f64>,
    pub dual_psd_min_eigenvalue: Option<f64>,
    pub dual_residual: Option<f64>,
    pub gap: Option<f64>,
    pub issues: Vec<String>,
}

impl CertificateReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Recomputes objective, cone and equality residuals and, when dual matrices
/// are present, the dual value and gap. Every disagreement with the
/// solution's reported numbers beyond `tol`, and every violated optimality
/// condition for an `optimal` status, is listed in `issues`.
pub fn verify_certificate(p: &ConicProgram, s: &ConicSolution, tol: f64) -> CertificateReport {
    let mut issues = Vec::new();
    if s.y.len() != p.num_vars || s.y.iter().any(|v| !v.is_finite()) {
        issues.push(format!("y has {} entries or non-finite values, expected {}", s.y.len(), p.num_vars));
        return CertificateReport {
            objective: f64::NAN,
            psd_min_eigenvalue: f64::NAN,
            psd_residual: f64::NAN,
            equality_residual: f64::NAN,
            dual_value: None,
            dual_psd_min_eigenvalue: None,
            dual_residual: None,
            gap: None,
            issues,
        };
    }
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    let objective = p.objective_value(&s.y);
    if rel(objective, s.primal_value) > tol {
        issues.push(format!(
            "objective recomputes to {objective:.12e}, reported {:.12e}",
            s.primal_value
        ));
    }
    let mut psd_min = f64::INFINITY;
    for b in 0..p.blocks.len() {
        match matrix::min_eigenvalue(&p.evaluate_block(b, &s.y)) {
            Ok(l) => psd_min = psd_min.min(l),
            Err(e) => issues.push(format!("block {b}: {e}")),
        }
    }
    let psd_residual = (-psd_min).max(0.0);
    if (psd_residual - s.psd_residual).abs() > tol {
        issues.push(format!(
            "cone residual recomputes to {psd_residual:.3e}, reported {:.3e}",
            s.psd_residual
        ));
    }
    let equality_residual = norm_inf(&p.equality_residuals(&s.y));
    if (equality_residual - s.equality_residual).abs() > tol {
        issues.push(format!(
            "equality residual recomputes to {equality_residual:.3e}, reported {:.3e}",
            s.equality_residual
        ));
    }

    let has_dual = s.x.len() == p.blocks.len()
        && s.x.iter().zip(&p.blocks).all(|(x, b)| x.rows() == b.dim && x.cols() == b.dim)
        && s.w.len() == p.eq_rows.len();
    let (mut dual_value, mut dual_psd, mut dual_residual, mut gap) = (None, None, None, None);
    if has_dual {
        let dv = -p
            .blocks
            .iter()
            .zip(&s.x)
            .map(|(b, x)| b.constant.real_inner(x))
            .sum::<f64>()
            + s.w.iter().zip(&p.eq_rhs).map(|(w, b)| w * b).sum::<f64>();
        if rel(dv, s.dual_value) > tol {
            issues.push(format!("dual value recomputes to {dv:.12e}, reported {:.12e}", s.dual_value));
        }
        let mut xmin = f64::INFINITY;
        for x in &s.x {
            match matrix::min_eigenvalue(x) {
                Ok(l) => xmin = xmin.min(l),
                Err(e) => issues.push(format!("dual block: {e}")),
            }
        }
        let dr = dual_equation_residual(p, &s.x, &s.w);
        let g = (objective - dv).abs() / objective.abs().max(1.0);
        dual_value = Some(dv);
        dual_psd = Some(xmin);
        dual_residual = Some(dr);
        gap = Some(g);
        if s.status == SolveStatus::Optimal {
            let cscale = 1.0 + norm_inf(&p.objective);
            if xmin < -tol {
                issues.push(format!("dual matrix has eigenvalue {xmin:.3e}"));
            }
            if dr > tol * cscale {
                issues.push(format!("dual equations violated by {dr:.3e}"));
            }
            if g > tol {
                issues.push(format!("duality gap recomputes to {g:.3e}"));
            }
            if dv > objective + tol * objective.abs().max(1.0) {
                issues.push(format!("weak duality violated: dual {dv:.12e} > primal {objective:.12e}"));
            }
        }
    } else if s.status == SolveStatus::Optimal && !s.x.is_empty() {
        issues.push("dual matrices do not match the block structure".into());
    }
    if s.status == SolveStatus::Optimal {
        if psd_residual > tol {
            issues.push(format!("cone constraint violated by {psd_residual:.3e}"));
        }
        if equality_residual > tol {
            issues.push(format!("equality constraints violated by {equality_residual:.3e}"));
        }
    }
    CertificateReport {
        objective,
        psd_min_eigenvalue: psd_min,
        psd_residual,
        equality_residual,
        dual_value,
        dual_psd_min_eigenvalue: dual_psd,
        dual_residual,
        gap,
        issues,
    }
}

fn write_entries<W: Write>(out: &mut W, label: &str, m: &[(usize, usize, C64)]) -> io::Result<()> {
    writeln!(out, "{label} {}", m.len())?;
    for &(i, j, v) in m {
        writeln!(out, "{i} {j} {:e} {:e}", v.re, v.im)?;
    }
    Ok(())
}

/// Writes the program and, if given, the solution in the text format described
/// in the module documentation.
pub fn write_dump<W: Write>(p: &ConicProgram, s: Option<&ConicSolution>, mut out: W) -> io::Result<()> {
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
    writeln!(out, "cbdec-conic-dump 1")?;
    writeln!(out, "vars {}", p.num_vars)?;
    writeln!(out, "objective {}", join(&p.objective))?;
    for (b, blk) in p.blocks.iter().enumerate() {
        writeln!(out, "block {b} dim {}", blk.dim)?;
        let mut c = Vec::new();
        for i in 0..blk.dim {
            for j in 0..blk.dim {
                let v = blk.constant[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    c.push((i, j, v));
                }
            }
        }
        write_entries(&mut out, "constant", &c)?;
        for (&k, e) in &blk.terms {
            write_entries(&mut out, &format!("term {k}"), e)?;
        }
    }
    for (row, rhs) in p.eq_rows.iter().zip(&p.eq_rhs) {
        writeln!(out, "equality {} rhs {rhs:e}", join(row))?;
    }
    if let Some(s) = s {
        writeln!(out, "solution {}", s.status.as_str())?;
        writeln!(out, "primal_value {:e}", s.primal_value)?;
        writeln!(out, "dual_value {:e}", s.dual_value)?;
        writeln!(out, "gap {:e}", s.gap)?;
        writeln!(out, "psd_residual {:e}", s.psd_residual)?;
        writeln!(out, "equality_residual {:e}", s.equality_residual)?;
        writeln!(out, "dual_residual {:e}", s.dual_residual)?;
        writeln!(out, "iterations {}", s.iterations)?;
        writeln!(out, "y {}", join(&s.y))?;
    }
    writeln!(out, "end")
}

pub fn dump_to_string(p: &ConicProgram, s: Option<&ConicSolution>) -> String {
    let mut buf = Vec::new();
    write_dump(p, s, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("dump is ASCII")
}

/// `min t s.t. t·I − H ⪰ 0`, whose value is `λ_max(H)`.
pub fn lambda_max_program(h: &ComplexMatrix) -> Result<ConicProgram> {
    let n = h.rows();
    let mut p = ConicProgram::new(1);
    p.set_objective(0, 1.0)?;
    let b = p.add_block(-h)?;
    for i in 0..n {
        p.add_term(b, 0, i, i, C64::new(1.0, 0.0))?;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn herm(n: usize, seed: f64) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(n, n, |i, j| {
            c(((i * 5 + j * 3) as f64 + seed).sin(), ((i * 2 + j * 7) as f64 - seed).cos())
        });
        (&g + &g.adjoint()).scale_real(0.5)
    }

    #[test]
    fn lambda_max_of_diagonal() {
        let p = lambda_max_program(&ComplexMatrix::from_real_diag(&[1.0, 4.0, 2.0])).unwrap();
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal, "{}", s.message);
        assert!((s.primal_value - 4.0).abs() < 1e-8);
        assert!(verify_certificate(&p, &s, 1e-7).is_clean());
    }

    #[test]
    fn lambda_max_matches_eigensolver() {
        for n in [2, 5, 9] {
            let h = herm(n, n as f64 * 0.3);
            let p = lambda_max_program(&h).unwrap();
            let s = solve(&p, &SolverOptions::default()).unwrap();
            let expect = matrix::herm_eigensystem(&h).unwrap().max_value();
            assert_eq!(s.status, SolveStatus::Optimal);
            assert!((s.primal_value - expect).abs() < 1e-7, "{} vs {expect}", s.primal_value);
            assert!(s.dual_value <= s.primal_value + 1e-8);
        }
    }

    #[test]
    fn empty_feasible_set_is_reported() {
        let mut p = ConicProgram::new(0);
        p.add_block(-ComplexMatrix::identity(2)).unwrap();
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::InfeasibleSuspected);
    }

    #[test]
    fn unbounded_is_reported() {
        // min y s.t. [y] ⪰ −∞ is expressed as min −y s.t. y ≥ 0.
        let mut p = ConicProgram::new(1);
        p.set_objective(0, -1.0).unwrap();
        let b = p.add_zero_block(1);
        p.add_term(b, 0, 0, 0, c(1.0, 0.0)).unwrap();
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::InfeasibleSuspected, "{}", s.message);
    }

    #[test]
    fn perturbed_solution_is_flagged() {
        let h = herm(4, 1.1);
        let p = lambda_max_program(&h).unwrap();
        let mut s = solve(&p, &SolverOptions::default()).unwrap();
        assert!(verify_certificate(&p, &s, 1e-7).is_clean());
        s.y[0] -= 1e-3;
        let r = verify_certificate(&p, &s, 1e-7);
        assert!(!r.is_clean());
        assert!(r.psd_residual > 1e-4 || r.gap.unwrap() > 1e-4);
    }

    #[test]
    fn hand_built_point_has_tiny_residuals() {
        let h = ComplexMatrix::from_real_diag(&[1.0, 3.0]);
        let p = lambda_max_program(&h).unwrap();
        let s = ConicSolution {
            status: SolveStatus::Optimal,
            primal_value: 3.0,
            y: vec![3.0],
            dual_value: 3.0,
            x: vec![ComplexMatrix::from_real_diag(&[0.0, 1.0])],
            w: vec![],
            psd_residual: 0.0,
            equality_residual: 0.0,
            dual_residual: 0.0,
            gap: 0.0,
            iterations: 0,
            message: String::new(),
        };
        let r = verify_certificate(&p, &s, 1e-12);
        assert!(r.is_clean(), "{:?}", r.issues);
        assert!(r.psd_residual <= 1e-12 && r.dual_residual.unwrap() <= 1e-12);
    }

    #[test]
    fn complex_coupling_block() {
        // min s s.t. [[s, z],[z̄, s]] ⪰ 0 has value |z|.
        let z = c(0.6, -0.8) * 2.5;
        let mut p = ConicProgram::new(1);
        p.set_objective(0, 1.0).unwrap();
        let b = p.add_zero_block(2);
        p.add_constant(b, 0, 1, z).unwrap();
        p.add_term(b, 0, 0, 0, c(1.0, 0.0)).unwrap();
        p.add_term(b, 0, 1, 1, c(1.0, 0.0)).unwrap();
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.primal_value - 2.5).abs() < 1e-8);
    }

    #[test]
    fn equalities_are_respected() {
        // min y0 + y1 s.t. diag(y0, y1) ⪰ 0, y0 − y1 = 1 → y = (1, 0).
        let mut p = ConicProgram::new(2);
        p.set_objective(0, 1.0).unwrap();
        p.set_objective(1, 1.0).unwrap();
        let b = p.add_zero_block(2);
        p.add_term(b, 0, 0, 0, c(1.0, 0.0)).unwrap();
        p.add_term(b, 1, 1, 1, c(1.0, 0.0)).unwrap();
        p.add_equality(vec![1.0, -1.0], 1.0).unwrap();
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal, "{}", s.message);
        assert!((s.primal_value - 1.0).abs() < 1e-8);
        assert!(s.equality_residual < 1e-12);
        let r = verify_certificate(&p, &s, 1e-7);
        assert!(r.is_clean(), "{:?}", r.issues);
    }

    #[test]
    fn inconsistent_equalities() {
        let mut p = ConicProgram::new(1);
        let b = p.add_zero_block(1);
        p.add_term(b, 0, 0, 0, c(1.0, 0.0)).unwrap();
        p.add_equality(vec![1.0], 1.0).unwrap();
        p.add_equality(vec![2.0], 1.0).unwrap();
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::InfeasibleSuspected);
    }

    #[test]
    fn rejects_malformed_input() {
        let mut p = ConicProgram::new(1);
        assert!(p.add_block(ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap()).is_err());
        let b = p.add_zero_block(2);
        assert!(p.add_term(b, 1, 0, 0, c(1.0, 0.0)).is_err());
        assert!(p.add_term(b, 0, 2, 0, c(1.0, 0.0)).is_err());
        assert!(p.add_term(b, 0, 0, 0, c(1.0, 1.0)).is_err());
        assert!(p.add_term(b, 0, 0, 1, c(f64::NAN, 0.0)).is_err());
        assert!(p.set_objective(0, f64::INFINITY).is_err());
    }

    #[test]
    fn solve_is_deterministic() {
        let p = lambda_max_program(&herm(6, 0.7)).unwrap();
        let a = solve(&p, &SolverOptions::default()).unwrap();
        let b = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(a.y[0].to_bits(), b.y[0].to_bits());
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn dump_round_trips_numbers() {
        let p = lambda_max_program(&ComplexMatrix::from_real_diag(&[0.1, 0.3])).unwrap();
        let s = solve(&p, &SolverOptions::default()).unwrap();
        let text = dump_to_string(&p, Some(&s));
        assert!(text.starts_with("cbdec-conic-dump 1\n"));
        assert!(text.trim_end().ends_with("end"));
        let yline = text.lines().find(|l| l.starts_with("y ")).unwrap();
        let y: f64 = yline[2..].parse().unwrap();
        assert_eq!(y.to_bits(), s.y[0].to_bits());
    }
}
