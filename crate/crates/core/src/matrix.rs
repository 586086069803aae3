//! Dense complex matrices and the decompositions the rest of the crate is
//! built on.
//!
//! * [`herm_eigensystem`]: Householder reduction to Hermitian tridiagonal form,
//!   a diagonal phase change to a real symmetric tridiagonal, then implicit QL
//!   with Wilkinson-type shifts. Eigenvalues come back ascending.
//! * [`svd`]: one-sided (Hestenes) Jacobi on the columns. Singular values come
//!   back non-increasing and both factors are completed to full unitaries.
//! * [`operator_norm`], [`polar_unitary`], [`psd_check`] and a few spectral
//!   functions ([`psd_sqrt`], [`pinv_sqrt`]) on top of those.
//!
//! Everything here is a pure function of its inputs.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance below which an input counts as Hermitian, relative to its largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4e}{:+.4e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries, checking the entry count and finiteness.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_vec(r, c, rows.concat())
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in diag.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    /// The rank-one matrix `x y*`.
    pub fn outer(x: &[C64], y: &[C64]) -> Self {
        Self::from_fn(x.len(), y.len(), |i, j| x[i] * y[j].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &Self) -> Self {
        let (n, k, m) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![ZERO; n * m];
        for i in 0..n {
            let row = &mut out[i * m..(i + 1) * m];
            for l in 0..k {
                let a = self.data[i * k + l];
                if a == ZERO {
                    continue;
                }
                let rrow = &rhs.data[l * m..(l + 1) * m];
                for (o, &b) in row.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        Self {
            rows: n,
            cols: m,
            data: out,
        }
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `Re tr(A* B)`, the real Hilbert–Schmidt inner product.
    pub fn real_inner(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// `tr(A* B)`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut defect: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                defect = defect.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        defect
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Kronecker product with row index `i * other.rows + k`.
    pub fn kron(&self, other: &Self) -> Self {
        let (p, q) = (other.rows, other.cols);
        Self::from_fn(self.rows * p, self.cols * q, |i, j| {
            self[(i / p, j / q)] * other[(i % p, j % q)]
        })
    }

    pub fn block_diag(blocks: &[Self]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.set_submatrix(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_submatrix(&mut self, r0: usize, c0: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    /// Distance to the nearest unitary measured as `‖A*A − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&(&self.adjoint() * self) - &Self::identity(self.rows)).max_abs()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "cannot multiply {}x{} by {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        self.mul_unchecked(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(mut self) -> ComplexMatrix {
        for z in &mut self.data {
            *z = -*z;
        }
        self
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition

/// `A = V diag(values) V*` with `values` ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Rebuilds `V f(Λ) V*`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            if fv[k] == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = v[(i, k)] * fv[k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| l)
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized as
/// `(A + A*)/2` first, so small asymmetries from floating-point assembly are
/// tolerated.
pub fn herm_eigensystem(a: &ComplexMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("eigensystem input".into()));
    }
    let n = a.rows;
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let mut work = a.hermitian_part();
    let q = tridiagonalize(&mut work);

    let mut diag: Vec<f64> = (0..n).map(|i| work[(i, i)].re).collect();
    let mut off = vec![0.0; n];
    // phase[i] makes conj(phase[i+1]) * t[i+1,i] * phase[i] real and nonnegative
    let mut phase = vec![ONE; n];
    for i in 0..n - 1 {
        let t = work[(i + 1, i)];
        let r = t.norm();
        off[i] = r;
        phase[i + 1] = if r > 0.0 { phase[i] * (t / r) } else { phase[i] };
    }

    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    implicit_ql(&mut diag, &mut off, &mut z, n).map_err(|iterations| Error::NoConvergence {
        algorithm: "tridiagonal QL",
        iterations,
        diagnostic: format!(
            "size {n}, frobenius norm {:.3e}, max entry {:.3e}",
            a.frobenius_norm(),
            a.max_abs()
        ),
    })?;

    // V = Q · diag(phase) · Z
    let mut qd = q;
    for i in 0..n {
        for k in 0..n {
            qd[(i, k)] *= phase[k];
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]).then(x.cmp(&y)));

    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for i in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                let w = z[k * n + src];
                if w != 0.0 {
                    acc += qd[(i, k)] * w;
                }
            }
            vectors[(i, col)] = acc;
        }
    }
    let values = order.iter().map(|&k| diag[k]).collect();
    Ok(HermitianEigen { values, vectors })
}

/// Reduces the Hermitian `a` in place to tridiagonal form `a ← Q* a Q` and
/// returns the accumulated unitary `Q`.
fn tridiagonalize(a: &mut ComplexMatrix) -> ComplexMatrix {
    let n = a.rows;
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let mut v: Vec<C64> = (0..m).map(|i| a[(k + 1 + i, k)]).collect();
        let tail: f64 = v[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let norm = (tail + v[0].norm_sqr()).sqrt();
        let x0 = v[0];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * norm;
        v[0] -= alpha;
        let tau = 2.0 / v.iter().map(|z| z.norm_sqr()).sum::<f64>();

        // rows k+1.. from the left
        for j in k..n {
            let s: C64 = (0..m).map(|i| v[i].conj() * a[(k + 1 + i, j)]).sum();
            if s == ZERO {
                continue;
            }
            let s = s * tau;
            for i in 0..m {
                a[(k + 1 + i, j)] -= v[i] * s;
            }
        }
        // columns k+1.. from the right
        for i in k..n {
            let s: C64 = (0..m).map(|j| a[(i, k + 1 + j)] * v[j]).sum();
            if s == ZERO {
                continue;
            }
            let s = s * tau;
            for j in 0..m {
                a[(i, k + 1 + j)] -= s * v[j].conj();
            }
        }
        for i in 0..n {
            let s: C64 = (0..m).map(|j| q[(i, k + 1 + j)] * v[j]).sum();
            if s == ZERO {
                continue;
            }
            let s = s * tau;
            for j in 0..m {
                q[(i, k + 1 + j)] -= s * v[j].conj();
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in 1..m {
            a[(k + 1 + i, k)] = ZERO;
            a[(k, k + 1 + i)] = ZERO;
        }
    }
    q
}

/// Implicit QL on a real symmetric tridiagonal matrix (diagonal `d`,
/// off-diagonal `e[i]` coupling `i` and `i+1`). Rotations are accumulated into
/// the row-major `n×n` matrix `z`. On failure returns the iteration count.
fn implicit_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<(), usize> {
    const MAX_ITER: usize = 60;
    if n > 0 {
        e[n - 1] = 0.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() < f64::MIN_POSITIVE {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_ITER {
                return Err(iter);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zi = z[k * n + i];
                    let zi1 = z[k * n + i + 1];
                    z[k * n + i + 1] = s * zi + c * zi1;
                    z[k * n + i] = c * zi - s * zi1;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Singular value decomposition

/// `A = U diag(s) V*` with `U`, `V` square unitaries and `s` non-increasing.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (m, n) = (self.u.rows, self.v.rows);
        let mut sigma = ComplexMatrix::zeros(m, n);
        for (k, &s) in self.singular_values.iter().enumerate() {
            sigma[(k, k)] = C64::new(s, 0.0);
        }
        &(&self.u * &sigma) * &self.v.adjoint()
    }
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided Jacobi on a tall matrix given as columns. Returns the rotated
/// columns (mutually orthogonal) and, if requested, the accumulated right
/// unitary.
fn one_sided_jacobi(
    mut cols: Vec<Vec<C64>>,
    want_v: bool,
) -> Result<(Vec<Vec<C64>>, Option<Vec<Vec<C64>>>)> {
    let n = cols.len();
    let mut v: Option<Vec<Vec<C64>>> = want_v.then(|| {
        (0..n)
            .map(|j| (0..n).map(|i| if i == j { ONE } else { ZERO }).collect())
            .collect()
    });
    let mut norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let m = cols.first().map_or(1, Vec::len);
    let ctol = (m as f64).sqrt().max(2.0) * f64::EPSILON;
    // Columns below this squared norm are rounding noise and left alone.
    let noise = (16.0 * m.max(n) as f64 * f64::EPSILON).powi(2) * norms.iter().sum::<f64>();
    for sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = norms[i];
                let beta = norms[j];
                // A column at rounding level relative to its partner is numerically zero.
                if alpha.min(beta) <= noise.max(ctol * ctol * alpha.max(beta)) {
                    continue;
                }
                let gamma: C64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
                let g = gamma.norm();
                if g <= ctol * (alpha * beta).sqrt() || g < f64::MIN_POSITIVE {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut cols, i, j, c, s, phase);
                if let Some(v) = v.as_mut() {
                    rotate_pair(v, i, j, c, s, phase);
                }
                norms[i] = cols[i].iter().map(|z| z.norm_sqr()).sum();
                norms[j] = cols[j].iter().map(|z| z.norm_sqr()).sum();
            }
        }
        if !rotated {
            return Ok((cols, v));
        }
        if sweep + 1 == JACOBI_MAX_SWEEPS {
            break;
        }
    }
    Err(Error::NoConvergence {
        algorithm: "one-sided Jacobi SVD",
        iterations: JACOBI_MAX_SWEEPS,
        diagnostic: format!("{} columns", n),
    })
}

/// `col_i ← c·col_i − s·φ·col_j`, `col_j ← s·col_i + c·φ·col_j`.
fn rotate_pair(cols: &mut [Vec<C64>], i: usize, j: usize, c: f64, s: f64, phase: C64) {
    let (left, right) = cols.split_at_mut(j);
    let ci = &mut left[i];
    let cj = &mut right[0];
    for (a, b) in ci.iter_mut().zip(cj.iter_mut()) {
        let bj = *b * phase;
        let ai = *a;
        *a = ai * c - bj * s;
        *b = ai * s + bj * c;
    }
}

/// Extends a set of orthonormal vectors to an orthonormal basis of `C^dim`,
/// drawing candidates from the standard basis in index order.
pub fn complete_orthonormal(mut basis: Vec<Vec<C64>>, dim: usize) -> Vec<Vec<C64>> {
    let mut candidate = 0;
    while basis.len() < dim && candidate < dim {
        let mut w = vec![ZERO; dim];
        w[candidate] = ONE;
        candidate += 1;
        for _ in 0..2 {
            for b in &basis {
                let p: C64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= p * bi;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            basis.push(w.into_iter().map(|z| z / norm).collect());
        }
    }
    basis
}

fn columns_of(a: &ComplexMatrix) -> Vec<Vec<C64>> {
    (0..a.cols).map(|j| a.column(j)).collect()
}

/// Singular value decomposition with full unitary factors.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if !a.is_finite() {
        return Err(Error::NonFinite("svd input".into()));
    }
    if a.rows < a.cols {
        let t = svd(&a.adjoint())?;
        return Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        });
    }
    let (m, n) = (a.rows, a.cols);
    let (cols, v) = one_sided_jacobi(columns_of(a), true)?;
    let v = v.expect("requested");
    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));
    let smax = norms.iter().copied().fold(0.0, f64::max);
    // Same noise floor as the Jacobi sweep: such columns were never orthogonalized.
    let frob = norms.iter().map(|s| s * s).sum::<f64>().sqrt();
    let floor = (16.0 * m.max(n) as f64 * f64::EPSILON * frob).max(1e-14 * smax);

    let mut u_cols = Vec::with_capacity(m);
    let mut singular_values = Vec::with_capacity(n);
    let mut v_cols = Vec::with_capacity(n);
    for &k in &order {
        singular_values.push(norms[k]);
        v_cols.push(v[k].clone());
        if norms[k] > 0.0 && norms[k] > floor {
            u_cols.push(cols[k].iter().map(|z| z / norms[k]).collect::<Vec<_>>());
        }
    }
    // Numerically zero singular values sort last, so their left vectors are
    // the trailing slots filled by the completion.
    let u_cols = complete_orthonormal(u_cols, m);
    Ok(Svd {
        u: ComplexMatrix::from_columns(m, &u_cols),
        singular_values,
        v: ComplexMatrix::from_columns(n, &v_cols),
    })
}

/// Singular values only, non-increasing.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    if !a.is_finite() {
        return Err(Error::NonFinite("svd input".into()));
    }
    let tall = if a.rows < a.cols { a.adjoint() } else { a.clone() };
    let (cols, _) = one_sided_jacobi(columns_of(&tall), false)?;
    let mut s: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Largest singular value. Zero for empty matrices.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    if a.rows == 0 || a.cols == 0 {
        return 0.0;
    }
    match singular_values(a) {
        Ok(s) => s[0],
        Err(_) => f64::NAN,
    }
}

/// Sum of singular values.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

/// The unitary factor `U` of the polar decomposition `A = U|A|`.
///
/// `U` maximizes `Re tr(W* A)` over all unitaries `W`; the maximum is the
/// trace norm of `A`. Rank-deficient inputs get a deterministic completion.
pub fn polar_unitary(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let d = svd(a)?;
    Ok(&d.u * &d.v.adjoint())
}

/// Result of [`psd_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdCheck {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

/// Tests `A ⪰ −tol·I`.
pub fn psd_check(a: &ComplexMatrix, tol: f64) -> Result<PsdCheck> {
    ensure_hermitian(a)?;
    let min_eigenvalue = herm_eigensystem(a)?.min_value();
    Ok(PsdCheck {
        is_psd: min_eigenvalue >= -tol,
        min_eigenvalue,
    })
}

/// Errors unless `a` is square and Hermitian to [`HERMITIAN_TOL`] relative to its largest entry.
pub fn ensure_hermitian(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_TOL * a.max_abs().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

/// Smallest eigenvalue of the Hermitian part of `a`.
pub fn min_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    Ok(herm_eigensystem(a)?.min_value())
}

/// Square root of a PSD matrix; negative eigenvalues are clipped to zero.
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(herm_eigensystem(a)?.map_spectrum(|l| l.max(0.0).sqrt()))
}

/// `(A^{1/2})^+` on the range spanned by eigenvalues above `rel_cutoff · λ_max`.
pub fn pinv_sqrt(a: &ComplexMatrix, rel_cutoff: f64) -> Result<ComplexMatrix> {
    let eig = herm_eigensystem(a)?;
    let cutoff = rel_cutoff * eig.max_value().max(0.0);
    Ok(eig.map_spectrum(|l| if l > cutoff && l > 0.0 { 1.0 / l.sqrt() } else { 0.0 }))
}

/// Modified Gram–Schmidt (two passes) on the columns of a square matrix.
/// Returns `(Q, diag(R))`; the diagonal of `R` is positive by construction.
pub fn gram_schmidt(a: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>) {
    let n = a.cols;
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut rdiag = Vec::with_capacity(n);
    for j in 0..n {
        let mut w = a.column(j);
        for _ in 0..2 {
            for b in &q {
                let p: C64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= p * bi;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        rdiag.push(norm);
        q.push(w.into_iter().map(|z| z / norm).collect());
    }
    (ComplexMatrix::from_columns(a.rows, &q), rdiag)
}
