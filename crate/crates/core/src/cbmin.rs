//! cb-norms of maps `ℓ_∞^n → M_d`, `T(e_i) = x_i`, from both sides.
//!
//! * Lower bounds: `‖T‖_cb = sup ‖Σ u_i ⊗ x_i‖` over unitary families on a
//!   Hilbert space `K`; [`seesaw_min_norm`] maximizes over `K = C^k` by
//!   alternating updates.
//! * Upper bound: the factorization program
//!   `inf ‖Σ y_i y_i*‖^{1/2} ‖Σ z_i* z_i‖^{1/2}` over `x_i = y_i z_i`, which is
//!   the dec-norm program for the same coefficients
//!   ([`min_norm_factorization_sdp`]).
//!
//! Since `M_d` is injective the two values coincide; [`cb_norm_linf`]
//! reports how closely the computed bounds meet.
//!
//! # See-saw step
//!
//! Write the unit vectors `ξ, η ∈ C^k ⊗ C^d` as `k × d` matrices `Ξ, H`.
//! Then `⟨η, (u ⊗ x) ξ⟩ = tr(u Ξ xᵀ H*)`, so with `(ξ, η)` fixed each `u_i` is
//! updated to `polar(Ξ x_iᵀ H*)*`, and afterwards `(ξ, η)` becomes the top
//! singular pair of `Σ u_i ⊗ x_i`. The objective never decreases.

use rayon::prelude::*;
use serde::Serialize;

use crate::decnorm::{self, DecCertificate};
use crate::error::{Error, Result};
use crate::matrix::{self, ComplexMatrix, C64};
use crate::testkit::{random_haar_unitary, SeededGenerator};

/// `‖Σ_i u_i ⊗ x_i‖` on `C^k ⊗ C^d`.
pub fn evaluate_tensor_norm(u: &[ComplexMatrix], x: &[ComplexMatrix]) -> Result<f64> {
    Ok(matrix::operator_norm(&assemble(u, x)?))
}

fn assemble(u: &[ComplexMatrix], x: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    if u.len() != x.len() || u.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} unitaries for {} coefficients",
            u.len(),
            x.len()
        )));
    }
    let (k, d) = (u[0].rows(), x[0].rows());
    if u.iter().any(|m| m.rows() != k || m.cols() != k) || x.iter().any(|m| m.rows() != d || m.cols() != d) {
        return Err(Error::DimensionMismatch("inconsistent matrix sizes".into()));
    }
    let mut t = ComplexMatrix::zeros(k * d, k * d);
    for (ui, xi) in u.iter().zip(x) {
        t += &ui.kron(xi);
    }
    Ok(t)
}

#[derive(Clone, Debug)]
pub struct SeeSawOptions {
    /// Dimension of the auxiliary space; `None` means `d`.
    pub k: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    /// Keep `u_0 = 1` throughout (the unit index of a free tensor).
    pub pin_first: bool,
    /// Stop launching restarts once this value is reached.
    pub target: Option<f64>,
    /// Fault injection for negative controls: ignore coefficient 0.
    pub drop_first: bool,
}

impl Default for SeeSawOptions {
    fn default() -> Self {
        Self {
            k: None,
            restarts: 32,
            seed: 0,
            max_iter: 500,
            tol: 1e-10,
            pin_first: false,
            target: None,
            drop_first: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeeSawResult {
    pub lower_bound: f64,
    pub unitaries: Vec<ComplexMatrix>,
    pub witness_vectors: (Vec<C64>, Vec<C64>),
    /// Sweeps performed by the best restart.
    pub iterations: usize,
    pub restarts_used: usize,
    pub best_restart: usize,
    pub converged: bool,
    /// Largest decrease of the objective between consecutive sweeps over all restarts.
    pub max_decrease: f64,
    pub k: usize,
}

struct RunResult {
    value: f64,
    unitaries: Vec<ComplexMatrix>,
    xi: Vec<C64>,
    eta: Vec<C64>,
    iterations: usize,
    converged: bool,
    max_decrease: f64,
}

fn top_pair(t: &ComplexMatrix) -> Result<(f64, Vec<C64>, Vec<C64>)> {
    let s = matrix::svd(t)?;
    Ok((s.singular_values[0], s.v.column(0), s.u.column(0)))
}

/// `polar(conj(x))`, with `conj(x)` embedded top-left in a `k × k` identity
/// when `k > d` or truncated to its leading `k × k` block when `k < d`.
fn deterministic_start(x: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
    let d = x.rows();
    let c = x.conj();
    let m = if k >= d {
        let mut m = ComplexMatrix::identity(k);
        m.set_submatrix(0, 0, &c);
        m
    } else {
        c.submatrix(0, 0, k, k)
    };
    matrix::polar_unitary(&m)
}

fn run_seesaw(x: &[ComplexMatrix], mut u: Vec<ComplexMatrix>, opts: &SeeSawOptions) -> Result<RunResult> {
    let d = x[0].rows();
    let k = u[0].rows();
    if opts.pin_first {
        // Global left multiplication by u_0* keeps the norm and pins u_0 = 1.
        let w = u[0].adjoint();
        for ui in &mut u {
            *ui = &w * ui;
        }
        u[0] = ComplexMatrix::identity(k);
    }
    let (mut value, mut xi, mut eta) = top_pair(&assemble(&u, x)?)?;
    let mut quiet = 0;
    let mut iterations = 0;
    let mut max_decrease: f64 = 0.0;
    let mut converged = false;
    let xt: Vec<ComplexMatrix> = x.iter().map(|m| m.transpose()).collect();
    while iterations < opts.max_iter {
        let big_xi = ComplexMatrix::from_vec(k, d, xi.clone())?;
        let big_eta_adj = ComplexMatrix::from_vec(k, d, eta.clone())?.adjoint();
        for (i, ui) in u.iter_mut().enumerate() {
            if opts.pin_first && i == 0 {
                continue;
            }
            let m = &(&big_xi * &xt[i]) * &big_eta_adj;
            *ui = matrix::polar_unitary(&m)?.adjoint();
        }
        let (v, a, b) = top_pair(&assemble(&u, x)?)?;
        iterations += 1;
        max_decrease = max_decrease.max(value - v);
        let gain = v - value;
        value = v;
        xi = a;
        eta = b;
        if gain < opts.tol {
            quiet += 1;
            if quiet >= 3 {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    Ok(RunResult {
        value,
        unitaries: u,
        xi,
        eta,
        iterations,
        converged,
        max_decrease,
    })
}

const RESTART_CHUNK: usize = 8;

/// Best lower bound for `‖T‖_cb` over `opts.restarts` see-saw runs: run 0
/// starts from `u_i = polar(conj(x_i))`, the others from Haar-random
/// unitaries drawn from stream `r` of `opts.seed`. Restarts run in parallel
/// in chunks; ties go to the lowest restart index.
pub fn seesaw_min_norm(x: &[ComplexMatrix], opts: &SeeSawOptions) -> Result<SeeSawResult> {
    let x = if opts.drop_first && x.len() > 1 { &x[1..] } else { x };
    let n = x.len();
    if n == 0 {
        return Err(Error::InvalidInput("at least one coefficient is required".into()));
    }
    let d = x[0].rows();
    if x.iter().any(|m| m.rows() != d || m.cols() != d) {
        return Err(Error::DimensionMismatch("coefficients must all be d x d".into()));
    }
    let k = opts.k.unwrap_or(d);
    if k == 0 || opts.restarts == 0 {
        return Err(Error::InvalidInput("k and restarts must be positive".into()));
    }
    let mut best: Option<(usize, RunResult)> = None;
    let mut max_decrease: f64 = 0.0;
    let mut used = 0;
    while used < opts.restarts {
        let chunk: Vec<usize> = (used..(used + RESTART_CHUNK).min(opts.restarts)).collect();
        let runs: Vec<Result<RunResult>> = chunk
            .par_iter()
            .map(|&r| {
                let start = if r == 0 {
                    x.iter().map(|m| deterministic_start(m, k)).collect::<Result<Vec<_>>>()?
                } else {
                    let mut g = SeededGenerator::with_stream(opts.seed, r as u64);
                    (0..n).map(|_| random_haar_unitary(&mut g, k)).collect()
                };
                run_seesaw(x, start, opts)
            })
            .collect();
        for (r, run) in chunk.into_iter().zip(runs) {
            let run = run?;
            max_decrease = max_decrease.max(run.max_decrease);
            if best.as_ref().map_or(true, |(_, b)| run.value > b.value) {
                best = Some((r, run));
            }
            used = r + 1;
        }
        let bv = best.as_ref().map(|(_, b)| b.value).unwrap_or(0.0);
        if let Some(t) = opts.target {
            if bv >= t - 1e-9 * t.abs().max(1.0) {
                break;
            }
        }
    }
    let (best_restart, b) = best.expect("at least one restart");
    Ok(SeeSawResult {
        lower_bound: b.value,
        unitaries: b.unitaries,
        witness_vectors: (b.xi, b.eta),
        iterations: b.iterations,
        restarts_used: used,
        best_restart,
        converged: b.converged,
        max_decrease,
        k,
    })
}

/// Result of [`min_norm_factorization_sdp`]: `x_i = y_i z_i`.
#[derive(Clone, Debug)]
pub struct MinNormFactorization {
    pub value: f64,
    pub y: Vec<ComplexMatrix>,
    pub z: Vec<ComplexMatrix>,
    /// `max_i ‖x_i − y_i z_i‖`.
    pub residual: f64,
    /// `‖Σ y_i y_i*‖^{1/2} ‖Σ z_i* z_i‖^{1/2}`.
    pub attained: f64,
    pub certificate: DecCertificate,
}

/// `inf ‖Σ y_i y_i*‖^{1/2} ‖Σ z_i* z_i‖^{1/2}` over factorizations `x_i = y_i z_i`.
pub fn min_norm_factorization_sdp(x: &[ComplexMatrix]) -> Result<MinNormFactorization> {
    let elems = x
        .iter()
        .map(|m| crate::algebra::AlgebraElement::from_matrix(m.clone()))
        .collect::<Result<Vec<_>>>()?;
    let cert = decnorm::dec_norm_linf(&elems)?;
    let y: Vec<ComplexMatrix> = cert.factor_a.iter().map(|a| a.block(0).adjoint()).collect();
    let z: Vec<ComplexMatrix> = cert.factor_b.iter().map(|b| b.block(0).clone()).collect();
    let mut residual: f64 = 0.0;
    let (mut yy, mut zz) = (ComplexMatrix::zeros(x[0].rows(), x[0].rows()), ComplexMatrix::zeros(x[0].rows(), x[0].rows()));
    for ((xi, yi), zi) in x.iter().zip(&y).zip(&z) {
        residual = residual.max(matrix::operator_norm(&(xi - &(yi * zi))));
        yy += &(yi * &yi.adjoint());
        zz += &(&zi.adjoint() * zi);
    }
    let attained = matrix::operator_norm(&yy).sqrt() * matrix::operator_norm(&zz).sqrt();
    Ok(MinNormFactorization {
        value: cert.value,
        y,
        z,
        residual,
        attained,
        certificate: cert,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Agree,
    Disagree,
    /// The lower bound exceeds the upper bound beyond tolerance.
    Unsound,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Agree => "agree",
            Self::Disagree => "disagree",
            Self::Unsound => "unsound",
        }
    }
}

pub const AGREE_REL_TOL: f64 = 5e-4;
pub const SOUNDNESS_TOL: f64 = 1e-6;

/// `agree` iff `−1e-6 ≤ upper − lower ≤ 5e-4 · max(1, upper)`.
pub fn verdict(upper: f64, lower: f64) -> Verdict {
    let gap = upper - lower;
    if gap < -SOUNDNESS_TOL {
        Verdict::Unsound
    } else if gap <= AGREE_REL_TOL * upper.max(1.0) {
        Verdict::Agree
    } else {
        Verdict::Disagree
    }
}

#[derive(Clone, Debug)]
pub struct AgreementReport {
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
    /// `gap / max(1, upper)`.
    pub relative_gap: f64,
    pub verdict: Verdict,
    /// Auxiliary dimensions tried, in order.
    pub k_tried: Vec<usize>,
    pub seesaw: SeeSawResult,
    pub factorization: MinNormFactorization,
}

/// Upper bound from the factorization program, lower bound from the
/// see-saw with `k = d` and, on disagreement, `k = 2d`.
pub fn cb_norm_linf(x: &[ComplexMatrix], opts: &SeeSawOptions) -> Result<AgreementReport> {
    let factorization = min_norm_factorization_sdp(x)?;
    let upper = factorization.value;
    let d = x[0].rows();
    let base = SeeSawOptions {
        k: Some(opts.k.unwrap_or(d)),
        target: Some(opts.target.unwrap_or(upper - 1e-7 * upper.max(1.0))),
        ..opts.clone()
    };
    let mut seesaw = seesaw_min_norm(x, &base)?;
    let mut k_tried = vec![seesaw.k];
    if verdict(upper, seesaw.lower_bound) == Verdict::Disagree {
        let wide = SeeSawOptions {
            k: Some(2 * base.k.expect("set above")),
            ..base.clone()
        };
        let s2 = seesaw_min_norm(x, &wide)?;
        k_tried.push(s2.k);
        if s2.lower_bound > seesaw.lower_bound {
            seesaw = s2;
        }
    }
    let lower = seesaw.lower_bound;
    let gap = upper - lower;
    Ok(AgreementReport {
        upper,
        lower,
        gap,
        relative_gap: gap / upper.max(1.0),
        verdict: verdict(upper, lower),
        k_tried,
        seesaw,
        factorization,
    })
}
