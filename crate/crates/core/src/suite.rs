//! The seeded verification corpus behind `cbdec verify`.
//!
//! [`manifest`] expands a seed into instance descriptors; [`run_suite`]
//! builds every instance from its descriptor, checks it and folds the
//! outcomes into one row per criterion. Instances within a criterion run in
//! parallel; results are collected in manifest order, so the report does not
//! depend on scheduling.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::cbmin::{self, SeeSawOptions, Verdict};
use crate::conic::{self, SolveStatus, SolverOptions};
use crate::cpmap::LinearMapRep;
use crate::decnorm;
use crate::error::{Error, Result};
use crate::matrix::{self, ComplexMatrix, C64};
use crate::multdomain;
use crate::report::sha256_hex;
use crate::tensor::{self, FreeTensor};
use crate::testkit::{
    random_coefficients, random_cp_map, random_element, random_free_tensor, random_ginibre, random_haar_unitary,
    random_hermitian, random_map, random_self_adjoint, random_unital_cp_map, ManifestEntry, SeededGenerator,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Quick,
    Full,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Self::Quick),
            "full" => Ok(Self::Full),
            other => Err(Error::InvalidInput(format!("profile: unknown profile {other:?}"))),
        }
    }
}

/// Injected regressions for negative-control runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// The see-saw ignores coefficient 0 (the unit index of a free tensor).
    DropUnitIndex,
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    pub profile: Profile,
    /// Overrides the per-family instance count.
    pub instances: Option<usize>,
    pub fault: Option<Fault>,
}

impl SuiteConfig {
    pub fn new(seed: u64, profile: Profile) -> Self {
        Self {
            seed,
            profile,
            instances: None,
            fault: None,
        }
    }
}

/// `(family, criterion, full count, quick count)`.
const FAMILIES: &[(&str, u8, usize, usize)] = &[
    ("agree", 1, 200, 40),
    ("scalar", 3, 50, 10),
    ("unitary", 3, 30, 6),
    ("trace", 3, 30, 6),
    ("selfadj", 4, 50, 10),
    ("submult", 5, 100, 20),
    ("cb_below_dec", 5, 100, 20),
    ("factored_bound", 5, 100, 20),
    ("contraction", 5, 100, 20),
    ("tensor_submult", 5, 100, 12),
    ("direct_sum", 6, 30, 6),
    ("tensor", 7, 100, 20),
    ("unital_cp", 8, 20, 6),
    ("lmax", 9, 100, 20),
];

fn family_sizes(family: &str, g: &mut SeededGenerator) -> (usize, usize) {
    let pick = |g: &mut SeededGenerator, lo: usize, hi: usize| lo + g.index(hi - lo + 1);
    match family {
        "agree" | "cb_below_dec" => (pick(g, 2, 4), pick(g, 2, 3)),
        "scalar" => (pick(g, 1, 6), 1),
        "unitary" => (pick(g, 1, 4), pick(g, 1, 3)),
        "trace" => (pick(g, 2, 4), 1),
        "selfadj" => (pick(g, 1, 4), pick(g, 1, 3)),
        "submult" | "factored_bound" => (pick(g, 1, 3), pick(g, 1, 3)),
        "contraction" | "tensor" => (pick(g, 2, 4), pick(g, 2, 3)),
        "tensor_submult" => (pick(g, 1, 2), pick(g, 1, 2)),
        "direct_sum" => (pick(g, 1, 3), pick(g, 1, 2)),
        "unital_cp" => (pick(g, 2, 3), pick(g, 2, 3)),
        "lmax" => (pick(g, 2, 12), 1),
        _ => (1, 1),
    }
}

/// Instance descriptors for `cfg`, grouped by family in a fixed order.
pub fn manifest(cfg: &SuiteConfig) -> Vec<ManifestEntry> {
    let mut out = Vec::new();
    for (fi, &(family, _, full, quick)) in FAMILIES.iter().enumerate() {
        let count = cfg.instances.unwrap_or(match cfg.profile {
            Profile::Full => full,
            Profile::Quick => quick,
        });
        let mut g = SeededGenerator::with_stream(cfg.seed, 1000 + fi as u64);
        for i in 0..count {
            let (n, d) = family_sizes(family, &mut g);
            out.push(ManifestEntry {
                id: format!("{family}-{i:04}"),
                family: family.to_string(),
                n,
                d,
                seed: g.next_u64(),
            });
        }
    }
    out
}

/// Outcome of one instance: the checked quantity and whether it is within tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub id: String,
    pub metric: f64,
    pub passed: bool,
    pub note: String,
}

impl Outcome {
    fn new(e: &ManifestEntry, metric: f64, passed: bool, note: impl Into<String>) -> Self {
        Self {
            id: e.id.clone(),
            metric,
            passed,
            note: note.into(),
        }
    }

    fn failed(e: &ManifestEntry, err: &Error) -> Self {
        Self::new(e, f64::NAN, false, format!("error: {err}"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub instances: usize,
    pub violations: usize,
    /// Largest metric over the instances (NaN counts as a violation).
    pub worst: f64,
    pub tolerance: String,
    pub passed: bool,
    pub failures: Vec<Outcome>,
}

impl CriterionResult {
    fn fold(id: u8, name: &str, tolerance: &str, outcomes: &[Outcome]) -> Self {
        let failures: Vec<Outcome> = outcomes.iter().filter(|o| !o.passed).cloned().collect();
        let worst = outcomes
            .iter()
            .map(|o| o.metric)
            .filter(|m| m.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            id,
            name: name.to_string(),
            instances: outcomes.len(),
            violations: failures.len(),
            worst: if worst.is_finite() { worst } else { f64::NAN },
            tolerance: tolerance.to_string(),
            passed: failures.is_empty() && !outcomes.is_empty(),
            failures,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub profile: Profile,
    pub criteria: Vec<CriterionResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    /// Summary table with worst metrics printed to 3 significant digits.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed {} profile {:?}", self.seed, self.profile);
        let _ = writeln!(
            s,
            "{:>2}  {:<44} {:>5} {:>5}  {:>10}  {:<22} {}",
            "#", "criterion", "n", "fail", "worst", "tolerance", "status"
        );
        for c in &self.criteria {
            let _ = writeln!(
                s,
                "{:>2}  {:<44} {:>5} {:>5}  {:>10.3e}  {:<22} {}",
                c.id,
                c.name,
                c.instances,
                c.violations,
                c.worst,
                c.tolerance,
                if c.passed { "PASS" } else { "FAIL" }
            );
            for f in c.failures.iter().take(5) {
                let _ = writeln!(s, "      {} metric {:.3e} {}", f.id, f.metric, f.note);
            }
        }
        s
    }

    /// sha256 of the table; equal digests mean equal verdicts and residuals.
    pub fn digest(&self) -> String {
        sha256_hex(self.table().as_bytes())
    }
}

fn entries<'a>(m: &'a [ManifestEntry], family: &str) -> Vec<&'a ManifestEntry> {
    m.iter().filter(|e| e.family == family).collect()
}

fn par_outcomes(
    es: &[&ManifestEntry],
    f: impl Fn(&ManifestEntry) -> Result<Outcome> + Sync,
) -> Vec<Outcome> {
    es.par_iter()
        .map(|e| f(e).unwrap_or_else(|err| Outcome::failed(e, &err)))
        .collect()
}

fn elems(xs: Vec<ComplexMatrix>) -> Result<Vec<AlgebraElement>> {
    xs.into_iter().map(AlgebraElement::from_matrix).collect()
}

fn seesaw_opts(e: &ManifestEntry, cfg: &SuiteConfig) -> SeeSawOptions {
    SeeSawOptions {
        seed: e.seed,
        drop_first: cfg.fault == Some(Fault::DropUnitIndex),
        ..Default::default()
    }
}

// ---------------------------------------------------------------------------
// Instance builders

pub fn agree_instance(e: &ManifestEntry) -> Vec<ComplexMatrix> {
    random_coefficients(&mut SeededGenerator::new(e.seed), e.n, e.d)
}

pub fn tensor_instance(e: &ManifestEntry) -> FreeTensor {
    random_free_tensor(&mut SeededGenerator::new(e.seed), e.n, e.d)
}

fn scalar_instance(e: &ManifestEntry) -> Vec<C64> {
    let mut g = SeededGenerator::new(e.seed);
    (0..e.n).map(|_| g.complex_normal()).collect()
}

// ---------------------------------------------------------------------------
// Criteria

/// Agreement of the factorization upper bound with the see-saw lower bound,
/// and the factorization certificates of the same instances.
fn criteria_agreement(m: &[ManifestEntry], cfg: &SuiteConfig) -> (Vec<Outcome>, Vec<Outcome>) {
    let es = entries(m, "agree");
    let pairs: Vec<(Outcome, Outcome)> = es
        .par_iter()
        .map(|e| {
            let x = agree_instance(e);
            match cbmin::cb_norm_linf(&x, &seesaw_opts(e, cfg)) {
                Ok(r) => {
                    let c = &r.factorization.certificate;
                    let ok1 = r.verdict == Verdict::Agree;
                    let bound_err = (c.factor_bound - c.value).abs();
                    let ok2 = c.reconstruction_residual <= 1e-6 && bound_err <= 1e-5;
                    (
                        Outcome::new(e, r.relative_gap, ok1, format!("upper {:.9} lower {:.9}", r.upper, r.lower)),
                        Outcome::new(
                            e,
                            c.reconstruction_residual.max(bound_err),
                            ok2,
                            format!("residual {:.2e} bound error {:.2e}", c.reconstruction_residual, bound_err),
                        ),
                    )
                }
                Err(err) => (Outcome::failed(e, &err), Outcome::failed(e, &err)),
            }
        })
        .collect();
    pairs.into_iter().unzip()
}

fn criterion_closed_forms(m: &[ManifestEntry], cfg: &SuiteConfig) -> Vec<Outcome> {
    let mut out = par_outcomes(&entries(m, "scalar"), |e| {
        let z = scalar_instance(e);
        let l1: f64 = z.iter().map(|z| z.norm()).sum();
        let x: Vec<ComplexMatrix> = z.iter().map(|&z| ComplexMatrix::from_diag(&[z])).collect();
        let dec = decnorm::dec_norm_linf(&elems(x.clone())?)?.value;
        let cb = cbmin::seesaw_min_norm(&x, &seesaw_opts(e, cfg))?.lower_bound;
        let err = (dec - l1).abs().max((cb - l1).abs());
        Ok(Outcome::new(e, err, err <= 1e-8, "scalar l1"))
    });
    out.extend(par_outcomes(&entries(m, "unitary"), |e| {
        let mut g = SeededGenerator::new(e.seed);
        let x: Vec<ComplexMatrix> = (0..e.n).map(|_| random_haar_unitary(&mut g, e.d)).collect();
        let dec = decnorm::dec_norm_linf(&elems(x.clone())?)?.value;
        let opts = SeeSawOptions {
            restarts: 1,
            ..seesaw_opts(e, cfg)
        };
        let cb = cbmin::seesaw_min_norm(&x, &opts)?.lower_bound;
        let n = e.n as f64;
        let err = (dec - n).abs().max((cb - n).abs());
        Ok(Outcome::new(e, err, err <= 1e-6, "unitary n"))
    }));
    out.extend(par_outcomes(&entries(m, "trace"), |e| {
        let c = random_ginibre(&mut SeededGenerator::new(e.seed), e.n, e.n);
        let domain = AlgebraShape::matrix(e.n);
        let u = LinearMapRep::from_fn(domain.clone(), AlgebraShape::matrix(1), |x| {
            let mut z = C64::new(0.0, 0.0);
            for r in 0..e.n {
                for s in 0..e.n {
                    z += x.block(0)[(r, s)] * c[(r, s)];
                }
            }
            Ok(AlgebraElement::scalar(z))
        })?;
        let dec = decnorm::dec_norm_matrix_domain(&u)?.value;
        let err = (dec - matrix::trace_norm(&c)?).abs();
        Ok(Outcome::new(e, err, err <= 1e-7, "trace norm"))
    }));
    out
}

fn criterion_selfadjoint(m: &[ManifestEntry]) -> Vec<Outcome> {
    par_outcomes(&entries(m, "selfadj"), |e| {
        let mut g = SeededGenerator::new(e.seed);
        let shape = AlgebraShape::matrix(e.d);
        let x: Vec<AlgebraElement> = (0..e.n).map(|_| random_self_adjoint(&mut g, &shape)).collect();
        let sa = decnorm::selfadjoint_dec_norm(&x)?.value;
        let dec = decnorm::dec_norm_linf(&x)?.value;
        let err = (sa - dec).abs();
        Ok(Outcome::new(e, err, err <= 2e-6, format!("selfadjoint {sa:.9} dec {dec:.9}")))
    })
}

fn criterion_inequalities(m: &[ManifestEntry], cfg: &SuiteConfig) -> Vec<Outcome> {
    // Each metric is `lhs − rhs`; the check is `metric ≤ tol`.
    let mut out = par_outcomes(&entries(m, "submult"), |e| {
        let mut g = SeededGenerator::new(e.seed);
        let c = 1 + g.index(3);
        let (a, b, cc) = (AlgebraShape::matrix(e.n), AlgebraShape::matrix(e.d), AlgebraShape::matrix(c));
        let u = random_map(&mut g, &a, &b);
        let v = random_map(&mut g, &b, &cc);
        let vu = LinearMapRep::compose(&v, &u)?;
        let lhs = decnorm::dec_norm(&vu)?.value;
        let rhs = decnorm::dec_norm(&v)?.value * decnorm::dec_norm(&u)?.value;
        Ok(Outcome::new(e, lhs - rhs, lhs <= rhs + 1e-6, "composition"))
    });
    out.extend(par_outcomes(&entries(m, "cb_below_dec"), |e| {
        let x = agree_instance(e);
        let dec = decnorm::dec_norm_linf(&elems(x.clone())?)?.value;
        let opts = SeeSawOptions {
            restarts: 8,
            ..seesaw_opts(e, cfg)
        };
        let lower = cbmin::seesaw_min_norm(&x, &opts)?.lower_bound;
        Ok(Outcome::new(e, lower - dec, lower <= dec + 1e-6, "see-saw below dec"))
    }));
    out.extend(par_outcomes(&entries(m, "factored_bound"), |e| {
        let mut g = SeededGenerator::new(e.seed);
        let terms = 1 + g.index(3);
        let shape = AlgebraShape::matrix(e.d);
        let draw = |g: &mut SeededGenerator| -> Vec<Vec<AlgebraElement>> {
            (0..terms)
                .map(|_| (0..e.n).map(|_| random_element(g, &shape)).collect())
                .collect()
        };
        let a = draw(&mut g);
        let b = draw(&mut g);
        let bound = decnorm::dec_upper_bound_factored(&a, &b)?;
        let dec = decnorm::dec_norm(&decnorm::factored_map(&a, &b)?)?.value;
        Ok(Outcome::new(e, dec - bound, bound >= dec - 1e-6, "factored bound"))
    }));
    out.extend(par_outcomes(&entries(m, "contraction"), |e| {
        let mut g = SeededGenerator::new(e.seed);
        let t = random_free_tensor(&mut g, e.n, e.d);
        let target = AlgebraShape::matrix(1 + g.index(3));
        let u = if g.index(2) == 0 {
            random_cp_map(&mut g, t.shape(), &target)
        } else {
            random_map(&mut g, t.shape(), &target)
        };
        let dec_u = decnorm::dec_norm(&u)?.value;
        let r = tensor::check_finite_rank_contraction(&u, dec_u, &t)?;
        Ok(Outcome::new(e, r.lhs - r.rhs, r.holds, "finite-rank contraction"))
    }));
    out.extend(par_outcomes(&entries(m, "tensor_submult"), |e| {
        let mut g = SeededGenerator::new(e.seed);
        let (n2, d2) = (1 + g.index(2), 1 + g.index(2));
        let u1 = random_map(&mut g, &AlgebraShape::matrix(e.n), &AlgebraShape::matrix(e.d));
        let u2 = random_map(&mut g, &AlgebraShape::matrix(n2), &AlgebraShape::matrix(d2));
        let lhs = decnorm::dec_norm(&LinearMapRep::tensor(&u1, &u2)?)?.value;
        let rhs = decnorm::dec_norm(&u1)?.value * decnorm::dec_norm(&u2)?.value;
        Ok(Outcome::new(e, lhs - rhs, lhs <= rhs + 1e-5, "tensor product"))
    }));
    out
}

fn criterion_direct_sum(m: &[ManifestEntry]) -> Vec<Outcome> {
    par_outcomes(&entries(m, "direct_sum"), |e| {
        let mut g = SeededGenerator::new(e.seed);
        let domain = if g.index(2) == 0 {
            AlgebraShape::commutative(e.n)
        } else {
            AlgebraShape::matrix(e.d)
        };
        let maps: Vec<LinearMapRep> = (0..2)
            .map(|_| {
                let target = AlgebraShape::matrix(1 + g.index(2));
                random_map(&mut g, &domain, &target)
            })
            .collect();
        let r = decnorm::dec_norm_direct_sum(&maps)?;
        Ok(Outcome::new(e, r.discrepancy, r.discrepancy <= 1e-6, "joint vs blockwise"))
    })
}

fn criterion_nuclearity(m: &[ManifestEntry], cfg: &SuiteConfig) -> Vec<Outcome> {
    par_outcomes(&entries(m, "tensor"), |e| {
        let t = tensor_instance(e);
        let r = tensor::nuclearity_gap(&t, &seesaw_opts(e, cfg))?;
        let rel = r.gap.max(r.seesaw_gap.abs()) / r.max.max(1.0);
        Ok(Outcome::new(
            e,
            rel,
            r.verdict == Verdict::Agree,
            format!("max {:.9} min [{:.9}, {:.9}]", r.max, r.min_lower, r.min_upper),
        ))
    })
}

fn criterion_multdomain(m: &[ManifestEntry]) -> Vec<Outcome> {
    let mut out = Vec::new();
    for d in [2usize, 3] {
        let fixed = |name: &str| ManifestEntry {
            id: format!("{name}-{d}"),
            family: "fixed".into(),
            n: d,
            d,
            seed: 0,
        };
        let cases: [(&str, LinearMapRep, usize); 3] = [
            ("identity", LinearMapRep::identity(&AlgebraShape::matrix(d)), d * d),
            ("depolarizing", multdomain::depolarizing(d), 1),
            ("pinching", multdomain::pinching(d), d),
        ];
        for (name, u, expect) in cases {
            let e = fixed(name);
            out.push(match multdomain::multiplicative_domain(&u) {
                Ok(r) => {
                    let ok = r.basis.dimension == expect && r.schwarz_residual <= 1e-9;
                    Outcome::new(
                        &e,
                        r.schwarz_residual,
                        ok,
                        format!("dimension {} expected {expect}", r.basis.dimension),
                    )
                }
                Err(err) => Outcome::failed(&e, &err),
            });
        }
        // Negative control: an off-diagonal element is not in the pinching's domain.
        let e = fixed("negative-control");
        let shape = AlgebraShape::matrix(d);
        let a = AlgebraElement::matrix_unit(&shape, 0, 0, 1)
            .add(&AlgebraElement::matrix_unit(&shape, 0, 1, 0))
            .expect("same shape");
        let x = AlgebraElement::matrix_unit(&shape, 0, 1, 0);
        let one = AlgebraElement::unit(&shape);
        out.push(match multdomain::bimodularity_residual(&multdomain::pinching(d), &a, &x, &one) {
            Ok((l, r, t)) => {
                let v = l.max(r).max(t);
                let flagged = v > 1e-3;
                Outcome::new(&e, if flagged { 0.0 } else { 1.0 }, flagged, format!("residual {v:.3e}"))
            }
            Err(err) => Outcome::failed(&e, &err),
        });
    }
    out.extend(par_outcomes(&entries(m, "unital_cp"), |e| {
        let mut g = SeededGenerator::new(e.seed);
        let u = random_unital_cp_map(&mut g, e.n, e.n, e.d)?;
        let r = multdomain::multiplicative_domain(&u)?;
        let c = r.closure;
        let b = multdomain::verify_bimodularity(&u, &r.basis, 8, e.seed)?;
        let worst = r.schwarz_residual.max(c.unit).max(c.adjoint).max(c.product);
        Ok(Outcome::new(
            e,
            worst,
            worst <= 1e-9 && b.max_residual <= 1e-8,
            format!("dimension {} bimodularity {:.2e}", r.basis.dimension, b.max_residual),
        ))
    }));
    out
}

fn criterion_solver(m: &[ManifestEntry]) -> Vec<Outcome> {
    par_outcomes(&entries(m, "lmax"), |e| {
        let h = random_hermitian(&mut SeededGenerator::new(e.seed), e.n);
        let p = conic::lambda_max_program(&h)?;
        let s = conic::solve(&p, &SolverOptions::default())?;
        let expect = matrix::herm_eigensystem(&h)?.max_value();
        let err = (s.primal_value - expect).abs();
        let cert = conic::verify_certificate(&p, &s, 1e-7);
        let gap_ok = s.status != SolveStatus::Optimal || s.gap <= 1e-7;
        let ok = s.status == SolveStatus::Optimal && err <= 1e-7 && gap_ok && cert.is_clean();
        Ok(Outcome::new(
            e,
            err,
            ok,
            format!("status {} gap {:.2e} issues {}", s.status.as_str(), s.gap, cert.issues.join("; ")),
        ))
    })
}

/// Reruns a sample of instances and compares bit for bit.
fn criterion_determinism(m: &[ManifestEntry], cfg: &SuiteConfig) -> Vec<Outcome> {
    let sample: Vec<ManifestEntry> = ["agree", "tensor"]
        .iter()
        .flat_map(|f| entries(m, f).into_iter().take(3).cloned())
        .collect();
    let run = |e: &ManifestEntry| -> Result<Vec<u64>> {
        if e.family == "agree" {
            let r = cbmin::cb_norm_linf(&agree_instance(e), &seesaw_opts(e, cfg))?;
            Ok(vec![r.upper.to_bits(), r.lower.to_bits()])
        } else {
            let r = tensor::nuclearity_gap(&tensor_instance(e), &seesaw_opts(e, cfg))?;
            Ok(vec![r.max.to_bits(), r.min_lower.to_bits(), r.min_upper.to_bits()])
        }
    };
    sample
        .par_iter()
        .map(|e| match (run(e), run(e)) {
            (Ok(a), Ok(b)) => Outcome::new(e, if a == b { 0.0 } else { 1.0 }, a == b, "rerun"),
            (Err(err), _) | (_, Err(err)) => Outcome::failed(e, &err),
        })
        .collect()
}

pub const CRITERIA: &[(u8, &str, &str)] = &[
    (1, "dec = cb agreement (factorization vs see-saw)", "rel gap in [-1e-6, 5e-4]"),
    (2, "factorization certificates", "1e-6 / 1e-5"),
    (3, "closed forms (l1, unitary n, trace norm)", "1e-8 / 1e-6 / 1e-7"),
    (4, "self-adjoint decomposition = dec", "2e-6"),
    (5, "inequality suite", "1e-6 / 1e-5"),
    (6, "direct sums: joint = blockwise max", "1e-6"),
    (7, "nuclearity gap on free tensors", "rel 5e-4"),
    (8, "multiplicative domains", "exact dim, 1e-9"),
    (9, "solver validation (lambda_max)", "1e-7"),
    (10, "determinism on rerun", "bitwise"),
];

/// Runs one criterion over the manifest.
pub fn run_criterion(id: u8, m: &[ManifestEntry], cfg: &SuiteConfig) -> Vec<CriterionResult> {
    let (_, name, tol) = CRITERIA.iter().find(|c| c.0 == id).copied().expect("known criterion");
    let one = |outcomes: Vec<Outcome>| vec![CriterionResult::fold(id, name, tol, &outcomes)];
    match id {
        1 | 2 => {
            let (a, b) = criteria_agreement(m, cfg);
            let (_, n2, t2) = CRITERIA[1];
            vec![
                CriterionResult::fold(1, CRITERIA[0].1, CRITERIA[0].2, &a),
                CriterionResult::fold(2, n2, t2, &b),
            ]
        }
        3 => one(criterion_closed_forms(m, cfg)),
        4 => one(criterion_selfadjoint(m)),
        5 => one(criterion_inequalities(m, cfg)),
        6 => one(criterion_direct_sum(m)),
        7 => one(criterion_nuclearity(m, cfg)),
        8 => one(criterion_multdomain(m)),
        9 => one(criterion_solver(m)),
        10 => one(criterion_determinism(m, cfg)),
        _ => Vec::new(),
    }
}

pub fn run_suite(cfg: &SuiteConfig) -> SuiteReport {
    let m = manifest(cfg);
    let mut criteria = Vec::new();
    for id in [1u8, 3, 4, 5, 6, 7, 8, 9, 10] {
        criteria.extend(run_criterion(id, &m, cfg));
    }
    SuiteReport {
        seed: cfg.seed,
        profile: cfg.profile,
        criteria,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_is_deterministic_and_sized() {
        let cfg = SuiteConfig::new(42, Profile::Full);
        let a = manifest(&cfg);
        assert_eq!(a, manifest(&cfg));
        assert_eq!(a.iter().filter(|e| e.family == "agree").count(), 200);
        assert!(a.iter().filter(|e| e.family == "agree").all(|e| (2..=4).contains(&e.n) && (2..=3).contains(&e.d)));
        let q = manifest(&SuiteConfig::new(42, Profile::Quick));
        assert!(q.len() < a.len());
        let o = manifest(&SuiteConfig {
            instances: Some(2),
            ..cfg
        });
        assert_eq!(o.len(), 2 * FAMILIES.len());
    }

    #[test]
    fn small_run_passes() {
        let cfg = SuiteConfig {
            instances: Some(2),
            ..SuiteConfig::new(5, Profile::Quick)
        };
        let r = run_suite(&cfg);
        assert!(r.all_passed(), "{}", r.table());
        assert_eq!(r.criteria.len(), 10);
    }

    #[test]
    fn profile_parsing() {
        assert_eq!("quick".parse::<Profile>().unwrap(), Profile::Quick);
        assert!("slow".parse::<Profile>().is_err());
    }
}
