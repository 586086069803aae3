//! Running an [`Instance`] and rendering the result.
//!
//! A report is a JSON object:
//!
//! ```json
//! {
//!   "version": "cbdec-report/1",
//!   "toolkit": "cbdec 0.1.0",
//!   "kind": "dec_linf",
//!   "instance_sha256": "…",
//!   "result": { "value": 6.0, "lower_bound": 5.99999999, "check": { … }, … },
//!   "verdict": null,
//!   "timing": { "elapsed_ms": 3.1 }
//! }
//! ```
//!
//! Everything except `timing` is a pure function of the instance bytes and
//! the run options. Certificates carry their matrices in the `[re, im]`
//! encoding of the instance format so values can be re-checked.

use std::time::Instant;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::algebra::AlgebraElement;
use crate::cbmin::{self, SeeSawOptions};
use crate::decnorm::{self, DecCertificate};
use crate::error::Result;
use crate::instance::{element_to_json, matrix_to_json, Instance, Problem};
use crate::multdomain;
use crate::tensor;

pub const VERSION: &str = "cbdec-report/1";

/// Overrides for the instance's own `params`.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub k: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub kind: &'static str,
    pub instance_sha256: String,
    pub result: Value,
    pub verdict: Option<String>,
    pub elapsed_ms: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn seesaw_options(inst: &Instance, o: &RunOptions) -> SeeSawOptions {
    let d = SeeSawOptions::default();
    SeeSawOptions {
        k: o.k.or(inst.params.k),
        restarts: o.restarts.or(inst.params.restarts).unwrap_or(d.restarts),
        seed: o.seed.or(inst.params.seed).unwrap_or(d.seed),
        tol: o.tol.or(inst.params.tol).unwrap_or(d.tol),
        ..d
    }
}

fn elements(xs: &[AlgebraElement]) -> Value {
    Value::Array(xs.iter().map(element_to_json).collect())
}

fn dec_json(c: &DecCertificate) -> Result<Value> {
    Ok(json!({
        "value": c.value,
        "lower_bound": c.lower_bound,
        "check": c.check()?,
        "repair_shift": c.repair_shift,
        "solver": c.solver,
        "certificate": {
            "p": elements(&c.p),
            "q": elements(&c.q),
            "factor_a": elements(&c.factor_a),
            "factor_b": elements(&c.factor_b),
        },
    }))
}

fn agreement_json(r: &cbmin::AgreementReport) -> Value {
    json!({
        "upper": r.upper,
        "lower": r.lower,
        "gap": r.gap,
        "relative_gap": r.relative_gap,
        "k_tried": r.k_tried,
        "seesaw": {
            "k": r.seesaw.k,
            "iterations": r.seesaw.iterations,
            "restarts_used": r.seesaw.restarts_used,
            "best_restart": r.seesaw.best_restart,
            "converged": r.seesaw.converged,
            "max_decrease": r.seesaw.max_decrease,
            "unitaries": r.seesaw.unitaries.iter().map(matrix_to_json).collect::<Vec<_>>(),
        },
        "factorization": {
            "value": r.factorization.value,
            "residual": r.factorization.residual,
            "attained": r.factorization.attained,
            "y": r.factorization.y.iter().map(matrix_to_json).collect::<Vec<_>>(),
            "z": r.factorization.z.iter().map(matrix_to_json).collect::<Vec<_>>(),
        },
    })
}

/// Runs the computation named by the instance kind.
pub fn run_instance(inst: &Instance, instance_bytes: &[u8], opts: &RunOptions) -> Result<Report> {
    let start = Instant::now();
    let see = seesaw_options(inst, opts);
    let (result, verdict) = match &inst.problem {
        Problem::DecLinf(x) => (dec_json(&decnorm::dec_norm_linf(x)?)?, None),
        Problem::DecMatrix(u) => (dec_json(&decnorm::dec_norm(u)?)?, None),
        Problem::SelfAdjointDec(x) => {
            let s = decnorm::selfadjoint_dec_norm(x)?;
            let mut resid: f64 = 0.0;
            for ((xj, p), n) in x.iter().zip(&s.positive_part).zip(&s.negative_part) {
                resid = resid.max(xj.sub(&p.sub(n)?)?.norm());
            }
            let min_part = s
                .positive_part
                .iter()
                .chain(&s.negative_part)
                .map(|p| p.min_eigenvalue())
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            (
                json!({
                    "value": s.value,
                    "lower_bound": s.lower_bound,
                    "split_residual": resid,
                    "min_part_eigenvalue": min_part,
                    "solver": s.solver,
                    "positive_part": elements(&s.positive_part),
                    "negative_part": elements(&s.negative_part),
                }),
                None,
            )
        }
        Problem::CbLinf(x) => {
            let r = cbmin::cb_norm_linf(x, &see)?;
            (agreement_json(&r), Some(r.verdict.as_str().to_string()))
        }
        Problem::FreeTensor(t) => {
            let (max, cert) = tensor::max_norm(t)?;
            let min = tensor::min_norm(t, &see)?;
            let gap = (max - min.upper).abs();
            let verdict = match cbmin::verdict(max, min.lower) {
                cbmin::Verdict::Agree if gap > cbmin::AGREE_REL_TOL * max.max(1.0) => cbmin::Verdict::Disagree,
                v => v,
            };
            (
                json!({
                    "max": max,
                    "min_lower": min.lower,
                    "min_upper": min.upper,
                    "gap": gap,
                    "seesaw_gap": max - min.lower,
                    "max_certificate": dec_json(&cert)?,
                    "min_blocks": min.blocks.iter().map(agreement_json).collect::<Vec<_>>(),
                }),
                Some(verdict.as_str().to_string()),
            )
        }
        Problem::MultDomain(u) => {
            let m = multdomain::multiplicative_domain(u)?;
            let samples = inst.params.samples.unwrap_or(32);
            let b = multdomain::verify_bimodularity(u, &m.basis, samples, see.seed)?;
            (
                json!({
                    "dimension": m.basis.dimension,
                    "closure": m.closure,
                    "schwarz_residual": m.schwarz_residual,
                    "bimodularity": b,
                    "singular_values": m.singular_values,
                    "basis": elements(&m.basis.basis),
                }),
                None,
            )
        }
    };
    Ok(Report {
        kind: inst.problem.kind(),
        instance_sha256: sha256_hex(instance_bytes),
        result,
        verdict,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

impl Report {
    pub fn to_json(&self) -> Value {
        json!({
            "version": VERSION,
            "toolkit": concat!("cbdec ", env!("CARGO_PKG_VERSION")),
            "kind": self.kind,
            "instance_sha256": self.instance_sha256,
            "result": self.result,
            "verdict": self.verdict,
            "timing": { "elapsed_ms": self.elapsed_ms },
        })
    }

    /// Scalar fields of the result, one per line; matrices are omitted.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "kind      {}\ninstance  {}\n",
            self.kind, self.instance_sha256
        );
        fn walk(prefix: &str, v: &Value, out: &mut String) {
            match v {
                Value::Object(m) => {
                    for (k, v) in m {
                        let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                        walk(&p, v, out);
                    }
                }
                Value::Number(n) => out.push_str(&format!("{prefix:<40} {}\n", fmt_number(n))),
                Value::Bool(b) => out.push_str(&format!("{prefix:<40} {b}\n")),
                Value::String(s) => out.push_str(&format!("{prefix:<40} {s}\n")),
                Value::Array(a) if a.iter().all(Value::is_number) => {
                    let items: Vec<String> = a.iter().filter_map(Value::as_number).map(fmt_number).collect();
                    out.push_str(&format!("{prefix:<40} [{}]\n", items.join(", ")));
                }
                _ => {}
            }
        }
        walk("", &self.result, &mut out);
        if let Some(v) = &self.verdict {
            out.push_str(&format!("{:<40} {v}\n", "verdict"));
        }
        out.push_str(&format!("{:<40} {:.1}\n", "elapsed_ms", self.elapsed_ms));
        out
    }
}

fn fmt_number(n: &serde_json::Number) -> String {
    match (n.as_u64(), n.as_i64(), n.as_f64()) {
        (Some(u), _, _) => u.to_string(),
        (_, Some(i), _) => i.to_string(),
        (_, _, Some(f)) => format!("{f:.10e}"),
        _ => n.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;

    const SCALARS: &str = r#"{
        "version": "cbdec-instance/1",
        "kind": "dec_linf",
        "codomain": [1],
        "coefficients": [ [[[[1, 0]]]], [[[[-2, 0]]]], [[[[0, 3]]]] ]
    }"#;

    #[test]
    fn scalar_report_value_is_six() {
        let inst = parse_instance(SCALARS).unwrap();
        let r = run_instance(&inst, SCALARS.as_bytes(), &RunOptions::default()).unwrap();
        let v = r.result["value"].as_f64().unwrap();
        assert!((v - 6.0).abs() < 1e-8);
        assert!(r.result["check"]["reconstruction_residual"].as_f64().unwrap() < 1e-6);
        assert_eq!(r.instance_sha256.len(), 64);
        assert!(r.to_text().contains("value"));
    }

    #[test]
    fn reports_are_deterministic() {
        let text = r#"{
            "version": "cbdec-instance/1",
            "kind": "free_tensor",
            "codomain": [2],
            "coefficients": [ [[[[1,0],[0,0]],[[0,0],[1,0]]]], [[[[0,0],[1,0]],[[1,0],[0,0]]]] ],
            "params": {"restarts": 4, "seed": 7}
        }"#;
        let inst = parse_instance(text).unwrap();
        let a = run_instance(&inst, text.as_bytes(), &RunOptions::default()).unwrap();
        let b = run_instance(&inst, text.as_bytes(), &RunOptions::default()).unwrap();
        assert_eq!(a.result, b.result);
        assert_eq!(a.verdict.as_deref(), Some("agree"));
        assert!((a.result["max"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    }
}
