//! Instance files.
//!
//! An instance is a JSON object tagged `"version": "cbdec-instance/1"`.
//! Complex numbers are `[re, im]` pairs, matrices are arrays of rows, and an
//! algebra element is an array with one matrix per block of its shape.
//!
//! ```json
//! {
//!   "version": "cbdec-instance/1",
//!   "kind": "dec_linf",
//!   "codomain": [1],
//!   "coefficients": [
//!     [[[[1, 0]]]],
//!     [[[[-2, 0]]]],
//!     [[[[0, 3]]]]
//!   ]
//! }
//! ```
//!
//! | kind              | required fields                        |
//! |-------------------|----------------------------------------|
//! | `dec_linf`        | `codomain`, `coefficients`             |
//! | `selfadjoint_dec` | `codomain`, `coefficients`             |
//! | `cb_linf`         | `codomain` (one block), `coefficients` |
//! | `free_tensor`     | `codomain`, `coefficients`, optional `n` |
//! | `dec_matrix`      | `domain`, `codomain`, `images`         |
//! | `mult_domain`     | `domain`, `codomain`, `images`         |
//!
//! `images` lists `u(e)` for the matrix units `e` of `domain`, block by
//! block and row-major inside each block. Optional `params` may set `k`,
//! `restarts`, `seed`, `tol` (see-saw stopping tolerance) and `samples`.

use serde::Deserialize;

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::cpmap::LinearMapRep;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::tensor::FreeTensor;

pub const VERSION: &str = "cbdec-instance/1";
/// Largest block size accepted.
pub const MAX_BLOCK_DIM: usize = 64;
/// Largest number of coefficients or blocks accepted.
pub const MAX_ITEMS: usize = 4096;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub k: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    version: String,
    kind: String,
    domain: Option<Vec<usize>>,
    codomain: Option<Vec<usize>>,
    n: Option<usize>,
    coefficients: Option<Vec<Vec<Vec<Vec<[f64; 2]>>>>>,
    images: Option<Vec<Vec<Vec<Vec<[f64; 2]>>>>>,
    #[serde(default)]
    params: Params,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Problem {
    DecLinf(Vec<AlgebraElement>),
    SelfAdjointDec(Vec<AlgebraElement>),
    CbLinf(Vec<ComplexMatrix>),
    FreeTensor(FreeTensor),
    DecMatrix(LinearMapRep),
    MultDomain(LinearMapRep),
}

impl Problem {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::DecLinf(_) => "dec_linf",
            Self::SelfAdjointDec(_) => "selfadjoint_dec",
            Self::CbLinf(_) => "cb_linf",
            Self::FreeTensor(_) => "free_tensor",
            Self::DecMatrix(_) => "dec_matrix",
            Self::MultDomain(_) => "mult_domain",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub problem: Problem,
    pub params: Params,
}

fn invalid(field: impl Into<String>, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("{}: {msg}", field.into()))
}

fn shape_field(field: &str, dims: Option<Vec<usize>>) -> Result<AlgebraShape> {
    let dims = dims.ok_or_else(|| invalid(field, "missing"))?;
    if dims.len() > MAX_ITEMS {
        return Err(invalid(field, format!("more than {MAX_ITEMS} blocks")));
    }
    if let Some(i) = dims.iter().position(|&d| d == 0 || d > MAX_BLOCK_DIM) {
        return Err(invalid(
            format!("{field}[{i}]"),
            format!("block size must be in 1..={MAX_BLOCK_DIM}"),
        ));
    }
    AlgebraShape::new(dims).map_err(|e| invalid(field, e))
}

fn matrix(field: &str, rows: &[Vec<[f64; 2]>], dim: usize) -> Result<ComplexMatrix> {
    if rows.len() != dim {
        return Err(invalid(field, format!("{} rows, expected {dim}", rows.len())));
    }
    let mut data = Vec::with_capacity(dim * dim);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(invalid(
                format!("{field}[{r}]"),
                format!("{} entries, expected {dim}", row.len()),
            ));
        }
        for (c, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(invalid(format!("{field}[{r}][{c}]"), "non-finite entry"));
            }
            data.push(C64::new(re, im));
        }
    }
    ComplexMatrix::from_vec(dim, dim, data).map_err(|e| invalid(field, e))
}

fn elements(field: &str, raw: Option<Vec<Vec<Vec<Vec<[f64; 2]>>>>>, shape: &AlgebraShape) -> Result<Vec<AlgebraElement>> {
    let raw = raw.ok_or_else(|| invalid(field, "missing"))?;
    if raw.len() > MAX_ITEMS {
        return Err(invalid(field, format!("more than {MAX_ITEMS} entries")));
    }
    raw.iter()
        .enumerate()
        .map(|(j, blocks)| {
            let f = format!("{field}[{j}]");
            if blocks.len() != shape.num_blocks() {
                return Err(invalid(
                    &f,
                    format!("{} blocks, expected {}", blocks.len(), shape.num_blocks()),
                ));
            }
            let mats = blocks
                .iter()
                .zip(shape.block_dims())
                .enumerate()
                .map(|(b, (rows, &d))| matrix(&format!("{f}[{b}]"), rows, d))
                .collect::<Result<Vec<_>>>()?;
            AlgebraElement::new(shape.clone(), mats).map_err(|e| invalid(&f, e))
        })
        .collect()
}

fn reject(field: &str, present: bool, kind: &str) -> Result<()> {
    if present {
        Err(invalid(field, format!("not used by kind {kind}")))
    } else {
        Ok(())
    }
}

/// Parses and validates an instance; every error names the offending field.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let raw: RawInstance = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("json: {e}")))?;
    if raw.version != VERSION {
        return Err(invalid("version", format!("expected {VERSION:?}, found {:?}", raw.version)));
    }
    let params = raw.params;
    if params.k == Some(0) {
        return Err(invalid("params.k", "must be positive"));
    }
    if params.restarts == Some(0) {
        return Err(invalid("params.restarts", "must be positive"));
    }
    if params.k.is_some_and(|k| k > MAX_BLOCK_DIM) {
        return Err(invalid("params.k", format!("must be at most {MAX_BLOCK_DIM}")));
    }
    if params.restarts.is_some_and(|r| r > MAX_ITEMS) || params.samples.is_some_and(|s| s > MAX_ITEMS) {
        return Err(invalid("params", format!("restarts and samples are limited to {MAX_ITEMS}")));
    }
    if params.tol.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
        return Err(invalid("params.tol", "must be positive and finite"));
    }
    let kind = raw.kind.as_str();
    let problem = match kind {
        "dec_linf" | "selfadjoint_dec" | "cb_linf" | "free_tensor" => {
            reject("domain", raw.domain.is_some(), kind)?;
            reject("images", raw.images.is_some(), kind)?;
            if kind != "free_tensor" {
                reject("n", raw.n.is_some(), kind)?;
            }
            let shape = shape_field("codomain", raw.codomain)?;
            let coeffs = elements("coefficients", raw.coefficients, &shape)?;
            if coeffs.is_empty() {
                return Err(invalid("coefficients", "at least one coefficient is required"));
            }
            match kind {
                "dec_linf" => Problem::DecLinf(coeffs),
                "selfadjoint_dec" => {
                    if let Some(j) = coeffs.iter().position(|x| !x.is_self_adjoint(1e-10)) {
                        return Err(invalid(format!("coefficients[{j}]"), "not self-adjoint"));
                    }
                    Problem::SelfAdjointDec(coeffs)
                }
                "cb_linf" => {
                    if !shape.is_single_block() {
                        return Err(invalid("codomain", "cb_linf needs a single matrix block"));
                    }
                    Problem::CbLinf(coeffs.into_iter().map(|x| x.block(0).clone()).collect())
                }
                _ => {
                    if let Some(n) = raw.n {
                        if n != coeffs.len() {
                            return Err(invalid("n", format!("{n} does not match {} coefficients", coeffs.len())));
                        }
                    }
                    Problem::FreeTensor(FreeTensor::new(coeffs)?)
                }
            }
        }
        "dec_matrix" | "mult_domain" => {
            reject("coefficients", raw.coefficients.is_some(), kind)?;
            reject("n", raw.n.is_some(), kind)?;
            let domain = shape_field("domain", raw.domain)?;
            let codomain = shape_field("codomain", raw.codomain)?;
            let images = elements("images", raw.images, &codomain)?;
            if images.len() != domain.total_dim() {
                return Err(invalid(
                    "images",
                    format!("{} images, expected {} (one per matrix unit)", images.len(), domain.total_dim()),
                ));
            }
            let u = LinearMapRep::new(domain, codomain, images).map_err(|e| invalid("images", e))?;
            if kind == "dec_matrix" {
                Problem::DecMatrix(u)
            } else {
                Problem::MultDomain(u)
            }
        }
        other => return Err(invalid("kind", format!("unknown kind {other:?}"))),
    };
    Ok(Instance { problem, params })
}

/// `[re, im]` nesting used by instances and reports.
pub fn matrix_to_json(m: &ComplexMatrix) -> serde_json::Value {
    serde_json::Value::Array(
        (0..m.rows())
            .map(|r| {
                serde_json::Value::Array(
                    (0..m.cols())
                        .map(|c| serde_json::json!([m[(r, c)].re, m[(r, c)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn element_to_json(x: &AlgebraElement) -> serde_json::Value {
    serde_json::Value::Array(x.blocks().iter().map(matrix_to_json).collect())
}

/// Writes `problem` in the instance format.
pub fn instance_to_json(inst: &Instance) -> serde_json::Value {
    let mut v = serde_json::json!({ "version": VERSION, "kind": inst.problem.kind() });
    let o = v.as_object_mut().expect("object");
    let coeffs = |xs: &[AlgebraElement]| serde_json::Value::Array(xs.iter().map(element_to_json).collect());
    match &inst.problem {
        Problem::DecLinf(x) | Problem::SelfAdjointDec(x) => {
            o.insert("codomain".into(), serde_json::json!(x[0].shape().block_dims()));
            o.insert("coefficients".into(), coeffs(x));
        }
        Problem::CbLinf(x) => {
            o.insert("codomain".into(), serde_json::json!([x[0].rows()]));
            o.insert(
                "coefficients".into(),
                serde_json::Value::Array(x.iter().map(|m| serde_json::json!([matrix_to_json(m)])).collect()),
            );
        }
        Problem::FreeTensor(t) => {
            o.insert("codomain".into(), serde_json::json!(t.shape().block_dims()));
            o.insert("n".into(), serde_json::json!(t.n()));
            o.insert("coefficients".into(), coeffs(t.coeffs()));
        }
        Problem::DecMatrix(u) | Problem::MultDomain(u) => {
            o.insert("domain".into(), serde_json::json!(u.domain().block_dims()));
            o.insert("codomain".into(), serde_json::json!(u.codomain().block_dims()));
            o.insert("images".into(), coeffs(u.images()));
        }
    }
    let p = &inst.params;
    let mut params = serde_json::Map::new();
    for (key, val) in [
        ("k", p.k.map(|v| serde_json::json!(v))),
        ("restarts", p.restarts.map(|v| serde_json::json!(v))),
        ("seed", p.seed.map(|v| serde_json::json!(v))),
        ("tol", p.tol.map(|v| serde_json::json!(v))),
        ("samples", p.samples.map(|v| serde_json::json!(v))),
    ] {
        if let Some(val) = val {
            params.insert(key.into(), val);
        }
    }
    if !params.is_empty() {
        o.insert("params".into(), serde_json::Value::Object(params));
    }
    v
}
