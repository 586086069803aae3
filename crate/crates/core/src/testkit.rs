//! Seeded generators and brute-force oracles.
//!
//! # Random streams
//!
//! [`SeededGenerator`] wraps ChaCha20 (`rand_chacha::ChaCha20Rng`, 20 rounds)
//! keyed by `seed_from_u64(seed)` with stream number `stream` (default 0).
//! Derived values are fixed bit for bit:
//!
//! * `uniform()` is `(next_u64 >> 11) · 2⁻⁵³`, in `[0, 1)`.
//! * `normal()` draws `u1 = uniform()`, `u2 = uniform()` in that order and
//!   returns `sqrt(−2 ln(1 − u1)) · cos(2π u2)` (Box–Muller, cosine branch only).
//! * `complex_normal()` is `(normal(), normal()) / √2`, real part first, so
//!   `E|z|² = 1`.
//!
//! Matrices are filled in row-major order. [`random_haar_unitary`] applies
//! two-pass Gram–Schmidt to a Ginibre matrix, which makes the triangular
//! factor's diagonal positive and the result Haar distributed.
//!
//! # Corpus manifest
//!
//! One instance per line, `<id> <family> <n> <d> <seed>`; blank lines and
//! lines starting with `#` are ignored. `id` and `family` are tokens of
//! `[A-Za-z0-9_.-]`, `n` and `d` are positive integers and `seed` is a `u64`.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::cpmap::LinearMapRep;
use crate::error::{Error, Result};
use crate::matrix::{self, ComplexMatrix, C64};
use crate::tensor::FreeTensor;

#[derive(Clone, Debug)]
pub struct SeededGenerator {
    seed: u64,
    stream: u64,
    rng: ChaCha20Rng,
}

impl SeededGenerator {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent stream `stream` under the same seed, for per-worker use.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be nonempty");
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn complex_normal(&mut self) -> C64 {
        let re = self.normal();
        let im = self.normal();
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn unit_phase(&mut self) -> C64 {
        C64::from_polar(1.0, 2.0 * std::f64::consts::PI * self.uniform())
    }
}

/// i.i.d. standard complex Gaussian entries.
pub fn random_ginibre(gen: &mut SeededGenerator, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| gen.complex_normal()).collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("finite Gaussian entries")
}

pub fn random_haar_unitary(gen: &mut SeededGenerator, d: usize) -> ComplexMatrix {
    matrix::gram_schmidt(&random_ginibre(gen, d, d)).0
}

/// `(G + G*)/2` for Ginibre `G`.
pub fn random_hermitian(gen: &mut SeededGenerator, n: usize) -> ComplexMatrix {
    random_ginibre(gen, n, n).hermitian_part()
}

/// Blockwise Ginibre element scaled by `1/√d` per block of size `d`.
pub fn random_element(gen: &mut SeededGenerator, shape: &AlgebraShape) -> AlgebraElement {
    let blocks = shape
        .block_dims()
        .iter()
        .map(|&d| random_ginibre(gen, d, d).scale_real(1.0 / (d as f64).sqrt()))
        .collect();
    AlgebraElement::new(shape.clone(), blocks).expect("shapes match")
}

pub fn random_self_adjoint(gen: &mut SeededGenerator, shape: &AlgebraShape) -> AlgebraElement {
    let x = random_element(gen, shape);
    x.add(&x.adjoint()).expect("same shape").scale_real(0.5)
}

/// `G G*` for an `n × rank` Ginibre `G`, scaled by `1/rank`.
pub fn random_psd(gen: &mut SeededGenerator, n: usize, rank: usize) -> ComplexMatrix {
    let g = random_ginibre(gen, n, rank.max(1));
    (&g * &g.adjoint()).scale_real(1.0 / rank.max(1) as f64).hermitian_part()
}

/// CP map with Choi blocks `G G*` (full rank), normalized to `‖u(1)‖ = 1`.
pub fn random_cp_map(gen: &mut SeededGenerator, domain: &AlgebraShape, codomain: &AlgebraShape) -> LinearMapRep {
    let blocks: Vec<Vec<ComplexMatrix>> = domain
        .block_dims()
        .iter()
        .map(|&n| {
            codomain
                .block_dims()
                .iter()
                .map(|&m| random_psd(gen, n * m, n * m))
                .collect()
        })
        .collect();
    let u = LinearMapRep::from_choi_split(domain, codomain, &blocks).expect("consistent sizes");
    let s = u.unit_image().norm();
    u.scale(C64::new(1.0 / s, 0.0))
}

/// Unital CP map `M_n → M_m`, `x ↦ Σ_k K_k* x K_k`, with `kraus` Kraus
/// operators cut from a Haar-random isometry. Needs `kraus · n ≥ m`.
pub fn random_unital_cp_map(gen: &mut SeededGenerator, n: usize, m: usize, kraus: usize) -> Result<LinearMapRep> {
    if kraus * n < m {
        return Err(Error::InvalidInput(format!(
            "{kraus} Kraus operators of size {n}x{m} cannot form an isometry"
        )));
    }
    let (q, _) = matrix::gram_schmidt(&random_ginibre(gen, kraus * n, kraus * n));
    let ks: Vec<ComplexMatrix> = (0..kraus).map(|k| q.submatrix(k * n, 0, n, m)).collect();
    LinearMapRep::from_fn(AlgebraShape::matrix(n), AlgebraShape::matrix(m), |x| {
        let mut out = ComplexMatrix::zeros(m, m);
        for k in &ks {
            out += &(&(&k.adjoint() * x.block(0)) * k);
        }
        AlgebraElement::from_matrix(out)
    })
}

/// Arbitrary map with Ginibre images, scaled by `1/√(total domain dimension)`.
pub fn random_map(gen: &mut SeededGenerator, domain: &AlgebraShape, codomain: &AlgebraShape) -> LinearMapRep {
    let s = 1.0 / (domain.total_dim() as f64).sqrt();
    let images = (0..domain.total_dim())
        .map(|_| random_element(gen, codomain).scale_real(s))
        .collect();
    LinearMapRep::new(domain.clone(), codomain.clone(), images).expect("shapes match")
}

/// `n` coefficients in `M_d`, each Ginibre scaled by `1/√d`.
pub fn random_coefficients(gen: &mut SeededGenerator, n: usize, d: usize) -> Vec<ComplexMatrix> {
    (0..n)
        .map(|_| random_ginibre(gen, d, d).scale_real(1.0 / (d as f64).sqrt()))
        .collect()
}

pub fn random_free_tensor(gen: &mut SeededGenerator, n: usize, d: usize) -> FreeTensor {
    let coeffs = random_coefficients(gen, n, d)
        .into_iter()
        .map(|m| AlgebraElement::from_matrix(m).expect("square"))
        .collect();
    FreeTensor::new(coeffs).expect("common shape")
}

// ---------------------------------------------------------------------------
// Grid oracle for ‖Σ u_i ⊗ x_i‖ over unitaries

const GRID_BUDGET: usize = 70_000;
const POLISH_STARTS: usize = 6;

fn u2_from_angles(a: &[f64]) -> ComplexMatrix {
    let (alpha, beta, gamma, theta) = (a[0], a[1], a[2], a[3]);
    let g = C64::from_polar(1.0, alpha);
    let (c, s) = (theta.cos(), theta.sin());
    ComplexMatrix::from_rows(&[
        vec![g * C64::from_polar(c, beta), g * C64::from_polar(s, gamma)],
        vec![-g * C64::from_polar(s, -gamma), g * C64::from_polar(c, -beta)],
    ])
    .expect("2x2")
}

fn grid_objective(x: &[ComplexMatrix], d: usize, angles: &[f64]) -> f64 {
    let per = if d == 1 { 1 } else { 4 };
    let mut t = ComplexMatrix::identity(d).kron(&x[0]);
    for (i, xi) in x.iter().enumerate().skip(1) {
        let a = &angles[(i - 1) * per..i * per];
        let u = if d == 1 {
            ComplexMatrix::from_diag(&[C64::from_polar(1.0, a[0])])
        } else {
            u2_from_angles(a)
        };
        t += &u.kron(xi);
    }
    matrix::operator_norm(&t)
}

/// Lower bound for `sup ‖Σ u_i ⊗ x_i‖` over unitaries on `C^d`, found by a
/// coarse grid over angle parametrizations (`U(1)` phases for `d = 1`, four
/// Euler-type angles per `U(2)` factor) followed by compass-search
/// polishing from the best grid points. The first unitary is fixed to the
/// identity, which loses nothing by unitary invariance of the norm.
pub fn grid_oracle_min_norm(x: &[ComplexMatrix]) -> Result<f64> {
    let n = x.len();
    let d = x.first().map(|m| m.rows()).unwrap_or(0);
    if n == 0 || !(1..=2).contains(&d) || n > 3 {
        return Err(Error::Precondition(format!(
            "grid oracle supports 1 ≤ n ≤ 3 and d ≤ 2 (got n = {n}, d = {d})"
        )));
    }
    if x.iter().any(|m| m.rows() != d || m.cols() != d) {
        return Err(Error::DimensionMismatch("coefficients must all be d x d".into()));
    }
    let per = if d == 1 { 1 } else { 4 };
    let dims = per * (n - 1);
    if dims == 0 {
        return Ok(matrix::operator_norm(&x[0]));
    }
    let ranges: Vec<f64> = (0..dims)
        .map(|k| if d == 2 && k % 4 == 3 { std::f64::consts::FRAC_PI_2 } else { 2.0 * std::f64::consts::PI })
        .collect();
    let mut k = 2usize;
    while (k + 1).pow(dims as u32) <= GRID_BUDGET {
        k += 1;
    }
    let total = k.pow(dims as u32);
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(total);
    let mut angles = vec![0.0; dims];
    for idx in 0..total {
        let mut r = idx;
        for (a, range) in angles.iter_mut().zip(&ranges) {
            *a = (r % k) as f64 * range / k as f64;
            r /= k;
        }
        scored.push((grid_objective(x, d, &angles), idx));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut best = scored[0].0;
    for &(v0, idx) in scored.iter().take(POLISH_STARTS) {
        let mut r = idx;
        let mut a: Vec<f64> = ranges
            .iter()
            .map(|range| {
                let v = (r % k) as f64 * range / k as f64;
                r /= k;
                v
            })
            .collect();
        let mut val = v0;
        let mut step = std::f64::consts::PI / k as f64;
        while step > 1e-10 {
            let mut improved = false;
            for c in 0..dims {
                for dir in [1.0, -1.0] {
                    a[c] += dir * step;
                    let v = grid_objective(x, d, &a);
                    if v > val {
                        val = v;
                        improved = true;
                    } else {
                        a[c] -= dir * step;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best = best.max(val);
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Corpus manifest

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub id: String,
    pub family: String,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

impl std::fmt::Display for ManifestEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {} {} {}", self.id, self.family, self.n, self.d, self.seed)
    }
}

fn valid_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut out: Vec<ManifestEntry> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |field: &str, msg: String| Error::InvalidInput(format!("manifest line {}: {field}: {msg}", lineno + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(at("line", format!("expected 5 fields, found {}", fields.len())));
        }
        let (id, family) = (fields[0], fields[1]);
        if !valid_token(id) {
            return Err(at("id", format!("invalid token {id:?}")));
        }
        if !valid_token(family) {
            return Err(at("family", format!("invalid token {family:?}")));
        }
        let pos = |name: &str, s: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(v) if v > 0 => Ok(v),
                _ => Err(at(name, format!("expected a positive integer, found {s:?}"))),
            }
        };
        let n = pos("n", fields[2])?;
        let d = pos("d", fields[3])?;
        let seed = fields[4]
            .parse::<u64>()
            .map_err(|_| at("seed", format!("expected an unsigned 64-bit integer, found {:?}", fields[4])))?;
        if !seen.insert(id.to_string()) {
            return Err(at("id", format!("duplicate id {id:?}")));
        }
        out.push(ManifestEntry {
            id: id.to_string(),
            family: family.to_string(),
            n,
            d,
            seed,
        });
    }
    Ok(out)
}

pub fn format_manifest(entries: &[ManifestEntry]) -> String {
    let mut s = String::from("# id family n d seed\n");
    for e in entries {
        s.push_str(&e.to_string());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SeededGenerator::new(7);
        let mut b = SeededGenerator::new(7);
        assert_eq!(random_ginibre(&mut a, 3, 2), random_ginibre(&mut b, 3, 2));
        let mut c = SeededGenerator::with_stream(7, 1);
        assert_ne!(a.next_u64(), c.next_u64());
    }

    #[test]
    fn pinned_stream_values() {
        // Frozen to detect any change in the generator or the conversions.
        let mut g = SeededGenerator::new(42);
        let u = g.uniform();
        let mut h = SeededGenerator::new(42);
        let raw = h.next_u64();
        assert_eq!(u, (raw >> 11) as f64 / 9007199254740992.0);
        assert!((0.0..1.0).contains(&u));
    }

    #[test]
    fn normal_moments() {
        let mut g = SeededGenerator::new(3);
        let xs: Vec<f64> = (0..20000).map(|_| g.normal()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.03 && (var - 1.0).abs() < 0.05);
    }

    #[test]
    fn haar_is_unitary() {
        let mut g = SeededGenerator::new(1);
        for d in 1..6 {
            assert!(random_haar_unitary(&mut g, d).unitarity_defect() <= 1e-12);
        }
    }

    #[test]
    fn cp_generators() {
        let mut g = SeededGenerator::new(5);
        let u = random_cp_map(&mut g, &AlgebraShape::new(vec![2, 1]).unwrap(), &AlgebraShape::matrix(2));
        assert!(u.is_cp(1e-10));
        let (_, l) = u.min_choi_eigenvalue().unwrap();
        assert!(l >= -1e-12);
        let v = random_unital_cp_map(&mut g, 3, 2, 2).unwrap();
        assert!(v.is_cp(1e-10) && v.is_unital(1e-10));
    }

    #[test]
    fn grid_oracle_scalars() {
        let x: Vec<ComplexMatrix> = [C64::new(1.0, 0.0), C64::new(0.0, -2.0), C64::new(-0.5, 0.5)]
            .iter()
            .map(|&z| ComplexMatrix::from_diag(&[z]))
            .collect();
        let v = grid_oracle_min_norm(&x).unwrap();
        let l1: f64 = x.iter().map(|m| m[(0, 0)].norm()).sum();
        assert!((v - l1).abs() < 1e-6, "{v} vs {l1}");
    }

    #[test]
    fn grid_oracle_unitaries() {
        let mut g = SeededGenerator::new(11);
        let x = vec![random_haar_unitary(&mut g, 2), random_haar_unitary(&mut g, 2)];
        let v = grid_oracle_min_norm(&x).unwrap();
        assert!((v - 2.0).abs() < 1e-4, "{v}");
    }

    #[test]
    fn grid_oracle_rejects_large() {
        let x = vec![ComplexMatrix::identity(3)];
        assert!(grid_oracle_min_norm(&x).is_err());
    }

    #[test]
    fn manifest_round_trip_and_errors() {
        let text = "# comment\n\nc1-0001 cb_agreement 3 2 17\nsc-0001 scalar 4 1 18\n";
        let entries = parse_manifest(text).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(parse_manifest(&format_manifest(&entries)).unwrap(), entries);
        let err = parse_manifest("a fam 0 2 3").unwrap_err().to_string();
        assert!(err.contains("line 1") && err.contains("n:"), "{err}");
        let err = parse_manifest("a fam 1 2 x").unwrap_err().to_string();
        assert!(err.contains("seed"), "{err}");
        assert!(parse_manifest("a f 1 1 1\na f 1 1 2").is_err());
        assert!(parse_manifest("a f 1 1").is_err());
    }
}
