//! Observation model of the multiplex channel.
//!
//! A [`Design`] is a binary switch-schedule matrix `B` (one row per switch
//! configuration) together with the time `tᵢ` spent in each configuration.
//! Observing row `i` for `tᵢ` seconds yields `Xᵢ ~ N(tᵢ·bᵢᵀμ, σ²tᵢ)`, so the
//! Fisher information of the whole schedule is `C = BᵀTB` and the unbiased
//! ML estimate `(BᵀTB)⁻¹Bᵀx` has covariance `C⁻¹`. The total mean-square
//! error is therefore `Tr C⁻¹`, which every other module tries to minimize
//! under the budget `Σ tᵢ = N`.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Error, Result};
use crate::linalg::{compensated_sum, symmetric_eigenvalues, Cholesky, Matrix};

/// Relative tolerance on `Σ tᵢ = N`.
pub const TIME_BUDGET_RTOL: f64 = 1e-12;
/// Absolute tolerance used when tagging `C` as `(a - b)I + bJ`.
pub const STRUCTURE_ATOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    n: usize,
    m: usize,
    /// Row-major `m × n` 0/1 entries.
    entries: Vec<u8>,
    times: Vec<f64>,
}

impl Design {
    /// Builds a design from explicit rows and times. Only shape and the
    /// binary alphabet are checked here; see [`validate_design`] for the
    /// full set of invariants.
    pub fn new(n: usize, rows: Vec<Vec<u8>>, times: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(invalid_arg("design needs at least one parameter"));
        }
        if rows.len() != times.len() {
            return Err(invalid_arg(format!(
                "{} rows but {} times",
                rows.len(),
                times.len()
            )));
        }
        let mut entries = Vec::with_capacity(rows.len() * n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(invalid_arg(format!("row {i} has length {}, expected {n}", r.len())));
            }
            if let Some(bad) = r.iter().find(|&&v| v > 1) {
                return Err(invalid_arg(format!("row {i} has non-binary entry {bad}")));
            }
            entries.extend_from_slice(r);
        }
        Ok(Self {
            n,
            m: rows.len(),
            entries,
            times,
        })
    }

    /// Rows with equal time `n / m` each.
    pub fn with_uniform_times(n: usize, rows: Vec<Vec<u8>>) -> Result<Self> {
        let t = n as f64 / rows.len().max(1) as f64;
        let times = vec![t; rows.len()];
        Self::new(n, rows, times)
    }

    pub(crate) fn from_flat(n: usize, entries: Vec<u8>, times: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), n * times.len());
        Self {
            n,
            m: times.len(),
            entries,
            times,
        }
    }

    /// Number of parameters `N`.
    pub fn n_params(&self) -> usize {
        self.n
    }

    /// Number of switch configurations `M`.
    pub fn n_rows(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.entries.chunks_exact(self.n)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Same rows, new time allocation.
    pub fn with_times(&self, times: Vec<f64>) -> Result<Self> {
        if times.len() != self.m {
            return Err(invalid_arg(format!("{} times for {} rows", times.len(), self.m)));
        }
        Ok(Self {
            times,
            ..self.clone()
        })
    }

    /// Number of closed switches in row `i`.
    pub fn row_weight(&self, i: usize) -> usize {
        self.row(i).iter().filter(|&&v| v == 1).count()
    }

    pub fn b_matrix(&self) -> Matrix {
        let rows: Vec<Vec<f64>> = self
            .rows()
            .map(|r| r.iter().map(|&v| f64::from(v)).collect())
            .collect();
        if rows.is_empty() {
            return Matrix::zeros(0, self.n);
        }
        Matrix::from_rows(&rows)
    }

    /// Unweighted Gram matrix `BᵀB` in exact integer arithmetic.
    pub fn gram(&self) -> Vec<Vec<u64>> {
        let mut g = vec![vec![0u64; self.n]; self.n];
        let mut ones = Vec::with_capacity(self.n);
        for r in self.rows() {
            ones.clear();
            ones.extend(r.iter().enumerate().filter(|(_, &v)| v == 1).map(|(j, _)| j));
            for &a in &ones {
                for &b in &ones {
                    g[a][b] += 1;
                }
            }
        }
        g
    }

    /// `B·x` without weights, `x` of length `N`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows()
            .map(|r| r.iter().zip(x).filter(|(&b, _)| b == 1).map(|(_, v)| v).sum())
            .collect()
    }

    /// `Bᵀ·y`, `y` of length `M`.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (r, &yi) in self.rows().zip(y) {
            for (o, &b) in out.iter_mut().zip(r) {
                if b == 1 {
                    *o += yi;
                }
            }
        }
        out
    }

    /// Fails with [`Error::InvalidDesign`] unless every invariant holds.
    pub fn ensure_valid(&self) -> Result<()> {
        let violations = self.violations();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidDesign(violations))
        }
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.m == 0 {
            out.push("design has no rows".to_string());
            return out;
        }
        let zero_rows: Vec<usize> = (0..self.m).filter(|&i| self.row_weight(i) == 0).collect();
        if !zero_rows.is_empty() {
            out.push(format!("all-zeros row at {zero_rows:?}"));
        }
        let mut seen = HashSet::with_capacity(self.m);
        let mut dups = 0usize;
        for r in self.rows() {
            if !seen.insert(r) {
                dups += 1;
            }
        }
        if dups > 0 {
            out.push(format!("duplicate switch configuration ({dups} repeated rows)"));
        }
        let bad_times: Vec<usize> = self
            .times
            .iter()
            .enumerate()
            .filter(|(_, t)| !(t.is_finite() && **t > 0.0))
            .map(|(i, _)| i)
            .collect();
        if !bad_times.is_empty() {
            out.push(format!("non-positive time at rows {bad_times:?}"));
        }
        let total = compensated_sum(self.times.iter().copied());
        let n = self.n as f64;
        if !((total - n).abs() <= TIME_BUDGET_RTOL * n) {
            out.push(format!("time budget: times sum to {total}, expected {n}"));
        }
        out
    }
}

/// Fisher information `C = BᵀTB` with an optional `(a, b)` tag when
/// `C = (a - b)I + bJ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FisherInfo {
    matrix: Matrix,
    structure: Option<(f64, f64)>,
}

impl FisherInfo {
    /// Wraps a symmetric PSD matrix, detecting `aI + bJ` structure.
    pub fn from_matrix(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(invalid_arg("information matrix must be square and non-empty"));
        }
        let scale = matrix.max_abs().max(1.0);
        if matrix.asymmetry() > 1e-12 * scale {
            return Err(invalid_arg("information matrix is not symmetric"));
        }
        let structure = detect_structure(&matrix);
        Ok(Self { matrix, structure })
    }

    /// `(a - b)I + bJ` of order `n`, tagged.
    pub fn structured(a: f64, b: f64, n: usize) -> Self {
        Self {
            matrix: Matrix::ai_bj(a, b, n),
            structure: Some((a, b)),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn structure(&self) -> Option<(f64, f64)> {
        self.structure
    }

    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues from the dense Jacobi solver, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        symmetric_eigenvalues(&self.matrix)
    }
}

fn detect_structure(c: &Matrix) -> Option<(f64, f64)> {
    let n = c.nrows();
    let a = c[(0, 0)];
    let b = if n > 1 { c[(0, 1)] } else { 0.0 };
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { a } else { b };
            if (c[(i, j)] - want).abs() > STRUCTURE_ATOL {
                return None;
            }
        }
    }
    Some((a, b))
}

/// Eigenvalue multiset as `(value, multiplicity)` pairs sorted ascending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    entries: Vec<(f64, usize)>,
}

impl Spectrum {
    /// Sorts and merges exactly equal eigenvalues; zero multiplicities are dropped.
    pub fn new(entries: impl IntoIterator<Item = (f64, usize)>) -> Self {
        let mut v: Vec<(f64, usize)> = entries.into_iter().filter(|e| e.1 > 0).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, usize)> = Vec::with_capacity(v.len());
        for (val, mult) in v {
            match merged.last_mut() {
                Some(last) if last.0 == val => last.1 += mult,
                _ => merged.push((val, mult)),
            }
        }
        Self { entries: merged }
    }

    /// Groups eigenvalues that agree within `rtol` of the largest magnitude.
    pub fn from_eigenvalues(values: &[f64], rtol: f64) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let scale = v.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut groups: Vec<(f64, usize)> = Vec::new();
        let mut group_sum = 0.0;
        for x in v {
            match groups.last_mut() {
                Some(last) if (x - last.0).abs() <= rtol * scale => {
                    group_sum += x;
                    last.1 += 1;
                    last.0 = group_sum / last.1 as f64;
                }
                _ => {
                    group_sum = x;
                    groups.push((x, 1));
                }
            }
        }
        Self { entries: groups }
    }

    pub fn entries(&self) -> &[(f64, usize)] {
        &self.entries
    }

    pub fn dimension(&self) -> usize {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Every eigenvalue repeated by multiplicity, ascending.
    pub fn values(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|&(v, m)| std::iter::repeat_n(v, m))
            .collect()
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|&(v, m)| v * m as f64).sum()
    }

    pub fn max(&self) -> f64 {
        self.entries.last().map_or(f64::NAN, |e| e.0)
    }

    /// `Σ m/λ`; infinite when any eigenvalue is non-positive.
    pub fn trace_inverse(&self) -> f64 {
        if self.entries.iter().any(|e| e.0 <= 0.0) {
            return f64::INFINITY;
        }
        self.entries.iter().map(|&(v, m)| m as f64 / v).sum()
    }
}

/// Observation vector `X₁ … X_M`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub values: Vec<f64>,
}

impl Observation {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Noise-free observation `T·B·μ`.
    pub fn noiseless(design: &Design, mu: &[f64]) -> Self {
        let bmu = design.apply(mu);
        Self {
            values: bmu.iter().zip(design.times()).map(|(v, t)| v * t).collect(),
        }
    }
}

/// `C = BᵀTB`. Rows sharing a time are accumulated as an integer Gram
/// block first, so uniform-time designs are assembled without round-off.
pub fn fisher_information(design: &Design) -> Result<FisherInfo> {
    design.ensure_valid()?;
    let n = design.n_params();
    let mut blocks: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let mut ones = Vec::with_capacity(n);
    for (r, &t) in design.rows().zip(design.times()) {
        let g = blocks.entry(t.to_bits()).or_insert_with(|| vec![0; n * n]);
        ones.clear();
        ones.extend(r.iter().enumerate().filter(|(_, &v)| v == 1).map(|(j, _)| j));
        for &a in &ones {
            for &b in &ones {
                g[a * n + b] += 1;
            }
        }
    }
    let mut c = Matrix::zeros(n, n);
    for (bits, g) in &blocks {
        let t = f64::from_bits(*bits);
        for i in 0..n {
            for j in 0..n {
                c[(i, j)] += t * g[i * n + j] as f64;
            }
        }
    }
    FisherInfo::from_matrix(c)
}

/// Cholesky factor of `BᵀTB`, shared by the estimator and the simulator.
pub(crate) fn factor(design: &Design) -> Result<Cholesky> {
    let c = fisher_information(design)?;
    Cholesky::new(c.matrix())
}

fn structured_trace_inverse(a: f64, b: f64, n: usize) -> Result<f64> {
    let small = a - b;
    let large = a + (n as f64 - 1.0) * b;
    let threshold = crate::linalg::SINGULAR_PIVOT_RATIO * a.abs();
    if n > 1 && !(small > threshold) {
        return Err(Error::Singular {
            column: 1,
            pivot: small,
            threshold,
        });
    }
    if !(large > threshold) {
        return Err(Error::Singular {
            column: 0,
            pivot: large,
            threshold,
        });
    }
    Ok((n as f64 - 1.0) / small + 1.0 / large)
}

/// `Tr C⁻¹`. Uses the `aI + bJ` closed form when tagged, otherwise a
/// Cholesky factorization with one triangular solve per column.
pub fn trace_inverse(c: &FisherInfo) -> Result<f64> {
    match c.structure() {
        Some((a, b)) => {
            let closed = structured_trace_inverse(a, b, c.order())?;
            #[cfg(debug_assertions)]
            {
                let dense = Cholesky::new(c.matrix())?.trace_inverse();
                debug_assert!(
                    (dense - closed).abs() <= 1e-8 * closed.abs().max(1.0),
                    "closed form {closed} disagrees with factorization {dense}"
                );
            }
            Ok(closed)
        }
        None => Ok(Cholesky::new(c.matrix())?.trace_inverse()),
    }
}

/// `Tr C⁻¹` through the factorization only, ignoring any structure tag.
pub fn trace_inverse_dense(c: &FisherInfo) -> Result<f64> {
    Ok(Cholesky::new(c.matrix())?.trace_inverse())
}

/// Convenience: `Tr (BᵀTB)⁻¹` for a design.
pub fn design_mse(design: &Design) -> Result<f64> {
    trace_inverse(&fisher_information(design)?)
}

/// ML estimate `(BᵀTB)⁻¹Bᵀx`.
pub fn ml_estimate(design: &Design, x: &Observation) -> Result<Vec<f64>> {
    if x.values.len() != design.n_rows() {
        return Err(invalid_arg(format!(
            "observation has {} values, design has {} rows",
            x.values.len(),
            design.n_rows()
        )));
    }
    let ch = factor(design)?;
    Ok(ch.solve(&design.apply_transpose(&x.values)))
}

/// Estimator covariance `C⁻¹` (unit noise variance).
pub fn estimator_covariance(design: &Design) -> Result<Matrix> {
    Ok(factor(design)?.inverse())
}

/// Spectrum of `(a - b)I + bJ` of order `n`.
pub fn spectrum_ai_bj(a: f64, b: f64, n: usize) -> Spectrum {
    Spectrum::new([(a - b, n.saturating_sub(1)), (a + (n as f64 - 1.0) * b, 1)])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub rank: usize,
    pub identifiable: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Reports every violated design invariant plus the rank of `B`.
pub fn validate_design(design: &Design) -> ValidationReport {
    let violations = design.violations();
    let rank = rank_of(design);
    ValidationReport {
        violations,
        rank,
        identifiable: rank == design.n_params(),
    }
}

/// `rank B = rank BᵀB`, counted from the eigenvalues of the integer Gram.
fn rank_of(design: &Design) -> usize {
    let g = design.gram();
    let rows: Vec<Vec<f64>> = g
        .iter()
        .map(|r| r.iter().map(|&v| v as f64).collect())
        .collect();
    let eig = symmetric_eigenvalues(&Matrix::from_rows(&rows));
    let top = eig.last().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return 0;
    }
    eig.iter().filter(|&&v| v > 1e-10 * top).count()
}

#[derive(Serialize, Deserialize)]
struct DesignFile {
    n: usize,
    rows: Vec<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    times: Option<Vec<f64>>,
}

impl Design {
    /// Parses the JSON design format `{"n": N, "rows": [[0,1,..],..], "times": [..]}`.
    /// Missing times default to `N/M` per row.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: DesignFile = serde_json::from_str(text)?;
        match file.times {
            Some(times) => Design::new(file.n, file.rows, times),
            None => Design::with_uniform_times(file.n, file.rows),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let file = DesignFile {
            n: self.n,
            rows: self.rows().map(<[u8]>::to_vec).collect(),
            times: Some(self.times.clone()),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}
