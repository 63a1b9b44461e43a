//! Hadamard matrices and the square designs derived from them.
//!
//! A normalized Hadamard matrix of order `N + 1` with its first row and
//! column removed, and its `-1` entries mapped to closed switches, gives an
//! `N × N` schedule whose Gram matrix is `((N+1)/4)(I + J)`. With unit
//! times that is exactly the information matrix of the best single-k
//! design at `k = (N+1)/2`, using `N` rows instead of `C(N, (N+1)/2)`.
//!
//! Orders are reached by Sylvester doubling, the two Paley
//! quadratic-residue constructions over GF(q) and Kronecker products of
//! those. Orders that need Williamson-type constructions (92, 116, ...)
//! are reported as unsupported.

mod field;

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

pub use field::{prime_power, FiniteField};

use crate::error::{invalid_arg, Error, Result};
use crate::model::Design;

/// How an order is reached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Construction {
    Unit,
    Sylvester { doublings: u32 },
    PaleyI { q: usize },
    PaleyII { q: usize },
    Kronecker(Box<Construction>, Box<Construction>),
}

impl Construction {
    pub fn order(&self) -> usize {
        match self {
            Construction::Unit => 1,
            Construction::Sylvester { doublings } => 1 << doublings,
            Construction::PaleyI { q } => q + 1,
            Construction::PaleyII { q } => 2 * (q + 1),
            Construction::Kronecker(a, b) => a.order() * b.order(),
        }
    }
}

impl std::fmt::Display for Construction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Construction::Unit => write!(f, "unit"),
            Construction::Sylvester { doublings } => write!(f, "sylvester(2^{doublings})"),
            Construction::PaleyI { q } => write!(f, "paley-i(q={q})"),
            Construction::PaleyII { q } => write!(f, "paley-ii(q={q})"),
            Construction::Kronecker(a, b) => write!(f, "{a} x {b}"),
        }
    }
}

/// Picks a construction route for `order`, or `None` if none is known.
pub fn plan(order: usize) -> Option<Construction> {
    let mut memo = HashMap::new();
    plan_memo(order, &mut memo)
}

fn plan_memo(order: usize, memo: &mut HashMap<usize, Option<Construction>>) -> Option<Construction> {
    if let Some(hit) = memo.get(&order) {
        return hit.clone();
    }
    let route = match order {
        0 => None,
        1 => Some(Construction::Unit),
        n if n.is_power_of_two() => Some(Construction::Sylvester {
            doublings: n.trailing_zeros(),
        }),
        n if n % 4 != 0 => None,
        n => paley_i(n)
            .or_else(|| paley_ii(n))
            .or_else(|| {
                (2..=n / 2).filter(|a| n % a == 0).find_map(|a| {
                    let left = plan_memo(a, memo)?;
                    let right = plan_memo(n / a, memo)?;
                    Some(Construction::Kronecker(Box::new(left), Box::new(right)))
                })
            }),
    };
    memo.insert(order, route.clone());
    route
}

fn paley_i(order: usize) -> Option<Construction> {
    let q = order - 1;
    (q % 4 == 3 && prime_power(q).is_some()).then_some(Construction::PaleyI { q })
}

fn paley_ii(order: usize) -> Option<Construction> {
    if !order.is_multiple_of(2) || order < 6 {
        return None;
    }
    let q = order / 2 - 1;
    (q % 4 == 1 && prime_power(q).is_some()).then_some(Construction::PaleyII { q })
}

/// Smallest multiple of four with no known route.
pub fn smallest_unsupported_order() -> usize {
    (1..).map(|i| 4 * i).find(|&n| plan(n).is_none()).unwrap()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HadamardMatrix {
    order: usize,
    entries: Vec<i8>,
}

impl HadamardMatrix {
    /// Wraps explicit rows, rejecting anything that is not Hadamard.
    pub fn from_rows(rows: Vec<Vec<i8>>) -> Result<Self> {
        if !is_hadamard(&rows) {
            return Err(invalid_arg("rows do not form a Hadamard matrix"));
        }
        let order = rows.len();
        Ok(Self {
            order,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    fn from_flat_unchecked(order: usize, entries: Vec<i8>) -> Self {
        debug_assert_eq!(entries.len(), order * order);
        Self { order, entries }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.order + j]
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.entries[i * self.order..(i + 1) * self.order]
    }

    pub fn to_rows(&self) -> Vec<Vec<i8>> {
        self.entries.chunks_exact(self.order).map(<[i8]>::to_vec).collect()
    }

    pub fn is_normalized(&self) -> bool {
        (0..self.order).all(|i| self.get(0, i) == 1 && self.get(i, 0) == 1)
    }

    /// Multiplies row `i` by -1.
    pub fn negate_row(&mut self, i: usize) {
        let n = self.order;
        self.entries[i * n..(i + 1) * n].iter_mut().for_each(|v| *v = -*v);
    }

    /// Multiplies column `j` by -1.
    pub fn negate_column(&mut self, j: usize) {
        let n = self.order;
        for i in 0..n {
            self.entries[i * n + j] = -self.entries[i * n + j];
        }
    }

    pub fn kronecker(&self, other: &HadamardMatrix) -> HadamardMatrix {
        let (a, b) = (self.order, other.order);
        let n = a * b;
        let mut entries = vec![0i8; n * n];
        for i in 0..a {
            for j in 0..a {
                let s = self.get(i, j);
                for k in 0..b {
                    for l in 0..b {
                        entries[(i * b + k) * n + j * b + l] = s * other.get(k, l);
                    }
                }
            }
        }
        HadamardMatrix::from_flat_unchecked(n, entries)
    }
}

/// `HᵀH = nI` in exact integer arithmetic, entries all ±1.
pub fn is_hadamard(rows: &[Vec<i8>]) -> bool {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n || r.iter().any(|&v| v != 1 && v != -1)) {
        return false;
    }
    for i in 0..n {
        for j in i..n {
            let dot: i64 = (0..n).map(|k| i64::from(rows[k][i]) * i64::from(rows[k][j])).sum();
            let want = if i == j { n as i64 } else { 0 };
            if dot != want {
                return false;
            }
        }
    }
    true
}

fn unsupported(order: usize) -> Error {
    let reason = if order == 0 {
        "order must be positive".to_string()
    } else if order > 2 && !order.is_multiple_of(4) {
        "Hadamard orders are 1, 2 or multiples of 4".to_string()
    } else {
        format!(
            "no Sylvester, Paley I/II or Kronecker route reaches it (the smallest such order is {})",
            smallest_unsupported_order()
        )
    };
    Error::UnsupportedOrder { order, reason }
}

fn memo() -> &'static Mutex<HashMap<usize, HadamardMatrix>> {
    static MEMO: OnceLock<Mutex<HashMap<usize, HadamardMatrix>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// A verified Hadamard matrix of the requested order.
pub fn hadamard(order: usize) -> Result<HadamardMatrix> {
    if let Some(h) = memo().lock().unwrap().get(&order) {
        return Ok(h.clone());
    }
    let route = plan(order).ok_or_else(|| unsupported(order))?;
    let h = build(&route);
    assert!(is_hadamard(&h.to_rows()), "construction {route} failed verification");
    // concurrent builders produce identical matrices, so last writer wins harmlessly
    memo().lock().unwrap().insert(order, h.clone());
    Ok(h)
}

/// The construction route `hadamard(order)` uses.
pub fn construction_for(order: usize) -> Result<Construction> {
    plan(order).ok_or_else(|| unsupported(order))
}

fn build(route: &Construction) -> HadamardMatrix {
    match route {
        Construction::Unit => HadamardMatrix::from_flat_unchecked(1, vec![1]),
        Construction::Sylvester { doublings } => {
            let base = HadamardMatrix::from_flat_unchecked(2, vec![1, 1, 1, -1]);
            let mut h = HadamardMatrix::from_flat_unchecked(1, vec![1]);
            for _ in 0..*doublings {
                h = h.kronecker(&base);
            }
            h
        }
        Construction::PaleyI { q } => paley_i_matrix(*q),
        Construction::PaleyII { q } => paley_ii_matrix(*q),
        Construction::Kronecker(a, b) => build(a).kronecker(&build(b)),
    }
}

/// Jacobsthal matrix `Q[a][b] = χ(a - b)` over GF(q).
fn jacobsthal(q: usize) -> Vec<Vec<i8>> {
    let field = FiniteField::new(q).expect("paley route needs a prime power");
    let chi = field.quadratic_character();
    (0..q)
        .map(|a| (0..q).map(|b| chi[field.sub(a, b)]).collect())
        .collect()
}

/// `[[0, 1ᵀ], [±1, Q]]`, the bordered Jacobsthal matrix.
fn bordered_jacobsthal(q: usize, column_sign: i8) -> Vec<Vec<i8>> {
    let jac = jacobsthal(q);
    let mut s = vec![vec![0i8; q + 1]; q + 1];
    for j in 1..=q {
        s[0][j] = 1;
        s[j][0] = column_sign;
    }
    for (a, row) in jac.iter().enumerate() {
        s[a + 1][1..].copy_from_slice(row);
    }
    s
}

/// Paley I, `q ≡ 3 (mod 4)`: `H = I + S` of order `q + 1`.
fn paley_i_matrix(q: usize) -> HadamardMatrix {
    let mut s = bordered_jacobsthal(q, -1);
    for (i, row) in s.iter_mut().enumerate() {
        row[i] += 1;
    }
    HadamardMatrix::from_flat_unchecked(q + 1, s.into_iter().flatten().collect())
}

/// Paley II, `q ≡ 1 (mod 4)`: each entry of the symmetric bordered
/// Jacobsthal matrix becomes a 2×2 block, order `2(q + 1)`.
fn paley_ii_matrix(q: usize) -> HadamardMatrix {
    let s = bordered_jacobsthal(q, 1);
    let m = q + 1;
    let n = 2 * m;
    let mut entries = vec![0i8; n * n];
    for i in 0..m {
        for j in 0..m {
            let block: [[i8; 2]; 2] = match s[i][j] {
                0 => [[1, -1], [-1, -1]],
                v => [[v, v], [v, -v]],
            };
            for (di, brow) in block.iter().enumerate() {
                for (dj, &val) in brow.iter().enumerate() {
                    entries[(2 * i + di) * n + 2 * j + dj] = val;
                }
            }
        }
    }
    HadamardMatrix::from_flat_unchecked(n, entries)
}

/// `D₁ H D₂` with first row and column all `+1`.
pub fn normalize(h: &HadamardMatrix) -> HadamardMatrix {
    let mut out = h.clone();
    for i in 0..out.order {
        if out.get(i, 0) < 0 {
            out.negate_row(i);
        }
    }
    for j in 0..out.order {
        if out.get(0, j) < 0 {
            out.negate_column(j);
        }
    }
    out
}

/// Square (or truncated) 0/1 design built from a Hadamard matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CoreDesign {
    pub design: Design,
    pub source_order: usize,
}

/// Core `B = ½(J - H̃)` of the normalized Hadamard matrix of order `n + 1`,
/// unit times.
pub fn core_design(n: usize) -> Result<CoreDesign> {
    if n == 0 {
        return Err(invalid_arg("core design needs n >= 1"));
    }
    let order = n + 1;
    let h = normalize(&hadamard(order)?);
    let mut entries = Vec::with_capacity(n * n);
    for i in 1..order {
        entries.extend(h.row(i)[1..].iter().map(|&v| u8::from(v < 0)));
    }
    Ok(CoreDesign {
        design: Design::from_flat(n, entries, vec![1.0; n]),
        source_order: order,
    })
}

/// Core design of size `n' = 4⌈(n+1)/4⌉ - 1` with its rightmost `n' - n`
/// columns removed and times `n / n'` per row.
pub fn truncated_core_design(n: usize) -> Result<CoreDesign> {
    if n < 2 {
        return Err(invalid_arg("truncated core design needs n >= 2"));
    }
    let full = (n + 1).div_ceil(4) * 4 - 1;
    let core = core_design(full)?;
    if full == n {
        return Ok(core);
    }
    let mut entries = Vec::with_capacity(full * n);
    for r in core.design.rows() {
        entries.extend_from_slice(&r[..n]);
    }
    let t = n as f64 / full as f64;
    Ok(CoreDesign {
        design: Design::from_flat(n, entries, vec![t; full]),
        source_order: core.source_order,
    })
}
