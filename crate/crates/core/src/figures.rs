//! Tabular data behind the four standard plots, written as CSV.

use std::fmt::Write as _;

use crate::analysis::{beta_sweep, convex_combination_sweep, mse_vs_k_curve, optimal_k, DEFAULT_BETA_GRID};
use crate::designs::single_k_mse;
use crate::error::{invalid_arg, Error, Result};
use crate::hadamard::truncated_core_design;
use crate::model::design_mse;

pub const DEFAULT_FIGURE_N: usize = 20;
pub const DEFAULT_FIG3_GRID: usize = 101;
pub const DEFAULT_FIG4_CAP: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Empty,
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            // `Display` for f64 is the shortest string that round-trips
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Empty => Ok(()),
        }
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(v) => Some(v as f64),
            Cell::Float(v) => Some(v),
            Cell::Empty => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Non-fatal issues, e.g. unsupported Hadamard orders in figure 4.
    pub warnings: Vec<String>,
}

impl Table {
    fn new(headers: Vec<&'static str>) -> Self {
        Self {
            headers,
            rows: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_string).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let idx = self.headers.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Figure 1: individual+joint cost vs β for `n = 2 … 20`.
pub fn figure1() -> Result<Table> {
    let mut t = Table::new(vec!["n", "beta", "mse"]);
    for n in 2..=20 {
        for (beta, mse) in beta_sweep(n, DEFAULT_BETA_GRID)?.points {
            t.rows.push(vec![Cell::Int(n as i64), Cell::Float(beta), Cell::Float(mse)]);
        }
    }
    Ok(t)
}

/// Figure 2: single-k cost vs `k`.
pub fn figure2(n: usize) -> Result<Table> {
    let mut t = Table::new(vec!["k", "mse"]);
    for p in mse_vs_k_curve(n)? {
        t.rows.push(vec![Cell::Int(p.k as i64), Cell::Float(p.mse)]);
    }
    Ok(t)
}

/// Figure 3: two-k mixtures of the optimal `k` with every other `k2`.
pub fn figure3(n: usize) -> Result<Table> {
    if n < 2 {
        return Err(invalid_arg("figure 3 needs n >= 2"));
    }
    let k_star = optimal_k(n);
    let mut t = Table::new(vec!["k2", "beta", "mse"]);
    for k2 in (1..n).filter(|&k| k != k_star) {
        for (beta, mse) in convex_combination_sweep(n, k_star, k2, DEFAULT_FIG3_GRID)? {
            t.rows.push(vec![Cell::Int(k2 as i64), Cell::Float(beta), Cell::Float(mse)]);
        }
    }
    Ok(t)
}

/// Figure 4: optimal single-k cost vs the truncated Hadamard design, even
/// `n` up to `cap`. Unsupported Hadamard orders leave the last cell empty.
pub fn figure4(cap: usize) -> Result<Table> {
    let mut t = Table::new(vec!["n", "mse_optimal", "mse_hadamard"]);
    for n in (2..=cap).step_by(2) {
        let optimal = single_k_mse(n, optimal_k(n));
        let hadamard = match truncated_core_design(n) {
            Ok(core) => Cell::Float(design_mse(&core.design)?),
            Err(e @ Error::UnsupportedOrder { .. }) => {
                t.warnings.push(format!("n={n}: {e}"));
                Cell::Empty
            }
            Err(e) => return Err(e),
        };
        t.rows.push(vec![Cell::Int(n as i64), Cell::Float(optimal), hadamard]);
    }
    Ok(t)
}

/// Dispatches on the figure number; `n` is the problem size for figures 2
/// and 3 and the largest `n` for figure 4. Figure 1 ignores it.
pub fn emit_figure_data(which: u8, n: Option<usize>) -> Result<Table> {
    match which {
        1 => figure1(),
        2 => figure2(n.unwrap_or(DEFAULT_FIGURE_N)),
        3 => figure3(n.unwrap_or(DEFAULT_FIGURE_N)),
        4 => figure4(n.unwrap_or(DEFAULT_FIG4_CAP)),
        other => Err(invalid_arg(format!("figure must be 1..=4, got {other}"))),
    }
}
