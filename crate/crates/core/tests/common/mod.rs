//! Oracles that share no code with the library's numerics.

#![allow(dead_code, clippy::needless_range_loop)]

use gmux::sim::Rng;
use gmux::Design;

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, piv);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// `Σ tᵢ bᵢ bᵢᵀ` straight from the rows.
pub fn fisher_oracle(d: &Design) -> Vec<Vec<f64>> {
    let n = d.n_params();
    let mut c = vec![vec![0.0; n]; n];
    for (row, &t) in d.rows().zip(d.times()) {
        for i in 0..n {
            for j in 0..n {
                c[i][j] += t * f64::from(row[i] * row[j]);
            }
        }
    }
    c
}

pub fn trace_inverse_oracle(d: &Design) -> Option<f64> {
    let inv = gauss_jordan_inverse(&fisher_oracle(d))?;
    Some((0..inv.len()).map(|i| inv[i][i]).sum())
}

/// Exact integer `BᵀB`.
pub fn integer_gram(d: &Design) -> Vec<Vec<i64>> {
    let n = d.n_params();
    let mut g = vec![vec![0i64; n]; n];
    for row in d.rows() {
        for i in 0..n {
            for j in 0..n {
                g[i][j] += i64::from(row[i]) * i64::from(row[j]);
            }
        }
    }
    g
}

/// Exhaustive search over every N=2 design: rows drawn from {10, 01, 11}
/// with times `(t₁, t₂, t₃)` on a simplex grid of the given resolution.
/// Returns the best times and the matching `Tr C⁻¹`.
pub fn n2_brute_force(steps: usize) -> ([f64; 3], f64) {
    let mut best = ([0.0; 3], f64::INFINITY);
    let h = 2.0 / steps as f64;
    for i in 0..=steps {
        for j in 0..=steps - i {
            let (t1, t2) = (i as f64 * h, j as f64 * h);
            let t3 = 2.0 - t1 - t2;
            let c = [[t1 + t3, t3], [t3, t2 + t3]];
            let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
            if det <= 1e-12 {
                continue;
            }
            let tr = (c[0][0] + c[1][1]) / det;
            if tr < best.1 {
                best = ([t1, t2, t3], tr);
            }
        }
    }
    best
}

/// Positive times summing to `n`, each at least `floor` before normalization.
pub fn random_times(rng: &mut Rng, m: usize, n: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| floor + rng.uniform()).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v * n as f64 / s).collect()
}

/// All `k`-subsets of `n` columns as 0/1 rows, built by bit counting.
pub fn k_subset_rows(n: usize, k: usize) -> Vec<Vec<u8>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).map(|j| ((m >> j) & 1) as u8).collect())
        .collect()
}
