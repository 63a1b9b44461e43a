//! Design families: explicit switch schedules and their closed-form costs.
//!
//! The single-k family observes every `k`-subset of sensors for an equal
//! time `N / C(N, k)`. Its information matrix is `kI`-plus-constant with
//! `a = k`, `b = k(k-1)/(N-1)`, which gives
//! `Tr C⁻¹ = (N-1)²/(k(N-k)) + 1/k²`. Mixing several `k` blocks with
//! weights `αₖ` keeps the `aI + bJ` shape, so the mixed cost only needs the
//! two weighted eigenvalue sums.

use crate::error::{invalid_arg, Error, Result};
use crate::model::{Design, Spectrum};

/// Largest number of rows any enumerating generator will materialize.
pub const DEFAULT_ENUMERATION_CAP: usize = 2_000_000;

/// Binomial coefficient, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// `(n, k)` for the single-k family, `1 ≤ k ≤ n - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SingleKParams {
    n: usize,
    k: usize,
}

impl SingleKParams {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n < 2 || k == 0 || k >= n {
            return Err(invalid_arg(format!("single-k needs 1 <= k <= n-1, got n={n}, k={k}")));
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `C(n, k)`, the number of rows.
    pub fn m0(&self) -> Option<u128> {
        binomial(self.n as u64, self.k as u64)
    }

    /// `C(n-1, k-1)`, each diagonal entry of `BᵀB`.
    pub fn m1(&self) -> Option<u128> {
        binomial(self.n as u64 - 1, self.k as u64 - 1)
    }

    /// `C(n-2, k-2)`, each off-diagonal entry of `BᵀB`.
    pub fn m2(&self) -> Option<u128> {
        if self.k < 2 {
            Some(0)
        } else {
            binomial(self.n as u64 - 2, self.k as u64 - 2)
        }
    }

    /// `(a, b)` of the equal-time information matrix.
    pub fn structure(&self) -> (f64, f64) {
        let (n, k) = (self.n as f64, self.k as f64);
        (k, k * (k - 1.0) / (n - 1.0))
    }
}

/// Dense mixing weights `α₁ … α_N` over the single-k blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiKWeights {
    alphas: Vec<f64>,
}

impl MultiKWeights {
    /// `alphas[k - 1]` is the weight on `k` switches closed.
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(invalid_arg("weights must be non-empty"));
        }
        if alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(invalid_arg("weights must be finite and non-negative"));
        }
        let total: f64 = alphas.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid_arg(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { alphas })
    }

    /// Sparse constructor from `(k, αₖ)` pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, f64)]) -> Result<Self> {
        let mut alphas = vec![0.0; n];
        for &(k, a) in pairs {
            if k == 0 || k > n {
                return Err(invalid_arg(format!("k={k} outside 1..={n}")));
            }
            alphas[k - 1] += a;
        }
        Self::new(alphas)
    }

    /// All weight on one `k`.
    pub fn single(n: usize, k: usize) -> Result<Self> {
        Self::from_pairs(n, &[(k, 1.0)])
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    pub fn alpha(&self, k: usize) -> f64 {
        self.alphas.get(k.wrapping_sub(1)).copied().unwrap_or(0.0)
    }

    /// `(k, αₖ)` for every positive weight.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.alphas
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0.0)
            .map(|(i, &a)| (i + 1, a))
    }
}

/// Lexicographic `k`-subsets of `0..n`, one index vector at a time.
struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }

    fn advance(&mut self) {
        let k = self.idx.len();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        if self.idx.is_empty() {
            self.done = true;
        } else {
            self.advance();
        }
        Some(out)
    }
}

fn push_subset_rows(entries: &mut Vec<u8>, n: usize, k: usize) -> usize {
    let mut count = 0;
    for subset in Combinations::new(n, k) {
        let start = entries.len();
        entries.resize(start + n, 0);
        for j in subset {
            entries[start + j] = 1;
        }
        count += 1;
    }
    count
}

/// Every target alone for one second: `B = I`, `T = I`.
pub fn identity_design(n: usize) -> Result<Design> {
    if n == 0 {
        return Err(invalid_arg("identity design needs n >= 1"));
    }
    let mut entries = vec![0u8; n * n];
    for i in 0..n {
        entries[i * n + i] = 1;
    }
    Ok(Design::from_flat(n, entries, vec![1.0; n]))
}

/// `N - 1` switches closed per row: row `i` is all ones except position `i`.
pub fn complement_design(n: usize) -> Result<Design> {
    if n < 2 {
        return Err(invalid_arg("complement design needs n >= 2"));
    }
    let mut entries = vec![1u8; n * n];
    for i in 0..n {
        entries[i * n + i] = 0;
    }
    Ok(Design::from_flat(n, entries, vec![1.0; n]))
}

/// Identity rows for `1 - β` seconds each, then the all-ones row for `Nβ`
/// seconds. The joint row is omitted at `β = 0`.
pub fn individual_plus_joint(n: usize, beta: f64) -> Result<Design> {
    if n == 0 {
        return Err(invalid_arg("individual+joint design needs n >= 1"));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(invalid_arg(format!("beta must lie in [0, 1), got {beta}")));
    }
    if n == 1 && beta > 0.0 {
        return Err(invalid_arg("n = 1 has no joint row distinct from the identity row"));
    }
    let mut entries = vec![0u8; n * n];
    for i in 0..n {
        entries[i * n + i] = 1;
    }
    let mut times = vec![1.0 - beta; n];
    if beta > 0.0 {
        entries.extend(std::iter::repeat_n(1u8, n));
        times.push(n as f64 * beta);
    }
    Ok(Design::from_flat(n, entries, times))
}

/// `Tr C⁻¹` of [`individual_plus_joint`]: `C = (1-β)I + NβJ`, whose
/// eigenvalues are `1-β` (×`N-1`) and `1 + (N²-1)β`.
pub fn individual_plus_joint_mse(n: usize, beta: f64) -> f64 {
    let nf = n as f64;
    (nf - 1.0) / (1.0 - beta) + 1.0 / (1.0 + (nf * nf - 1.0) * beta)
}

/// All `C(n, k)` rows with `k` ones, lexicographic, equal times `n / C(n, k)`.
pub fn single_k_design(n: usize, k: usize) -> Result<Design> {
    single_k_design_with_cap(n, k, DEFAULT_ENUMERATION_CAP)
}

pub fn single_k_design_with_cap(n: usize, k: usize, cap: usize) -> Result<Design> {
    let p = SingleKParams::new(n, k)?;
    let rows = p.m0().unwrap_or(u128::MAX);
    if rows > cap as u128 {
        return Err(Error::CapExceeded { rows, cap });
    }
    let mut entries = Vec::with_capacity(rows as usize * n);
    let m = push_subset_rows(&mut entries, n, k);
    let t = n as f64 / m as f64;
    Ok(Design::from_flat(n, entries, vec![t; m]))
}

/// `(N-1)²/(k(N-k)) + 1/k²`, evaluated as one exactly rounded quotient
/// while the integer numerator and denominator fit in 53 bits. `k = n`
/// (the single all-ones row) is singular and gives `+∞`.
pub fn single_k_mse(n: usize, k: usize) -> f64 {
    assert!(n >= 2 && k >= 1 && k <= n, "single_k_mse needs 1 <= k <= n");
    if k == n {
        return f64::INFINITY;
    }
    let (nn, kk) = (n as u128, k as u128);
    let num = (nn - 1) * (nn - 1) * kk + (nn - kk);
    let den = kk * kk * (nn - kk);
    const EXACT: u128 = 1 << 53;
    if num < EXACT && den < EXACT {
        num as f64 / den as f64
    } else {
        let (nf, kf) = (n as f64, k as f64);
        (nf - 1.0) * (nf - 1.0) / (kf * (nf - kf)) + 1.0 / (kf * kf)
    }
}

/// `{(Σαₖ k(N-k)/(N-1), ×N-1), (Σαₖ k², ×1)}`.
pub fn multi_k_spectrum(n: usize, weights: &MultiKWeights) -> Result<Spectrum> {
    if weights.n() != n {
        return Err(invalid_arg(format!("{} weights for n={n}", weights.n())));
    }
    if n < 2 {
        return Err(invalid_arg("multi-k needs n >= 2"));
    }
    let nf = n as f64;
    let (mut small, mut large) = (0.0, 0.0);
    for (k, a) in weights.support() {
        let kf = k as f64;
        small += a * kf * (nf - kf) / (nf - 1.0);
        large += a * kf * kf;
    }
    Ok(Spectrum::new([(small, n - 1), (large, 1)]))
}

/// `Tr C⁻¹` for a multi-k mixture; infinite when the mixture is singular.
pub fn multi_k_mse(n: usize, weights: &MultiKWeights) -> Result<f64> {
    Ok(multi_k_spectrum(n, weights)?.trace_inverse())
}

/// Concatenated single-k blocks; rows of block `k` get `αₖ·n / C(n, k)` each.
pub fn multi_k_design(n: usize, weights: &MultiKWeights) -> Result<Design> {
    multi_k_design_with_cap(n, weights, DEFAULT_ENUMERATION_CAP)
}

pub fn multi_k_design_with_cap(n: usize, weights: &MultiKWeights, cap: usize) -> Result<Design> {
    if weights.n() != n {
        return Err(invalid_arg(format!("{} weights for n={n}", weights.n())));
    }
    let mut rows: u128 = 0;
    for (k, _) in weights.support() {
        rows = rows.saturating_add(binomial(n as u64, k as u64).unwrap_or(u128::MAX));
    }
    if rows > cap as u128 {
        return Err(Error::CapExceeded { rows, cap });
    }
    let mut entries = Vec::with_capacity(rows as usize * n);
    let mut times = Vec::with_capacity(rows as usize);
    for (k, a) in weights.support() {
        let m = push_subset_rows(&mut entries, n, k);
        times.extend(std::iter::repeat_n(a * n as f64 / m as f64, m));
    }
    Ok(Design::from_flat(n, entries, times))
}

/// `(a, b)` of `(a-b)I + bJ` for a block mixture, matching [`multi_k_spectrum`].
pub fn multi_k_structure(n: usize, weights: &MultiKWeights) -> (f64, f64) {
    let nf = n as f64;
    weights.support().fold((0.0, 0.0), |(a, b), (k, w)| {
        let kf = k as f64;
        (a + w * kf, b + w * kf * (kf - 1.0) / (nf - 1.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{design_mse, fisher_information, validate_design};

    #[test]
    fn binomials() {
        assert_eq!(binomial(20, 10), Some(184_756));
        assert_eq!(binomial(40, 20), Some(137_846_528_820));
        assert_eq!(binomial(5, 0), Some(1));
        assert_eq!(binomial(3, 4), Some(0));
    }

    #[test]
    fn identity_examples() {
        assert_eq!(design_mse(&identity_design(4).unwrap()).unwrap(), 4.0);
        let d = identity_design(1).unwrap();
        assert_eq!(d.row(0), &[1]);
        assert_eq!(design_mse(&d).unwrap(), 1.0);
        assert_eq!(design_mse(&identity_design(20).unwrap()).unwrap(), 20.0);
    }

    #[test]
    fn complement_examples() {
        let d = complement_design(3).unwrap();
        assert_eq!(d.row(0), &[0, 1, 1]);
        assert!((design_mse(&d).unwrap() - 2.25).abs() < 1e-14);
        assert!((design_mse(&complement_design(4).unwrap()).unwrap() - (3.0 + 1.0 / 9.0)).abs() < 1e-14);
        let mut rows: Vec<Vec<u8>> = complement_design(2).unwrap().rows().map(<[u8]>::to_vec).collect();
        rows.sort();
        assert_eq!(rows, vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(design_mse(&complement_design(2).unwrap()).unwrap(), 2.0);
        assert!(complement_design(1).is_err());
    }

    #[test]
    fn individual_plus_joint_examples() {
        let d = individual_plus_joint(2, 0.0).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(design_mse(&d).unwrap(), 2.0);

        let d = individual_plus_joint(2, 0.0532).unwrap();
        assert_eq!(d.n_rows(), 3);
        let want = 1.0 / (1.0 - 0.0532) + 1.0 / (1.0 + 3.0 * 0.0532);
        assert!((design_mse(&d).unwrap() - want).abs() < 1e-12);
        assert!((individual_plus_joint_mse(2, 0.0532) - 1.918_555_602_335_377).abs() < 1e-12);

        assert!((individual_plus_joint_mse(10, 0.1) - (10.0 + 1.0 / 10.9)).abs() < 1e-12);
        assert!(individual_plus_joint(3, 1.0).is_err());
        assert!(individual_plus_joint(3, -0.1).is_err());
    }

    #[test]
    fn single_k_4_2() {
        let d = single_k_design(4, 2).unwrap();
        assert_eq!(d.n_rows(), 6);
        assert_eq!(d.row(0), &[1, 1, 0, 0]);
        assert_eq!(d.row(5), &[0, 0, 1, 1]);
        assert!(d.times().iter().all(|&t| t == 4.0 / 6.0));
        let c = fisher_information(&d).unwrap();
        let (a, b) = c.structure().expect("structured");
        assert!((a - 2.0).abs() < 1e-12 && (b - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_k_degenerate_cases() {
        let d = single_k_design(3, 1).unwrap();
        assert_eq!(d.rows().collect::<Vec<_>>(), vec![&[1, 0, 0][..], &[0, 1, 0], &[0, 0, 1]]);
        assert!(d.times().iter().all(|&t| t == 1.0));

        let d = single_k_design(5, 4).unwrap();
        assert_eq!(d.n_rows(), 5);
        assert!(d.times().iter().all(|&t| t == 1.0));
        assert!((0..5).all(|i| d.row_weight(i) == 4));
        assert!(validate_design(&d).is_valid());
    }

    #[test]
    fn single_k_rejects_bad_params_and_cap() {
        assert!(single_k_design(4, 0).is_err());
        assert!(single_k_design(4, 4).is_err());
        match single_k_design_with_cap(20, 10, 1000) {
            Err(Error::CapExceeded { rows, cap }) => {
                assert_eq!(rows, 184_756);
                assert_eq!(cap, 1000);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn single_k_mse_examples() {
        assert_eq!(single_k_mse(20, 10), 3.62);
        for n in 2..30 {
            assert_eq!(single_k_mse(n, 1), n as f64);
        }
        assert_eq!(single_k_mse(7, 4), 3.0625);
        assert_eq!(single_k_mse(7, 4), 4.0 * 49.0 / 64.0);
    }

    #[test]
    fn gram_entries_are_binomials() {
        for n in 2..=9usize {
            for k in 1..n {
                let p = SingleKParams::new(n, k).unwrap();
                let g = single_k_design(n, k).unwrap().gram();
                let (m1, m2) = (p.m1().unwrap() as u64, p.m2().unwrap() as u64);
                for i in 0..n {
                    for j in 0..n {
                        assert_eq!(g[i][j], if i == j { m1 } else { m2 }, "n={n} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn multi_k_spectrum_examples() {
        let w = MultiKWeights::single(20, 10).unwrap();
        let s = multi_k_spectrum(20, &w).unwrap();
        assert!((s.entries()[0].0 - 100.0 / 19.0).abs() < 1e-12);
        assert_eq!(s.entries()[0].1, 19);
        assert_eq!(s.entries()[1], (100.0, 1));
        assert!((s.trace_inverse() - 3.62).abs() < 1e-12);

        let w = MultiKWeights::from_pairs(20, &[(1, 0.5), (10, 0.5)]).unwrap();
        let s = multi_k_spectrum(20, &w).unwrap();
        let l1 = 0.5 + 0.5 * 100.0 / 19.0;
        assert!((s.entries()[0].0 - l1).abs() < 1e-12);
        assert!((s.entries()[1].0 - 50.5).abs() < 1e-12);
        let tr = 19.0 / l1 + 1.0 / 50.5;
        assert!((s.trace_inverse() - tr).abs() < 1e-12);
        assert!((tr - 6.087).abs() < 1e-3);

        let w = MultiKWeights::single(4, 2).unwrap();
        assert!((multi_k_mse(4, &w).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn multi_k_design_examples() {
        let w = MultiKWeights::from_pairs(4, &[(1, 0.5), (3, 0.5)]).unwrap();
        let d = multi_k_design(4, &w).unwrap();
        assert_eq!(d.n_rows(), 8);
        let c = fisher_information(&d).unwrap();
        assert!(c.matrix().max_abs_diff(&crate::linalg::Matrix::ai_bj(2.0, 1.0, 4)) < 1e-12);
        assert!((design_mse(&d).unwrap() - 3.2).abs() < 1e-12);
        assert!((multi_k_mse(4, &w).unwrap() - 3.2).abs() < 1e-12);

        let d = multi_k_design(3, &MultiKWeights::single(3, 2).unwrap()).unwrap();
        assert_eq!(d.rows().collect::<Vec<_>>(), vec![&[1, 1, 0][..], &[1, 0, 1], &[0, 1, 1]]);

        let d = multi_k_design(5, &MultiKWeights::single(5, 3).unwrap()).unwrap();
        assert!((design_mse(&d).unwrap() - (16.0 / 6.0 + 1.0 / 9.0)).abs() < 1e-12);
    }

    #[test]
    fn all_ones_weight_is_singular() {
        let w = MultiKWeights::single(4, 4).unwrap();
        assert_eq!(multi_k_mse(4, &w).unwrap(), f64::INFINITY);
        let d = multi_k_design(4, &w).unwrap();
        let report = validate_design(&d);
        assert!(!report.identifiable);
        assert!(design_mse(&d).is_err());
    }

    #[test]
    fn weights_validation() {
        assert!(MultiKWeights::new(vec![0.5, 0.4]).is_err());
        assert!(MultiKWeights::new(vec![1.5, -0.5]).is_err());
        assert!(MultiKWeights::from_pairs(3, &[(4, 1.0)]).is_err());
    }
}
