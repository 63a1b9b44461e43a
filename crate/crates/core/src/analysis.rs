//! Optimization results over the design families.
//!
//! The single-k cost `f(k) = (N-1)²/(k(N-k)) + 1/k²` is convex in `k` and
//! minimized at `N/2` (even `N ≥ 4`) or `(N+1)/2` (odd `N`). Any mixture of
//! single-k blocks, and more generally any time allocation, does no better:
//! the [`MajorizationCertificate`] shows the eigenvalues of an arbitrary
//! `C` majorize those of an equal-time mixture with the same block
//! weights, and mixtures lose to the best single `k`. `N = 2` is the
//! exception: adding time on the all-ones row beats observing each sensor
//! alone.

use serde::Serialize;

use crate::designs::{
    binomial, individual_plus_joint, individual_plus_joint_mse, multi_k_mse, single_k_design,
    single_k_mse, MultiKWeights,
};
use crate::error::{invalid_arg, Result};
use crate::model::{fisher_information, trace_inverse, Design, Spectrum};

/// Default number of points on a β grid over `[0, 1)`.
pub const DEFAULT_BETA_GRID: usize = 1000;
/// Bracket width at which golden-section refinement stops.
pub const GOLDEN_TOLERANCE: f64 = 1e-8;

/// Minimizing `k` of the single-k cost.
pub fn optimal_k(n: usize) -> usize {
    assert!(n >= 2, "optimal_k needs n >= 2");
    match n {
        2 => 1,
        n if n % 2 == 0 => n / 2,
        n => n.div_ceil(2),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KCurvePoint {
    pub k: usize,
    pub mse: f64,
}

/// `(k, single_k_mse(n, k))` for `k = 1 … n-1`.
pub fn mse_vs_k_curve(n: usize) -> Result<Vec<KCurvePoint>> {
    if n < 2 {
        return Err(invalid_arg("k curve needs n >= 2"));
    }
    Ok((1..n)
        .map(|k| KCurvePoint {
            k,
            mse: single_k_mse(n, k),
        })
        .collect())
}

/// `i / (points - 1)` for `i = 0 … points-1`.
fn closed_grid(points: usize) -> impl Iterator<Item = f64> {
    let last = (points - 1) as f64;
    (0..points).map(move |i| i as f64 / last)
}

/// Cost of `(1-β)` weight on `k1` and `β` on `k2`, for `β` on a uniform
/// grid over `[0, 1]`.
pub fn convex_combination_sweep(
    n: usize,
    k1: usize,
    k2: usize,
    grid_size: usize,
) -> Result<Vec<(f64, f64)>> {
    if n < 2 || !(1..=n).contains(&k1) || !(1..=n).contains(&k2) {
        return Err(invalid_arg(format!("sweep needs 1 <= k1, k2 <= n, got n={n}, k1={k1}, k2={k2}")));
    }
    if grid_size < 2 {
        return Err(invalid_arg("grid needs at least two points"));
    }
    closed_grid(grid_size)
        .map(|beta| {
            let w = MultiKWeights::from_pairs(n, &[(k1, 1.0 - beta), (k2, beta)])?;
            Ok((beta, multi_k_mse(n, &w)?))
        })
        .collect()
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    // the bracket ends are candidates too, e.g. a minimum pinned at β = 0
    [(lo, f(lo)), (x1, f1), (x2, f2), (hi, f(hi))]
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

/// Which individual+joint cost curve a β sweep evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaCurve {
    /// `N/(1-β) + 1/(1+(N²-1)β)`, the curve behind figure 1. It overstates
    /// the design's true cost by `1/(1-β)`.
    #[default]
    Plotted,
    /// `(N-1)/(1-β) + 1/(1+(N²-1)β)`, the actual `Tr C⁻¹` of
    /// [`individual_plus_joint`].
    Exact,
}

impl BetaCurve {
    pub fn eval(self, n: usize, beta: f64) -> f64 {
        match self {
            BetaCurve::Plotted => {
                let nf = n as f64;
                nf / (1.0 - beta) + 1.0 / (1.0 + (nf * nf - 1.0) * beta)
            }
            BetaCurve::Exact => individual_plus_joint_mse(n, beta),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BetaSweep {
    pub n: usize,
    pub curve: BetaCurve,
    pub points: Vec<(f64, f64)>,
    pub grid_argmin: (f64, f64),
    pub refined_argmin: (f64, f64),
}

/// Plotted individual+joint curve on `grid_size` points `i / grid_size`.
pub fn beta_sweep(n: usize, grid_size: usize) -> Result<BetaSweep> {
    beta_sweep_with(n, grid_size, BetaCurve::Plotted)
}

pub fn beta_sweep_with(n: usize, grid_size: usize, curve: BetaCurve) -> Result<BetaSweep> {
    if n < 2 {
        return Err(invalid_arg("beta sweep needs n >= 2"));
    }
    if grid_size < 2 {
        return Err(invalid_arg("grid needs at least two points"));
    }
    let step = 1.0 / grid_size as f64;
    let points: Vec<(f64, f64)> = (0..grid_size)
        .map(|i| {
            let beta = i as f64 / grid_size as f64;
            (beta, curve.eval(n, beta))
        })
        .collect();
    let (best, grid_argmin) = points
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .unwrap();
    let lo = best.saturating_sub(1) as f64 * step;
    let hi = ((best + 1) as f64 * step).min(1.0 - step * 1e-3);
    let refined_argmin = golden_section_min(|b| curve.eval(n, b), lo, hi, GOLDEN_TOLERANCE);
    Ok(BetaSweep {
        n,
        curve,
        points,
        grid_argmin,
        refined_argmin,
    })
}

/// Eigenvalue-averaging certificate that equal times within single-k
/// blocks never lose to an arbitrary time allocation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MajorizationCertificate {
    pub original_spectrum: Spectrum,
    pub transformed_spectrum: Spectrum,
    /// `uᵀCu` at `u = 1/√N`.
    pub quadratic_form_bound: f64,
    pub lambda_max: f64,
    /// `αₖ = (time on rows with k ones) / N`, indexed by `k - 1`.
    pub alphas: Vec<f64>,
    pub trace_original: f64,
    pub trace_inverse_original: f64,
    pub trace_inverse_transformed: f64,
}

/// Builds the certificate for an arbitrary valid, identifiable design:
/// pull the top eigenvalue down to `uᵀCu = Σαₖk²`, hand the excess to the
/// other `N-1` eigenvalues and replace those by their average.
pub fn majorization_certificate(design: &Design) -> Result<MajorizationCertificate> {
    let c = fisher_information(design)?;
    let n = design.n_params();
    let trace_inverse_original = trace_inverse(&c)?;

    let mut alphas = vec![0.0; n];
    for (i, &t) in design.times().iter().enumerate() {
        alphas[design.row_weight(i) - 1] += t / n as f64;
    }

    let m = c.matrix();
    let quadratic_form_bound = m.as_slice().iter().sum::<f64>() / n as f64;
    let eig = c.eigenvalues();
    let lambda_max = *eig.last().unwrap();
    assert!(
        quadratic_form_bound <= lambda_max * (1.0 + 1e-9) + 1e-12,
        "u'Cu = {quadratic_form_bound} exceeds the largest eigenvalue {lambda_max}"
    );
    let trace_original = m.trace();

    let transformed_spectrum = if n == 1 {
        Spectrum::new([(quadratic_form_bound, 1)])
    } else {
        let avg = (trace_original - quadratic_form_bound) / (n - 1) as f64;
        Spectrum::new([(avg, n - 1), (quadratic_form_bound, 1)])
    };
    Ok(MajorizationCertificate {
        original_spectrum: Spectrum::from_eigenvalues(&eig, 1e-9),
        trace_inverse_transformed: transformed_spectrum.trace_inverse(),
        transformed_spectrum,
        quadratic_form_bound,
        lambda_max,
        alphas,
        trace_original,
        trace_inverse_original,
    })
}

/// The design achieving the global minimum of `Tr C⁻¹` for a given `N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum OptimalDesign {
    /// All `C(N, k)` configurations with `k` switches closed, equal times.
    SingleK {
        k: usize,
        /// `C(N, k)` when it fits in 128 bits.
        rows: Option<u128>,
        rows_log10: f64,
        time_per_row: f64,
    },
    /// Identity rows for `1-β` each plus the all-ones row for `Nβ`.
    IndividualPlusJoint { beta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlobalOptimum {
    pub n: usize,
    pub design: OptimalDesign,
    pub mse: f64,
}

impl GlobalOptimum {
    /// Materializes the design; fails if the single-k row count exceeds the
    /// enumeration cap.
    pub fn build(&self) -> Result<Design> {
        match self.design {
            OptimalDesign::SingleK { k, .. } => single_k_design(self.n, k),
            OptimalDesign::IndividualPlusJoint { beta } => individual_plus_joint(self.n, beta),
        }
    }
}

fn log10_binomial(n: usize, k: usize) -> f64 {
    (0..k)
        .map(|i| ((n - i) as f64).log10() - ((i + 1) as f64).log10())
        .sum()
}

/// Equal-time single-k design at `optimal_k(n)` for `n ≥ 3`; for `n = 2`
/// the individual+joint design at its minimizing β, which beats every
/// single-k schedule.
pub fn global_optimum(n: usize) -> Result<GlobalOptimum> {
    if n < 2 {
        return Err(invalid_arg("global optimum needs n >= 2"));
    }
    if n == 2 {
        let (beta, mse) =
            golden_section_min(|b| individual_plus_joint_mse(2, b), 0.0, 0.5, GOLDEN_TOLERANCE);
        return Ok(GlobalOptimum {
            n,
            design: OptimalDesign::IndividualPlusJoint { beta },
            mse,
        });
    }
    let k = optimal_k(n);
    let rows = binomial(n as u64, k as u64);
    let rows_log10 = log10_binomial(n, k);
    let time_per_row = match rows {
        Some(r) => n as f64 / r as f64,
        None => n as f64 * 10f64.powf(-rows_log10),
    };
    Ok(GlobalOptimum {
        n,
        design: OptimalDesign::SingleK {
            k,
            rows,
            rows_log10,
            time_per_row,
        },
        mse: single_k_mse(n, k),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::identity_design;
    use crate::hadamard::core_design;

    #[test]
    fn optimal_k_examples() {
        assert_eq!(optimal_k(20), 10);
        assert_eq!(optimal_k(5), 3);
        assert_eq!(optimal_k(3), 2);
        assert_eq!(optimal_k(2), 1);
    }

    #[test]
    fn k_curve_examples() {
        let c = mse_vs_k_curve(20).unwrap();
        assert_eq!(c.len(), 19);
        let best = c.iter().min_by(|a, b| a.mse.total_cmp(&b.mse)).unwrap();
        assert_eq!((best.k, best.mse), (10, 3.62));

        let c = mse_vs_k_curve(3).unwrap();
        assert_eq!(c, vec![KCurvePoint { k: 1, mse: 3.0 }, KCurvePoint { k: 2, mse: 2.25 }]);
        assert_eq!(mse_vs_k_curve(2).unwrap(), vec![KCurvePoint { k: 1, mse: 2.0 }]);
    }

    #[test]
    fn sweep_examples() {
        let s = convex_combination_sweep(20, 10, 10, 11).unwrap();
        assert!(s.iter().all(|&(_, m)| (m - 3.62).abs() < 1e-12));

        let s = convex_combination_sweep(20, 10, 1, 3).unwrap();
        assert_eq!(s[1].0, 0.5);
        let l1 = 0.5 + 0.5 * 100.0 / 19.0;
        assert!((s[1].1 - (19.0 / l1 + 1.0 / 50.5)).abs() < 1e-12);

        assert!(convex_combination_sweep(5, 0, 2, 10).is_err());
        assert!(convex_combination_sweep(5, 2, 2, 1).is_err());
    }

    #[test]
    fn n2_sweep_has_interior_minimum() {
        let s = convex_combination_sweep(2, 1, 2, 101).unwrap();
        assert_eq!(s[0].1, 2.0);
        let (i, &(beta, mse)) = s
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .unwrap();
        assert!(i > 0 && i < 100);
        assert!((beta - 0.15).abs() < 1e-12);
        // 1/(1-β) + 1/(1+3β) at β = 0.15
        assert!((mse - (1.0 / 0.85 + 1.0 / 1.45)).abs() < 1e-12);
        assert!(s.last().unwrap().1.is_infinite());
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section_min(|x| (x - 0.3) * (x - 0.3) + 1.0, 0.0, 1.0, 1e-10);
        // a flat minimum pins x only to about sqrt(eps)
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
        let (x, _) = golden_section_min(|x| x, 0.0, 1.0, 1e-10);
        assert_eq!(x, 0.0);
    }

    #[test]
    fn beta_sweep_examples() {
        let s = beta_sweep(2, DEFAULT_BETA_GRID).unwrap();
        assert!((s.grid_argmin.0 - 0.053).abs() < 1e-12);
        assert!((s.refined_argmin.0 - 0.053_197_265_636).abs() < 1e-7);
        assert!((s.refined_argmin.1 - 2.974_744_871_391_589).abs() < 1e-10);

        let s = beta_sweep(20, DEFAULT_BETA_GRID).unwrap();
        assert!(s.grid_argmin.0 <= 1.0 / DEFAULT_BETA_GRID as f64 * 9.0);

        let exact = beta_sweep_with(2, DEFAULT_BETA_GRID, BetaCurve::Exact).unwrap();
        assert_eq!(exact.points[0], (0.0, 2.0));
        assert!((exact.refined_argmin.1 - (1.0 + 3f64.sqrt() / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn certificate_fixed_point() {
        let d = single_k_design(6, 3).unwrap();
        let cert = majorization_certificate(&d).unwrap();
        assert!((cert.trace_inverse_transformed - cert.trace_inverse_original).abs() < 1e-10);
        let orig = cert.original_spectrum.values();
        let tran = cert.transformed_spectrum.values();
        for (a, b) in orig.iter().zip(&tran) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((cert.quadratic_form_bound - 9.0).abs() < 1e-12);
    }

    #[test]
    fn certificate_identity_unequal_times() {
        let d = identity_design(4).unwrap().with_times(vec![2.0, 0.5, 0.5, 1.0]).unwrap();
        let cert = majorization_certificate(&d).unwrap();
        assert!((cert.quadratic_form_bound - 1.0).abs() < 1e-15);
        assert!((cert.trace_inverse_original - 5.5).abs() < 1e-12);
        assert!(cert.trace_inverse_transformed <= 5.5);
        assert!((cert.trace_inverse_transformed - 4.0).abs() < 1e-12);
        assert_eq!(cert.alphas, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn certificate_on_hadamard_with_unequal_times() {
        let d = core_design(7).unwrap().design;
        let times = vec![1.5, 0.5, 1.2, 0.8, 1.0, 0.7, 1.3];
        let cert = majorization_certificate(&d.with_times(times).unwrap()).unwrap();
        assert!(cert.trace_inverse_transformed < cert.trace_inverse_original);
        assert!((cert.trace_inverse_transformed - 3.0625).abs() < 1e-12);
    }

    #[test]
    fn global_optimum_examples() {
        let g = global_optimum(20).unwrap();
        assert_eq!(g.mse, 3.62);
        match g.design {
            OptimalDesign::SingleK { k, rows, time_per_row, .. } => {
                assert_eq!(k, 10);
                assert_eq!(rows, Some(184_756));
                assert_eq!(time_per_row, 20.0 / 184_756.0);
            }
            _ => panic!("expected single-k"),
        }
        let g = global_optimum(7).unwrap();
        assert_eq!(g.mse, 3.0625);

        let g = global_optimum(2).unwrap();
        assert!((g.mse - (1.0 + 3f64.sqrt() / 2.0)).abs() < 1e-14);
        match g.design {
            OptimalDesign::IndividualPlusJoint { beta } => {
                let want = (3f64.sqrt() - 1.0) / (3.0 + 3f64.sqrt());
                assert!((beta - want).abs() < 1e-7);
            }
            _ => panic!("expected individual+joint"),
        }
        assert!(g.mse < single_k_mse(2, 1));
        assert!((crate::model::design_mse(&g.build().unwrap()).unwrap() - g.mse).abs() < 1e-12);

        let g = global_optimum(10_000).unwrap();
        assert!(matches!(g.design, OptimalDesign::SingleK { rows: None, .. }));
    }
}
