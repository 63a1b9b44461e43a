use gmux::designs::{
    complement_design, identity_design, individual_plus_joint, multi_k_design, single_k_design,
    MultiKWeights,
};
use gmux::hadamard::{core_design, truncated_core_design};
use gmux::model::estimator_covariance;
use gmux::sim::{invariance_check, simulate, SimConfig};
use gmux::Design;

fn families(n: usize) -> Vec<(&'static str, Design)> {
    let mut out = vec![
        ("identity", identity_design(n).unwrap()),
        ("complement", complement_design(n).unwrap()),
        ("individual+joint", individual_plus_joint(n, 0.2).unwrap()),
        ("single-k", single_k_design(n, n.div_ceil(2)).unwrap()),
        (
            "multi-k",
            multi_k_design(n, &MultiKWeights::from_pairs(n, &[(1, 0.3), (n, 0.7)]).unwrap()).unwrap(),
        ),
    ];
    out.push(("hadamard", truncated_core_design(n).unwrap().design));
    out
}

#[test]
fn unbiased_for_every_family() {
    for n in 2..=8 {
        for (name, d) in families(n) {
            let mu: Vec<f64> = (0..n).map(|i| 3.0 - i as f64).collect();
            let r = simulate(&SimConfig::new(d, mu, 100_000, 1_000 + n as u64)).unwrap();
            for (b, se) in r.per_coordinate_bias.iter().zip(&r.bias_standard_error) {
                assert!(b.abs() <= 4.0 * se, "{name} n={n}: bias {b} se {se}");
            }
            let z = (r.empirical_mse - r.theoretical_mse).abs() / r.mse_standard_error;
            assert!(z <= 4.0, "{name} n={n}: mse z = {z}");
        }
    }
}

#[test]
fn covariance_matches_inverse_fisher() {
    let d = core_design(3).unwrap().design;
    let target = estimator_covariance(&d).unwrap();
    let frob = |trials: usize| {
        let r = simulate(&SimConfig::new(d.clone(), vec![0.5, -1.0, 2.0], trials, 77)).unwrap();
        (r.covariance_matrix().max_abs_diff(&target), r)
    };
    let (coarse, _) = frob(1_000);
    let (fine, r) = frob(1_000_000);
    assert!(fine < coarse, "{fine} !< {coarse}");
    let cov = r.covariance_matrix();
    for i in 0..3 {
        for j in 0..3 {
            let se = r.covariance_standard_error[i][j];
            assert!((cov[(i, j)] - target[(i, j)]).abs() <= 5.0 * se, "({i},{j})");
        }
    }
}

#[test]
fn mse_scales_with_noise_variance() {
    let d = core_design(7).unwrap().design;
    let mu = SimConfig::default_mu(7);
    let base = simulate(&SimConfig::new(d.clone(), mu.clone(), 50_000, 1)).unwrap();
    let mut cfg = SimConfig::new(d.clone(), mu.clone(), 50_000, 2);
    cfg.noise_variance = 2.0;
    let doubled = simulate(&cfg).unwrap();
    assert_eq!(doubled.theoretical_mse, 2.0 * base.theoretical_mse);
    let se = (doubled.mse_standard_error.powi(2) + 4.0 * base.mse_standard_error.powi(2)).sqrt();
    assert!((doubled.empirical_mse - 2.0 * base.empirical_mse).abs() <= 3.0 * se);

    // with a shared seed every error is scaled by exactly √2
    let mut same = SimConfig::new(d, mu, 50_000, 1);
    same.noise_variance = 2.0;
    let same = simulate(&same).unwrap();
    assert!((same.empirical_mse / base.empirical_mse - 2.0).abs() < 1e-9);
}

#[test]
fn reports_are_bit_identical_per_seed() {
    let cfg = SimConfig::new(core_design(7).unwrap().design, SimConfig::default_mu(7), 20_000, 5);
    assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
    let json = |c: &SimConfig| serde_json::to_string(&simulate(c).unwrap()).unwrap();
    assert_eq!(json(&cfg), json(&cfg));
}

#[test]
fn identity_design_mse_is_n() {
    let r = simulate(&SimConfig::new(identity_design(4).unwrap(), vec![9.0, -2.0, 0.0, 1.0], 100_000, 3)).unwrap();
    assert!((r.empirical_mse - 4.0).abs() <= 3.0 * r.mse_standard_error);
}

#[test]
fn invariance_examples() {
    let r = invariance_check(&identity_design(3).unwrap(), &[vec![0.0; 3], vec![10.0, -10.0, 5.0]], 20_000, 11)
        .unwrap();
    assert!(r.consistent, "max z {}", r.max_z);
    let r = invariance_check(&core_design(3).unwrap().design, &[vec![0.0; 3], vec![1e6, -3e5, 7e5]], 20_000, 12)
        .unwrap();
    assert!(r.consistent, "max z {}", r.max_z);
    assert!(invariance_check(&identity_design(3).unwrap(), &[vec![0.0; 3], vec![1.0; 3]], 1, 0).is_err());
}
