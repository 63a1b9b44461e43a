//! Monte Carlo check of the ML estimator against its predicted covariance.

use gmux::hadamard::core_design;
use gmux::sim::{invariance_check, simulate, SimConfig};

fn main() -> gmux::Result<()> {
    let d = core_design(7)?.design;
    let cfg = SimConfig::new(d.clone(), SimConfig::default_mu(7), 100_000, 2024);
    let r = simulate(&cfg)?;
    println!(
        "empirical {:.4} +- {:.4}, theoretical {:.4}",
        r.empirical_mse, r.mse_standard_error, r.theoretical_mse
    );
    println!("bias: {:?}", r.per_coordinate_bias);

    let inv = invariance_check(&d, &[vec![0.0; 7], vec![1e3; 7]], 20_000, 7)?;
    println!("invariant: {} (max z {:.3})", inv.consistent, inv.max_z);
    Ok(())
}
