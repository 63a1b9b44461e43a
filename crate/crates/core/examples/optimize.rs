//! Global optimum per n, including the two-sensor exception.

use gmux::analysis::{beta_sweep, global_optimum, mse_vs_k_curve, BetaCurve, beta_sweep_with};

fn main() -> gmux::Result<()> {
    for n in [2, 3, 4, 10, 20, 100] {
        let opt = global_optimum(n)?;
        println!("n={n:>3}: mse {:.6} via {:?}", opt.mse, opt.design);
    }
    for p in mse_vs_k_curve(10)? {
        println!("k={:>2} mse={:.4}", p.k, p.mse);
    }
    let printed = beta_sweep(2, 1000)?;
    let exact = beta_sweep_with(2, 1000, BetaCurve::Exact)?;
    println!("printed curve minimum: {:?}", printed.refined_argmin);
    println!("exact curve minimum:   {:?}", exact.refined_argmin);
    Ok(())
}
