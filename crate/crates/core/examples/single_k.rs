//! Compare the single-k closed form with the enumerated design for every k.

use gmux::analysis::optimal_k;
use gmux::designs::{single_k_design, single_k_mse, SingleKParams};
use gmux::model::design_mse;

fn main() -> gmux::Result<()> {
    let n = 8;
    println!("k  rows  closed-form  enumerated");
    for k in 1..n {
        let rows = SingleKParams::new(n, k)?.m0().unwrap();
        let dense = design_mse(&single_k_design(n, k)?)?;
        println!("{k}  {rows:>4}  {:>11.6}  {dense:>10.6}", single_k_mse(n, k));
    }
    println!("optimal k for n={n}: {}", optimal_k(n));
    Ok(())
}
