//! Mix single-k blocks and check the predicted spectrum against the dense one.

use gmux::designs::{multi_k_design, multi_k_mse, multi_k_spectrum, MultiKWeights};
use gmux::model::fisher_information;

fn main() -> gmux::Result<()> {
    let n = 6;
    let w = MultiKWeights::from_pairs(n, &[(2, 0.25), (3, 0.75)])?;
    println!("closed-form spectrum: {:?}", multi_k_spectrum(n, &w)?.entries());
    let c = fisher_information(&multi_k_design(n, &w)?)?;
    println!("dense eigenvalues:    {:?}", c.eigenvalues());
    println!("Tr C^-1 = {}", multi_k_mse(n, &w)?);
    Ok(())
}
