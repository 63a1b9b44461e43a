//! Build a small design by hand, validate it and print its Fisher information.

use gmux::model::{design_mse, estimator_covariance, fisher_information, validate_design};
use gmux::Design;

fn main() -> gmux::Result<()> {
    let design = Design::new(
        3,
        vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]],
        vec![1.0, 1.0, 1.0],
    )?;
    let report = validate_design(&design);
    println!("valid: {}, rank: {}", report.is_valid(), report.rank);

    let c = fisher_information(&design)?;
    println!("C = {:?}", c.matrix().to_rows());
    println!("aI+bJ structure: {:?}", c.structure());
    println!("Tr C^-1 = {}", design_mse(&design)?);
    println!("cov(mu_hat) = {:?}", estimator_covariance(&design)?.to_rows());

    let broken = Design::new(2, vec![vec![1, 0], vec![1, 0]], vec![1.0, 1.5])?;
    for v in validate_design(&broken).violations {
        println!("violation: {v}");
    }
    Ok(())
}
