//! Eigenvalue-averaging certificate for a design with unequal times.

use gmux::analysis::majorization_certificate;
use gmux::hadamard::core_design;

fn main() -> gmux::Result<()> {
    let d = core_design(7)?.design;
    let times = vec![1.6, 0.4, 1.0, 1.0, 1.2, 0.8, 1.0];
    let cert = majorization_certificate(&d.with_times(times)?)?;
    println!("original spectrum:    {:?}", cert.original_spectrum.entries());
    println!("transformed spectrum: {:?}", cert.transformed_spectrum.entries());
    println!("u'Cu = {} <= lambda_max = {}", cert.quadratic_form_bound, cert.lambda_max);
    println!(
        "Tr C^-1: original {:.6} >= transformed {:.6}",
        cert.trace_inverse_original, cert.trace_inverse_transformed
    );
    Ok(())
}
