//! Construct Hadamard matrices and the 0/1 designs derived from them.

use gmux::designs::single_k_mse;
use gmux::hadamard::{construction_for, core_design, smallest_unsupported_order, truncated_core_design};
use gmux::model::design_mse;

fn main() -> gmux::Result<()> {
    for order in [4, 12, 28, 36, 52, 100] {
        println!("order {order:>3}: {}", construction_for(order)?);
    }
    println!("smallest unsupported order: {}", smallest_unsupported_order());

    let core = core_design(7)?;
    for row in core.design.rows() {
        println!("{row:?}");
    }
    println!("core Tr C^-1 = {}, single-k(7,4) = {}", design_mse(&core.design)?, single_k_mse(7, 4));

    let t = truncated_core_design(20)?;
    println!(
        "n=20 via order {}: {} rows, Tr C^-1 = {:.6} (optimal {:.6})",
        t.source_order,
        t.design.n_rows(),
        design_mse(&t.design)?,
        single_k_mse(20, 10)
    );
    Ok(())
}
