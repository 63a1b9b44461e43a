//! Print the CSV data behind the figures.

use gmux::figures::{emit_figure_data, figure2};

fn main() -> gmux::Result<()> {
    print!("{}", figure2(20)?.to_csv());
    let fig4 = emit_figure_data(4, Some(40))?;
    print!("{}", fig4.to_csv());
    for w in fig4.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}
