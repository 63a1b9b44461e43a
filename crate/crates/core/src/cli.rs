//! `gmux` command line front end.
//!
//! Exit status 0 on success, 1 with a one-line JSON error
//! (`{"error": kind, "message": ...}` on stderr) for any library error, and
//! 2 when the arguments do not parse.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analysis::{global_optimum, OptimalDesign};
use crate::designs::{
    complement_design, identity_design, individual_plus_joint, multi_k_design, single_k_design,
    MultiKWeights,
};
use crate::error::{invalid_arg, Result};
use crate::figures::emit_figure_data;
use crate::hadamard::{core_design, hadamard, normalize, truncated_core_design};
use crate::model::{design_mse, fisher_information, validate_design, Design};
use crate::sim::{simulate, SimConfig};

#[derive(Debug, Parser)]
#[command(name = "gmux", version, about = "Switch-schedule designs for the Gaussian multiplex channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Each sensor alone for one second.
    Identity,
    /// N-1 switches closed per row.
    Complement,
    /// Identity rows plus the all-ones row (needs --beta).
    IndividualJoint,
    /// All k-subsets with equal times (needs --k).
    SingleK,
    /// Mixture of single-k blocks (needs --weights).
    MultiK,
    /// Hadamard core design, truncated when n+1 is not a multiple of 4.
    Hadamard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    /// The ±1 Hadamard matrix as constructed.
    Matrix,
    /// The 0/1 core of the normalized matrix.
    Core,
    /// The core as a JSON design file.
    Design,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print Tr C⁻¹, rank and aI+bJ structure of a design file.
    Evaluate {
        /// JSON design file.
        design_file: PathBuf,
    },
    /// Generate a design and write it as JSON.
    Design {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        beta: Option<f64>,
        /// Comma-separated `k:alpha` pairs, e.g. `1:0.5,3:0.5`.
        #[arg(long)]
        weights: Option<String>,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the optimal k, its MSE and the design it describes.
    Optimize {
        #[arg(long)]
        n: usize,
    },
    /// Monte Carlo check of the ML estimator on a design file.
    Simulate {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Comma-separated true parameters; defaults to i/N.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        mu: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the CSV data behind figure 1, 2, 3 or 4.
    Figures {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        which: u8,
        /// Problem size (figures 2, 3) or largest n (figure 4).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a Hadamard matrix and print it, its core, or the core design.
    Hadamard {
        #[arg(long)]
        order: usize,
        #[arg(long, value_enum, default_value_t = Emit::Matrix)]
        emit: Emit,
    },
}

fn parse_weights(n: usize, text: &str) -> Result<MultiKWeights> {
    let mut pairs = Vec::new();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, a) = item
            .split_once(':')
            .ok_or_else(|| invalid_arg(format!("weight '{item}' is not k:alpha")))?;
        let k: usize = k.trim().parse().map_err(|_| invalid_arg(format!("bad k in '{item}'")))?;
        let a: f64 = a.trim().parse().map_err(|_| invalid_arg(format!("bad alpha in '{item}'")))?;
        pairs.push((k, a));
    }
    MultiKWeights::from_pairs(n, &pairs)
}

fn build_design(family: Family, n: usize, k: Option<usize>, beta: Option<f64>, weights: Option<&str>) -> Result<Design> {
    match family {
        Family::Identity => identity_design(n),
        Family::Complement => complement_design(n),
        Family::IndividualJoint => {
            individual_plus_joint(n, beta.ok_or_else(|| invalid_arg("--beta is required"))?)
        }
        Family::SingleK => single_k_design(n, k.ok_or_else(|| invalid_arg("--k is required"))?),
        Family::MultiK => {
            let w = weights.ok_or_else(|| invalid_arg("--weights is required"))?;
            multi_k_design(n, &parse_weights(n, w)?)
        }
        Family::Hadamard => Ok(truncated_core_design(n)?.design),
    }
}

fn write_output(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn matrix_csv<T: std::fmt::Display>(rows: impl Iterator<Item = Vec<T>>) -> String {
    let mut s = String::new();
    for r in rows {
        let cells: Vec<String> = r.iter().map(T::to_string).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Runs one parsed command, writing results to `stdout` and warnings to `stderr`.
pub fn run(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match command {
        Command::Evaluate { design_file } => {
            let design = Design::read_json(&design_file)?;
            let report = validate_design(&design);
            design.ensure_valid()?;
            let c = fisher_information(&design)?;
            let tr = crate::model::trace_inverse(&c)?;
            let structured = c.structure().map(|(a, b)| vec![a, b]);
            let out = json!({
                "trace_inverse": tr,
                "rank": report.rank,
                "structured": structured,
            });
            writeln!(stdout, "{out}")?;
        }
        Command::Design {
            family,
            n,
            k,
            beta,
            weights,
            out,
        } => {
            let design = build_design(family, n, k, beta, weights.as_deref())?;
            let text = design.to_json()? + "\n";
            write_output(out.as_deref(), &text, stdout)?;
            if let Some(path) = out {
                let summary = json!({
                    "out": path,
                    "n": design.n_params(),
                    "rows": design.n_rows(),
                    "trace_inverse": design_mse(&design).ok(),
                });
                writeln!(stdout, "{summary}")?;
            }
        }
        Command::Optimize { n } => {
            let opt = global_optimum(n)?;
            let mut out = serde_json::to_value(&opt)?;
            if let OptimalDesign::SingleK { k, .. } = opt.design {
                out["k"] = json!(k);
            }
            // the square Hadamard alternative, when it is cheap to build
            if n <= 256 {
                if let Ok(core) = truncated_core_design(n) {
                    out["hadamard"] = json!({
                        "rows": core.design.n_rows(),
                        "source_order": core.source_order,
                        "time_per_row": core.design.times()[0],
                        "mse": design_mse(&core.design)?,
                    });
                }
            }
            writeln!(stdout, "{out}")?;
        }
        Command::Simulate {
            design,
            trials,
            seed,
            mu,
            sigma2,
            out,
        } => {
            let design = Design::read_json(&design)?;
            let mu = mu.unwrap_or_else(|| SimConfig::default_mu(design.n_params()));
            let mut cfg = SimConfig::new(design, mu, trials, seed);
            cfg.noise_variance = sigma2;
            let report = simulate(&cfg)?;
            let text = serde_json::to_string_pretty(&report)? + "\n";
            write_output(out.as_deref(), &text, stdout)?;
        }
        Command::Figures { which, n, out } => {
            let table = emit_figure_data(which, n)?;
            for w in &table.warnings {
                writeln!(stderr, "warning: {w}")?;
            }
            write_output(out.as_deref(), &table.to_csv(), stdout)?;
        }
        Command::Hadamard { order, emit } => {
            let h = hadamard(order)?;
            let text = match emit {
                Emit::Matrix => matrix_csv(h.to_rows().into_iter()),
                Emit::Core => {
                    let core = core_design(order.checked_sub(1).filter(|&n| n > 0).ok_or_else(|| {
                        invalid_arg("the core of an order-1 matrix is empty")
                    })?)?;
                    debug_assert_eq!(normalize(&h).order(), core.source_order);
                    matrix_csv(core.design.rows().map(<[u8]>::to_vec))
                }
                Emit::Design => {
                    let n = order
                        .checked_sub(1)
                        .filter(|&n| n > 0)
                        .ok_or_else(|| invalid_arg("the core of an order-1 matrix is empty"))?;
                    core_design(n)?.design.to_json()? + "\n"
                }
            };
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let line = json!({ "error": e.kind(), "message": e.to_string() });
            let _ = writeln!(stderr, "{line}");
            1
        }
    }
}
