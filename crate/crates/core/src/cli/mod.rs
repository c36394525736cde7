//! The `mlq` command line.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::beta_arith::BetaContext;
use crate::sampling::AngleGrid;

mod commands;
mod report;
pub mod verify;

pub use commands::{cmd_eigenstate, cmd_export, cmd_formal, cmd_mlstate, cmd_star, cmd_verify, CommandError, MlstateOptions};
pub use report::{Check, Report};

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunConfig {
    pub beta: f64,
    pub hbar: f64,
    pub lambda: f64,
    pub grid_n: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub tol_scale: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { beta: 1.0, hbar: 1.0, lambda: 0.5, grid_n: 256, seed: 42, out: PathBuf::from("out"), tol_scale: 1.0 }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        BetaContext::new(self.beta, self.hbar, self.lambda).map_err(|e| e.to_string())?;
        if self.grid_n < 3 {
            return Err(format!("grid must be at least 3, got {}", self.grid_n));
        }
        if !(self.tol_scale.is_finite() && self.tol_scale > 0.0) {
            return Err(format!("tol-scale must be positive, got {}", self.tol_scale));
        }
        Ok(())
    }

    pub fn ctx(&self) -> BetaContext {
        BetaContext::new(self.beta, self.hbar, self.lambda).expect("validated config")
    }

    /// Even sizes are bumped to the next odd one.
    pub fn grid(&self) -> AngleGrid {
        AngleGrid::at_least(self.grid_n)
    }
}

#[derive(Debug, Parser)]
#[command(name = "mlq", version, about = "Minimal-length star products, operators and maximal-localization states")]
struct Cli {
    #[arg(long, global = true, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long, global = true, default_value_t = 0.5)]
    lambda: f64,
    /// Angle grid size (even sizes become the next odd size)
    #[arg(long, global = true, default_value_t = 256)]
    grid: usize,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Output directory for CSV files
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Multiplies every verification tolerance
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,
    /// Print the report as JSON
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PairArg {
    Main,
    Alt,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every invariant suite
    Verify,
    /// Write the maximal-localization phase-space grids
    Mlstate {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        xi: f64,
        /// Half-width of the square q, p window
        #[arg(long, default_value_t = 10.0)]
        window: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Check and export the position eigenvector at xi
    Eigenstate {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        xi: f64,
    },
    /// Star product of two built-in families: rho0, rho:XI, ml:XI, bump, bump:W, random:SEED, q, q^N
    Star { f: String, g: String },
    /// Exact formal product of two polynomials in q, p, s
    Formal {
        f: String,
        g: String,
        #[arg(long, value_enum, default_value = "main")]
        pair: PairArg,
        #[arg(long, default_value_t = 4)]
        order: usize,
        /// Print f*g - g*f instead of f*g
        #[arg(long)]
        commutator: bool,
    },
    /// Export a built-in family as torus and lattice CSVs
    Export { spec: String },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Human-readable report text.
pub fn render(report: &Report) -> String {
    let mut s = String::new();
    if let Some(t) = &report.text {
        s.push_str(t);
    } else if let Some(v) = &report.result {
        if let Some(obj) = v.as_object() {
            for (k, v) in obj {
                match v {
                    serde_json::Value::String(t) => s.push_str(&format!("{k}: {t}\n")),
                    other => s.push_str(&format!("{k}: {other}\n")),
                }
            }
        }
    }
    for c in &report.entries {
        s.push_str(&c.line());
        s.push('\n');
    }
    for f in &report.files {
        s.push_str(&format!("wrote {f}\n"));
    }
    if !report.entries.is_empty() {
        let failed = report.entries.iter().filter(|c| !c.pass).count();
        s.push_str(&format!("{}: {} checks, {} failed\n", report.command, report.entries.len(), failed));
    }
    s
}

/// Parses arguments, runs the subcommand, prints, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = RunConfig {
        beta: cli.beta,
        hbar: cli.hbar,
        lambda: cli.lambda,
        grid_n: cli.grid,
        seed: cli.seed,
        out: cli.out.clone(),
        tol_scale: cli.tol_scale,
    };
    if let Err(msg) = cfg.validate() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    let outcome = match &cli.cmd {
        Command::Verify => Ok(cmd_verify(&cfg)),
        Command::Mlstate { xi, window, points } => cmd_mlstate(&cfg, &MlstateOptions { xi: *xi, window: *window, points: *points }),
        Command::Eigenstate { xi } => cmd_eigenstate(&cfg, *xi),
        Command::Star { f, g } => cmd_star(&cfg, f, g),
        Command::Formal { f, g, pair, order, commutator } => {
            let pair = match pair {
                PairArg::Main => crate::formal_cas::DerivationPair::Main,
                PairArg::Alt => crate::formal_cas::DerivationPair::Alt,
            };
            cmd_formal(pair, f, g, *order, *commutator)
        }
        Command::Export { spec } => cmd_export(&cfg, spec),
    };
    match outcome {
        Ok(report) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report).expect("serializable report"));
            } else {
                print!("{}", render(&report));
            }
            if report.pass {
                EXIT_OK
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.msg);
            e.code
        }
    }
}
