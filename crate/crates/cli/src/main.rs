//! Command-line driver: runs one solver stage and writes CSV tables and a
//! JSON summary into the output directory.

mod commands;
mod config;
mod output;
mod verify;

use clap::{Args, Parser, Subcommand};
use config::{parse_mesh, parse_point, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "pinned-gl",
    version,
    about = "Pinned Ginzburg-Landau vortex solvers on the unit disc"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Pinning level outside the interface circle.
    #[arg(long, global = true, default_value_t = 0.25)]
    a: f64,
    /// Interface radius.
    #[arg(long = "R", global = true, default_value_t = 0.5)]
    r_int: f64,
    #[arg(long, global = true, default_value_t = 0.05)]
    eps: f64,
    /// Applied field.
    #[arg(long = "H", global = true)]
    h: Option<f64>,
    /// Node count of 1-D radial grids.
    #[arg(long, global = true, default_value_t = 2048)]
    grid: usize,
    /// Polar mesh as NRxNT.
    #[arg(long, global = true, default_value = "192x256", value_parser = parse_mesh)]
    mesh: (usize, usize),
    /// Number of vortices or sites.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// TOML file whose keys override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Canonical interface profile and the radial minimizer u_ε.
    Profile,
    /// Weighted London field, pinning landscape and attractor.
    London,
    /// 2-D minimization of the Ginzburg-Landau energy at field H.
    Minimize,
    /// Minimization followed by vortex detection.
    Detect,
    /// Field sweep bracketing the first critical field.
    Sweep {
        /// Fields in units of k_ε|ln ε|, increasing.
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.5,0.7,0.85,1.0,1.2,1.5,2.0,3.0")]
        factors: Vec<f64>,
    },
    /// Green's kernel of −div(u⁻²∇·) + 1 for one source point.
    Greens {
        /// Source point x,y.
        #[arg(long, default_value = "0.2,0", value_parser = parse_point)]
        y: (f64, f64),
    },
    /// Vortex test configuration and its reduced energy.
    Testconfig,
    /// Minimizer of the renormalized point-vortex energy.
    Wmin {
        /// Confinement coefficient; defaults to ξ″(0) of the model.
        #[arg(long)]
        xi2: Option<f64>,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
    },
    /// Invariant suite on the presets a = 0.25 and a = 4 at ε = 0.05.
    Verify,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            });
        }
    };
    let c = cli.common;
    let mut cfg = RunConfig {
        a: c.a,
        r_int: c.r_int,
        epsilon: c.eps,
        grid: c.grid,
        mesh: c.mesh,
        h: c.h,
        n: c.n,
        seed: c.seed,
        out: c.out,
    };
    if let Some(path) = &c.config {
        cfg = match cfg.merge_file(path) {
            Ok(cfg) => cfg,
            Err(msg) => {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
        };
    }
    let result = match cli.command {
        Command::Profile => commands::profile(&cfg),
        Command::London => commands::london(&cfg),
        Command::Minimize => commands::minimize(&cfg),
        Command::Detect => commands::detect(&cfg),
        Command::Sweep { factors } => commands::sweep(&cfg, &factors),
        Command::Greens { y } => commands::greens(&cfg, y),
        Command::Testconfig => commands::testconfig(&cfg),
        Command::Wmin { xi2, restarts } => commands::wmin(&cfg, xi2, restarts),
        Command::Verify => verify::run(&cfg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
