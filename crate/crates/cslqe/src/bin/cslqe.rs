use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cslqe::csl::{crossover_gamma, eta_grid, eta_sphere, lambda_from_gamma, Boundary, DensityGrid};
use cslqe::dynamics::{effective_coupling, SteadyState};
use cslqe::sweep::config::{Axis, Output};
use cslqe::sweep::{emit_csv, parse_config_with_overrides, run_sweep, Cell, SweepConfig};
use cslqe::Error;

/// Fisher information for estimating the CSL collapse rate.
#[derive(Parser)]
#[command(name = "cslqe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    jobs: Option<usize>,
    /// Replace one configuration key, e.g. `--override temperature=0.1`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Open,
    Periodic,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured sweep and write a CSV table.
    Sweep(Common),
    /// Dump the steady-state covariance and its Λ-derivative.
    SteadyState(Common),
    /// Collapse rate η and Λ for the configured sphere, optionally for a density grid too.
    Eta {
        #[command(flatten)]
        common: Common,
        /// Binary density grid to evaluate in real space.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "open")]
        boundary: BoundaryArg,
    },
    /// Sweep the qubit interaction time and report the optimum.
    Hybrid(Common),
    /// Squeezed versus unsqueezed estimation of an added occupation.
    Squeeze(Common),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::IoError(_) => 2,
        _ => 1,
    }
}

fn load(common: &Common) -> Result<SweepConfig, Error> {
    let text = match &common.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::IoError(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    parse_config_with_overrides(&text, &common.overrides)
}

fn writer(common: &Common) -> Result<Box<dyn Write>, Error> {
    Ok(match &common.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Error::IoError(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sweep(common: &Common, cfg: &SweepConfig) -> Result<u8, Error> {
    let result = run_sweep(cfg, common.jobs)?;
    emit_csv(&result, writer(common)?)?;
    Ok(if result.all_rows_errored() { 3 } else { 0 })
}

fn key_values(common: &Common, rows: &[(String, f64)]) -> Result<u8, Error> {
    let mut w = writer(common)?;
    writeln!(w, "quantity,value")?;
    for (k, v) in rows {
        writeln!(w, "{k},{}", Cell::Value(*v).render())?;
    }
    w.flush()?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Sweep(common) => sweep(&common, &load(&common)?),
        Command::Hybrid(common) => {
            let cfg = load(&common)?;
            let outputs = if cfg.axis == Axis::Tau { cfg.outputs.clone() } else { Output::hybrid_columns() };
            sweep(&common, &cfg.with_axis(Axis::Tau, outputs))
        }
        Command::Squeeze(common) => {
            let cfg = load(&common)?;
            let outputs = if cfg.axis == Axis::SqueezeDelta { cfg.outputs.clone() } else { Output::squeeze_columns() };
            sweep(&common, &cfg.with_axis(Axis::SqueezeDelta, outputs))
        }
        Command::SteadyState(common) => {
            let cfg = load(&common)?;
            let p = cfg.base;
            let lambda = match cfg.lambda {
                Some(l) => l,
                None => lambda_from_gamma(&p, cfg.gamma)?,
            };
            let ss = SteadyState::solve(&p, lambda)?;
            let mut rows = vec![
                ("Lambda (rad/s)".to_string(), lambda),
                ("n_bar (1)".to_string(), p.n_bar()),
                ("chi (rad/s)".to_string(), effective_coupling(&p)),
            ];
            let names = ["q", "p", "X", "Y"];
            for (label, m) in [("sigma", ss.sigma), ("dsigma_dLambda", ss.dsigma)] {
                let unit = if label == "sigma" { "1" } else { "s" };
                for i in 0..4 {
                    for j in 0..4 {
                        rows.push((format!("{label}[{}{}] ({unit})", names[i], names[j]), m[(i, j)]));
                    }
                }
            }
            key_values(&common, &rows)
        }
        Command::Eta { common, grid, boundary } => {
            let cfg = load(&common)?;
            let p = cfg.base;
            let sphere = p.sphere();
            let eta = eta_sphere(&sphere, p.r_c, cfg.gamma)?;
            let mut rows = vec![
                ("mass (kg)".to_string(), p.mass),
                ("radius (m)".to_string(), sphere.radius),
                ("r_c (m)".to_string(), p.r_c),
                ("gamma (m^3/s)".to_string(), cfg.gamma),
                ("eta_sphere (1/(m^2 s))".to_string(), eta),
                ("Lambda (rad/s)".to_string(), lambda_from_gamma(&p, cfg.gamma)?),
                ("crossover_gamma (m^3/s)".to_string(), crossover_gamma(&p)?),
            ];
            if let Some(path) = grid {
                let file = File::open(&path).map_err(|e| Error::IoError(format!("{}: {e}", path.display())))?;
                let g = DensityGrid::read_from(BufReader::new(file))?;
                let b = match boundary {
                    BoundaryArg::Open => Boundary::Open,
                    BoundaryArg::Periodic => Boundary::Periodic,
                };
                rows.push(("grid_mass (kg)".to_string(), g.total_mass()));
                rows.push(("eta_grid (1/(m^2 s))".to_string(), eta_grid(&g, p.r_c, cfg.gamma, b)?));
            }
            key_values(&common, &rows)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
