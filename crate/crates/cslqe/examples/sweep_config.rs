//! Config-driven sweep written as CSV, the library route behind
//! `cslqe sweep`. Pass a config path, or run the bundled one.

use cslqe::sweep::{emit_csv, parse_config, run_sweep};

fn main() -> cslqe::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/temperature.conf").into());
    let cfg = parse_config(&std::fs::read_to_string(&path)?)?;
    let result = run_sweep(&cfg, None)?;
    emit_csv(&result, std::io::stdout().lock())
}
