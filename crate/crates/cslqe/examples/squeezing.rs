//! Squeezing a thermal oscillator raises the quantum Fisher information for
//! an added occupation while lowering what Gaussian measurements extract.

use cslqe::squeezing::{optimize_gaussian_meas, sweep_delta, DeltaPlacement, SqueezeParams};

fn main() -> cslqe::Result<()> {
    let base = SqueezeParams::from_total_occupation(100.0, 2.95, 0.0, DeltaPlacement::TotalOccupation)?;
    println!("thermal occupation before squeezing: {:.5}", base.n_th);

    for p in [base.with_squeezing(0.0)?, base] {
        let (spec, fi) = optimize_gaussian_meas(&p)?;
        println!("s = {:.2}: best measurement {:?} at θ = {:.4}, FI = {:.6e}", p.s, spec.l, spec.theta, fi.value);
    }

    let grid: Vec<f64> = (0..13).map(|k| 10f64.powf(-3.0 + 0.5 * k as f64)).collect();
    println!("{:>10} {:>12} {:>12} {:>12} {:>12}", "δ", "QFI s=0", "QFI s", "FI s=0", "FI s");
    for r in sweep_delta(&base, &grid)? {
        println!(
            "{:>10.3e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e}",
            r.delta, r.qfi_unsqueezed, r.qfi_squeezed, r.fi_unsqueezed, r.fi_squeezed
        );
    }
    Ok(())
}
