//! Gaussian measurements on the output light: best homodyne angle against
//! heterodyne detection, both bounded by the quantum Fisher information.

use cslqe::csl::lambda_from_gamma;
use cslqe::dynamics::{SteadyState, SystemParams};
use cslqe::estimation::{best_homodyne, fisher_gaussian, qfi_single_mode, MeasurementSpec};

fn main() -> cslqe::Result<()> {
    let p = SystemParams::default();
    println!("{:>7} {:>12} {:>12} {:>12} {:>8} {:>7}", "log10 γ", "homodyne", "heterodyne", "QFI", "ratio", "θ_opt");
    for k in (0..=12).step_by(2) {
        let lambda = lambda_from_gamma(&p, 10f64.powi(-36 + k))?;
        let (sigma, dsigma) = SteadyState::solve(&p, lambda)?.light();
        let (spec, hom) = best_homodyne(&sigma, &dsigma)?;
        let het = fisher_gaussian(&sigma, &dsigma, &MeasurementSpec::heterodyne())?;
        let q = qfi_single_mode(&sigma, &dsigma)?;
        println!(
            "{:>7} {:>12.4e} {:>12.4e} {:>12.4e} {:>8.3} {:>7.4}",
            -36 + k,
            hom.value,
            het.value,
            q.value,
            hom.value / het.value,
            spec.theta
        );
    }

    // Intermediate squeezing interpolates between the two.
    let lambda = lambda_from_gamma(&p, 1e-30)?;
    let (sigma, dsigma) = SteadyState::solve(&p, lambda)?.light();
    let theta = best_homodyne(&sigma, &dsigma)?.0.theta;
    for l in [1.0, 0.1, 0.01, 1e-3] {
        let fi = fisher_gaussian(&sigma, &dsigma, &MeasurementSpec::new(l, theta)?)?;
        println!("l = {l:<6} FI = {:.4e}", fi.value);
    }
    Ok(())
}
