//! A qubit dispersively coupled to the mechanics as a probe of collapse
//! heating: reduced state, optimal interaction time and best preparation.

use std::f64::consts::PI;

use cslqe::csl::lambda_from_gamma;
use cslqe::dynamics::{mech_coefficients, SystemParams};
use cslqe::hybrid::{fi_population, fock_reduced_state, optimal_time, optimize_preparation, qubit_reduced_state, QubitPrep, Target};

fn main() -> cslqe::Result<()> {
    let p = SystemParams::default();
    let lambda = lambda_from_gamma(&p, 1e-28)?;
    let c = mech_coefficients(&p)?;
    let tau = optimal_time(c.alpha1, c.beta1, lambda)?;
    println!("α₁ = {:.4e}, β₁ = {:.4e} s, Λ = {:.4e} rad/s, τ_opt = {tau:.6e}", c.alpha1, c.beta1, lambda);

    println!("{:>10} {:>14} {:>14}", "τ/τ_opt", "FI", "compact form");
    for f in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let fi = fi_population(&QubitPrep::ground(), f * tau, c.alpha1, c.beta1, lambda)?;
        println!("{f:>10} {:>14.6e} {:>14.6e}", fi.fisher.value, fi.compact_form);
    }

    for target in [Target::Fisher, Target::Quantum] {
        let (prep, value) = optimize_preparation(tau, c.alpha1, c.beta1, lambda, target)?;
        println!("{target:?}: ϑ = {:.4}, φ = {:.4}, value {:.6e}", prep.vartheta, prep.varphi, value.value);
    }

    // Gaussian reduced state against an explicit truncated thermal oscillator.
    let prep = QubitPrep::new(PI / 3.0, 1.0)?;
    let n_bar = 2.0;
    let exact = qubit_reduced_state(&prep, 0.4, n_bar + 0.5, 0.0, 0.0)?;
    let fock = fock_reduced_state(n_bar, &prep, 0.4, 80)?;
    println!("max |ρ_Gauss − ρ_Fock| = {:.2e}", (exact.matrix() - fock.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max));
    Ok(())
}
