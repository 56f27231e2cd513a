//! Steady state of the reference optomechanical setup and the transient
//! that relaxes to it from the vacuum.

use cslqe::csl::lambda_from_gamma;
use cslqe::constants::GAMMA_ADLER;
use cslqe::dynamics::{blocks, effective_coupling, mech_coefficients, propagate, stability_check, SteadyState, SystemParams};
use nalgebra::Matrix4;

fn main() -> cslqe::Result<()> {
    let p = SystemParams::default();
    let lambda = lambda_from_gamma(&p, GAMMA_ADLER)?;
    println!("χ = {:.6e} rad/s, n̄ = {:.3}, Λ(γ_A) = {:.4e} rad/s", effective_coupling(&p), p.n_bar(), lambda);

    let ss = SteadyState::solve(&p, lambda)?;
    println!("stable: {}", stability_check(&cslqe::dynamics::drift_matrix(&p)));
    println!("σ_ss =\n{:.6e}", ss.sigma);

    let c = mech_coefficients(&p)?;
    let b = blocks(&ss.sigma);
    println!("⟨δq²⟩ solver {:.12e}  closed form {:.12e}", b.mech[(0, 0)], c.position_variance(lambda));
    println!("⟨δp²⟩ solver {:.12e}  closed form {:.12e}", b.mech[(1, 1)], c.momentum_variance(lambda));

    let pair = cslqe::dynamics::DriftNoisePair::new(&p, lambda);
    let t = 20.0 / p.gamma_m.min(p.kappa);
    let vacuum = Matrix4::identity() * 0.5;
    for frac in [0.01, 0.1, 0.5, 1.0] {
        let sigma = propagate(&vacuum, &pair.a, &pair.d, frac * t, 1e-7)?;
        println!("t = {:5.2} s  |σ(t) − σ_ss| = {:.3e}", frac * t, (sigma - ss.sigma).norm());
    }
    Ok(())
}
