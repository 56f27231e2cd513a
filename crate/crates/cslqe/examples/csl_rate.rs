//! CSL rate of a silica sphere: closed form versus a real-space grid, and
//! the coupling at which collapse heating overtakes the thermal bath.

use cslqe::constants::{GAMMA_ADLER, GAMMA_GRW};
use cslqe::csl::{crossover_gamma, eta_grid, eta_sphere, lambda_from_gamma, Boundary, DensityGrid, SphereGeometry};
use cslqe::dynamics::SystemParams;

fn main() -> cslqe::Result<()> {
    let r_c = 1e-7;
    println!("{:>8} {:>14} {:>14} {:>9}", "R/r_c", "eta_sphere", "eta_grid", "rel.diff");
    for ratio in [0.25, 0.5, 1.0, 2.0] {
        let geom = SphereGeometry::from_radius_density(ratio * r_c, 2200.0);
        let exact = eta_sphere(&geom, r_c, GAMMA_ADLER)?;
        let grid = DensityGrid::sphere(&geom, r_c / 10.0, 25);
        let numeric = eta_grid(&grid, r_c, GAMMA_ADLER, Boundary::Open)?;
        println!("{ratio:>8} {exact:>14.6e} {numeric:>14.6e} {:>9.2e}", (numeric - exact).abs() / exact);
    }

    for mass in [1.5e-11, 1.5e-10, 5e-10] {
        let p = SystemParams { mass, ..SystemParams::default() };
        println!(
            "m = {:>5.0} ng: Λ(γ_GRW) = {:.3e}, Λ(γ_A) = {:.3e} rad/s, crossover γ = {:.3e} m³/s",
            mass * 1e12,
            lambda_from_gamma(&p, GAMMA_GRW)?,
            lambda_from_gamma(&p, GAMMA_ADLER)?,
            crossover_gamma(&p)?
        );
    }
    Ok(())
}
