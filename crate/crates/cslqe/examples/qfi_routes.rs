//! The same quantum Fisher information from three constructions: the
//! single-mode closed form, the symmetric logarithmic derivative, and the
//! curvature of the fidelity.

use cslqe::csl::lambda_from_gamma;
use cslqe::dynamics::{SteadyState, SystemParams};
use cslqe::estimation::{qfi_fidelity, qfi_single_mode, qfi_sld, AffineFamily};

fn main() -> cslqe::Result<()> {
    for mass in [1.5e-11, 1.5e-10, 5e-10] {
        let p = SystemParams { mass, ..SystemParams::default() };
        let lambda = lambda_from_gamma(&p, 1e-28)?;
        let ss = SteadyState::solve(&p, lambda)?;
        let (sigma, dsigma) = ss.mech();
        let family = AffineFamily::single_mode(&(sigma - dsigma * lambda), &dsigma);
        let a = qfi_single_mode(&sigma, &dsigma)?.value;
        let b = qfi_sld(&family, lambda)?.value;
        let c = qfi_fidelity(&family, lambda)?.value;
        println!(
            "m = {:>3.0} ng  closed {a:.10e}  sld {b:.10e}  fidelity {c:.10e}  max rel. spread {:.1e}",
            mass * 1e12,
            [(a - b).abs(), (a - c).abs(), (b - c).abs()].into_iter().fold(0.0, f64::max) / a
        );
    }
    Ok(())
}
