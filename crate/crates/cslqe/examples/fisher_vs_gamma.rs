//! Quantum Fisher information of the mechanical and optical modes across
//! the collapse coupling: a plateau set by thermal noise, then a knee.

use cslqe::csl::lambda_from_gamma;
use cslqe::dynamics::{SteadyState, SystemParams};
use cslqe::estimation::{qfi_single_mode, snr};

fn main() -> cslqe::Result<()> {
    let p = SystemParams::default();
    println!("{:>7} {:>12} {:>12} {:>12} {:>9} {:>9}", "log10 γ", "Λ", "QFI mech", "QFI opt", "S_Q mech", "S_Q opt");
    for k in 0..=12 {
        let gamma = 10f64.powi(-36 + k);
        let lambda = lambda_from_gamma(&p, gamma)?;
        let ss = SteadyState::solve(&p, lambda)?;
        let (sm, dm) = ss.mech();
        let (so, d_o) = ss.light();
        let qm = qfi_single_mode(&sm, &dm)?;
        let qo = qfi_single_mode(&so, &d_o)?;
        println!(
            "{:>7} {:>12.4e} {:>12.4e} {:>12.4e} {:>9.3e} {:>9.3e}",
            -36 + k,
            lambda,
            qm.value,
            qo.value,
            snr(lambda, &qm),
            snr(lambda, &qo)
        );
    }
    Ok(())
}
