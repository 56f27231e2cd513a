//! Williamson normal form of a two-mode squeezed thermal state.

use cslqe::symplectic::{check_physical, symplectic_form, williamson};
use nalgebra::DMatrix;

fn main() -> cslqe::Result<()> {
    let (n1, n2, r) = (0.3, 2.0, 0.8);
    let (c, s) = ((2.0 * r as f64).cosh(), (2.0 * r as f64).sinh());
    // Thermal occupations n1, n2 passed through a two-mode squeezer.
    let a = (n1 + n2 + 1.0) * 0.5 * c + 0.5 * (n1 - n2);
    let b = (n1 + n2 + 1.0) * 0.5 * c - 0.5 * (n1 - n2);
    let k = (n1 + n2 + 1.0) * 0.5 * s;
    #[rustfmt::skip]
    let cov = DMatrix::from_row_slice(4, 4, &[
        a, 0.0, k, 0.0,
        0.0, a, 0.0, -k,
        k, 0.0, b, 0.0,
        0.0, -k, 0.0, b,
    ]);
    println!("physical: {}", check_physical(&cov));

    let dec = williamson(&cov)?;
    println!("symplectic eigenvalues: {:?}", dec.d);
    println!("expected:               [{}, {}]", n2 + 0.5, n1 + 0.5);

    let omega = symplectic_form(2);
    let defect = (&dec.s * &omega * dec.s.transpose() - &omega).norm();
    println!("|S Ω Sᵀ − Ω| = {defect:.2e}");
    println!("S σ Sᵀ =\n{:.6}", &dec.s * &cov * dec.s.transpose());
    Ok(())
}
