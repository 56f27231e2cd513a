//! Symplectic linear algebra on quadrature covariance matrices.
//!
//! Every covariance in this crate follows the convention that the vacuum has
//! variance ½ in each quadrature, with the canonical vector ordered
//! `(q₁, p₁, q₂, p₂, …)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Slack allowed below the uncertainty bound before a state is rejected.
pub const PHYSICAL_SLACK: f64 = 1e-12;

/// Mean vector and covariance of an n-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianState {
    /// Builds a state after checking dimensions and physicality.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != cov.ncols() || cov.nrows() % 2 != 0 || cov.nrows() == 0 {
            return Err(Error::ValidationError {
                key: "cov".into(),
                message: format!("expected 2n x 2n, got {}x{}", cov.nrows(), cov.ncols()),
            });
        }
        if mean.len() != cov.nrows() {
            return Err(Error::ValidationError {
                key: "mean".into(),
                message: format!("length {} does not match covariance", mean.len()),
            });
        }
        if !check_physical(&cov) {
            return Err(Error::NonPositiveDefinite);
        }
        Ok(Self { mean, cov })
    }

    /// Zero-mean state with the given covariance.
    pub fn centered(cov: DMatrix<f64>) -> Result<Self> {
        let n = cov.nrows();
        Self::new(DVector::zeros(n), cov)
    }

    pub fn n_modes(&self) -> usize {
        self.cov.nrows() / 2
    }
}

/// Result of a Williamson decomposition: `S σ Sᵀ = diag(d₁, d₁, …, dₙ, dₙ)`.
#[derive(Debug, Clone)]
pub struct SymplecticDecomposition {
    pub s: DMatrix<f64>,
    /// Symplectic eigenvalues, sorted descending.
    pub d: Vec<f64>,
}

/// The standard symplectic form, a direct sum of `[[0, 1], [-1, 0]]` blocks.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for j in 0..n_modes {
        omega[(2 * j, 2 * j + 1)] = 1.0;
        omega[(2 * j + 1, 2 * j)] = -1.0;
    }
    omega
}

struct Roots {
    sqrt: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
}

fn validate(cov: &DMatrix<f64>) -> Result<usize> {
    let n = cov.nrows();
    if n == 0 || n % 2 != 0 || cov.ncols() != n {
        return Err(Error::NonPositiveDefinite);
    }
    if cov.iter().any(|x| !x.is_finite()) || cov.clone().cholesky().is_none() {
        return Err(Error::NonPositiveDefinite);
    }
    Ok(n / 2)
}

fn roots(cov: &DMatrix<f64>) -> Result<Roots> {
    let sym = 0.5 * (cov + cov.transpose());
    let eig = sym.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&w| w <= 0.0) {
        return Err(Error::NonPositiveDefinite);
    }
    let v = &eig.eigenvectors;
    let sq = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let isq = DMatrix::from_diagonal(&eig.eigenvalues.map(|w| 1.0 / w.sqrt()));
    Ok(Roots {
        sqrt: v * sq * v.transpose(),
        inv_sqrt: v * isq * v.transpose(),
    })
}

/// Williamson normal form of a positive-definite covariance.
///
/// Uses the antisymmetric matrix `M = σ^{1/2} Ω σ^{1/2}`, whose real normal
/// form `O (⊕ dⱼ J) Oᵀ` gives `S = D^{1/2} Oᵀ σ^{-1/2}`.
pub fn williamson(cov: &DMatrix<f64>) -> Result<SymplecticDecomposition> {
    let n = validate(cov)?;
    let r = roots(cov)?;
    let m = &r.sqrt * symplectic_form(n) * &r.sqrt;
    let k = m.transpose() * &m;
    let eig = (0.5 * (&k + k.transpose())).symmetric_eigen();

    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(2 * n);
    let mut d = Vec::with_capacity(n);
    for &idx in &order {
        if d.len() == n {
            break;
        }
        let mut u = eig.eigenvectors.column(idx).into_owned();
        // Gram-Schmidt against pairs already taken; matters inside degenerate clusters.
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&u);
                u -= b * c;
            }
        }
        let norm = u.norm();
        if norm < 0.5 {
            continue;
        }
        u /= norm;
        let mu = &m * &u;
        let dj = mu.norm();
        basis.push(u);
        basis.push(-mu / dj);
        d.push(dj);
    }
    if d.len() != n {
        return Err(Error::NonPositiveDefinite);
    }

    let o = DMatrix::from_columns(&basis);
    let half = DMatrix::from_fn(2 * n, 2 * n, |i, j| if i == j { d[i / 2].sqrt() } else { 0.0 });
    let s = half * o.transpose() * &r.inv_sqrt;
    Ok(SymplecticDecomposition { s, d })
}

/// Symplectic eigenvalues (moduli of the spectrum of `iΩσ`), sorted descending.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = validate(cov)?;
    let r = roots(cov)?;
    let m = &r.sqrt * symplectic_form(n) * &r.sqrt;
    let k = m.transpose() * &m;
    let mut w: Vec<f64> = (0.5 * (&k + k.transpose()))
        .symmetric_eigenvalues()
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    w.sort_by(|a, b| b.total_cmp(a));
    Ok(w.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// True when the covariance respects the uncertainty principle.
pub fn check_physical(cov: &DMatrix<f64>) -> bool {
    match symplectic_eigenvalues(cov) {
        Ok(d) => d.iter().all(|&x| x >= 0.5 - PHYSICAL_SLACK),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn rel_frob(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / b.norm()
    }

    fn random_symplectic(n: usize, seeds: &[f64]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        let mut it = seeds.iter().cycle();
        for i in 0..2 * n {
            for j in i..2 * n {
                let x = *it.next().unwrap();
                h[(i, j)] = x;
                h[(j, i)] = x;
            }
        }
        (symplectic_form(n) * h).exp()
    }

    fn thermal_product(n: usize, occ: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(2 * n, 2 * n, |i, j| if i == j { occ[i / 2] + 0.5 } else { 0.0 })
    }

    #[test]
    fn form_is_orthogonal_and_squares_to_minus_identity() {
        for n in 1..4 {
            let o = symplectic_form(n);
            assert_eq!(&o * o.transpose(), DMatrix::identity(2 * n, 2 * n));
            assert_eq!(&o * &o, -DMatrix::identity(2 * n, 2 * n));
        }
        assert_eq!(symplectic_form(1), DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
    }

    #[test]
    fn vacuum_is_fixed() {
        let dec = williamson(&DMatrix::from_diagonal_element(2, 2, 0.5)).unwrap();
        assert_relative_eq!(dec.d[0], 0.5, epsilon = 1e-14);
        assert!(rel_frob(&dec.s.abs(), &DMatrix::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn squeezed_thermal_decomposes() {
        let e2 = std::f64::consts::E.powi(2);
        let sigma = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0 * e2, 2.0 / e2]));
        let dec = williamson(&sigma).unwrap();
        assert_relative_eq!(dec.d[0], 2.0, max_relative = 1e-12);
        let diag = &dec.s * &sigma * dec.s.transpose();
        assert!(rel_frob(&diag, &DMatrix::from_diagonal_element(2, 2, 2.0)) < 1e-12);
        // The diagonal squeezer diag(e⁻¹, e) is one valid S, up to a rotation.
        let e = std::f64::consts::E;
        let expect = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0 / e, e]));
        let rot = &dec.s * expect.try_inverse().unwrap();
        assert!(rel_frob(&(&rot * rot.transpose()), &DMatrix::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn eigenvalue_examples() {
        assert_relative_eq!(symplectic_eigenvalues(&DMatrix::from_diagonal_element(2, 2, 0.5)).unwrap()[0], 0.5);
        assert_relative_eq!(symplectic_eigenvalues(&DMatrix::from_diagonal_element(2, 2, 1.5)).unwrap()[0], 1.5);
        let d = symplectic_eigenvalues(&DMatrix::from_diagonal_element(4, 4, 0.5)).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|x| (x - 0.5).abs() < 1e-14));
    }

    #[test]
    fn physicality_examples() {
        assert!(check_physical(&DMatrix::from_diagonal_element(2, 2, 0.5)));
        assert!(!check_physical(&DMatrix::from_diagonal_element(2, 2, 0.4)));
        assert!(check_physical(&DMatrix::from_diagonal_element(2, 2, 1.5)));
        assert!(!check_physical(&DMatrix::from_diagonal_element(2, 2, -1.0)));
    }

    #[test]
    fn non_positive_definite_is_rejected() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(williamson(&bad), Err(Error::NonPositiveDefinite)));
    }

    #[test]
    fn degenerate_two_mode_spectrum() {
        let s = random_symplectic(2, &[0.3, -0.2, 0.1, 0.05, 0.4, -0.1, 0.2, 0.15, -0.3, 0.25]);
        let sigma = &s * thermal_product(2, &[1.0, 1.0]) * s.transpose();
        let dec = williamson(&sigma).unwrap();
        assert!(rel_frob(&(&dec.s * symplectic_form(2) * dec.s.transpose()), &symplectic_form(2)) < 1e-10);
        let diag = &dec.s * &sigma * dec.s.transpose();
        assert!(rel_frob(&diag, &thermal_product(2, &[1.0, 1.0])) < 1e-10);
    }

    fn hamiltonian_seeds() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-0.6f64..0.6, 10)
    }

    proptest! {
        #[test]
        fn decomposition_invariants(seeds in hamiltonian_seeds(), n1 in 0.0f64..5.0, n2 in 0.0f64..5.0) {
            let s = random_symplectic(2, &seeds);
            let sigma = &s * thermal_product(2, &[n1, n2]) * s.transpose();
            let dec = williamson(&sigma).unwrap();
            let omega = symplectic_form(2);
            prop_assert!(rel_frob(&(&dec.s * &omega * dec.s.transpose()), &omega) < 1e-10);
            let diag = &dec.s * &sigma * dec.s.transpose();
            let dmax = dec.d[0];
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        prop_assert!(diag[(i, j)].abs() < 1e-10 * dmax);
                    }
                }
                prop_assert!((diag[(i, i)] - dec.d[i / 2]).abs() < 1e-10 * dmax);
            }
            prop_assert!(dec.d[0] >= dec.d[1]);
            let prod: f64 = dec.d.iter().map(|x| x * x).product();
            prop_assert!((sigma.determinant() - prod).abs() < 1e-10 * prod);
        }

        #[test]
        fn eigenvalues_are_symplectic_invariants(seeds in hamiltonian_seeds(), other in hamiltonian_seeds(),
                                                 n1 in 0.0f64..5.0, n2 in 0.0f64..5.0) {
            let s = random_symplectic(2, &seeds);
            let sigma = &s * thermal_product(2, &[n1, n2]) * s.transpose();
            let t = random_symplectic(2, &other);
            let moved = &t * &sigma * t.transpose();
            let a = symplectic_eigenvalues(&sigma).unwrap();
            let b = symplectic_eigenvalues(&moved).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9 * x.max(1.0));
            }
            let mut expect = [n1 + 0.5, n2 + 0.5];
            expect.sort_by(|a, b| b.total_cmp(a));
            prop_assert!((a[0] - expect[0]).abs() < 1e-9 * expect[0]);
            prop_assert!(check_physical(&sigma));
        }
    }
}
