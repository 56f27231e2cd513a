//! A qubit coupled dispersively to the resonator as a CSL probe.
//!
//! The qubit starts in `cos(ϑ/2)|0⟩ + e^{iφ} sin(ϑ/2)|1⟩`, interacts through
//! `exp(−iτ δq̂ ⊗ σ̂ₓ)` with the thermalized oscillator and is then read out.
//! Its coherences decay as `e^{−ζ}` with `ζ = 2τ²(α₁ + β₁Λ)`.

use std::f64::consts::{E, PI};

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimation::{golden_max, FisherResult};

/// Bloch-sphere angles of the initial qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitPrep {
    /// Polar angle in [0, π].
    pub vartheta: f64,
    /// Azimuth in [0, 2π).
    pub varphi: f64,
}

impl QubitPrep {
    pub fn new(vartheta: f64, varphi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&vartheta) {
            return Err(Error::ValidationError { key: "vartheta".into(), message: format!("{vartheta} outside [0, π]") });
        }
        if !(0.0..2.0 * PI).contains(&varphi) {
            return Err(Error::ValidationError { key: "varphi".into(), message: format!("{varphi} outside [0, 2π)") });
        }
        Ok(Self { vartheta, varphi })
    }

    /// The computational basis state |0⟩, optimal for population readout.
    pub fn ground() -> Self {
        Self { vartheta: 0.0, varphi: 0.0 }
    }
}

/// A 2×2 density matrix with unit trace and a non-negative spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDensityMatrix(Matrix2<Complex64>);

impl QubitDensityMatrix {
    pub fn new(m: Matrix2<Complex64>) -> Result<Self> {
        let invalid = |message: String| Error::ValidationError { key: "rho".into(), message };
        if (m - m.adjoint()).norm() > 1e-12 {
            return Err(invalid("not Hermitian".into()));
        }
        let tr = m.trace();
        if (tr - 1.0).norm() > 1e-12 {
            return Err(invalid(format!("trace {tr}")));
        }
        let rho = Self(m);
        let r = rho.bloch_radius();
        if r > 1.0 + 2e-12 {
            return Err(invalid(format!("eigenvalue {}", 0.5 * (1.0 - r))));
        }
        Ok(rho)
    }

    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let c = |re, im| Complex64::new(re, im);
        Self::new(Matrix2::new(
            c(0.5 * (1.0 + r[2]), 0.0),
            c(0.5 * r[0], -0.5 * r[1]),
            c(0.5 * r[0], 0.5 * r[1]),
            c(0.5 * (1.0 - r[2]), 0.0),
        ))
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    /// Bloch vector `r` with `ρ = (I + r·σ)/2`.
    pub fn bloch(&self) -> [f64; 3] {
        bloch_of(&self.0)
    }

    fn bloch_radius(&self) -> f64 {
        let r = self.bloch();
        (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
    }

    /// Eigenvalues, larger first.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let r = self.bloch_radius();
        [0.5 * (1.0 + r), 0.5 * (1.0 - r)]
    }

    pub fn purity(&self) -> f64 {
        let r = self.bloch_radius();
        0.5 * (1.0 + r * r)
    }
}

fn bloch_of(m: &Matrix2<Complex64>) -> [f64; 3] {
    [2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re]
}

/// Characteristic function `Tr[ρ D(ξ)]` of a zero-mean Gaussian mechanical state.
pub fn characteristic_function(sigma_m: &Matrix2<f64>, xi: Complex64) -> Complex64 {
    let v = nalgebra::Vector2::new(2f64.sqrt() * xi.im, -(2f64.sqrt()) * xi.re);
    Complex64::new((-0.5 * (v.transpose() * sigma_m * v)[(0, 0)]).exp(), 0.0)
}

/// Dephasing exponent ζ = 2τ²(α₁ + β₁Λ).
pub fn decoherence_exponent(tau: f64, alpha1: f64, beta1: f64, lambda: f64) -> f64 {
    2.0 * tau * tau * (alpha1 + beta1 * lambda)
}

fn check_variance(alpha1: f64, beta1: f64, lambda: f64) -> Result<f64> {
    let a = alpha1 + beta1 * lambda;
    if !(a > 0.0) {
        return Err(Error::DomainError { x: a });
    }
    Ok(a)
}

/// Reduced qubit state after the interaction.
pub fn qubit_reduced_state(prep: &QubitPrep, tau: f64, alpha1: f64, beta1: f64, lambda: f64) -> Result<QubitDensityMatrix> {
    check_variance(alpha1, beta1, lambda)?;
    QubitDensityMatrix::from_bloch(probe_bloch(prep, decoherence_exponent(tau, alpha1, beta1, lambda)))
}

fn probe_bloch(prep: &QubitPrep, zeta: f64) -> [f64; 3] {
    let e = (-zeta).exp();
    let (st, ct) = prep.vartheta.sin_cos();
    let (sp, cp) = prep.varphi.sin_cos();
    [st * cp, e * st * sp, e * ct]
}

/// A one-parameter family of qubit states.
pub trait QubitFamily {
    fn state(&self, lambda: f64) -> Result<QubitDensityMatrix>;

    /// Bloch vector of [`state`](Self::state); override when it is known
    /// more accurately than the matrix entries resolve.
    fn bloch(&self, lambda: f64) -> Result<[f64; 3]> {
        Ok(self.state(lambda)?.bloch())
    }

    /// Derivative of the Bloch vector with respect to Λ.
    fn bloch_derivative(&self, lambda: f64) -> Result<[f64; 3]>;
}

/// The probe family at fixed preparation and interaction time, with the
/// Λ-derivative taken analytically through ζ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridProbe {
    pub prep: QubitPrep,
    pub tau: f64,
    pub alpha1: f64,
    pub beta1: f64,
}

impl QubitFamily for HybridProbe {
    fn state(&self, lambda: f64) -> Result<QubitDensityMatrix> {
        qubit_reduced_state(&self.prep, self.tau, self.alpha1, self.beta1, lambda)
    }

    fn bloch(&self, lambda: f64) -> Result<[f64; 3]> {
        check_variance(self.alpha1, self.beta1, lambda)?;
        Ok(probe_bloch(&self.prep, decoherence_exponent(self.tau, self.alpha1, self.beta1, lambda)))
    }

    fn bloch_derivative(&self, lambda: f64) -> Result<[f64; 3]> {
        let r = self.bloch(lambda)?;
        let dzeta = 2.0 * self.tau * self.tau * self.beta1;
        Ok([0.0, -dzeta * r[1], -dzeta * r[2]])
    }
}

/// Arbitrary family differentiated by central differences.
pub struct SmoothQubitFamily<F> {
    f: F,
    step: f64,
}

impl<F: Fn(f64) -> Result<QubitDensityMatrix>> SmoothQubitFamily<F> {
    pub fn new(f: F, step: f64) -> Self {
        Self { f, step }
    }
}

impl<F: Fn(f64) -> Result<QubitDensityMatrix>> QubitFamily for SmoothQubitFamily<F> {
    fn state(&self, lambda: f64) -> Result<QubitDensityMatrix> {
        (self.f)(lambda)
    }

    fn bloch_derivative(&self, lambda: f64) -> Result<[f64; 3]> {
        let hi = (self.f)(lambda + self.step)?.bloch();
        let lo = (self.f)(lambda - self.step)?.bloch();
        Ok([0, 1, 2].map(|i| (hi[i] - lo[i]) / (2.0 * self.step)))
    }
}

/// Quantum Fisher information of a qubit family from its spectral data.
///
/// With eigenvalues `λ± = (1 ± |r|)/2` the eigenvalue derivatives are
/// `±(∂r·r̂)/2` and the coherence between eigenvectors is `|∂r⊥|/2`, so the
/// classical term is `Σ(∂λ)²/λ` and the coherence term carries the weight
/// `(λ₊−λ₋)²/(λ₊+λ₋)` through the eigenvector derivative.
pub fn qfi_qubit<F: QubitFamily + ?Sized>(family: &F, lambda: f64) -> Result<FisherResult> {
    let r = family.bloch(lambda)?;
    let dr = family.bloch_derivative(lambda)?;
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let dnorm = (dr[0] * dr[0] + dr[1] * dr[1] + dr[2] * dr[2]).sqrt();
    if norm < f64::MIN_POSITIVE {
        // λ₊ = λ₋: the eigenbasis is arbitrary and only ∂ρ = 0 is well defined.
        if dnorm > 0.0 {
            return Err(Error::DegenerateSpectrum);
        }
        return Ok(FisherResult::lambda(0.0));
    }
    let unit = r.map(|x| x / norm);
    let radial = dr[0] * unit[0] + dr[1] * unit[1] + dr[2] * unit[2];
    let perp2 = (dnorm * dnorm - radial * radial).max(0.0);
    let lams = [0.5 * (1.0 + norm), 0.5 * (1.0 - norm)];
    let dlams = [0.5 * radial, -0.5 * radial];
    let mut classical = 0.0;
    for (l, dl) in lams.iter().zip(dlams) {
        if *l < 1e-14 {
            if dl.abs() > 1e-12 * dnorm.max(f64::MIN_POSITIVE) {
                return Err(Error::DegenerateOutcome);
            }
            continue;
        }
        classical += dl * dl / l;
    }
    // 4|∂ρ₊₋|²/(λ₊+λ₋) with |∂ρ₊₋| = |∂r⊥|/2 and unit trace.
    let coherence = perp2;
    Ok(FisherResult::lambda(classical + coherence))
}

/// Fisher information of a population measurement, from first principles,
/// alongside the compact expression that is a quarter of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationFisher {
    pub fisher: FisherResult,
    /// τ⁴β₁²cos²ϑ / (e^{2ζ} − cos²ϑ).
    pub compact_form: f64,
}

/// Two-outcome Fisher information `Σⱼ (∂pⱼ)²/pⱼ` of measuring σ̂_z.
pub fn fi_population(prep: &QubitPrep, tau: f64, alpha1: f64, beta1: f64, lambda: f64) -> Result<PopulationFisher> {
    check_variance(alpha1, beta1, lambda)?;
    let zeta = decoherence_exponent(tau, alpha1, beta1, lambda);
    let c = prep.vartheta.cos();
    let p0 = 0.5 * (1.0 + (-zeta).exp() * c);
    let p1 = 0.5 * (1.0 - (-zeta).exp() * c);
    if p0 < 1e-300 || p1 < 1e-300 {
        return Err(Error::DegenerateOutcome);
    }
    let s = prep.vartheta.sin();
    // e^{2ζ} − cos²ϑ without cancellation for small ζ.
    let gap = (2.0 * zeta).exp_m1() + s * s;
    let compact = tau.powi(4) * beta1 * beta1 * c * c / gap;
    Ok(PopulationFisher { fisher: FisherResult::lambda(4.0 * compact), compact_form: compact })
}

/// Principal branch of the Lambert W function, by Halley iteration.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if x.is_nan() || x < branch - 1e-16 {
        return Err(Error::DomainError { x });
    }
    if x <= branch {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let mut w = if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        (1.0 + x).ln() * 0.75
    } else {
        let l = x.ln();
        l - l.ln()
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 1e-16 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

/// Interaction time maximizing the population Fisher information,
/// `τ_opt = ½√[(2 + W(−2/e²))/(α₁ + β₁Λ)]`.
pub fn optimal_time(alpha1: f64, beta1: f64, lambda: f64) -> Result<f64> {
    let a = check_variance(alpha1, beta1, lambda)?;
    let w = lambert_w0(-2.0 / (E * E))?;
    Ok(0.5 * ((2.0 + w) / a).sqrt())
}

/// What [`optimize_preparation`] maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// Population-measurement Fisher information.
    Fisher,
    /// Quantum Fisher information of the reduced state.
    Quantum,
}

/// Best preparation on a 181 × 360 grid over (ϑ, φ), polished by
/// golden-section searches around the incumbent.
pub fn optimize_preparation(
    tau: f64,
    alpha1: f64,
    beta1: f64,
    lambda: f64,
    target: Target,
) -> Result<(QubitPrep, FisherResult)> {
    check_variance(alpha1, beta1, lambda)?;
    let score = |vt: f64, vp: f64| -> f64 {
        let prep = QubitPrep { vartheta: vt, varphi: vp };
        let v = match target {
            Target::Fisher => fi_population(&prep, tau, alpha1, beta1, lambda).map(|f| f.fisher.value),
            Target::Quantum => qfi_qubit(&HybridProbe { prep, tau, alpha1, beta1 }, lambda).map(|f| f.value),
        };
        v.unwrap_or(f64::NEG_INFINITY)
    };
    let dt = PI / 180.0;
    let dp = 2.0 * PI / 360.0;
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 0..=180 {
        for j in 0..360 {
            let (vt, vp) = (i as f64 * dt, j as f64 * dp);
            let v = score(vt, vp);
            if v > best.2 {
                best = (vt, vp, v);
            }
        }
    }
    let (mut vt, mut vp, mut value) = best;
    let vt_new = golden_max(|t| score(t, vp), (vt - dt).max(0.0), (vt + dt).min(PI), 1e-10);
    let v = score(vt_new, vp);
    if v > value * (1.0 + 1e-14) {
        vt = vt_new;
        value = v;
    }
    let vp_new = golden_max(|p| score(vt, p.rem_euclid(2.0 * PI)), vp - dp, vp + dp, 1e-10).rem_euclid(2.0 * PI);
    let v = score(vt, vp_new);
    if v > value * (1.0 + 1e-14) {
        vp = vp_new;
        value = v;
    }
    if !value.is_finite() {
        return Err(Error::DegenerateOutcome);
    }
    Ok((QubitPrep { vartheta: vt, varphi: vp }, FisherResult::lambda(value)))
}

/// Brute-force reduced state: a thermal oscillator truncated to `cutoff`
/// Fock states (renormalized), evolved exactly under the interaction in the
/// σ̂ₓ eigenbasis, with the oscillator traced out.
pub fn fock_reduced_state(n_bar: f64, prep: &QubitPrep, tau: f64, cutoff: usize) -> Result<QubitDensityMatrix> {
    if cutoff < 2 || !(n_bar >= 0.0) {
        return Err(Error::DomainError { x: n_bar });
    }
    // q = (a + a†)/√2 in the number basis.
    let mut q = DMatrix::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        let x = (n as f64 / 2.0).sqrt();
        q[(n - 1, n)] = x;
        q[(n, n - 1)] = x;
    }
    let eig = q.symmetric_eigen();
    let ratio = if n_bar == 0.0 { 0.0 } else { n_bar / (n_bar + 1.0) };
    let mut pops: Vec<f64> = (0..cutoff).map(|n| ratio.powi(n as i32)).collect();
    let norm: f64 = pops.iter().sum();
    pops.iter_mut().for_each(|p| *p /= norm);

    // Tr[ρ U₋† U₊] with U± = exp(∓iτq), so U₋†U₊ = exp(−2iτq).
    let phases: Vec<Complex64> = eig.eigenvalues.iter().map(|w| Complex64::from_polar(1.0, -2.0 * tau * w)).collect();
    let mut overlap = Complex64::new(0.0, 0.0);
    for (n, p) in pops.iter().enumerate() {
        let mut diag = Complex64::new(0.0, 0.0);
        for (k, ph) in phases.iter().enumerate() {
            let v = eig.eigenvectors[(n, k)];
            diag += ph * (v * v);
        }
        overlap += diag * *p;
    }

    let half = prep.vartheta / 2.0;
    let e_phi = Complex64::from_polar(1.0, prep.varphi);
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let c_plus = (Complex64::new(half.cos(), 0.0) + e_phi * half.sin()) * s2;
    let c_minus = (Complex64::new(half.cos(), 0.0) - e_phi * half.sin()) * s2;
    let plus = [Complex64::new(s2, 0.0), Complex64::new(s2, 0.0)];
    let minus = [Complex64::new(s2, 0.0), Complex64::new(-s2, 0.0)];
    let outer = |a: &[Complex64; 2], b: &[Complex64; 2]| Matrix2::from_fn(|i, j| a[i] * b[j].conj());
    let coh = c_plus * c_minus.conj() * overlap;
    let m = outer(&plus, &plus) * Complex64::new(c_plus.norm_sqr(), 0.0)
        + outer(&minus, &minus) * Complex64::new(c_minus.norm_sqr(), 0.0)
        + outer(&plus, &minus) * coh
        + outer(&minus, &plus) * coh.conj();
    QubitDensityMatrix::new(m)
}
