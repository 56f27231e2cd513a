//! Linearized optomechanics: drift and noise matrices, the steady-state
//! Lyapunov solve, transient propagation and the closed-form mechanical
//! variances.
//!
//! Quadratures are ordered `(δq, δp, δX, δY)`: mechanics first, then the
//! cavity field. All rates are angular (rad/s).

use nalgebra::{Matrix2, Matrix4, SMatrix, SVector};

use crate::constants::{C, HBAR};
use crate::csl::{thermal_occupation, SphereGeometry};
use crate::error::{Error, Result};

/// Physical inputs of the optomechanical model, in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Effective mass (kg).
    pub mass: f64,
    /// Mechanical angular frequency (rad/s).
    pub omega_m: f64,
    /// Mechanical damping rate (rad/s).
    pub gamma_m: f64,
    /// Cavity amplitude decay rate (rad/s).
    pub kappa: f64,
    /// Detuning of the drive from the cavity resonance (rad/s).
    pub delta: f64,
    /// Cavity length (m).
    pub cavity_length: f64,
    /// Input laser power (W).
    pub laser_power: f64,
    /// Cavity resonance wavelength (m).
    pub laser_wavelength: f64,
    /// Bath temperature (K).
    pub temperature: f64,
    /// CSL correlation length (m).
    pub r_c: f64,
    /// Density of the homogeneous sphere used to convert γ to Λ (kg/m³).
    pub material_density: f64,
}

impl Default for SystemParams {
    /// The reference configuration: a 15 ng silica sphere at 1 mK in a
    /// 25 mm cavity driven with 2 mW at 1064 nm, red-detuned by 5κ.
    fn default() -> Self {
        let omega_m = 2.0 * std::f64::consts::PI * 2.75e5;
        let kappa = 5e7;
        Self {
            mass: 1.5e-11,
            omega_m,
            gamma_m: omega_m / 1e5,
            kappa,
            delta: 5.0 * kappa,
            cavity_length: 25e-3,
            laser_power: 2e-3,
            laser_wavelength: 1064e-9,
            temperature: 1e-3,
            r_c: 1e-7,
            material_density: 2200.0,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("kappa", self.kappa),
            ("cavity_length", self.cavity_length),
            ("laser_power", self.laser_power),
            ("laser_wavelength", self.laser_wavelength),
            ("temperature", self.temperature),
            ("r_c", self.r_c),
            ("material_density", self.material_density),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::ValidationError {
                    key: key.into(),
                    message: format!("must be finite and positive, got {v}"),
                });
            }
        }
        if !self.delta.is_finite() {
            return Err(Error::ValidationError {
                key: "delta".into(),
                message: "must be finite".into(),
            });
        }
        if self.delta >= self.cavity_frequency() {
            return Err(Error::ValidationError {
                key: "delta".into(),
                message: "detuning exceeds the cavity frequency".into(),
            });
        }
        Ok(())
    }

    /// Cavity resonance ω_c = 2πc/λ.
    pub fn cavity_frequency(&self) -> f64 {
        2.0 * std::f64::consts::PI * C / self.laser_wavelength
    }

    /// Thermal phonon number of the mechanical bath.
    pub fn n_bar(&self) -> f64 {
        thermal_occupation(self.omega_m, self.temperature)
    }

    /// Homogeneous sphere of the configured mass and density.
    pub fn sphere(&self) -> SphereGeometry {
        SphereGeometry::from_mass_density(self.mass, self.material_density)
    }
}

/// Linearized coupling χ = √2 χ₀ ℰ / √(κ² + Δ²).
pub fn effective_coupling(p: &SystemParams) -> f64 {
    let omega_c = p.cavity_frequency();
    let chi0 = omega_c / p.cavity_length * (HBAR / (p.mass * p.omega_m)).sqrt();
    let omega_0 = omega_c - p.delta;
    let pump = (2.0 * p.laser_power * p.kappa / (HBAR * omega_0)).sqrt();
    std::f64::consts::SQRT_2 * chi0 * pump / p.kappa.hypot(p.delta)
}

pub fn drift_matrix(p: &SystemParams) -> Matrix4<f64> {
    let chi = effective_coupling(p);
    #[rustfmt::skip]
    let a = Matrix4::new(
        0.0,        p.omega_m,  0.0,       0.0,
        -p.omega_m, -p.gamma_m, chi,       0.0,
        0.0,        0.0,        -p.kappa,  p.delta,
        chi,        0.0,        -p.delta,  -p.kappa,
    );
    a
}

/// Diffusion matrix diag(0, γ_m(2n̄+1) + Λ, κ, κ).
pub fn noise_matrix(p: &SystemParams, lambda: f64) -> Matrix4<f64> {
    let gamma = p.gamma_m * (2.0 * p.n_bar() + 1.0) + lambda;
    Matrix4::from_diagonal(&nalgebra::Vector4::new(0.0, gamma, p.kappa, p.kappa))
}

/// Drift and diffusion of the linear Langevin equations at a given Λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftNoisePair {
    pub a: Matrix4<f64>,
    pub d: Matrix4<f64>,
}

impl DriftNoisePair {
    pub fn new(p: &SystemParams, lambda: f64) -> Self {
        Self {
            a: drift_matrix(p),
            d: noise_matrix(p, lambda),
        }
    }
}

fn max_real_eigenvalue(a: &Matrix4<f64>) -> f64 {
    a.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// True iff every eigenvalue of `a` has negative real part.
pub fn stability_check(a: &Matrix4<f64>) -> bool {
    max_real_eigenvalue(a) < 0.0
}

fn lyapunov_operator(a: &Matrix4<f64>) -> SMatrix<f64, 16, 16> {
    // vec(Aσ + σAᵀ) = (I⊗A + A⊗I) vec(σ), column-major.
    let mut op = SMatrix::<f64, 16, 16>::zeros();
    for j in 0..4 {
        for i in 0..4 {
            let row = i + 4 * j;
            for k in 0..4 {
                op[(row, k + 4 * j)] += a[(i, k)];
                op[(row, i + 4 * k)] += a[(j, k)];
            }
        }
    }
    op
}

fn lyapunov_residual(a: &Matrix4<f64>, sigma: &Matrix4<f64>, d: &Matrix4<f64>) -> Matrix4<f64> {
    a * sigma + sigma * a.transpose() + d
}

/// Solves `Aσ + σAᵀ + D = 0` for a stable drift.
pub fn steady_state(a: &Matrix4<f64>, d: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    let max_re = max_real_eigenvalue(a);
    if max_re >= 0.0 {
        return Err(Error::UnstableDrift { max_real: max_re });
    }
    let scale = a.amax();
    let a_s = a / scale;
    let lu = lyapunov_operator(&a_s).lu();
    let solve = |rhs: &Matrix4<f64>| -> Result<Matrix4<f64>> {
        let b = SVector::<f64, 16>::from_column_slice(rhs.as_slice());
        let x = lu.solve(&b).ok_or(Error::UnstableDrift { max_real: max_re })?;
        Ok(Matrix4::from_column_slice(x.as_slice()))
    };
    let d_s = d / scale;
    let mut sigma = solve(&(-d_s))?;
    for _ in 0..2 {
        let r = lyapunov_residual(&a_s, &sigma, &d_s);
        sigma -= solve(&r)?;
    }
    Ok(0.5 * (sigma + sigma.transpose()))
}

/// Integrates `dσ/dt = Aσ + σAᵀ + D` from `sigma0` over `[0, t_final]`.
///
/// The one-step propagator `(Φ_h, Q_h)` of a base step `h ≤ dt_max` is built
/// with step-halving RK4, then composed by repeated doubling, so long horizons
/// cost a logarithmic number of matrix products.
pub fn propagate(
    sigma0: &Matrix4<f64>,
    a: &Matrix4<f64>,
    d: &Matrix4<f64>,
    t_final: f64,
    dt_max: f64,
) -> Result<Matrix4<f64>> {
    if t_final <= 0.0 {
        return Ok(*sigma0);
    }
    let mut doublings = 0u32;
    let mut h0 = t_final;
    while h0 > dt_max {
        h0 *= 0.5;
        doublings += 1;
    }
    let (mut e, mut q) = base_step(a, d, h0, dt_max)?;
    let id = Matrix4::identity();
    for _ in 0..doublings {
        let phi = id + e;
        q = phi * q * phi.transpose() + q;
        e = 2.0 * e + e * e;
    }
    let phi = id + e;
    let sigma = phi * sigma0 * phi.transpose() + q;
    Ok(0.5 * (sigma + sigma.transpose()))
}

type Pair = (Matrix4<f64>, Matrix4<f64>);

fn rhs(a: &Matrix4<f64>, d: &Matrix4<f64>, (e, q): &Pair) -> Pair {
    (a + a * e, a * q + q * a.transpose() + d)
}

fn rk4(a: &Matrix4<f64>, d: &Matrix4<f64>, y: &Pair, h: f64) -> Pair {
    let add = |y: &Pair, k: &Pair, s: f64| (y.0 + k.0 * s, y.1 + k.1 * s);
    let k1 = rhs(a, d, y);
    let k2 = rhs(a, d, &add(y, &k1, 0.5 * h));
    let k3 = rhs(a, d, &add(y, &k2, 0.5 * h));
    let k4 = rhs(a, d, &add(y, &k3, h));
    (
        y.0 + (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0) * (h / 6.0),
        y.1 + (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1) * (h / 6.0),
    )
}

/// Propagator increment `E = Φ_h − I` and accumulated noise `Q_h` over `h`.
fn base_step(a: &Matrix4<f64>, d: &Matrix4<f64>, h: f64, dt_max: f64) -> Result<Pair> {
    const TOL: f64 = 1e-10;
    // Steps are h/2^level so that they tile [0, h] exactly.
    const FINEST: u32 = 60;
    let min_step = dt_max * 1e-12;
    let mut y: Pair = (Matrix4::zeros(), Matrix4::zeros());
    let total: u64 = 1 << FINEST;
    let mut done: u64 = 0;
    let mut level = 0u32;
    while done < total {
        let step = h / (1u64 << level) as f64;
        if step < min_step || level > FINEST {
            return Err(Error::StepUnderflow { min_step });
        }
        let t = h * (done as f64 / total as f64);
        let coarse = rk4(a, d, &y, step);
        let mid = rk4(a, d, &y, 0.5 * step);
        let fine = rk4(a, d, &mid, 0.5 * step);
        let err_e = (fine.0 - coarse.0).norm();
        let q_scale = fine.1.norm().max(d.norm() * (t + step)).max(f64::MIN_POSITIVE);
        let err_q = (fine.1 - coarse.1).norm() / q_scale;
        let err = err_e.max(err_q);
        if err < TOL {
            y = (fine.0 + (fine.0 - coarse.0) / 15.0, fine.1 + (fine.1 - coarse.1) / 15.0);
            done += 1 << (FINEST - level);
            let aligned = level > 0 && done % (1 << (FINEST - level + 1)) == 0;
            if err < TOL / 64.0 && aligned {
                level -= 1;
            }
        } else {
            level += 1;
        }
    }
    Ok(y)
}

/// Closed-form mechanical variances σ_qq = α₁ + β₁Λ and σ_pp = α₂ + β₂Λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechCoefficients {
    pub alpha1: f64,
    /// (rad/s)⁻¹
    pub beta1: f64,
    pub alpha2: f64,
    /// (rad/s)⁻¹
    pub beta2: f64,
    /// Denominators in units where ω_m = 1.
    pub denom_a: f64,
    pub denom_b: f64,
}

impl MechCoefficients {
    pub fn position_variance(&self, lambda: f64) -> f64 {
        self.alpha1 + self.beta1 * lambda
    }

    pub fn momentum_variance(&self, lambda: f64) -> f64 {
        self.alpha2 + self.beta2 * lambda
    }
}

/// Closed-form steady-state mechanical variances, evaluated with all rates in
/// units of ω_m to keep the degree-eight polynomials in range.
pub fn mech_coefficients(p: &SystemParams) -> Result<MechCoefficients> {
    let a_mat = drift_matrix(p);
    let max_re = max_real_eigenvalue(&a_mat);
    if max_re >= 0.0 {
        return Err(Error::UnstableDrift { max_real: max_re });
    }
    let w = 1.0;
    let g = p.gamma_m / p.omega_m;
    let k = p.kappa / p.omega_m;
    let dd = p.delta / p.omega_m;
    let x = effective_coupling(p) / p.omega_m;
    let n = 2.0 * p.n_bar() + 1.0;

    let d2 = dd * dd;
    let k2 = k * k;
    let x2 = x * x;
    let w2 = w * w;
    let w4 = w2 * w2;
    let r = d2 + k2;
    let poly = r + 2.0 * k * g + g * g;
    let split = -d2 + k2 + k * g;
    let kg = k * g;

    let denom_b = 8.0 * kg * w2 * split
        + 4.0 * kg * r * poly
        + 2.0 * dd * x2 * w * (2.0 * k + g).powi(2)
        + 4.0 * kg * w4;
    let denom_a = (w * r - dd * x2) * denom_b;
    if denom_a.abs() < 1e-300 {
        return Err(Error::DegenerateDenominator { which: "A" });
    }
    if denom_b.abs() < 1e-300 {
        return Err(Error::DegenerateDenominator { which: "B" });
    }

    let alpha1 = w
        * (2.0 * k * w2 * r * (k * x2 + g * (2.0 * g * k * n - 2.0 * n * (dd - k) * (dd + k) + x2))
            + dd * x2 * w * (-2.0 * k2 * x2 + g * g * n * (d2 - 3.0 * k2) - kg * (x2 - 4.0 * n * (dd - k) * (dd + k)))
            + 2.0 * k * r * poly * (k * x2 + g * n * r)
            + 2.0 * kg * w4 * n * r
            - 2.0 * dd * k * x2 * g * w2 * w * n)
        / denom_a;
    let beta1 = w
        * (dd * x2 * w * (4.0 * k * (d2 - k2) + g * (d2 - 3.0 * k2))
            + 4.0 * k * w2 * r * split
            + 2.0 * k * r * r * poly
            + 2.0 * k * w4 * r
            - 2.0 * dd * k * x2 * w2 * w)
        / denom_a;
    let alpha2 = (2.0 * k * w2 * (k * x2 + 2.0 * g * n * split)
        + 2.0 * k * r * (k * x2 + g * (g * n * (2.0 * k + g) + n * r + x2))
        + dd * x2 * g * w * n * (2.0 * k + g)
        + 2.0 * kg * w4 * n)
        / denom_b;
    let beta2 = (4.0 * k * w2 * split + 2.0 * k * r * poly + dd * x2 * w * (2.0 * k + g) + 2.0 * k * w4) / denom_b;

    Ok(MechCoefficients {
        alpha1,
        beta1: beta1 / p.omega_m,
        alpha2,
        beta2: beta2 / p.omega_m,
        denom_a,
        denom_b,
    })
}

/// Mechanical, optical and correlation blocks of a two-mode covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blocks {
    pub mech: Matrix2<f64>,
    pub light: Matrix2<f64>,
    pub cross: Matrix2<f64>,
}

impl Blocks {
    pub fn assemble(&self) -> Matrix4<f64> {
        let mut s = Matrix4::zeros();
        s.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.mech);
        s.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.light);
        s.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.cross);
        s.fixed_view_mut::<2, 2>(2, 0).copy_from(&self.cross.transpose());
        s
    }
}

pub fn blocks(sigma: &Matrix4<f64>) -> Blocks {
    let mech: Matrix2<f64> = sigma.fixed_view::<2, 2>(0, 0).into_owned();
    Blocks {
        mech: 0.5 * (mech + mech.transpose()),
        light: sigma.fixed_view::<2, 2>(2, 2).into_owned(),
        cross: sigma.fixed_view::<2, 2>(0, 2).into_owned(),
    }
}

/// Exact Λ-derivative of the steady state: a Lyapunov solve with unit
/// momentum diffusion, since σ_ss is affine in Λ.
pub fn dsigma_dlambda(p: &SystemParams) -> Result<Matrix4<f64>> {
    let unit = Matrix4::from_diagonal(&nalgebra::Vector4::new(0.0, 1.0, 0.0, 0.0));
    steady_state(&drift_matrix(p), &unit)
}

/// Steady state and its Λ-derivative for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub lambda: f64,
    pub sigma: Matrix4<f64>,
    pub dsigma: Matrix4<f64>,
}

impl SteadyState {
    pub fn solve(p: &SystemParams, lambda: f64) -> Result<Self> {
        let pair = DriftNoisePair::new(p, lambda);
        let sigma = steady_state(&pair.a, &pair.d)?;
        let dsigma = dsigma_dlambda(p)?;
        Ok(Self { lambda, sigma, dsigma })
    }

    pub fn mech(&self) -> (Matrix2<f64>, Matrix2<f64>) {
        (blocks(&self.sigma).mech, blocks(&self.dsigma).mech)
    }

    pub fn light(&self) -> (Matrix2<f64>, Matrix2<f64>) {
        (blocks(&self.sigma).light, blocks(&self.dsigma).light)
    }
}
