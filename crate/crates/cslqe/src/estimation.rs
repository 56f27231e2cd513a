//! Fisher information of Gaussian measurements and three independent routes
//! to the quantum Fisher information of Gaussian families.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{Error, Result};
use crate::symplectic::{symplectic_form, williamson, GaussianState};

/// The quantity being estimated, carried along with Fisher values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    /// Rescaled CSL rate Λ (rad/s).
    Lambda,
    /// Collapse coupling γ (m³/s).
    Gamma,
    /// An additive occupation number (dimensionless).
    Occupation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherResult {
    pub value: f64,
    pub parameter: Parameter,
}

impl FisherResult {
    pub fn new(value: f64, parameter: Parameter) -> Self {
        Self { value, parameter }
    }

    pub fn lambda(value: f64) -> Self {
        Self::new(value, Parameter::Lambda)
    }

    pub fn relabel(self, parameter: Parameter) -> Self {
        Self { parameter, ..self }
    }
}

/// Squeezing of the measurement's reference state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Squeezing {
    /// The infinitely squeezed limit l → 0.
    Homodyne,
    /// Finite l > 0; l = 1 is heterodyne.
    Finite(f64),
}

/// A general-dyne measurement: squeezing `l` rotated by `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSpec {
    pub l: Squeezing,
    /// Angle in [0, π).
    pub theta: f64,
}

fn wrap_angle(theta: f64) -> f64 {
    theta.rem_euclid(std::f64::consts::PI)
}

impl MeasurementSpec {
    pub fn new(l: f64, theta: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::ValidationError {
                key: "l".into(),
                message: format!("squeezing must be finite and positive, got {l}"),
            });
        }
        Ok(Self { l: Squeezing::Finite(l), theta: wrap_angle(theta) })
    }

    pub fn homodyne(theta: f64) -> Self {
        Self { l: Squeezing::Homodyne, theta: wrap_angle(theta) }
    }

    pub fn heterodyne() -> Self {
        Self { l: Squeezing::Finite(1.0), theta: 0.0 }
    }

    pub fn is_homodyne(&self) -> bool {
        self.l == Squeezing::Homodyne
    }
}

/// Rotation `[[cos θ, sin θ], [−sin θ, cos θ]]`.
pub fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, s, -s, c)
}

/// Covariance `R diag(l/2, 1/(2l)) Rᵀ` of the measurement's reference state.
pub fn gaussian_meas_cov(spec: &MeasurementSpec) -> Result<Matrix2<f64>> {
    match spec.l {
        Squeezing::Homodyne => Err(Error::HomodyneNotFinite),
        Squeezing::Finite(l) => {
            let r = rotation(spec.theta);
            Ok(r * Matrix2::new(0.5 * l, 0.0, 0.0, 0.5 / l) * r.transpose())
        }
    }
}

/// Variance of the quadrature read out by homodyne detection at `theta`.
pub fn homodyne_variance(sigma: &Matrix2<f64>, theta: f64) -> f64 {
    let r = rotation(theta);
    (r.transpose() * sigma * r)[(0, 0)]
}

/// Classical Fisher information of a Gaussian measurement on a zero-mean
/// single-mode family with covariance `sigma` and derivative `dsigma`.
pub fn fisher_gaussian(sigma: &Matrix2<f64>, dsigma: &Matrix2<f64>, spec: &MeasurementSpec) -> Result<FisherResult> {
    let value = match spec.l {
        Squeezing::Homodyne => {
            let v = homodyne_variance(sigma, spec.theta);
            let dv = homodyne_variance(dsigma, spec.theta);
            if !(v > 0.0) {
                return Err(Error::SingularMeasCov);
            }
            dv * dv / (2.0 * v * v)
        }
        Squeezing::Finite(_) => {
            let sp = sigma + gaussian_meas_cov(spec)?;
            let inv = sp.cholesky().ok_or(Error::SingularMeasCov)?.inverse();
            let m = inv * dsigma;
            0.5 * (m * m).trace()
        }
    };
    Ok(FisherResult::lambda(value.max(0.0)))
}

/// Homodyne angle with the largest Fisher information, found on a fine grid
/// and polished by golden-section search.
pub fn best_homodyne(sigma: &Matrix2<f64>, dsigma: &Matrix2<f64>) -> Result<(MeasurementSpec, FisherResult)> {
    let pi = std::f64::consts::PI;
    let fi = |theta: f64| fisher_gaussian(sigma, dsigma, &MeasurementSpec::homodyne(theta)).map(|f| f.value);
    const GRID: usize = 720;
    let step = pi / GRID as f64;
    let mut best = (0.0, fi(0.0)?);
    for i in 1..GRID {
        let theta = i as f64 * step;
        let v = fi(theta)?;
        if v > best.1 {
            best = (theta, v);
        }
    }
    let theta = golden_max(|t| fi(t).unwrap_or(f64::NEG_INFINITY), best.0 - step, best.0 + step, 1e-12);
    let polished = fi(theta)?;
    let (theta, value) = if polished >= best.1 { (theta, polished) } else { best };
    Ok((MeasurementSpec::homodyne(theta), FisherResult::lambda(value)))
}

/// Maximizer of a unimodal function on `[a, b]` by golden-section search.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + c.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn adjugate(m: &Matrix2<f64>) -> Matrix2<f64> {
    Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

/// Single-mode QFI from determinants and traces alone.
///
/// The numerator is written with the adjugate of `dsigma`, which equals
/// `det(∂σ)² tr[(∂σ⁻¹σ)²]` when `∂σ` is invertible and stays exact when it is
/// singular.
pub fn qfi_single_mode(sigma: &Matrix2<f64>, dsigma: &Matrix2<f64>) -> Result<FisherResult> {
    let det = sigma.determinant();
    let denom = 2.0 * det * det - 0.125;
    if denom.abs() <= 1e-12 {
        return Err(Error::NearPure);
    }
    let m = adjugate(dsigma) * sigma;
    let num = (m * m).trace() + 0.5 * dsigma.determinant();
    Ok(FisherResult::lambda((num / denom).max(0.0)))
}

/// A one-parameter family of Gaussian states.
pub trait GaussianFamily {
    fn state(&self, lambda: f64) -> Result<GaussianState>;

    /// Derivatives `(∂ξ, ∂σ)` at `lambda`.
    fn derivative(&self, lambda: f64) -> Result<(DVector<f64>, DMatrix<f64>)>;
}

/// Family whose mean and covariance are affine in the parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFamily {
    pub mean0: DVector<f64>,
    pub mean_slope: DVector<f64>,
    pub cov0: DMatrix<f64>,
    pub cov_slope: DMatrix<f64>,
}

impl AffineFamily {
    pub fn new(mean0: DVector<f64>, mean_slope: DVector<f64>, cov0: DMatrix<f64>, cov_slope: DMatrix<f64>) -> Self {
        Self { mean0, mean_slope, cov0, cov_slope }
    }

    /// Zero-mean family `σ(Λ) = σ₀ + Λ ∂σ` of a single mode.
    pub fn single_mode(cov0: &Matrix2<f64>, slope: &Matrix2<f64>) -> Self {
        let to_dyn = |m: &Matrix2<f64>| DMatrix::from_column_slice(2, 2, m.as_slice());
        Self::new(DVector::zeros(2), DVector::zeros(2), to_dyn(cov0), to_dyn(slope))
    }

    /// Recovers an affine family exactly from its values at Λ = 0 and 1.
    pub fn from_endpoints<F: Fn(f64) -> Result<GaussianState>>(f: F) -> Result<Self> {
        let s0 = f(0.0)?;
        let s1 = f(1.0)?;
        Ok(Self::new(s0.mean.clone(), &s1.mean - &s0.mean, s0.cov.clone(), &s1.cov - &s0.cov))
    }
}

impl GaussianFamily for AffineFamily {
    fn state(&self, lambda: f64) -> Result<GaussianState> {
        GaussianState::new(&self.mean0 + &self.mean_slope * lambda, &self.cov0 + &self.cov_slope * lambda)
    }

    fn derivative(&self, _lambda: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
        Ok((self.mean_slope.clone(), self.cov_slope.clone()))
    }
}

/// Arbitrary family differentiated by central differences with a fixed step.
pub struct SmoothFamily<F> {
    f: F,
    step: f64,
}

impl<F: Fn(f64) -> Result<GaussianState>> SmoothFamily<F> {
    pub fn new(f: F, step: f64) -> Self {
        Self { f, step }
    }
}

impl<F: Fn(f64) -> Result<GaussianState>> GaussianFamily for SmoothFamily<F> {
    fn state(&self, lambda: f64) -> Result<GaussianState> {
        (self.f)(lambda)
    }

    fn derivative(&self, lambda: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let hi = (self.f)(lambda + self.step)?;
        let lo = (self.f)(lambda - self.step)?;
        let scale = 0.5 / self.step;
        Ok(((hi.mean - lo.mean) * scale, (hi.cov - lo.cov) * scale))
    }
}

/// QFI from the symmetric logarithmic derivative, solved in the Williamson
/// basis where the SLD equation decouples entry by entry.
pub fn qfi_sld<G: GaussianFamily + ?Sized>(family: &G, lambda: f64) -> Result<FisherResult> {
    let state = family.state(lambda)?;
    let (dmean, dcov) = family.derivative(lambda)?;
    let n = state.n_modes();
    let omega = symplectic_form(n);
    let dec = williamson(&state.cov)?;
    let s = &dec.s;
    let d_s = s * &dcov * s.transpose();
    let sigma_s = DMatrix::from_fn(2 * n, 2 * n, |i, j| if i == j { dec.d[i / 2] } else { 0.0 });
    let num = omega.transpose() * &sigma_s * &d_s * &sigma_s * &omega + &d_s * 0.25;
    let scale = num.amax();
    let mut phi_s = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..2 * n {
        for j in 0..2 * n {
            let (di, dj) = (dec.d[i / 2], dec.d[j / 2]);
            let den = 2.0 * di * di * dj * dj - 0.125;
            if den < 1e-12 {
                if num[(i, j)].abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::PureStateDivergence);
                }
                continue;
            }
            phi_s[(i, j)] = num[(i, j)] / den;
        }
    }
    // Back to the original frame: S⁻¹ = Ωᵀ Sᵀ Ω.
    let s_inv = omega.transpose() * s.transpose() * &omega;
    let phi = &s_inv * phi_s * s_inv.transpose();
    let quad = (omega.transpose() * &dcov * &omega * phi).trace();
    let inv = state.cov.clone().cholesky().ok_or(Error::NonPositiveDefinite)?.inverse();
    let disp = (dmean.transpose() * inv * &dmean)[(0, 0)];
    Ok(FisherResult::lambda((quad + disp).max(0.0)))
}

/// Root (Uhlmann) fidelity of two single-mode Gaussian states.
pub fn fidelity(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    if a.n_modes() != 1 || b.n_modes() != 1 {
        return Err(Error::ValidationError {
            key: "state".into(),
            message: "fidelity is implemented for single modes".into(),
        });
    }
    let sum = &a.cov + &b.cov;
    let big_delta = 4.0 * sum.determinant();
    let small = (4.0 * a.cov.determinant() - 1.0) * (4.0 * b.cov.determinant() - 1.0);
    let small = small.max(0.0);
    let dxi = &a.mean - &b.mean;
    let inv = sum.cholesky().ok_or(Error::NonPositiveDefinite)?.inverse();
    let expo = -0.5 * (dxi.transpose() * inv * &dxi)[(0, 0)];
    let f_sq = 2.0 * ((big_delta + small).sqrt() + small.sqrt()) / big_delta * expo.exp();
    Ok(f_sq.sqrt().min(1.0))
}

/// QFI from the Bures metric, `8(1 − F(ρ_{Λ−h}, ρ_{Λ+h}))/(2h)²`, with the
/// step tuned so that 1 − F ≈ 10⁻⁴ and two Richardson extrapolations compared.
pub fn qfi_fidelity<G: GaussianFamily + ?Sized>(family: &G, lambda: f64) -> Result<FisherResult> {
    let infidelity = |h: f64| -> Result<f64> { Ok(1.0 - fidelity(&family.state(lambda - h)?, &family.state(lambda + h)?)?) };
    let mut h = 1e-3 * lambda.abs().max(1.0);
    let mut found = false;
    for _ in 0..60 {
        let gap = infidelity(h)?;
        if gap > 0.0 && (gap / 1e-4 - 1.0).abs() < 0.5 {
            found = true;
            break;
        }
        h *= if gap <= 1e-14 { 1e3 } else { (1e-4 / gap).sqrt().clamp(1e-3, 1e3) };
    }
    if !found {
        let gap = infidelity(h).unwrap_or(1.0);
        if gap <= 1e-14 {
            return Ok(FisherResult::lambda(0.0));
        }
        return Err(Error::StepSelectionFailure { first: h, second: gap });
    }
    let info = |h: f64| -> Result<f64> { Ok(8.0 * infidelity(h)? / (4.0 * h * h)) };
    let (i1, i2, i3) = (info(h)?, info(0.5 * h)?, info(0.25 * h)?);
    let r1 = (4.0 * i2 - i1) / 3.0;
    let r2 = (4.0 * i3 - i2) / 3.0;
    if (r1 - r2).abs() > 1e-4 * r2.abs() {
        return Err(Error::StepSelectionFailure { first: r1, second: r2 });
    }
    Ok(FisherResult::lambda(r2.max(0.0)))
}

/// Signal-to-noise ratio Λ²·𝓘.
pub fn snr(lambda: f64, fisher: &FisherResult) -> f64 {
    lambda * lambda * fisher.value
}

/// Chain rule from Λ to γ: 𝓘(γ) = (dΛ/dγ)² 𝓘(Λ).
pub fn reparameterize(fisher: &FisherResult, dlambda_dgamma: f64) -> FisherResult {
    FisherResult::new(dlambda_dgamma * dlambda_dgamma * fisher.value, Parameter::Gamma)
}

/// The closed-form QFI of a diagonal mechanical state `diag(a, b)` with
/// `a = α₁ + β₁Λ`, `b = α₂ + β₂Λ`.
pub fn qfi_diagonal(alpha1: f64, beta1: f64, alpha2: f64, beta2: f64, lambda: f64) -> f64 {
    let a = alpha1 + beta1 * lambda;
    let b = alpha2 + beta2 * lambda;
    4.0 * (beta1 * beta2 + 2.0 * beta2 * beta2 * a * a + 2.0 * beta1 * beta1 * b * b) / (16.0 * a * a * b * b - 1.0)
}
