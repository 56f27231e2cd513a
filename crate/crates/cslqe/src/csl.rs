//! The CSL diffusion rate η, its rescaling Λ = ħη/(mω_m) and the thermal
//! bookkeeping that sets where collapse noise becomes visible.

use std::f64::consts::PI;
use std::io::{Read, Write};

use crate::constants::{AMU, HBAR, K_B};
use crate::dynamics::SystemParams;
use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// A homogeneous sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereGeometry {
    /// Radius (m).
    pub radius: f64,
    /// Mass (kg).
    pub mass: f64,
}

impl SphereGeometry {
    pub fn from_mass_density(mass: f64, density: f64) -> Self {
        let radius = (3.0 * mass / (4.0 * PI * density)).cbrt();
        Self { radius, mass }
    }

    pub fn from_radius_density(radius: f64, density: f64) -> Self {
        Self {
            radius,
            mass: 4.0 / 3.0 * PI * radius.powi(3) * density,
        }
    }

    pub fn density(&self) -> f64 {
        self.mass / (4.0 / 3.0 * PI * self.radius.powi(3))
    }
}

/// Normalized Fourier transform of a uniform ball, `3(sin x − x cos x)/x³`.
pub fn sphere_form_factor(x: f64) -> f64 {
    if x.abs() < 0.05 {
        let x2 = x * x;
        1.0 - x2 / 10.0 + x2 * x2 / 280.0 - x2 * x2 * x2 / 15120.0
    } else {
        3.0 * (x.sin() - x * x.cos()) / (x * x * x)
    }
}

/// CSL momentum-diffusion rate of a homogeneous sphere (m⁻² s⁻¹).
///
/// Evaluated in momentum space, where the six-dimensional overlap integral
/// reduces to one radial integral over the squared form factor. The integral
/// is split into panels one oscillation wide and each panel is integrated
/// adaptively.
pub fn eta_sphere(geom: &SphereGeometry, r_c: f64, gamma: f64) -> Result<f64> {
    const REL_TOL: f64 = 1e-8;
    if !(geom.radius > 0.0 && geom.mass > 0.0 && r_c > 0.0 && gamma >= 0.0) {
        return Err(Error::DomainError { x: r_c.min(geom.radius) });
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let a = r_c / geom.radius;
    let integrand = |x: f64| {
        let j = sphere_form_factor(x);
        x.powi(4) * (-(a * x).powi(2)).exp() * j * j
    };
    // e^{-50} is far below the requested tolerance.
    let x_max = 50f64.sqrt() / a;
    let panels = (x_max / PI).ceil().max(1.0) as usize;
    let width = x_max / panels as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    for i in 0..panels {
        let lo = i as f64 * width;
        let (v, e) = integrate(integrand, lo, lo + width, 1e-11, 1e-13 * total)?;
        total += v;
        err += e;
    }
    if !(err <= REL_TOL * total) {
        return Err(Error::QuadratureFailure { estimate: err / total });
    }
    let m = geom.mass / AMU;
    Ok(gamma * m * m / (6.0 * PI * PI * geom.radius.powi(5)) * total)
}

/// Mass density sampled on a regular grid of cubic voxels.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    /// Voxel counts along x, y, z.
    pub dims: [usize; 3],
    /// Voxel edge (m).
    pub voxel: f64,
    /// Row-major densities (kg/m³), z fastest.
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(dims: [usize; 3], voxel: f64, values: Vec<f64>) -> Result<Self> {
        let invalid = |message: String| Error::ValidationError { key: "grid".into(), message };
        if dims.iter().product::<usize>() != values.len() {
            return Err(invalid(format!("{} values for dims {:?}", values.len(), dims)));
        }
        if !(voxel > 0.0 && voxel.is_finite()) {
            return Err(invalid(format!("voxel edge {voxel}")));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(invalid("densities must be finite and nonnegative".into()));
        }
        Ok(Self { dims, voxel, values })
    }

    /// Rasterizes a sphere with fractional occupancy of boundary voxels,
    /// leaving `padding` empty voxels on every side.
    pub fn sphere(geom: &SphereGeometry, voxel: f64, padding: usize) -> Self {
        const SUB: usize = 8;
        let half = (geom.radius / voxel).ceil() as usize + padding;
        let n = 2 * half;
        let centre = half as f64 * voxel;
        let rho = geom.density();
        let r2 = geom.radius * geom.radius;
        let diag = 0.5 * 3f64.sqrt() * voxel;
        let mut values = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = [i, j, k].map(|t| (t as f64 + 0.5) * voxel - centre);
                    let dist = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                    let frac = if dist + diag <= geom.radius {
                        1.0
                    } else if dist - diag >= geom.radius {
                        0.0
                    } else {
                        let mut inside = 0usize;
                        for a in 0..SUB {
                            for b in 0..SUB {
                                for s in 0..SUB {
                                    let off = |t: usize| ((t as f64 + 0.5) / SUB as f64 - 0.5) * voxel;
                                    let p = [c[0] + off(a), c[1] + off(b), c[2] + off(s)];
                                    if p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= r2 {
                                        inside += 1;
                                    }
                                }
                            }
                        }
                        inside as f64 / (SUB * SUB * SUB) as f64
                    };
                    values[(i * n + j) * n + k] = rho * frac;
                }
            }
        }
        Self { dims: [n, n, n], voxel, values }
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.voxel.powi(3)
    }

    /// Reads the binary layout: three little-endian `u64` dims, an `f64`
    /// voxel edge, then row-major `f64` densities.
    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut dims = [0usize; 3];
        for d in &mut dims {
            r.read_exact(&mut word)?;
            *d = usize::try_from(u64::from_le_bytes(word)).map_err(|_| Error::IoError("dimension overflow".into()))?;
        }
        r.read_exact(&mut word)?;
        let voxel = f64::from_le_bytes(word);
        let count = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::IoError("grid too large".into()))?;
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut word)?;
            values.push(f64::from_le_bytes(word));
        }
        Self::new(dims, voxel, values)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for d in self.dims {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        w.write_all(&self.voxel.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Treatment of the grid edges in [`eta_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Density vanishes outside the grid.
    #[default]
    Open,
    /// The grid tiles space.
    Periodic,
}

/// Direct real-space evaluation of the CSL rate on a voxel grid.
///
/// Forward differences place each gradient component on voxel faces; the
/// Gaussian kernel is separable, so the convolution is three 1D passes.
pub fn eta_grid(grid: &DensityGrid, r_c: f64, gamma: f64, boundary: Boundary) -> Result<f64> {
    if grid.voxel > r_c {
        return Err(Error::ResolutionTooCoarse { voxel: grid.voxel, r_c });
    }
    if grid.voxel > r_c / 4.0 {
        log::warn!("voxel edge {:.3e} m is coarser than r_c/4; expect discretization error", grid.voxel);
    }
    let v = grid.voxel;
    // 1D factor of (4π r_c²)^{-3/2} e^{-r²/4r_c²}, times the voxel edge for the sum.
    let reach = ((2.0 * r_c * 42f64.sqrt()) / v).ceil() as usize;
    let kernel: Vec<f64> = (0..=reach)
        .map(|t| {
            let x = t as f64 * v;
            (-(x * x) / (4.0 * r_c * r_c)).exp() / (2.0 * PI.sqrt() * r_c) * v
        })
        .collect();

    let mut sum = 0.0;
    for axis in 0..3 {
        let grad = face_gradient(grid, axis, boundary);
        let mut smooth = grad.clone();
        for pass in 0..3 {
            smooth = convolve_axis(&smooth, pass, &kernel, boundary);
        }
        sum += grad
            .data
            .iter()
            .zip(&smooth.data)
            .map(|(a, b)| a * b)
            .sum::<f64>();
    }
    let m0 = AMU;
    Ok(gamma / (3.0 * m0 * m0) * sum * v.powi(3))
}

#[derive(Clone)]
struct Field {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Field {
    fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.dims[1] + i[1]) * self.dims[2] + i[2]
    }
}

fn face_gradient(grid: &DensityGrid, axis: usize, boundary: Boundary) -> Field {
    let src = Field { dims: grid.dims, data: grid.values.clone() };
    let mut dims = grid.dims;
    if boundary == Boundary::Open {
        dims[axis] += 1;
    }
    let mut out = Field { dims, data: vec![0.0; dims.iter().product()] };
    let n = grid.dims[axis];
    let at = |idx: [usize; 3], t: isize| -> f64 {
        let t = match boundary {
            Boundary::Open if t < 0 || t >= n as isize => return 0.0,
            Boundary::Open => t as usize,
            Boundary::Periodic => t.rem_euclid(n as isize) as usize,
        };
        let mut j = idx;
        j[axis] = t;
        src.data[src.index(j)]
    };
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            for k in 0..dims[2] {
                let idx = [i, j, k];
                // Face f sits between cells f-1 and f (open) or f and f+1 (periodic).
                let f = idx[axis] as isize;
                let (lo, hi) = match boundary {
                    Boundary::Open => (f - 1, f),
                    Boundary::Periodic => (f, f + 1),
                };
                let o = out.index(idx);
                out.data[o] = (at(idx, hi) - at(idx, lo)) / grid.voxel;
            }
        }
    }
    out
}

fn convolve_axis(f: &Field, axis: usize, kernel: &[f64], boundary: Boundary) -> Field {
    let n = f.dims[axis] as isize;
    let reach = kernel.len() as isize - 1;
    let mut out = Field { dims: f.dims, data: vec![0.0; f.data.len()] };
    for i in 0..f.dims[0] {
        for j in 0..f.dims[1] {
            for k in 0..f.dims[2] {
                let idx = [i, j, k];
                let t = idx[axis] as isize;
                let mut acc = 0.0;
                for off in -reach..=reach {
                    let s = t + off;
                    let s = match boundary {
                        Boundary::Open if s < 0 || s >= n => continue,
                        Boundary::Open => s as usize,
                        Boundary::Periodic => s.rem_euclid(n) as usize,
                    };
                    let mut src = idx;
                    src[axis] = s;
                    acc += kernel[off.unsigned_abs()] * f.data[f.index(src)];
                }
                let o = out.index(idx);
                out.data[o] = acc;
            }
        }
    }
    out
}

/// Bose–Einstein occupation of a mode at angular frequency `omega`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega / (K_B * temperature)).exp_m1()
}

/// Rescaled CSL rate Λ = ħη/(mω_m) for the sphere described by `p`.
pub fn lambda_from_gamma(p: &SystemParams, gamma: f64) -> Result<f64> {
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let eta = eta_sphere(&p.sphere(), p.r_c, gamma)?;
    Ok(HBAR * eta / (p.mass * p.omega_m))
}

/// dΛ/dγ, exact since Λ is linear in γ.
pub fn lambda_per_gamma(p: &SystemParams) -> Result<f64> {
    lambda_from_gamma(p, 1.0)
}

/// Effective occupation n̄ + Λ/(2γ_m) including collapse heating.
pub fn n_csl(n_bar: f64, lambda: f64, gamma_m: f64) -> f64 {
    n_bar + lambda / (2.0 * gamma_m)
}

/// The γ at which collapse heating equals thermal heating, Λ = 2γ_m n̄.
pub fn crossover_gamma(p: &SystemParams) -> Result<f64> {
    Ok(2.0 * p.gamma_m * p.n_bar() / lambda_per_gamma(p)?)
}
