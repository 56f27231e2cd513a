//! Physical constants, pinned so that regression numbers stay bit-stable.

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum (m/s).
pub const C: f64 = 299_792_458.0;
/// Atomic mass unit, the CSL reference mass m₀ (kg).
pub const AMU: f64 = 1.660_539_066_60e-27;

/// Ghirardi–Rimini–Weber value of the collapse coupling (m³/s).
pub const GAMMA_GRW: f64 = 1e-36;
/// Adler's value of the collapse coupling (m³/s).
pub const GAMMA_ADLER: f64 = 1e-28;
