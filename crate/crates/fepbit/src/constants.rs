//! Physical constants (SI, 2019 redefinition where exact).

/// Boltzmann constant, J K^-1 (exact).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Vacuum permittivity, F m^-1.
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;

/// Elementary charge, C (exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054571817e-34;

/// Electron rest mass, kg.
pub const ELECTRON_MASS: f64 = 9.1093837015e-31;
