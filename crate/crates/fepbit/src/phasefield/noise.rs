//! Langevin noise scaled for a finite switching volume.
//!
//! The per-step noise field has standard deviation
//!
//! ```text
//! sigma_eta = sqrt(2 kB T / (mu v_char dt))     (V m^-1)
//! ```
//!
//! and the integrator adds `eta * dt` once per step, which makes the
//! discrete chain sample the Boltzmann density
//! `rho(p) ~ exp(-v_char * W_eff(p) / (kB T))` in the stationary state.
//! Smaller `v_char` means a smaller correlated switching volume and larger
//! fluctuations.

use serde::{Deserialize, Serialize};

use super::{PhaseFieldError, Result};
use crate::constants::BOLTZMANN;

/// Thermal-noise and time-discretization settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Lattice temperature, K.
    pub temperature: f64,
    /// Characteristic fluctuation volume, m^3.
    pub v_char: f64,
    /// Integration timestep, s.
    pub dt: f64,
    /// Master seed; every trajectory/domain stream is derived from it.
    pub seed: u64,
    /// Noise switch; `false` gives deterministic relaxation runs.
    pub enabled: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            temperature: 300.0,
            v_char: 1.38e-29,
            dt: 2.0e-11,
            seed: 1,
            enabled: true,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(PhaseFieldError::InvalidConfig(
                "temperature must be finite and >= 0".into(),
            ));
        }
        if !(self.v_char > 0.0) || !(self.dt > 0.0) {
            return Err(PhaseFieldError::InvalidConfig(
                "v_char and dt must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Standard deviation of the noise field eta for one domain, V m^-1.
///
/// Zero when noise is disabled or `T = 0`; scales as sqrt(T) and as
/// 1/sqrt(mu v_char dt).
#[inline]
pub fn noise_amplitude(noise: &NoiseConfig, mu: f64) -> f64 {
    if !noise.enabled || noise.temperature == 0.0 {
        return 0.0;
    }
    (2.0 * BOLTZMANN * noise.temperature / (mu * noise.v_char * noise.dt)).sqrt()
}
