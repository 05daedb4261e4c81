//! Stochastic phase-field dynamics of ferroelectric polarization domains.
//!
//! A film is modelled as a 1-D chain of `N` domains with polarization
//! `p_i` (C m^-2). Each domain carries its own Landau coefficients and
//! viscosity (optionally Gaussian-sampled around a base set), neighbors are
//! coupled by an exchange term, and thermal agitation enters as Langevin
//! noise scaled by a characteristic volume. The overdamped equation of
//! motion per domain is
//!
//! ```text
//! mu_i dp_i/dt = -dPsi_pol/dp(p_i) + G0 * (p_{i+1} - 2 p_i + p_{i-1}) / dx^2
//!                + E_fe - E_dep(p_mean) + mu_i * eta_i(t)
//! ```
//!
//! integrated with classical RK4 on the drift and a single additive Gaussian
//! increment per step.

mod histogram;
mod integrate;
mod landau;
mod noise;
mod system;

pub use histogram::{polarization_histogram, DomainSelect, Histogram};
pub use integrate::{
    deterministic_rhs, run_trajectory, DriveSegment, InitCondition, Integrator, Trajectory,
};
pub use landau::{spontaneous_polarization, LandauSet};
pub use noise::{noise_amplitude, NoiseConfig};
pub use system::{
    depolarization_field, sample_domain_params, uniform_domains, DomainParams, FeState,
    FeSystemConfig, StackGeometry,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhaseFieldError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("domain {domain} diverged at t = {time:.3e} s (p = {value:.3e}, clamp = {clamp:.3e})")]
    Diverged {
        domain: usize,
        time: f64,
        value: f64,
        clamp: f64,
    },
    #[error("drive waveform is empty or has non-positive duration")]
    BadWaveform,
    #[error("no stable polarization root for the requested field")]
    NoStableRoot,
    #[error("histogram needs at least 2 bins and a non-empty sample window")]
    BadHistogram,
}

pub type Result<T> = std::result::Result<T, PhaseFieldError>;
