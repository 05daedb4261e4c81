//! Ferroelectric FET: gate-stack electrostatics plus channel transport.
//!
//! The gate stack is a series FE / SiO2 / semiconductor capacitor network
//! solved quasi-statically at every timestep; the resulting semiconductor
//! surface potential modulates a ballistic top-of-barrier channel with a
//! WKB tunneling floor. Polarization noise from [`crate::phasefield`]
//! therefore shows up directly as drain-current noise.

mod fefet;
mod stack;
mod transport;

pub use fefet::{
    calibrate_band_offset, iv_noiseless, iv_stochastic, stochastic_trace, BiasProtocol,
    FefetConfig, IvCurve, IvPoint, IvTrace, SweepDirection,
};
pub use stack::{solve_stack, StackSolution};
pub use transport::{
    drain_current, fermi_dirac_half, fermi_dirac_minus_half, parabolic_barrier, tob_current,
    tunnel_current, wkb_transmission, CurrentTable, TransportParams,
};

use crate::phasefield::PhaseFieldError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("invalid device configuration: {0}")]
    InvalidConfig(String),
    #[error("gate stack system is singular (check thicknesses/permittivities)")]
    SingularStack,
    #[error(transparent)]
    PhaseField(#[from] PhaseFieldError),
}

pub type Result<T> = std::result::Result<T, DeviceError>;
