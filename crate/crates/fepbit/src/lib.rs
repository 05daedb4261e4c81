//! Stochastic phase-field simulation of ferroelectric FET probabilistic bits.
//!
//! The crate is organized as a pipeline:
//!
//! * [`phasefield`] integrates coupled, thermally driven polarization domains
//!   (Landau free energy + nearest-neighbor exchange + Langevin noise).
//! * [`device`] wraps the domains in a gate stack (FE / SiO2 / Si capacitor
//!   solve) and computes drain current from top-of-barrier thermionic
//!   transport plus WKB tunneling.
//! * [`pbit`] thresholds the drain current into a bitstream and extracts
//!   probability-vs-gate-voltage curves with a logistic fit.
//! * [`ilnetwork`] synthesizes invertible-logic gates (linear programming on
//!   Ising energies), composes them into multiplier circuits, and runs
//!   probabilistic-bit sweeps that factorize integers.
//! * [`config`] / [`io`] hold the TOML run configuration, presets, run
//!   manifests and the CSV/JSON artifact writers used by the CLI.
//!
//! Everything that draws randomness takes an explicit master seed and derives
//! per-trajectory, per-domain ChaCha streams from it ([`rngstream`]), so any
//! run can be replayed byte for byte from its manifest.

pub mod config;
pub mod constants;
pub mod device;
pub mod ilnetwork;
pub mod io;
pub mod pbit;
pub mod phasefield;
pub mod rngstream;

#[cfg(doctest)]
mod booktests;
