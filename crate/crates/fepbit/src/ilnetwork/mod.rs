//! Invertible logic on networks of probabilistic bits.
//!
//! Logic gates become Ising energy functions whose degenerate ground
//! states are exactly the valid truth-table rows ([`synthesize_gate`]).
//! Gates wired into a circuit share bits, so running the stochastic
//! dynamics forward computes the logic function while clamping the
//! outputs runs it backwards: clamping a multiplier's product bits turns
//! it into a factorizer ([`factorize`]).

mod circuit;
mod dynamics;
mod gate;
mod lp;
mod netlist;

pub use circuit::{compose_multiplier, IsingCircuit, UpdateOrder};
pub use dynamics::{
    factorize, pbit_update, run_network, sweep, NetworkRun, PBitResponse, SolutionHistogram,
    DEFAULT_K_REF,
};
pub use gate::{
    and_gate, copy_gate, full_adder_gate, half_adder_gate, iand_gate, synthesize_gate, IsingGate,
};
pub use lp::{solve_lp, Constraint, LpResult, Relation};
pub use netlist::{emit_netlist, parse_netlist, ParsedNetlist, DRIVE_TRANSRESISTANCE_OHM};

/// Errors from gate synthesis, circuit assembly, and network dynamics.
#[derive(Debug, thiserror::Error)]
pub enum IlNetworkError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The truth table admits no pairwise energy function at the requested
    /// margin; the listed constraints could not be satisfied together.
    #[error("no Ising encoding exists: {violated:?}")]
    Infeasible { violated: Vec<String> },
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, IlNetworkError>;
