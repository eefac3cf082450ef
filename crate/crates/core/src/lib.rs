//! Selective perfect state transfer in coupled spin-1/2 networks.
//!
//! The crate builds the Zeeman, flip-flop and Ising Hamiltonians of a spin
//! network, runs stroboscopic mix/free schedules exactly, averages
//! toggling-frame sequences to zeroth order, and plans commensurate
//! free-evolution times that recouple one chosen pair while dephasing the
//! rest of the network.
//!
//! `no_std` with `alloc`. File formats and the command-line front end live in
//! the `pst` crate.

#![no_std]

extern crate alloc;

mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod network;
pub mod propagation;
pub mod scheduler;
pub mod spin;
pub mod toggling;
pub mod units;

pub use error::{Error, Result};
pub use hamiltonian::{
    assemble, build_xy, build_zeeman, build_zz, Basis, HamiltonianRecipe, OperatorMatrix,
    PairSelection, Term,
};
pub use network::{NetworkBuilder, Pair, SpinNetwork};
pub use propagation::{
    evolve, global_pulse, propagator, run_schedule, Executor, QuantumState, Sampling, Schedule,
    Segment, TransferTrace,
};
pub use scheduler::{
    optimize_hop, pair_transfer_schedule, relay_plan, resonant_tau, simulate_relay, HopPlan,
    HopSearch, PairTiming, RelayPlan,
};
pub use spin::{Axis, Pulse};
pub use units::UnitConvention;
