//! Effective fermionic length benchmark for the one-dimensional Fermi-Hubbard model.
//!
//! The crate is organised bottom-up:
//!
//! * [`qsim`]: dense statevector simulator and Pauli-operator algebra.
//! * [`model`]: Hubbard Hamiltonians (Jordan-Wigner and Majorana forms), Bethe-ansatz
//!   reference density and exact diagonalisation.
//! * [`ansatz`]: device grid with ABCD edge patterns, circuit orderings and layered ansatz.
//! * [`vqe`]: gradients, the equality-constrained SQP optimizer, layer-by-layer training
//!   and the Gaussian-frame Newton trainer.
//! * [`gaussian`]: Majorana covariance matrices, matchgates and SO(2M) rotations.
//! * [`bench`]: sweeps, EFL extraction, measurement budgets and plot output.

pub mod ansatz;
pub mod bench;
pub mod checks;
pub mod error;
pub mod gaussian;
pub mod model;
pub mod qsim;
pub mod registry;
pub mod rng;
pub mod vqe;

pub use error::{Error, Result};
