//! Simulation and certification of black-box bipartite quantum experiments.
//!
//! Statistics of complex quantum experiments can be reproduced by real ones
//! (and by complex-conjugated ones), so black-box tests only certify states
//! and gates up to those equivalences. This crate implements the simulation
//! maps, the self-tests that pin experiments down to them, a
//! device-independent key-rate analysis and fidelity bounds from CHSH values.

pub mod chsh;
pub mod diqkd;
pub mod error;
pub mod hdiv;
pub mod optim;
pub mod qcore;
pub mod selftest;
pub mod simmap;
pub mod statecert;

pub use error::{Error, Result};
