//! Equilibria of hierarchical Bayesian persuasion chains.
//!
//! A chain of senders garbles information about a binary state (or a state
//! uniform on [0, 1]) on its way to a receiver who takes a binary action.
//! The crate computes subgame-perfect outcomes in closed form, checks them
//! against a brute-force grid oracle, and recommends agents to append next to
//! the receiver.

pub mod advisor;
pub mod agents;
pub mod binary_solver;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod gen;
pub mod general_solver;
pub mod oracle;
pub mod outcome;

pub use error::{Error, Result};
