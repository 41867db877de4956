//! Mid-circuit monitoring of quantum programs.
//!
//! The pipeline: [`select`] finds gates after which a qubit is separable from
//! the rest of the register, [`trace`] collects the gates that shaped it,
//! [`reconstruct`] inserts measure-reset-replay blocks at those gates,
//! [`filter`] trims the node set to a qubit budget, and [`analysis`] and
//! [`mutation`] check that instrumentation preserves behavior and catches
//! injected faults.

pub mod analysis;
pub mod circuit;
pub mod corpus;
pub mod dist;
pub mod entangle;
pub mod filter;
pub mod mutation;
pub mod reconstruct;
pub mod select;
pub mod sim;
pub mod trace;
