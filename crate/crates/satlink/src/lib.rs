//! Link-level toolkit for the forward link of a multibeam satellite system.
//!
//! The crate compares four transmission/detection strategies for a user
//! terminal subject to strong co-channel interference:
//!
//! 1. conventional transmission with either a single-user detector (SUD)
//!    or a two-signal joint detector (MUD×2),
//! 2. time sharing of two transponders toward one user,
//! 3. Alamouti orthogonalization across two transponders.
//!
//! On top of the achievable-rate analysis it provides the machinery to
//! design and evaluate practical coded schemes: PEG-constructed LDPC codes,
//! EXIT-chart convergence analysis, joint bit mappings for the two-signal
//! detector, and end-to-end iterative detection/decoding BER simulation.

pub mod channel;
pub mod config;
pub mod constellation;
pub mod error;
pub mod exit;
pub mod infotheory;
pub mod ldpc;
pub mod mud;
pub mod sim;

pub use error::{Error, Result};
