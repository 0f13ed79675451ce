//! Persistency of entanglement and nonlocality of multipartite quantum states
//! under particle loss.
//!
//! The crate builds the standard families of multipartite states (GHZ, W,
//! Dicke, translationally invariant, graph/cluster states and a family of
//! qudit states with maximal persistency), and measures how many parties must
//! be lost before their reduced states become separable or local:
//!
//! * [`persistency::persistency_entanglement`] brackets the persistency of
//!   entanglement using certified entangled/separable verdicts,
//! * [`persistency::persistency_nonlocality`] certifies lower bounds on the
//!   persistency of nonlocality from explicit Bell violations,
//! * [`persistency::strength`] estimates the white-noise visibility at which
//!   that persistency is lost.

pub mod bell;
pub mod error;
pub mod headline;
pub mod linalg;
pub mod persistency;
pub mod random;
pub mod reference;
pub mod register;
pub mod separability;
pub mod serde_complex;
pub mod state;
pub mod states;
pub mod subsets;

pub use error::{Error, Result};
pub use register::QuditRegister;
pub use state::{mix_with_white_noise, trace_distance, DensityOperator, LocalFilter, StateVector};
