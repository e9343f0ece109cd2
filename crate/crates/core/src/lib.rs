//! Fronthaul planning for the uplink of cell-free massive MIMO networks whose
//! access points connect to the CPU over a mix of fiber and free-space
//! optical links.
//!
//! The crate models the channel, the compression noise introduced by
//! capacity-limited fronthaul, the achievable uplink rates, the network power
//! and deployment cost, and finds the fiber/FSO split that maximises energy
//! efficiency.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channel;
pub mod cli;
pub mod config;
pub mod csv;
pub mod energy;
pub mod experiments;
pub mod error;
pub mod fronthaul;
pub mod optimizer;
pub mod rate;
pub mod rng;

pub use error::{Error, Result};
