//! Variable-rate, variable-length coding over a finite compound channel with
//! noiseless feedback.
//!
//! The transmitter and receiver know a family of DMCs, but not which one is in
//! use. Each epoch trains, sends a message at the rate meant for the estimated
//! channel, re-trains, and then signals ACCEPT or REJECT; the receiver stops at
//! the first ACCEPT.
//!
//! * [`channel`]: DMCs and compound families.
//! * [`info`]: divergences, capacities and zero-rate exponents.
//! * [`detection`]: channel estimation, the control test and exponent regions.
//! * [`scheme`]: the coding scheme and its Monte Carlo simulation.
//! * [`analysis`]: exponent bounds, tradeoff curves and the exact oracle.

// `!(x >= 0.0)` is how NaN gets rejected along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod channel;
pub mod detection;
mod error;
pub mod info;
pub mod rng;
pub mod scheme;

pub use channel::{CompoundFamily, Dmc};
pub use error::{Error, Result};
pub use rng::{RngSeed, SimRng};
