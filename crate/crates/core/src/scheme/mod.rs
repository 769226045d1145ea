//! The four-phase epoch scheme: parameter schedule, codebooks, sessions and
//! their statistics.

mod codebook;
mod params;
mod session;
mod stats;

pub(crate) use codebook::beats;
pub use codebook::{Codebook, Message, MAX_CHUNK_BITS};
pub use params::{
    derive_params, training_for, DerivedConstants, ParamSpec, PhaseLengths, SchemeParams, DEFAULT_BACKOFF,
    DEFAULT_KAPPA_MAX,
};
pub use session::{CompoundMessage, EpochRecord, Scheme, SessionTranscript, DEFAULT_MAX_EPOCHS};
pub use stats::{
    geometric_fit, session_statistics, simulate, simulate_transcripts, simulate_with, GoodnessOfFit, SessionStats,
    SessionSummary, DEFAULT_CHUNK,
};

use rand::Rng;

use crate::channel::Dmc;
use crate::error::Result;

/// Random code of rate `rate` and length `block_length` for `channel`, drawn
/// from its capacity-achieving input law, with an ML decoder.
pub fn build_codebook<R: Rng + ?Sized>(channel: &Dmc, rate: f64, block_length: usize, rng: &mut R) -> Result<Codebook> {
    Codebook::random(channel, rate, block_length, rng)
}
