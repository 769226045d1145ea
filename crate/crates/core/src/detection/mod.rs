//! Channel estimation from training symbols, the accept/reject control test,
//! and pairwise estimation-error exponent regions.

mod control;
mod estimation;
mod tuncel;

pub use control::{ControlDecision, ControlTest, SlackSchedule};
pub use estimation::{
    chernoff_information, estimate_channel, estimation_exponents, marginal_region_from_pairwise,
    threshold_exponents, EstimationRule, ExponentTuple, TrainingSequence,
};
pub(crate) use estimation::estimate_unchecked;
pub use tuncel::{tuncel_member, OutputLaws, TUNCEL_MAX_OUTPUTS, TUNCEL_MIN_RESOLUTION};
