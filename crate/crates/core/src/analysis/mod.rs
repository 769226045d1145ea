//! Exponent bounds, threshold tradeoff curves, and an exact oracle for tiny
//! scheme instances.

mod bounds;
mod curves;
mod oracle;

pub use bounds::{
    capacity_region_corner, eer_lower_bound, eer_lower_bound_formula, trivial_upper_bound,
    trivial_upper_bound_formula, ExponentPoint,
};
pub use curves::{
    format_number, phi_curve, phi_grid, phi_limits, phi_point, select_operating_point, RegionCurve,
    DEFAULT_PHI_POINTS,
};
pub use oracle::{
    brute_force_epoch_oracle, oracle_capability, oracle_monte_carlo, EpochOracle, MessageOracle, OracleCheck,
    OracleComparison, ORACLE_MAX_SEQUENCES,
};
