use serde::{Deserialize, Serialize};

use crate::channel::CompoundFamily;
use crate::error::{invalid, Error, Result};
use crate::info::{burnashev_b, capacity_vector, DEFAULT_TOL};

/// One exponent per channel, in bits per channel use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub values: Vec<f64>,
}

impl ExponentPoint {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(invalid("exponents must be nonnegative"));
        }
        Ok(ExponentPoint { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest component; `+inf` when empty.
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Componentwise `self >= other`.
    pub fn dominates(&self, other: &ExponentPoint) -> bool {
        self.values.len() == other.values.len() && self.values.iter().zip(&other.values).all(|(a, b)| a >= b)
    }
}

/// Achievable exponent `T/(T+B) * B * (1 - gamma)`.
///
/// `T = inf` gives the Burnashev line `B (1 - gamma)`; `B = inf` gives the
/// limit `T (1 - gamma)`.
pub fn eer_lower_bound_formula(t_c: f64, b: f64, gamma: f64) -> f64 {
    let slope = match (t_c.is_infinite(), b.is_infinite()) {
        (true, true) => f64::INFINITY,
        (true, false) => b,
        (false, true) => t_c,
        (false, false) if t_c == 0.0 => 0.0,
        (false, false) => t_c * b / (t_c + b),
    };
    if gamma >= 1.0 {
        0.0
    } else {
        slope * (1.0 - gamma)
    }
}

/// Burnashev exponent `B (1 - gamma)` of a single channel.
pub fn trivial_upper_bound_formula(b: f64, gamma: f64) -> f64 {
    if gamma >= 1.0 {
        0.0
    } else {
        b * (1.0 - gamma)
    }
}

fn per_channel(family: &CompoundFamily, rates: &[f64]) -> Result<Vec<(f64, f64)>> {
    if rates.len() != family.len() {
        return Err(invalid(format!("expected {} rates, got {}", family.len(), rates.len())));
    }
    let caps = capacity_vector(family, DEFAULT_TOL)?;
    rates
        .iter()
        .zip(&caps)
        .enumerate()
        .map(|(i, (&r, &c))| {
            if !(r >= 0.0) {
                return Err(invalid(format!("rate {r} of channel {i} must be nonnegative")));
            }
            let b = burnashev_b(family.channel(i)).value;
            if b == 0.0 {
                return Err(Error::DegenerateChannel { channel: i });
            }
            if r >= c {
                return Err(Error::InfeasibleRate {
                    channel: i,
                    rate: r,
                    capacity: c,
                });
            }
            Ok((b, r / c))
        })
        .collect()
}

/// Exponents achieved by the four-phase scheme with control estimation
/// exponents `t_c`.
pub fn eer_lower_bound(family: &CompoundFamily, rates: &[f64], t_c: &[f64]) -> Result<ExponentPoint> {
    let bg = per_channel(family, rates)?;
    if t_c.len() != family.len() || t_c.iter().any(|t| !(*t >= 0.0)) {
        return Err(invalid("control exponents must be nonnegative, one per channel"));
    }
    Ok(ExponentPoint {
        values: bg
            .iter()
            .zip(t_c)
            .map(|(&(b, g), &t)| eer_lower_bound_formula(t, b, g))
            .collect(),
    })
}

/// Per-channel Burnashev exponents, an outer bound for every scheme.
pub fn trivial_upper_bound(family: &CompoundFamily, rates: &[f64]) -> Result<ExponentPoint> {
    Ok(ExponentPoint {
        values: per_channel(family, rates)?
            .iter()
            .map(|&(b, g)| trivial_upper_bound_formula(b, g))
            .collect(),
    })
}

/// Upper corner `(C_1, ..., C_L)` of the rate region.
pub fn capacity_region_corner(family: &CompoundFamily) -> Result<Vec<f64>> {
    capacity_vector(family, DEFAULT_TOL)
}
