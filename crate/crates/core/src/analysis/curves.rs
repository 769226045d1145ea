use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::info::binary_kl;

use super::bounds::ExponentPoint;

/// Default number of interior grid points of a tradeoff curve.
pub const DEFAULT_PHI_POINTS: usize = 199;

/// A one-parameter family of exponent points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCurve {
    /// Strictly increasing parameter grid.
    pub params: Vec<f64>,
    pub points: Vec<ExponentPoint>,
    pub labels: Vec<String>,
}

impl RegionCurve {
    pub fn new(params: Vec<f64>, points: Vec<ExponentPoint>, labels: Vec<String>) -> Result<Self> {
        if params.len() != points.len() {
            return Err(invalid("one point per grid parameter is required"));
        }
        if params.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("grid must be strictly increasing"));
        }
        if let Some(first) = points.first() {
            if points.iter().any(|p| p.len() != first.len()) || labels.len() != first.len() {
                return Err(invalid("points and labels must have matching lengths"));
            }
        }
        Ok(RegionCurve { params, points, labels })
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// CSV with header `param,<labels>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (q, p) in self.params.iter().zip(&self.points) {
            out.push_str(&format_number(*q));
            for v in &p.values {
                out.push(',');
                out.push_str(&format_number(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Shortest round-trip decimal, or `inf`.
pub fn format_number(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

/// Scaled exponents `(E_p/B_p, E_{1-p}/B_{1-p}) / (1 - gamma)` of the BSC pair
/// `{BSC(p), BSC(1-p)}` when the control phase uses threshold `q`.
pub fn phi_point(p: f64, q: f64) -> Result<[f64; 2]> {
    if !(p > 0.0 && p < 0.5) {
        return Err(invalid(format!("crossover {p} must lie in (0, 1/2)")));
    }
    if !(q > p && q < 1.0 - p) {
        return Err(invalid(format!("threshold {q} must lie in ({p}, {})", 1.0 - p)));
    }
    let b = binary_kl(p, 1.0 - p);
    let t0 = binary_kl(q, p);
    let t1 = binary_kl(q, 1.0 - p);
    Ok([t0 / (t0 + b), t1 / (t1 + b)])
}

/// Values of [`phi_point`] as `q` tends to `p` and to `1 - p`.
pub fn phi_limits() -> ([f64; 2], [f64; 2]) {
    ([0.0, 0.5], [0.5, 0.0])
}

/// `points` uniform interior points of `(p, 1 - p)`.
pub fn phi_grid(p: f64, points: usize) -> Result<Vec<f64>> {
    if !(p > 0.0 && p < 0.5) {
        return Err(invalid(format!("crossover {p} must lie in (0, 1/2)")));
    }
    if points == 0 {
        return Err(invalid("grid must have at least one point"));
    }
    let step = (1.0 - 2.0 * p) / (points + 1) as f64;
    Ok((1..=points).map(|i| p + step * i as f64).collect())
}

/// The tradeoff curve over a grid of thresholds.
pub fn phi_curve(p: f64, grid: &[f64]) -> Result<RegionCurve> {
    let points = grid
        .iter()
        .map(|&q| phi_point(p, q).map(|v| ExponentPoint { values: v.to_vec() }))
        .collect::<Result<Vec<_>>>()?;
    RegionCurve::new(
        grid.to_vec(),
        points,
        vec!["component_1".into(), "component_2".into()],
    )
}

/// Grid parameter maximizing the smallest component; ties keep the first.
///
/// Minimizing any positive weighted sum of error probabilities is
/// asymptotically the same as maximizing the smallest exponent, so the
/// weights only get validated.
pub fn select_operating_point(curve: &RegionCurve, weights: &[f64]) -> Result<f64> {
    if curve.is_empty() {
        return Err(invalid("empty curve"));
    }
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(invalid("weights must be positive"));
    }
    let mut best = 0;
    for i in 1..curve.len() {
        if curve.points[i].min() > curve.points[best].min() {
            best = i;
        }
    }
    Ok(curve.params[best])
}
