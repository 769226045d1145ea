use serde::{Deserialize, Serialize};

use crate::channel::CompoundFamily;
use crate::error::{invalid, Result};
use crate::info::binary_kl;

/// Known input sequence sent during a training phase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingSequence(Vec<usize>);

impl TrainingSequence {
    pub fn new(symbols: Vec<usize>, num_inputs: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(invalid("training sequence must be nonempty"));
        }
        if let Some(x) = symbols.iter().find(|&&x| x >= num_inputs) {
            return Err(invalid(format!("training symbol {x} out of range")));
        }
        Ok(TrainingSequence(symbols))
    }

    /// Cycles through all inputs, `0, 1, ..., k-1, 0, 1, ...`.
    pub fn round_robin(len: usize, num_inputs: usize) -> Result<Self> {
        Self::new((0..len).map(|t| t % num_inputs).collect(), num_inputs)
    }

    pub fn all_zero(len: usize) -> Result<Self> {
        Self::new(vec![0; len], 1)
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Fraction of positions carrying each input symbol.
    pub fn composition(&self, num_inputs: usize) -> Vec<f64> {
        let mut c = vec![0.0; num_inputs];
        for &x in &self.0 {
            c[x] += 1.0;
        }
        c.iter_mut().for_each(|v| *v /= self.0.len() as f64);
        c
    }
}

/// How a receiver turns training outputs into a channel index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationRule {
    /// `argmax_l prod_t Q_l(y_t | x_t)`, ties to the smallest index.
    MaximumLikelihood,
    /// For `{BSC(p), BSC(1-p)}`: pick `BSC(p)` iff the fraction of ones is below `q`.
    BscThreshold {
        q: f64,
        /// Crossover below one half.
        p: f64,
        /// Index of `BSC(p)` in the family.
        p_index: usize,
    },
}

impl EstimationRule {
    /// Threshold rule; the family must be a complementary BSC pair and `p < q < 1-p`.
    pub fn bsc_threshold(family: &CompoundFamily, q: f64) -> Result<Self> {
        let (p, p_index) = bsc_pair_crossover(family)?;
        if !(q > p && q < 1.0 - p) {
            return Err(invalid(format!("threshold {q} must lie strictly between {p} and {}", 1.0 - p)));
        }
        Ok(EstimationRule::BscThreshold { q, p, p_index })
    }

    fn check_family(&self, family: &CompoundFamily) -> Result<()> {
        if let EstimationRule::BscThreshold { p, p_index, .. } = *self {
            let (fp, fi) = bsc_pair_crossover(family)?;
            if fi != p_index || (fp - p).abs() > 1e-12 {
                return Err(invalid("threshold rule was built for a different family"));
            }
        }
        Ok(())
    }
}

/// Recognizes `{BSC(p), BSC(1-p)}` in either order; returns `p < 1/2` and its index.
fn bsc_pair_crossover(family: &CompoundFamily) -> Result<(f64, usize)> {
    let not_pair = || invalid("threshold rule needs a family of two complementary BSCs");
    if family.len() != 2 || family.num_inputs() != 2 || family.num_outputs() != 2 {
        return Err(not_pair());
    }
    let crossover = |i: usize| {
        let r = family.channel(i).rows();
        let p = r[0][1];
        if (r[1][0] - p).abs() <= 1e-12 {
            Some(p)
        } else {
            None
        }
    };
    let (a, b) = (crossover(0).ok_or_else(not_pair)?, crossover(1).ok_or_else(not_pair)?);
    if (a + b - 1.0).abs() > 1e-12 || a == 0.5 {
        return Err(not_pair());
    }
    Ok(if a < 0.5 { (a, 0) } else { (b, 1) })
}

/// Channel estimate from training outputs.
pub fn estimate_channel(
    rule: &EstimationRule,
    family: &CompoundFamily,
    training: &TrainingSequence,
    outputs: &[usize],
) -> Result<usize> {
    if outputs.len() != training.len() {
        return Err(invalid(format!(
            "{} outputs for a training sequence of length {}",
            outputs.len(),
            training.len()
        )));
    }
    if let Some(y) = outputs.iter().find(|&&y| y >= family.num_outputs()) {
        return Err(invalid(format!("output symbol {y} out of range")));
    }
    if let Some(x) = training.symbols().iter().find(|&&x| x >= family.num_inputs()) {
        return Err(invalid(format!("training symbol {x} out of range")));
    }
    rule.check_family(family)?;
    Ok(estimate_unchecked(rule, family, training.symbols(), outputs))
}

pub(crate) fn estimate_unchecked(
    rule: &EstimationRule,
    family: &CompoundFamily,
    inputs: &[usize],
    outputs: &[usize],
) -> usize {
    match *rule {
        EstimationRule::MaximumLikelihood => {
            let mut best = 0;
            let mut best_ll = f64::NEG_INFINITY;
            for (l, ch) in family.channels().iter().enumerate() {
                let ll: f64 = inputs
                    .iter()
                    .zip(outputs)
                    .map(|(&x, &y)| ch.prob(x, y).log2())
                    .sum();
                if crate::scheme::beats(ll, best_ll) {
                    best_ll = ll;
                    best = l;
                }
            }
            best
        }
        EstimationRule::BscThreshold { q, p_index, .. } => {
            let ones = outputs.iter().filter(|&&y| y == 1).count();
            if (ones as f64) < q * outputs.len() as f64 {
                p_index
            } else {
                1 - p_index
            }
        }
    }
}

/// Pairwise and marginal estimation-error exponents.
///
/// `pairwise[l][k]` is the exponent of deciding `k` when `l` is true;
/// `marginal[l] = min_{k != l} pairwise[l][k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentTuple {
    pub pairwise: Vec<Vec<f64>>,
    pub marginal: Vec<f64>,
}

impl ExponentTuple {
    pub fn from_pairwise(pairwise: Vec<Vec<f64>>) -> Self {
        let marginal = marginal_of(&pairwise);
        ExponentTuple { pairwise, marginal }
    }
}

fn marginal_of(pairwise: &[Vec<f64>]) -> Vec<f64> {
    (0..pairwise.len())
        .map(|l| {
            pairwise[l]
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != l)
                .map(|(_, v)| *v)
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Maps pairwise tuples to marginal vectors with the per-hypothesis minimum.
pub fn marginal_region_from_pairwise(tuples: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    tuples.iter().map(|t| marginal_of(t)).collect()
}

/// Hoeffding exponents of the threshold test with all-zero training:
/// `(D(q || p), D(q || 1-p))`. Accepts the closed range `p <= q <= 1-p`.
pub fn threshold_exponents(p: f64, q: f64) -> Result<(f64, f64)> {
    if !(p > 0.0 && p < 0.5) || !(q >= p && q <= 1.0 - p) {
        return Err(invalid(format!("need 0 < p < 1/2 and p <= q <= 1-p, got p={p}, q={q}")));
    }
    Ok((binary_kl(q, p), binary_kl(q, 1.0 - p)))
}

/// Composition-weighted Chernoff information between two channels' output laws,
/// `-min_{s in [0,1]} sum_x w_x log2 sum_y P_x(y)^(1-s) Q_x(y)^s`.
pub fn chernoff_information(p_laws: &[&[f64]], q_laws: &[&[f64]], weights: &[f64]) -> f64 {
    let f = |s: f64| -> f64 {
        let mut total = 0.0;
        for ((p, q), w) in p_laws.iter().zip(q_laws).zip(weights) {
            if *w <= 0.0 {
                continue;
            }
            let z: f64 = p
                .iter()
                .zip(q.iter())
                .filter(|(a, b)| **a > 0.0 && **b > 0.0)
                .map(|(a, b)| a.powf(1.0 - s) * b.powf(s))
                .sum();
            if z <= 0.0 {
                return f64::NEG_INFINITY;
            }
            total += w * z.log2();
        }
        total
    };
    // f is convex on (0, 1); golden-section search for its minimum.
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    if fc == f64::NEG_INFINITY || fd == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
        if b - a < 1e-14 {
            break;
        }
    }
    (-fc.min(fd)).max(0.0)
}

/// Exponents achieved by `rule` under a training sequence with the given
/// per-symbol usage fractions.
pub fn estimation_exponents(
    rule: &EstimationRule,
    family: &CompoundFamily,
    composition: &[f64],
) -> Result<ExponentTuple> {
    if composition.len() != family.num_inputs()
        || composition.iter().any(|w| !(*w >= 0.0))
        || (composition.iter().sum::<f64>() - 1.0).abs() > 1e-12
    {
        return Err(invalid("composition must be a distribution over the input alphabet"));
    }
    rule.check_family(family)?;
    let l = family.len();
    let mut pairwise = vec![vec![0.0; l]; l];
    match *rule {
        EstimationRule::BscThreshold { q, p, p_index } => {
            if composition[0] != 1.0 {
                return Err(invalid("threshold rule exponents assume all-zero training"));
            }
            let (tp, tq) = threshold_exponents(p, q)?;
            pairwise[p_index][1 - p_index] = tp;
            pairwise[1 - p_index][p_index] = tq;
        }
        EstimationRule::MaximumLikelihood => {
            for a in 0..l {
                for b in (a + 1)..l {
                    let pa: Vec<&[f64]> = family.channel(a).rows().iter().map(|r| r.as_slice()).collect();
                    let pb: Vec<&[f64]> = family.channel(b).rows().iter().map(|r| r.as_slice()).collect();
                    let c = chernoff_information(&pa, &pb, composition);
                    pairwise[a][b] = c;
                    pairwise[b][a] = c;
                }
            }
        }
    }
    Ok(ExponentTuple::from_pairwise(pairwise))
}
