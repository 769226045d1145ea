//! Information measures in bits: divergence, mutual information, capacity,
//! the zero-rate Burnashev exponent and the two compound capacities.
//!
//! Capacity is computed with Blahut–Arimoto and certified by the usual
//! bracket
//!
//! ```text
//! log2 sum_x p(x) c(x)  <=  C  <=  log2 max_x c(x),   c(x) = 2^D(Q(.|x) || pQ)
//! ```
//!
//! The no-feedback compound capacity `max_P min_l I(P, Q_l)` is solved through
//! its dual `min_lambda max_P sum_l lambda_l I(P, Q_l)`. For fixed weights the
//! inner problem is the capacity of the channel `x -> (J, Y)` with `J ~ lambda`
//! revealed to the receiver, so every dual evaluation is one Blahut–Arimoto run.

use serde::{Deserialize, Serialize};

use crate::channel::{CompoundFamily, Dmc};
use crate::error::{invalid, Error, Result};

/// Default accuracy for capacity computations, in bits.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Iteration cap for Blahut–Arimoto.
pub const MAX_ITERATIONS: usize = 100_000;

const DIST_TOL: f64 = 1e-12;

/// `D(p || q)` in bits, without argument checks. Returns `+inf` when `p` puts
/// mass where `q` has none.
pub fn kl_bits(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            d += a * (a / b).log2();
        }
    }
    d.max(0.0)
}

/// Kullback–Leibler divergence `D(p || q)` in bits.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(invalid(format!(
            "distributions have lengths {} and {}",
            p.len(),
            q.len()
        )));
    }
    check_distribution(p)?;
    check_distribution(q)?;
    Ok(kl_bits(p, q))
}

/// Binary divergence `D(a || b)` between Bernoulli laws.
pub fn binary_kl(a: f64, b: f64) -> f64 {
    kl_bits(&[a, 1.0 - a], &[b, 1.0 - b])
}

/// Shannon entropy in bits.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// Binary entropy function `h(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.iter().any(|x| !(*x >= 0.0)) {
        return Err(invalid("distribution has negative or NaN entries"));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > DIST_TOL {
        return Err(invalid(format!("distribution sums to {s}")));
    }
    Ok(())
}

/// A probability distribution over channel inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct InputDistribution(Vec<f64>);

impl InputDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("empty input distribution"));
        }
        check_distribution(&probs)?;
        Ok(InputDistribution(probs))
    }

    pub fn uniform(k: usize) -> Self {
        InputDistribution(vec![1.0 / k as f64; k])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for InputDistribution {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<InputDistribution> for Vec<f64> {
    fn from(d: InputDistribution) -> Self {
        d.0
    }
}

fn output_law(p: &[f64], channel: &Dmc) -> Vec<f64> {
    let mut q = vec![0.0; channel.num_outputs()];
    for (px, row) in p.iter().zip(channel.rows()) {
        for (qy, w) in q.iter_mut().zip(row) {
            *qy += px * w;
        }
    }
    q
}

fn mi_unchecked(p: &[f64], channel: &Dmc) -> f64 {
    let q = output_law(p, channel);
    p.iter()
        .zip(channel.rows())
        .filter(|(px, _)| **px > 0.0)
        .map(|(px, row)| px * kl_bits(row, &q))
        .sum::<f64>()
        .max(0.0)
}

/// `I(P, Q)` in bits.
pub fn mutual_information(input: &InputDistribution, channel: &Dmc) -> Result<f64> {
    if input.0.len() != channel.num_inputs() {
        return Err(invalid(format!(
            "input distribution has {} entries, channel has {} inputs",
            input.0.len(),
            channel.num_inputs()
        )));
    }
    Ok(mi_unchecked(&input.0, channel))
}

/// Result of a capacity computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capacity {
    /// Mutual information achieved by `input`; within `tol` of capacity.
    pub value: f64,
    pub input: InputDistribution,
    /// Certified bracket around the true capacity.
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

/// Step-by-step Blahut–Arimoto iteration, exposing the bracket after each step.
#[derive(Debug, Clone)]
pub struct BlahutArimoto<'a> {
    channel: &'a Dmc,
    p: Vec<f64>,
    iterations: usize,
}

/// Bracket reported by one Blahut–Arimoto step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl<'a> BlahutArimoto<'a> {
    pub fn new(channel: &'a Dmc) -> Self {
        Self::warm(channel, vec![1.0 / channel.num_inputs() as f64; channel.num_inputs()])
    }

    fn warm(channel: &'a Dmc, p: Vec<f64>) -> Self {
        BlahutArimoto {
            channel,
            p,
            iterations: 0,
        }
    }

    /// Current input distribution.
    pub fn input(&self) -> &[f64] {
        &self.p
    }

    /// Evaluates the bracket at the current input, then moves to the next one.
    pub fn step(&mut self) -> Bracket {
        let q = output_law(&self.p, self.channel);
        let d: Vec<f64> = self
            .channel
            .rows()
            .iter()
            .map(|row| kl_bits(row, &q))
            .collect();
        // Work relative to the largest divergence to keep exp2 in range.
        let dmax = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = self
            .p
            .iter()
            .zip(&d)
            .map(|(px, dx)| px * (dx - dmax).exp2())
            .collect();
        let z: f64 = weights.iter().sum();
        let lower = dmax + z.log2();
        self.p = weights.into_iter().map(|w| w / z).collect();
        self.iterations += 1;
        Bracket { lower, upper: dmax }
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

/// Capacity of a single channel via Blahut–Arimoto, to within `tol` bits.
pub fn capacity(channel: &Dmc, tol: f64) -> Result<Capacity> {
    let ba = if channel.num_inputs() == 2 {
        BlahutArimoto::warm(channel, binary_input_optimum(channel))
    } else {
        BlahutArimoto::new(channel)
    };
    capacity_from(ba, tol, MAX_ITERATIONS)
}

/// Optimal input of a binary-input channel. The derivative of the mutual
/// information in `P(0)` is `D(Q_0 || q) - D(Q_1 || q)`, which decreases, so
/// bisection finds its root. Plain Blahut–Arimoto crawls on nearly useless
/// channels.
fn binary_input_optimum(channel: &Dmc) -> Vec<f64> {
    let slope = |a: f64| {
        let q = output_law(&[a, 1.0 - a], channel);
        kl_bits(channel.row(0), &q) - kl_bits(channel.row(1), &q)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let s = slope(mid);
        if s.is_nan() {
            break;
        }
        if s > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Keep both inputs in play so the iteration can still move.
    let a = (0.5 * (lo + hi)).clamp(1e-12, 1.0 - 1e-12);
    vec![a, 1.0 - a]
}

fn capacity_from(mut ba: BlahutArimoto<'_>, tol: f64, max_iterations: usize) -> Result<Capacity> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let channel = ba.channel;
    let mut best = Bracket {
        lower: 0.0,
        upper: f64::INFINITY,
    };
    while ba.iterations() < max_iterations {
        let b = ba.step();
        best.lower = best.lower.max(b.lower);
        best.upper = best.upper.min(b.upper);
        if best.upper - best.lower <= tol {
            let value = mi_unchecked(&ba.p, channel);
            return Ok(Capacity {
                value,
                input: InputDistribution(ba.p),
                lower: best.lower,
                upper: best.upper,
                iterations: ba.iterations,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: ba.iterations,
        lower: best.lower,
        upper: best.upper,
    })
}

/// Zero-rate Burnashev exponent and the maximally separated input pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurnashevResult {
    /// `max D(Q(.|x_A) || Q(.|x_R))` in bits; `+inf` for disjoint supports.
    pub value: f64,
    pub accept_symbol: usize,
    pub reject_symbol: usize,
}

impl BurnashevResult {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// Exhaustive maximization of the pairwise output-law divergence over ordered
/// input pairs. Ties keep the lexicographically smallest pair. A single-input
/// channel has no pair and reports `0` with `(0, 0)`.
pub fn burnashev_b(channel: &Dmc) -> BurnashevResult {
    let mut best = BurnashevResult {
        value: 0.0,
        accept_symbol: 0,
        reject_symbol: 0,
    };
    let mut found = false;
    let k = channel.num_inputs();
    for a in 0..k {
        for r in 0..k {
            if a == r {
                continue;
            }
            let d = kl_bits(channel.row(a), channel.row(r));
            if !found || d > best.value {
                best = BurnashevResult {
                    value: d,
                    accept_symbol: a,
                    reject_symbol: r,
                };
                found = true;
            }
        }
    }
    best
}

/// Per-channel capacities `(C_1, ..., C_L)`.
pub fn capacity_vector(family: &CompoundFamily, tol: f64) -> Result<Vec<f64>> {
    family
        .channels()
        .iter()
        .map(|c| capacity(c, tol).map(|c| c.value))
        .collect()
}

/// Compound capacity with feedback, `min_l max_P I(P, Q_l)`.
pub fn compound_capacity_feedback(family: &CompoundFamily, tol: f64) -> Result<f64> {
    Ok(capacity_vector(family, tol)?
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// Outcome of the no-feedback compound capacity computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompoundCapacity {
    /// Best certified lower bound, achieved by `input`.
    pub value: f64,
    pub input: InputDistribution,
    pub upper: f64,
    /// Dual weights on the family members at the best upper bound.
    pub weights: Vec<f64>,
}

const GRID_MAX_INPUTS: usize = 4;
const GRID_STEPS: usize = 40;
const DUAL_ITERATIONS: usize = 20_000;

/// Compound capacity without feedback, `max_P min_l I(P, Q_l)`, to within `tol`.
pub fn compound_capacity_nofeedback(family: &CompoundFamily, tol: f64) -> Result<CompoundCapacity> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let nx = family.num_inputs();
    let worst = |p: &[f64]| {
        family
            .channels()
            .iter()
            .map(|c| mi_unchecked(p, c))
            .fold(f64::INFINITY, f64::min)
    };

    let mut best_p = vec![1.0 / nx as f64; nx];
    let mut lower = worst(&best_p);
    if nx <= GRID_MAX_INPUTS {
        for p in simplex_grid(nx, GRID_STEPS) {
            let v = worst(&p);
            if v > lower {
                lower = v;
                best_p = p;
            }
        }
    }

    let l = family.len();
    let inner_tol = tol / 4.0;
    let mut lambda = vec![1.0 / l as f64; l];
    let mut upper = f64::INFINITY;
    let mut best_lambda = lambda.clone();
    let mut avg_p = vec![0.0; nx];
    let mut avg_weight = 0.0;

    for _ in 0..DUAL_ITERATIONS {
        let mixture = mixture_channel(family, &lambda);
        let cap = capacity(&mixture, inner_tol)?;
        if cap.upper < upper {
            upper = cap.upper;
            best_lambda = lambda.clone();
        }
        let p = cap.input.0;
        let grads: Vec<f64> = family.channels().iter().map(|c| mi_unchecked(&p, c)).collect();
        let v = grads.iter().cloned().fold(f64::INFINITY, f64::min);
        if v > lower {
            lower = v;
            best_p = p.clone();
        }
        avg_weight += 1.0;
        for (a, px) in avg_p.iter_mut().zip(&p) {
            *a += (px - *a) / avg_weight;
        }
        let va = worst(&avg_p);
        if va > lower {
            lower = va;
            best_p = avg_p.clone();
        }
        if upper - lower <= tol {
            return Ok(CompoundCapacity {
                value: lower,
                input: InputDistribution(best_p),
                upper,
                weights: best_lambda,
            });
        }
        // Polyak step on the dual, projected back onto the simplex.
        let mean = grads.iter().sum::<f64>() / l as f64;
        let g: Vec<f64> = grads.iter().map(|x| x - mean).collect();
        let norm2: f64 = g.iter().map(|x| x * x).sum();
        if norm2 <= f64::EPSILON {
            // Flat dual: every member sees the same information.
            return Ok(CompoundCapacity {
                value: lower.max(v),
                input: InputDistribution(best_p),
                upper: cap.upper,
                weights: lambda,
            });
        }
        let step = (cap.upper - lower).max(tol) / norm2;
        let moved: Vec<f64> = lambda.iter().zip(&g).map(|(w, gi)| w - step * gi).collect();
        lambda = project_to_simplex(&moved);
    }
    Err(Error::NonConvergence {
        iterations: DUAL_ITERATIONS,
        lower,
        upper,
    })
}

/// The channel `x -> (J, Y)` with `J ~ weights` known at the receiver.
fn mixture_channel(family: &CompoundFamily, weights: &[f64]) -> Dmc {
    let rows = (0..family.num_inputs())
        .map(|x| {
            family
                .channels()
                .iter()
                .zip(weights)
                .flat_map(|(c, w)| c.row(x).iter().map(move |q| w * q))
                .collect()
        })
        .collect();
    // Weights are normalized, so each row sums to 1 up to rounding.
    Dmc::new(rows).expect("mixture rows are stochastic")
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    let mut w: Vec<f64> = v.iter().map(|x| (x - theta).max(0.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

/// All points of the simplex in `k` coordinates with denominators `steps`.
pub(crate) fn simplex_grid(k: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, steps: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if k == 1 {
            prefix.push(left);
            out.push(prefix.iter().map(|&c| c as f64 / steps as f64).collect());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(k - 1, left - c, steps, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, steps, steps, &mut Vec::with_capacity(k), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn h(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    #[test]
    fn kl_examples() {
        let p = [0.2, 0.3, 0.5];
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(
            kl_divergence(&[0.1, 0.9], &[0.9, 0.1]).unwrap(),
            0.8 * 9f64.log2(),
            epsilon = 1e-14
        );
        assert_eq!(kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), 1.0);
        assert_eq!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), f64::INFINITY);
        assert!(kl_divergence(&[1.0], &[0.5, 0.5]).is_err());
        assert!(kl_divergence(&[0.7, 0.7], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let flat = Dmc::new(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        let p = InputDistribution::new(vec![0.2, 0.8]).unwrap();
        assert_eq!(mutual_information(&p, &flat).unwrap(), 0.0);
        let u = InputDistribution::uniform(2);
        assert_abs_diff_eq!(
            mutual_information(&u, &Dmc::bsc(0.1).unwrap()).unwrap(),
            1.0 - h(0.1),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            mutual_information(&u, &Dmc::identity(2).unwrap()).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert!(mutual_information(&InputDistribution::uniform(3), &flat).is_err());
        assert!(InputDistribution::new(vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn capacity_closed_forms() {
        let c = capacity(&Dmc::identity(2).unwrap(), 1e-9).unwrap();
        assert_abs_diff_eq!(c.value, 1.0, epsilon = 1e-9);
        let c = capacity(&Dmc::bsc(0.1).unwrap(), 1e-9).unwrap();
        assert_abs_diff_eq!(c.value, 1.0 - h(0.1), epsilon = 1e-6);
        assert_abs_diff_eq!(c.value, 0.53100, epsilon = 1e-5);
        let c = capacity(&Dmc::bec(0.3).unwrap(), 1e-9).unwrap();
        assert_abs_diff_eq!(c.value, 0.7, epsilon = 1e-6);
        assert!(capacity(&Dmc::bsc(0.1).unwrap(), 0.0).is_err());
    }

    #[test]
    fn nearly_useless_channel() {
        // BSC(0.499): C = 1 - h(0.499), about 2.9e-6 bits.
        let c = capacity(&Dmc::bsc(0.499).unwrap(), DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(c.value, 1.0 - binary_entropy(0.499), epsilon = 1e-12);
        let z = Dmc::new(vec![vec![1.0, 0.0], vec![0.999, 0.001]]).unwrap();
        let c = capacity(&z, DEFAULT_TOL).unwrap();
        assert!(c.upper - c.lower <= DEFAULT_TOL && c.iterations < 10);
    }

    #[test]
    fn capacity_bracket_contains_value() {
        // Z channel: C = log2(1 + (1-e) e^(e/(1-e))) at e = 0.5 -> log2(1.25)
        let z = Dmc::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let c = capacity(&z, 1e-10).unwrap();
        assert_abs_diff_eq!(c.value, 1.25f64.log2(), epsilon = 1e-9);
        assert!(c.lower <= c.value + 1e-12 && c.value <= c.upper + 1e-12);
    }

    #[test]
    fn non_convergence_reports_bracket() {
        let z = Dmc::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        match capacity_from(BlahutArimoto::new(&z), 1e-15, 3) {
            Err(Error::NonConvergence { iterations, lower, upper }) => {
                assert_eq!(iterations, 3);
                assert!(lower < upper);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lower_bound_is_monotone() {
        let ch = Dmc::new(vec![
            vec![0.7, 0.2, 0.1],
            vec![0.1, 0.6, 0.3],
            vec![0.25, 0.25, 0.5],
        ])
        .unwrap();
        let mut ba = BlahutArimoto::new(&ch);
        let mut prev = f64::NEG_INFINITY;
        for _ in 0..200 {
            let b = ba.step();
            assert!(b.lower >= prev - 1e-15);
            assert!(b.lower <= b.upper + 1e-15);
            prev = b.lower;
        }
    }

    #[test]
    fn burnashev_examples() {
        let flat = Dmc::new(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        assert_eq!(burnashev_b(&flat).value, 0.0);
        let bsc = Dmc::bsc(0.1).unwrap();
        let b = burnashev_b(&bsc);
        assert_eq!(b.value, kl_divergence(bsc.row(0), bsc.row(1)).unwrap());
        assert_abs_diff_eq!(b.value, binary_kl(0.1, 0.9), epsilon = 1e-14);
        assert_abs_diff_eq!(b.value, 2.53594, epsilon = 1e-5);
        assert_eq!((b.accept_symbol, b.reject_symbol), (0, 1));
        let id = burnashev_b(&Dmc::identity(2).unwrap());
        assert!(id.is_infinite());
        // asymmetric pair: the larger direction wins
        let z = burnashev_b(&Dmc::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap());
        assert!(z.is_infinite());
        assert_eq!((z.accept_symbol, z.reject_symbol), (1, 0));
    }

    #[test]
    fn burnashev_matches_double_loop() {
        let ch = Dmc::new(vec![
            vec![0.7, 0.2, 0.1],
            vec![0.1, 0.6, 0.3],
            vec![0.25, 0.25, 0.5],
        ])
        .unwrap();
        let mut best = 0.0;
        for a in 0..3 {
            for r in 0..3 {
                if a != r {
                    best = f64::max(best, kl_divergence(ch.row(a), ch.row(r)).unwrap());
                }
            }
        }
        assert_eq!(burnashev_b(&ch).value, best);
    }

    #[test]
    fn compound_capacities() {
        let single = CompoundFamily::new(vec![Dmc::bsc(0.2).unwrap()]).unwrap();
        let c = capacity(single.channel(0), 1e-9).unwrap().value;
        assert_abs_diff_eq!(compound_capacity_nofeedback(&single, 1e-9).unwrap().value, c, epsilon = 1e-9);
        assert_abs_diff_eq!(compound_capacity_feedback(&single, 1e-9).unwrap(), c, epsilon = 1e-12);

        let pair = CompoundFamily::bsc_pair(0.1).unwrap();
        let nf = compound_capacity_nofeedback(&pair, 1e-9).unwrap();
        assert_abs_diff_eq!(nf.value, 1.0 - h(0.1), epsilon = 1e-9);
        assert_abs_diff_eq!(compound_capacity_feedback(&pair, 1e-9).unwrap(), 1.0 - h(0.1), epsilon = 1e-9);
        let v = capacity_vector(&pair, 1e-9).unwrap();
        assert_abs_diff_eq!(v[0], 0.53100, epsilon = 1e-5);
        assert_abs_diff_eq!(v[1], 0.53100, epsilon = 1e-5);

        let with_flat = CompoundFamily::new(vec![
            Dmc::bsc(0.1).unwrap(),
            Dmc::new(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap(),
        ])
        .unwrap();
        assert_abs_diff_eq!(compound_capacity_nofeedback(&with_flat, 1e-9).unwrap().value, 0.0, epsilon = 1e-9);

        let id_half = CompoundFamily::new(vec![Dmc::identity(2).unwrap(), Dmc::bsc(0.5).unwrap()]).unwrap();
        assert_abs_diff_eq!(compound_capacity_feedback(&id_half, 1e-9).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn nofeedback_matches_grid_oracle_on_asymmetric_family() {
        // BSC and Z channel prefer different inputs, so the max-min is a compromise.
        let fam = CompoundFamily::new(vec![
            Dmc::bsc(0.05).unwrap(),
            Dmc::new(vec![vec![1.0, 0.0], vec![0.4, 0.6]]).unwrap(),
        ])
        .unwrap();
        let got = compound_capacity_nofeedback(&fam, 1e-7).unwrap();
        let mut oracle: f64 = 0.0;
        for i in 0..=100_000 {
            let t = i as f64 / 100_000.0;
            let p = [1.0 - t, t];
            let v = fam
                .channels()
                .iter()
                .map(|c| mi_unchecked(&p, c))
                .fold(f64::INFINITY, f64::min);
            oracle = oracle.max(v);
        }
        assert_abs_diff_eq!(got.value, oracle, epsilon = 1e-7);
        assert!(got.value <= got.upper + 1e-12);
    }

    #[test]
    fn simplex_projection_and_grid() {
        let w = project_to_simplex(&[0.8, 0.5, -0.2]);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(w.iter().all(|x| *x >= 0.0));
        assert_eq!(simplex_grid(3, 4).len(), 15);
    }
}
