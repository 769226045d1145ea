//! Membership in the pairwise error-exponent region of L-ary hypothesis testing.
//!
//! A tuple `T[l][k]` (exponent of deciding `k` under `l`) is achievable iff every
//! empirical output law `p` can be assigned a decision `k` with
//! `D(p || p_l) >= T[l][k]` for all `l != k`. With non-identical but independent
//! observations the outputs are split by input symbol and the divergence is the
//! usage-weighted sum over blocks.

use crate::channel::CompoundFamily;
use crate::error::{invalid, Error, Result};
use crate::info::{kl_bits, project_to_simplex};

pub const TUNCEL_MAX_OUTPUTS: usize = 5;
pub const TUNCEL_MIN_RESOLUTION: usize = 10;
const MAX_GRID_POINTS: usize = 20_000_000;

/// Output laws of each hypothesis, split into blocks by input symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputLaws {
    weights: Vec<f64>,
    /// `laws[l][j]` is the output law of hypothesis `l` on block `j`.
    laws: Vec<Vec<Vec<f64>>>,
}

impl OutputLaws {
    /// Identically distributed observations with one law per hypothesis.
    pub fn iid(laws: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(vec![1.0], laws.into_iter().map(|l| vec![l]).collect())
    }

    /// Laws seen by a training sequence with the given input composition.
    pub fn from_family(family: &CompoundFamily, composition: &[f64]) -> Result<Self> {
        if composition.len() != family.num_inputs() {
            return Err(invalid("composition length differs from input alphabet"));
        }
        let used: Vec<usize> = (0..composition.len()).filter(|&x| composition[x] > 0.0).collect();
        let laws = family
            .channels()
            .iter()
            .map(|c| used.iter().map(|&x| c.row(x).to_vec()).collect())
            .collect();
        Self::new(used.iter().map(|&x| composition[x]).collect(), laws)
    }

    pub fn new(weights: Vec<f64>, laws: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if weights.is_empty() || laws.is_empty() {
            return Err(invalid("need at least one block and one hypothesis"));
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 || weights.iter().any(|w| *w <= 0.0) {
            return Err(invalid("block weights must be positive and sum to 1"));
        }
        let ny = laws[0][0].len();
        for l in &laws {
            if l.len() != weights.len() || l.iter().any(|b| b.len() != ny) {
                return Err(invalid("inconsistent law dimensions"));
            }
        }
        Ok(OutputLaws { weights, laws })
    }

    pub fn num_hypotheses(&self) -> usize {
        self.laws.len()
    }

    fn num_outputs(&self) -> usize {
        self.laws[0][0].len()
    }

    fn divergence(&self, p: &[Vec<f64>], l: usize) -> f64 {
        self.weights
            .iter()
            .zip(p)
            .zip(&self.laws[l])
            .map(|((w, pj), qj)| w * kl_bits(pj, qj))
            .sum()
    }
}

/// Largest slack over decisions; negative means no decision is compatible with `p`.
fn margin(tuple: &[Vec<f64>], laws: &OutputLaws, p: &[Vec<f64>]) -> f64 {
    let l = laws.num_hypotheses();
    let d: Vec<f64> = (0..l).map(|h| laws.divergence(p, h)).collect();
    (0..l)
        .map(|k| {
            (0..l)
                .filter(|&h| h != k)
                .map(|h| d[h] - tuple[h][k])
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Whether `tuple` lies in the pairwise exponent region for `laws`.
///
/// Checks every point of a uniform grid with `resolution` steps per simplex
/// coordinate, then refines around the worst grid point with Nelder–Mead.
pub fn tuncel_member(tuple: &[Vec<f64>], laws: &OutputLaws, resolution: usize) -> Result<bool> {
    let l = laws.num_hypotheses();
    if tuple.len() != l || tuple.iter().any(|r| r.len() != l) {
        return Err(invalid(format!("tuple must be {l}x{l}")));
    }
    if tuple
        .iter()
        .enumerate()
        .any(|(h, r)| r.iter().enumerate().any(|(k, v)| h != k && !(*v >= 0.0)))
    {
        return Err(invalid("exponents must be nonnegative"));
    }
    if resolution < TUNCEL_MIN_RESOLUTION {
        return Err(invalid(format!("grid resolution must be at least {TUNCEL_MIN_RESOLUTION}")));
    }
    let ny = laws.num_outputs();
    if ny > TUNCEL_MAX_OUTPUTS {
        return Err(Error::Capability(format!(
            "output alphabet of {ny} symbols exceeds the grid limit of {TUNCEL_MAX_OUTPUTS}"
        )));
    }
    let per_block = binomial(resolution + ny - 1, ny - 1);
    let blocks = laws.weights.len();
    let total = (0..blocks).try_fold(1usize, |acc, _| acc.checked_mul(per_block));
    match total {
        Some(t) if t <= MAX_GRID_POINTS => {}
        _ => {
            return Err(Error::Capability(format!(
                "grid over {blocks} output simplices at resolution {resolution} is too large"
            )))
        }
    }

    let scale = tuple.iter().flatten().filter(|v| v.is_finite()).fold(1.0f64, |a, b| a.max(*b));
    let tol = 1e-12 * scale;

    let simplex = crate::info::simplex_grid(ny, resolution);
    let mut index = vec![0usize; blocks];
    let mut worst = f64::INFINITY;
    let mut worst_point = Vec::new();
    loop {
        let p: Vec<Vec<f64>> = index.iter().map(|&i| simplex[i].clone()).collect();
        let m = margin(tuple, laws, &p);
        if m < -tol {
            return Ok(false);
        }
        if m < worst {
            worst = m;
            worst_point = p;
        }
        // odometer over blocks
        let mut b = 0;
        loop {
            if b == blocks {
                return Ok(refine(tuple, laws, worst_point, resolution) >= -tol);
            }
            index[b] += 1;
            if index[b] < simplex.len() {
                break;
            }
            index[b] = 0;
            b += 1;
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Nelder–Mead on the free coordinates of every block, projecting each trial
/// point back onto the simplex before evaluating the margin.
fn refine(tuple: &[Vec<f64>], laws: &OutputLaws, start: Vec<Vec<f64>>, resolution: usize) -> f64 {
    let ny = laws.num_outputs();
    let free = ny - 1;
    if free == 0 {
        return margin(tuple, laws, &start);
    }
    let to_point = |z: &[f64]| -> Vec<Vec<f64>> {
        z.chunks(free)
            .map(|c| {
                let mut v: Vec<f64> = c.to_vec();
                v.push(1.0 - c.iter().sum::<f64>());
                project_to_simplex(&v)
            })
            .collect()
    };
    let f = |z: &[f64]| margin(tuple, laws, &to_point(z));
    let x0: Vec<f64> = start.iter().flat_map(|b| b[..free].to_vec()).collect();
    let dim = x0.len();
    let step = 1.0 / resolution as f64;

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.clone(), f(&x0)));
    for i in 0..dim {
        let mut x = x0.clone();
        x[i] += if x[i] + step <= 1.0 { step } else { -step };
        let fx = f(&x);
        simplex.push((x, fx));
    }
    for _ in 0..400 * dim {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = simplex[dim].1 - simplex[0].1;
        if spread.abs() < 1e-15 {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let xc = along(0.5);
            let fc = f(&xc);
            if fc < simplex[dim].1 {
                simplex[dim] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    s.0 = best.iter().zip(&s.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    s.1 = f(&s.0);
                }
            }
        }
    }
    simplex.iter().map(|s| s.1).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tilted(p1: &[f64], p2: &[f64], s: f64) -> Vec<f64> {
        let w: Vec<f64> = p1.iter().zip(p2).map(|(a, b)| a.powf(1.0 - s) * b.powf(s)).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|v| v / z).collect()
    }

    fn two(t12: f64, t21: f64) -> Vec<Vec<f64>> {
        vec![vec![0.0, t12], vec![t21, 0.0]]
    }

    #[test]
    fn zero_tuple_is_member() {
        let laws = OutputLaws::iid(vec![vec![0.9, 0.1], vec![0.2, 0.8], vec![0.5, 0.5]]).unwrap();
        assert!(tuncel_member(&vec![vec![0.0; 3]; 3], &laws, 50).unwrap());
    }

    #[test]
    fn tilted_boundary_and_inflation() {
        let (p1, p2) = (vec![0.9, 0.1], vec![0.2, 0.8]);
        let laws = OutputLaws::iid(vec![p1.clone(), p2.clone()]).unwrap();
        for s in [0.2, 0.5, 0.7] {
            let r = tilted(&p1, &p2, s);
            let (a, b) = (kl_bits(&r, &p1), kl_bits(&r, &p2));
            assert!(tuncel_member(&two(a, b), &laws, 100).unwrap(), "s={s}");
            assert!(!tuncel_member(&two(a + 0.01, b + 0.01), &laws, 100).unwrap(), "s={s}");
        }
    }

    #[test]
    fn monotone_under_decrease() {
        let laws = OutputLaws::iid(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.3, 0.6]]).unwrap();
        let t = two(0.3, 0.2);
        assert!(tuncel_member(&t, &laws, 30).unwrap());
        assert!(tuncel_member(&two(0.1, 0.2), &laws, 30).unwrap());
        assert!(tuncel_member(&two(0.3, 0.0), &laws, 30).unwrap());
    }

    #[test]
    fn blocks_from_round_robin_training() {
        let fam = CompoundFamily::bsc_pair(0.1).unwrap();
        let laws = OutputLaws::from_family(&fam, &[0.5, 0.5]).unwrap();
        assert!(tuncel_member(&two(0.0, 0.0), &laws, 20).unwrap());
        // each block alone separates the pair, so the combined exponent is
        // not bounded by a single block's divergence
        assert!(!tuncel_member(&two(3.0, 3.0), &laws, 20).unwrap());
    }

    #[test]
    fn capability_and_argument_errors() {
        let big = OutputLaws::iid(vec![vec![1.0 / 6.0; 6], {
            let mut v = vec![0.1; 6];
            v[0] = 0.5;
            v
        }])
        .unwrap();
        assert!(matches!(tuncel_member(&two(0.0, 0.0), &big, 10), Err(Error::Capability(_))));
        let laws = OutputLaws::iid(vec![vec![0.5, 0.5], vec![0.1, 0.9]]).unwrap();
        assert!(tuncel_member(&two(0.0, 0.0), &laws, 5).is_err());
        assert!(tuncel_member(&two(-1.0, 0.0), &laws, 50).is_err());
        assert!(tuncel_member(&[vec![0.0]], &laws, 50).is_err());
    }
}
