//! Direct enumeration of whole epochs, independent of the library oracle.

use compound_feedback::channel::{CompoundFamily, Dmc};
use compound_feedback::detection::EstimationRule;
use compound_feedback::scheme::{Message, Scheme};

/// Every sequence of `len` symbols over `k` outputs, built recursively.
fn sequences(len: usize, k: usize) -> Vec<Vec<usize>> {
    if len == 0 {
        return vec![vec![]];
    }
    let shorter = sequences(len - 1, k);
    (0..k)
        .flat_map(|y| {
            shorter.iter().map(move |s| {
                let mut v = vec![y];
                v.extend_from_slice(s);
                v
            })
        })
        .collect()
}

fn prob(ch: &Dmc, x: &[usize], y: &[usize]) -> f64 {
    let mut p = 1.0;
    for t in 0..x.len() {
        p *= ch.rows()[x[t]][y[t]];
    }
    p
}

fn loglik(ch: &Dmc, x: &[usize], y: &[usize]) -> f64 {
    (0..x.len()).map(|t| ch.rows()[x[t]][y[t]].ln()).sum()
}

/// Index of the best candidate; near-ties keep the earlier one.
fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..scores.len() {
        let b = scores[best];
        if scores[i] > b && (b == f64::NEG_INFINITY || scores[i] - b > 1e-9 * b.abs().max(1.0)) {
            best = i;
        }
    }
    best
}

fn estimate(rule: &EstimationRule, fam: &CompoundFamily, x: &[usize], y: &[usize]) -> usize {
    match *rule {
        EstimationRule::BscThreshold { q, p_index, .. } => {
            let ones = y.iter().filter(|&&v| v == 1).count() as f64;
            if ones < q * y.len() as f64 { p_index } else { 1 - p_index }
        }
        EstimationRule::MaximumLikelihood => {
            let s: Vec<f64> = fam.channels().iter().map(|c| loglik(c, x, y)).collect();
            argmax(&s)
        }
    }
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| if *b == 0.0 { f64::INFINITY } else { a * (a / b).log2() })
        .sum()
}

/// Accept iff the mean log-likelihood ratio reaches `D - m^(-1/4)`.
fn control_accepts(ch: &Dmc, a: usize, r: usize, y: &[usize]) -> bool {
    let d = kl(&ch.rows()[a], &ch.rows()[r]);
    let llr: f64 = y.iter().map(|&v| (ch.rows()[a][v] / ch.rows()[r][v]).log2()).sum();
    let m = y.len() as f64;
    !y.is_empty() && llr / m >= d - m.powf(-0.25)
}

fn control_pair(ch: &Dmc) -> (usize, usize) {
    let k = ch.num_inputs();
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for a in 0..k {
        for r in 0..k {
            if a != r {
                let d = kl(&ch.rows()[a], &ch.rows()[r]);
                if d > best.0 {
                    best = (d, a, r);
                }
            }
        }
    }
    (best.1, best.2)
}

pub struct Direct {
    pub session_error: f64,
    pub rho: f64,
    pub epoch_length: f64,
}

/// Sums over every output sequence of a whole epoch, message by message.
pub fn direct_enumeration(s: &Scheme, channel: usize) -> Direct {
    let fam = s.family();
    let p = s.params();
    let ch = fam.channel(channel);
    let k = fam.num_outputs();
    let cbs = s.codebooks();
    let all: Vec<Vec<Message>> = cbs.iter().map(|c| c.messages()).collect();
    let words: Vec<Vec<Vec<usize>>> = cbs
        .iter()
        .zip(&all)
        .map(|(c, ms)| ms.iter().map(|m| c.encode(m)).collect())
        .collect();
    let sm = p.message_training.symbols();
    let sc = p.control_training.symbols();

    let mut compound = vec![vec![]];
    for l in 0..fam.len() {
        compound = compound
            .into_iter()
            .flat_map(|c: Vec<usize>| {
                (0..all[l].len()).map(move |i| {
                    let mut v = c.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }

    let (mut err_sum, mut rho_sum, mut len_sum) = (0.0, 0.0, 0.0);
    for w in &compound {
        let (mut acc, mut acc_err, mut mean_len) = (0.0, 0.0, 0.0);
        for y1 in sequences(sm.len(), k) {
            let p1 = prob(ch, sm, &y1);
            let lm = estimate(&p.message_rule, fam, sm, &y1);
            let x2 = &words[lm][w[lm]];
            for y2 in sequences(x2.len(), k) {
                let p2 = prob(ch, x2, &y2);
                let scores: Vec<f64> = words[lm].iter().map(|x| loglik(&fam.channels()[lm], x, &y2)).collect();
                let correct = argmax(&scores) == w[lm];
                for y3 in sequences(sc.len(), k) {
                    let p3 = prob(ch, sc, &y3);
                    let lc = estimate(&p.control_rule, fam, sc, &y3);
                    let (a, r) = control_pair(&fam.channels()[lc]);
                    let sym = if correct { a } else { r };
                    let m = p.lengths.control[lc];
                    let len = (sm.len() + x2.len() + sc.len() + m) as f64;
                    for y4 in sequences(m, k) {
                        let pr = p1 * p2 * p3 * prob(ch, &vec![sym; m], &y4);
                        mean_len += pr * len;
                        if control_accepts(&fam.channels()[lc], a, r, &y4) {
                            acc += pr;
                            if !correct {
                                acc_err += pr;
                            }
                        }
                    }
                }
            }
        }
        err_sum += acc_err / acc;
        rho_sum += acc;
        len_sum += mean_len;
    }
    let n = compound.len() as f64;
    Direct {
        session_error: err_sum / n,
        rho: rho_sum / n,
        epoch_length: len_sum / n,
    }
}
