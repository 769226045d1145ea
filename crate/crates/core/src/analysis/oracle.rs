//! Exact single-epoch analysis of tiny scheme instances.
//!
//! The phases of an epoch use disjoint channel uses, so their outcomes are
//! independent given the realized channel and the compound message. The
//! oracle enumerates each phase's output sequences separately and combines
//! them. Retransmissions repeat the same message, so epochs are i.i.d. only
//! conditionally on the message; session-level values are averaged over
//! messages after conditioning.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::Dmc;
use crate::detection::{estimate_unchecked, ControlDecision};
use crate::error::{invalid, Error, Result};
use crate::rng::RngSeed;
use crate::scheme::{Codebook, Scheme};

/// Largest number of output sequences the oracle will enumerate for one epoch.
pub const ORACLE_MAX_SEQUENCES: f64 = 65536.0;

/// Exact per-message quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageOracle {
    /// Probability that an epoch ends with ACCEPT.
    pub rho: f64,
    /// Probability that an epoch ends with ACCEPT and a wrong decision.
    pub epoch_error: f64,
    /// `epoch_error / rho`.
    pub session_error: f64,
    /// `E[Lambda n] / rho`, by Wald's identity.
    pub expected_tau: f64,
}

/// Exact epoch and session quantities for one realized channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochOracle {
    pub channel: usize,
    /// Law of the message-phase channel estimate.
    pub message_estimate: Vec<f64>,
    /// Law of the control-phase channel estimate.
    pub control_estimate: Vec<f64>,
    /// `P(W_m != What_m)`, averaged over messages.
    pub message_error: f64,
    /// `P(ACCEPT decided | REJECT sent)`.
    pub false_accept: f64,
    /// `P(REJECT decided | ACCEPT sent)`.
    pub false_reject: f64,
    /// First-epoch probability of ACCEPT, averaged over messages.
    pub rho: f64,
    /// Mean epoch length in channel uses.
    pub epoch_length_mean: f64,
    pub epoch_length_var: f64,
    /// Session error probability, averaged over messages after conditioning.
    pub session_error: f64,
    /// `message_error * false_accept / rho`, the unconditioned assembly.
    pub assembled_error: f64,
    /// Session error summed epoch by epoch as a geometric series.
    pub series_error: f64,
    /// Expected session length in channel uses.
    pub expected_tau: f64,
    pub per_message: Vec<MessageOracle>,
}

/// Calls `f` with every sequence in `{0..alphabet}^len`.
fn for_each_sequence(len: usize, alphabet: usize, mut f: impl FnMut(&[usize])) {
    let mut y = vec![0usize; len];
    loop {
        f(&y);
        let mut t = 0;
        loop {
            if t == len {
                return;
            }
            y[t] += 1;
            if y[t] < alphabet {
                break;
            }
            y[t] = 0;
            t += 1;
        }
    }
}

fn likelihood(ch: &Dmc, x: &[usize], y: &[usize]) -> f64 {
    x.iter().zip(y).map(|(&a, &b)| ch.prob(a, b)).product()
}

/// `P(decoded = w | w sent)` for every message of `cb`, in `messages()` order.
fn decoding_success(ch: &Dmc, cb: &Codebook) -> Vec<f64> {
    let messages = cb.messages();
    let words: Vec<Vec<usize>> = messages.iter().map(|m| cb.encode(m)).collect();
    let radices = cb.radices();
    let index_of = |digits: &[u32]| digits.iter().zip(&radices).fold(0usize, |acc, (&d, &r)| acc * r + d as usize);
    let mut success = vec![0.0; messages.len()];
    for_each_sequence(cb.block_length(), ch.num_outputs(), |y| {
        let i = index_of(&cb.decode(y).0);
        success[i] += likelihood(ch, &words[i], y);
    });
    success
}

/// Checks the enumeration budget of `scheme`.
pub fn oracle_capability(scheme: &Scheme) -> Result<()> {
    let p = scheme.params();
    let len = &p.lengths;
    let longest = len.message_training
        + len.message.iter().max().copied().unwrap_or(0)
        + len.control_training
        + len.control.iter().max().copied().unwrap_or(0);
    let ny = scheme.family().num_outputs() as f64;
    if ny.powi(longest as i32) > ORACLE_MAX_SEQUENCES {
        return Err(Error::Capability(format!(
            "an epoch of {longest} symbols over {ny} outputs exceeds {ORACLE_MAX_SEQUENCES} sequences"
        )));
    }
    let messages: f64 = scheme.codebooks().iter().map(|cb| cb.size() as f64).product();
    if messages > ORACLE_MAX_SEQUENCES {
        return Err(Error::Capability(format!("{messages} compound messages exceed the enumeration budget")));
    }
    Ok(())
}

/// Exact epoch and session quantities of `scheme` over channel `channel`.
pub fn brute_force_epoch_oracle(scheme: &Scheme, channel: usize) -> Result<EpochOracle> {
    let family = scheme.family();
    if channel >= family.len() {
        return Err(invalid(format!("channel index {channel} out of range")));
    }
    oracle_capability(scheme)?;
    let p = scheme.params();
    let ch = family.channel(channel);
    let l = family.len();

    let estimate_law = |training: &[usize], rule| {
        let mut law = vec![0.0; l];
        for_each_sequence(training.len(), ch.num_outputs(), |y| {
            law[estimate_unchecked(rule, family, training, y)] += likelihood(ch, training, y);
        });
        law
    };
    let pm = estimate_law(p.message_training.symbols(), &p.message_rule);
    let pc = estimate_law(p.control_training.symbols(), &p.control_rule);

    let success: Vec<Vec<f64>> = scheme.codebooks().iter().map(|cb| decoding_success(ch, cb)).collect();

    // P(ACCEPT decided) for each control test and intended decision.
    let accept_prob = |c: usize, sent: ControlDecision| {
        let test = &p.controls[c];
        let x = vec![test.symbol_for(sent); p.lengths.control[c]];
        let mut acc = 0.0;
        for_each_sequence(x.len(), ch.num_outputs(), |y| {
            if test.decide(y) == ControlDecision::Accept {
                acc += likelihood(ch, &x, y);
            }
        });
        acc
    };
    let true_accept: f64 = (0..l).map(|c| pc[c] * accept_prob(c, ControlDecision::Accept)).sum();
    let false_accept: f64 = (0..l).map(|c| pc[c] * accept_prob(c, ControlDecision::Reject)).sum();

    let mean = |f: &dyn Fn(usize) -> f64, law: &[f64]| (0..l).map(|i| law[i] * f(i)).sum::<f64>();
    let beta_m = |j: usize| p.lengths.message[j] as f64;
    let beta_c = |c: usize| p.lengths.control[c] as f64;
    let fixed = (p.lengths.message_training + p.lengths.control_training) as f64;
    let mean_m = mean(&beta_m, &pm);
    let mean_c = mean(&beta_c, &pc);
    let epoch_length_mean = fixed + mean_m + mean_c;
    let epoch_length_var = mean(&|j| (beta_m(j) - mean_m).powi(2), &pm) + mean(&|c| (beta_c(c) - mean_c).powi(2), &pc);

    let message_error: f64 = (0..l)
        .map(|j| pm[j] * (1.0 - success[j].iter().sum::<f64>() / success[j].len() as f64))
        .sum();

    // Compound messages in lexicographic order of per-channel indices.
    let sizes: Vec<usize> = success.iter().map(Vec::len).collect();
    let total: usize = sizes.iter().product();
    let mut per_message = Vec::with_capacity(total);
    let mut idx = vec![0usize; l];
    for _ in 0..total {
        let mut rho = 0.0;
        let mut err = 0.0;
        for j in 0..l {
            let s = success[j][idx[j]];
            rho += pm[j] * (s * true_accept + (1.0 - s) * false_accept);
            err += pm[j] * (1.0 - s) * false_accept;
        }
        if rho <= 0.0 {
            return Err(invalid("some message is never accepted; sessions do not terminate"));
        }
        per_message.push(MessageOracle {
            rho,
            epoch_error: err,
            session_error: err / rho,
            expected_tau: epoch_length_mean / rho,
        });
        for j in (0..l).rev() {
            idx[j] += 1;
            if idx[j] < sizes[j] {
                break;
            }
            idx[j] = 0;
        }
    }
    let m = total as f64;
    let rho = per_message.iter().map(|v| v.rho).sum::<f64>() / m;
    let session_error = per_message.iter().map(|v| v.session_error).sum::<f64>() / m;
    let expected_tau = per_message.iter().map(|v| v.expected_tau).sum::<f64>() / m;
    let series_error = per_message.iter().map(|v| geometric_series(v.rho, v.epoch_error)).sum::<f64>() / m;
    Ok(EpochOracle {
        channel,
        message_estimate: pm,
        control_estimate: pc,
        message_error,
        false_accept,
        false_reject: 1.0 - true_accept,
        rho,
        epoch_length_mean,
        epoch_length_var,
        session_error,
        assembled_error: message_error * false_accept / rho,
        series_error,
        expected_tau,
        per_message,
    })
}

/// `sum_k (1 - rho)^(k-1) e`, stopped once the remaining tail is below 1e-14.
fn geometric_series(rho: f64, e: f64) -> f64 {
    let mut sum = 0.0;
    let mut weight = 1.0;
    for _ in 0..100_000_000u64 {
        sum += weight * e;
        weight *= 1.0 - rho;
        if weight * e / rho < 1e-14 {
            break;
        }
    }
    sum
}

/// Monte Carlo estimate of one oracle quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub exact: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub passed: bool,
}

/// Oracle values against a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub sessions: u64,
    pub oracle: EpochOracle,
    pub checks: Vec<OracleCheck>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    sessions: u64,
    errors: u64,
    first_accepts: u64,
    first_len: u64,
    first_len_sq: u64,
    tau: u64,
    tau_sq: u128,
}

impl Tally {
    fn merge(&mut self, o: &Tally) {
        self.sessions += o.sessions;
        self.errors += o.errors;
        self.first_accepts += o.first_accepts;
        self.first_len += o.first_len;
        self.first_len_sq += o.first_len_sq;
        self.tau += o.tau;
        self.tau_sq += o.tau_sq;
    }
}

fn check(name: &str, exact: f64, estimate: f64, std_error: f64, limit: f64) -> OracleCheck {
    let z = if std_error > 0.0 {
        (estimate - exact) / std_error
    } else if (estimate - exact).abs() <= 1e-12 * exact.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY
    };
    OracleCheck {
        name: name.into(),
        exact,
        estimate,
        std_error,
        z,
        passed: z.abs() <= limit,
    }
}

/// Runs `sessions` sessions and compares them with the oracle. Passes when
/// every `|z| <= z_limit`.
pub fn oracle_monte_carlo(
    scheme: &Scheme,
    channel: usize,
    sessions: u64,
    seed: RngSeed,
    z_limit: f64,
) -> Result<OracleComparison> {
    if sessions == 0 {
        return Err(invalid("at least one session is required"));
    }
    let oracle = brute_force_epoch_oracle(scheme, channel)?;
    const CHUNK: u64 = 4096;
    let parts: Vec<Result<Tally>> = (0..sessions.div_ceil(CHUNK))
        .into_par_iter()
        .map(|u| {
            let mut t = Tally::default();
            for i in u * CHUNK..((u + 1) * CHUNK).min(sessions) {
                let s = scheme.run_indexed_session(channel, seed, i)?;
                let first = &s.epochs[0];
                t.sessions += 1;
                t.errors += u64::from(s.error);
                t.first_accepts += u64::from(first.control_decided == ControlDecision::Accept);
                t.first_len += first.length as u64;
                t.first_len_sq += (first.length * first.length) as u64;
                t.tau += s.tau as u64;
                t.tau_sq += (s.tau as u128).pow(2);
            }
            Ok(t)
        })
        .collect();
    let mut t = Tally::default();
    for p in parts {
        t.merge(&p?);
    }
    let n = t.sessions as f64;
    let binomial = |p: f64| (p * (1.0 - p) / n).sqrt();
    let tau_mean = t.tau as f64 / n;
    let tau_var = (t.tau_sq as f64 / n - tau_mean * tau_mean).max(0.0);
    let checks = vec![
        check(
            "session_error",
            oracle.session_error,
            t.errors as f64 / n,
            binomial(oracle.session_error),
            z_limit,
        ),
        check("rho", oracle.rho, t.first_accepts as f64 / n, binomial(oracle.rho), z_limit),
        check(
            "epoch_length_mean",
            oracle.epoch_length_mean,
            t.first_len as f64 / n,
            (oracle.epoch_length_var / n).sqrt(),
            z_limit,
        ),
        check("expected_tau", oracle.expected_tau, tau_mean, (tau_var / n).sqrt(), z_limit),
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(OracleComparison {
        sessions,
        oracle,
        checks,
        passed,
    })
}
