use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::detection::ControlDecision;
use crate::error::{invalid, Result};
use crate::rng::RngSeed;

use super::session::{Scheme, SessionTranscript};

/// Sessions simulated per work unit. Each session draws from its own stream
/// `seed.stream(index)`, and units are merged in index order, so results do
/// not depend on the number of worker threads.
pub const DEFAULT_CHUNK: u64 = 256;

/// Integer sufficient statistics of a batch of sessions. Merging is
/// associative and commutative.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionStats {
    pub sessions: u64,
    pub errors: u64,
    pub tau_sum: u64,
    pub tau_sq_sum: u128,
    pub k_sum: u64,
    pub bits_sum: u64,
    pub first_epoch_accepts: u64,
    /// Sessions by stopping epoch.
    pub k_histogram: BTreeMap<u64, u64>,
}

impl SessionStats {
    pub fn push(&mut self, t: &SessionTranscript) {
        self.sessions += 1;
        self.errors += u64::from(t.error);
        self.tau_sum += t.tau as u64;
        self.tau_sq_sum += (t.tau as u128) * (t.tau as u128);
        self.k_sum += t.k as u64;
        self.bits_sum += u64::from(t.bits);
        self.first_epoch_accepts += u64::from(t.epochs[0].control_decided == ControlDecision::Accept);
        *self.k_histogram.entry(t.k as u64).or_default() += 1;
    }

    pub fn merge(&mut self, other: &SessionStats) {
        self.sessions += other.sessions;
        self.errors += other.errors;
        self.tau_sum += other.tau_sum;
        self.tau_sq_sum += other.tau_sq_sum;
        self.k_sum += other.k_sum;
        self.bits_sum += other.bits_sum;
        self.first_epoch_accepts += other.first_epoch_accepts;
        for (&k, &c) in &other.k_histogram {
            *self.k_histogram.entry(k).or_default() += c;
        }
    }

    pub fn from_transcripts<'a>(transcripts: impl IntoIterator<Item = &'a SessionTranscript>) -> Self {
        let mut s = SessionStats::default();
        for t in transcripts {
            s.push(t);
        }
        s
    }
}

/// Plug-in estimates for one (n, channel) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub sessions: u64,
    /// Empirical error probability.
    pub p_hat: f64,
    /// Standard error of `p_hat`.
    pub p_hat_sd: f64,
    /// Total delivered bits over total channel uses.
    pub r_hat: f64,
    pub tau_mean: f64,
    pub tau_sd: f64,
    pub k_mean: f64,
    /// Fraction of sessions whose first epoch was accepted.
    pub rho_first: f64,
    /// Accepted epochs over all epochs.
    pub rho_pooled: f64,
    /// `-log2(p_hat) / tau_mean`; infinite when no error was seen.
    pub emp_exponent: f64,
}

/// Summarizes a batch of sessions.
pub fn session_statistics(stats: &SessionStats) -> Result<SessionSummary> {
    if stats.sessions == 0 {
        return Err(invalid("no sessions to summarize"));
    }
    let n = stats.sessions as f64;
    let p_hat = stats.errors as f64 / n;
    let tau_mean = stats.tau_sum as f64 / n;
    let tau_var = (stats.tau_sq_sum as f64 / n - tau_mean * tau_mean).max(0.0);
    Ok(SessionSummary {
        sessions: stats.sessions,
        p_hat,
        p_hat_sd: (p_hat * (1.0 - p_hat) / n).sqrt(),
        r_hat: stats.bits_sum as f64 / stats.tau_sum as f64,
        tau_mean,
        tau_sd: tau_var.sqrt(),
        k_mean: stats.k_sum as f64 / n,
        rho_first: stats.first_epoch_accepts as f64 / n,
        rho_pooled: n / stats.k_sum as f64,
        emp_exponent: if p_hat == 0.0 {
            f64::INFINITY
        } else {
            -p_hat.log2() / tau_mean
        },
    })
}

/// Result of a chi-square goodness-of-fit test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodnessOfFit {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    /// `false` when too few bins remain for a test; the fit then passes.
    pub testable: bool,
    pub passed: bool,
}

/// Chi-square test of the stopping epochs against `Geometric(rho)` with
/// `rho` estimated as sessions over epochs. Bins are `K = 1, 2, ...` and a
/// tail bin, merged until every expected count is at least 5; one degree of
/// freedom is spent on the estimate.
pub fn geometric_fit(stats: &SessionStats, significance: f64) -> Result<GoodnessOfFit> {
    if stats.sessions == 0 {
        return Err(invalid("no sessions to test"));
    }
    if !(significance > 0.0 && significance < 1.0) {
        return Err(invalid(format!("significance {significance} must lie in (0, 1)")));
    }
    let n = stats.sessions as f64;
    let rho = n / stats.k_sum as f64;
    let pmf = |k: u64| rho * (1.0 - rho).powi(k as i32 - 1);
    let tail = |k: u64| (1.0 - rho).powi(k as i32 - 1);
    // Bins [k] for k < cut, then [cut, inf).
    let mut cut = 1;
    while n * pmf(cut) >= 5.0 && n * tail(cut + 1) >= 5.0 {
        cut += 1;
    }
    let bins = cut as usize;
    let untestable = GoodnessOfFit {
        statistic: 0.0,
        degrees_of_freedom: 0,
        p_value: 1.0,
        testable: false,
        passed: true,
    };
    if bins < 3 {
        return Ok(untestable);
    }
    let mut statistic = 0.0;
    for k in 1..cut {
        let observed = stats.k_histogram.get(&k).copied().unwrap_or(0) as f64;
        let expected = n * pmf(k);
        statistic += (observed - expected).powi(2) / expected;
    }
    let observed_tail: u64 = stats.k_histogram.range(cut..).map(|(_, c)| c).sum();
    let expected_tail = n * tail(cut);
    statistic += (observed_tail as f64 - expected_tail).powi(2) / expected_tail;
    let dof = bins - 2;
    let chi = ChiSquared::new(dof as f64).map_err(|e| invalid(e.to_string()))?;
    let p_value = chi.sf(statistic);
    Ok(GoodnessOfFit {
        statistic,
        degrees_of_freedom: dof,
        p_value,
        testable: true,
        passed: p_value >= significance,
    })
}

/// Runs sessions `0..sessions` over `channel` on the current rayon pool and
/// folds their statistics.
pub fn simulate(scheme: &Scheme, channel: usize, sessions: u64, seed: RngSeed) -> Result<SessionStats> {
    simulate_with(scheme, channel, sessions, seed, DEFAULT_CHUNK, |_| {})
}

/// [`simulate`] with an explicit chunk size and a hook that sees every
/// transcript, in session order within each chunk.
pub fn simulate_with<F>(
    scheme: &Scheme,
    channel: usize,
    sessions: u64,
    seed: RngSeed,
    chunk: u64,
    visit: F,
) -> Result<SessionStats>
where
    F: Fn(&SessionTranscript) + Sync,
{
    let chunk = chunk.max(1);
    let units = sessions.div_ceil(chunk);
    let parts: Vec<Result<SessionStats>> = (0..units)
        .into_par_iter()
        .map(|u| {
            let mut s = SessionStats::default();
            for i in u * chunk..((u + 1) * chunk).min(sessions) {
                let t = scheme.run_indexed_session(channel, seed, i)?;
                visit(&t);
                s.push(&t);
            }
            Ok(s)
        })
        .collect();
    let mut total = SessionStats::default();
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

/// Runs `sessions` sessions and keeps their transcripts, in session order.
pub fn simulate_transcripts(
    scheme: &Scheme,
    channel: usize,
    sessions: u64,
    seed: RngSeed,
) -> Result<Vec<SessionTranscript>> {
    (0..sessions)
        .into_par_iter()
        .map(|i| scheme.run_indexed_session(channel, seed, i))
        .collect()
}
