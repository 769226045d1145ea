use serde::{Deserialize, Serialize};

use crate::channel::Dmc;
use crate::error::{invalid, Result};
use crate::info::{burnashev_b, kl_bits};

/// Outcome of the control phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlDecision {
    Accept,
    Reject,
}

/// Vanishing slack `delta(m)` for the one-sided test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SlackSchedule {
    /// `delta(m) = m^(-exponent)`; needs `0 < exponent < 1`.
    Power(f64),
}

impl Default for SlackSchedule {
    fn default() -> Self {
        SlackSchedule::Power(0.25)
    }
}

impl SlackSchedule {
    pub fn delta(&self, m: usize) -> f64 {
        match *self {
            SlackSchedule::Power(e) => (m as f64).powf(-e),
        }
    }
}

/// One-sided likelihood-ratio test between repetitions of `x_A` and `x_R`.
///
/// Accepts iff the mean log-likelihood ratio reaches
/// `D(Q(.|x_A) || Q(.|x_R)) - delta(m)`. The accept side therefore errs with
/// vanishing probability while the reject side keeps the full divergence as
/// its exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlTest {
    accept_symbol: usize,
    reject_symbol: usize,
    divergence: f64,
    /// Per-output log2 Q(y|x_A)/Q(y|x_R), with infinities kept explicit.
    llr: Vec<f64>,
    slack: SlackSchedule,
}

impl ControlTest {
    /// Test built on the maximally separated input pair of `channel`.
    pub fn for_channel(channel: &Dmc, slack: SlackSchedule) -> Result<Self> {
        let b = burnashev_b(channel);
        Self::new(channel, b.accept_symbol, b.reject_symbol, slack)
    }

    pub fn new(channel: &Dmc, accept_symbol: usize, reject_symbol: usize, slack: SlackSchedule) -> Result<Self> {
        channel.check_input(accept_symbol)?;
        channel.check_input(reject_symbol)?;
        if accept_symbol == reject_symbol {
            return Err(invalid("accept and reject symbols must differ"));
        }
        let SlackSchedule::Power(e) = slack;
        if !(e > 0.0 && e < 1.0) {
            return Err(invalid(format!("slack exponent {e} must lie in (0, 1)")));
        }
        let (a, r) = (channel.row(accept_symbol), channel.row(reject_symbol));
        let llr = a
            .iter()
            .zip(r)
            .map(|(&pa, &pr)| match (pa > 0.0, pr > 0.0) {
                (true, true) => (pa / pr).log2(),
                (true, false) => f64::INFINITY,
                (false, true) => f64::NEG_INFINITY,
                (false, false) => 0.0,
            })
            .collect();
        Ok(ControlTest {
            accept_symbol,
            reject_symbol,
            divergence: kl_bits(a, r),
            llr,
            slack,
        })
    }

    pub fn accept_symbol(&self) -> usize {
        self.accept_symbol
    }

    pub fn reject_symbol(&self) -> usize {
        self.reject_symbol
    }

    pub fn divergence(&self) -> f64 {
        self.divergence
    }

    pub fn slack(&self) -> SlackSchedule {
        self.slack
    }

    /// Input symbol sent for a given intended decision.
    pub fn symbol_for(&self, decision: ControlDecision) -> usize {
        match decision {
            ControlDecision::Accept => self.accept_symbol,
            ControlDecision::Reject => self.reject_symbol,
        }
    }

    /// Decides from the observed control-phase outputs.
    ///
    /// An output impossible under `x_A` forces REJECT; otherwise an output
    /// impossible under `x_R` forces ACCEPT. With an infinite divergence and
    /// no such output the test rejects. An empty observation rejects.
    pub fn decide(&self, outputs: &[usize]) -> ControlDecision {
        if outputs.is_empty() {
            return ControlDecision::Reject;
        }
        let mut sum = 0.0;
        let mut saw_pos_inf = false;
        for &y in outputs {
            let v = self.llr[y];
            if v == f64::NEG_INFINITY {
                return ControlDecision::Reject;
            }
            if v == f64::INFINITY {
                saw_pos_inf = true;
            } else {
                sum += v;
            }
        }
        if saw_pos_inf {
            return ControlDecision::Accept;
        }
        if self.divergence.is_infinite() {
            return ControlDecision::Reject;
        }
        let m = outputs.len();
        if sum / m as f64 >= self.divergence - self.slack.delta(m) {
            ControlDecision::Accept
        } else {
            ControlDecision::Reject
        }
    }
}
