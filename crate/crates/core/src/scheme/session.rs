use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::CompoundFamily;
use crate::detection::{estimate_unchecked, ControlDecision};
use crate::error::{invalid, Error, Result};
use crate::rng::{RngSeed, SimRng};

use super::codebook::{Codebook, Message};
use super::params::SchemeParams;

/// Default cap on epochs per session.
pub const DEFAULT_MAX_EPOCHS: usize = 10_000;

/// Seed tag under which codebook instances are drawn.
const CODEBOOK_TAG: u64 = 0xC0DE;

/// One message per channel; component `l` is sent when channel `l` is estimated.
pub type CompoundMessage = Vec<Message>;

/// What happened in one epoch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub message_estimate: usize,
    pub sent: Message,
    pub decoded: Message,
    pub control_estimate: usize,
    pub control_sent: ControlDecision,
    pub control_decided: ControlDecision,
    /// `Lambda(k) n`, in channel uses.
    pub length: usize,
}

/// Full record of one variable-length transmission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub channel: usize,
    pub message: CompoundMessage,
    pub epochs: Vec<EpochRecord>,
    /// Stopping epoch, 1-based.
    pub k: usize,
    pub tau: usize,
    pub decided_channel: usize,
    pub decided_message: Message,
    /// `log2 M` of the decided channel.
    pub bits: u32,
    pub error: bool,
}

/// A scheme instance: parameters plus one fixed codebook per channel.
#[derive(Debug, Clone)]
pub struct Scheme {
    family: CompoundFamily,
    params: SchemeParams,
    codebooks: Vec<Codebook>,
    max_epochs: usize,
}

impl Scheme {
    /// Draws the codebooks from `seed`; the same seed always gives the same codebooks.
    pub fn new(family: CompoundFamily, params: SchemeParams, seed: RngSeed) -> Result<Self> {
        if params.num_channels() != family.len() {
            return Err(invalid("parameters were derived for a different family"));
        }
        let root = seed.derive(CODEBOOK_TAG);
        let codebooks = family
            .channels()
            .iter()
            .enumerate()
            .map(|(l, ch)| {
                let mut rng = root.stream(l as u64);
                Codebook::random_bits(ch, params.lengths.message_bits[l], params.lengths.message[l], &mut rng)
                    .map_err(|e| match e {
                        Error::InfeasibleRate { rate, capacity, .. } => Error::InfeasibleRate {
                            channel: l,
                            rate,
                            capacity,
                        },
                        e => e,
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Scheme {
            family,
            params,
            codebooks,
            max_epochs: DEFAULT_MAX_EPOCHS,
        })
    }

    pub fn with_max_epochs(mut self, max_epochs: usize) -> Self {
        self.max_epochs = max_epochs.max(1);
        self
    }

    pub fn family(&self) -> &CompoundFamily {
        &self.family
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn codebooks(&self) -> &[Codebook] {
        &self.codebooks
    }

    pub fn max_epochs(&self) -> usize {
        self.max_epochs
    }

    /// Uniform, independent components.
    pub fn random_message<R: Rng + ?Sized>(&self, rng: &mut R) -> CompoundMessage {
        self.codebooks.iter().map(|cb| cb.random_message(rng)).collect()
    }

    fn check(&self, channel: usize, message: &CompoundMessage) -> Result<()> {
        if channel >= self.family.len() {
            return Err(invalid(format!("channel index {channel} out of range")));
        }
        if message.len() != self.codebooks.len()
            || message
                .iter()
                .zip(&self.codebooks)
                .any(|(m, cb)| m.0.len() != cb.radices().len() || m.0.iter().zip(cb.radices()).any(|(&d, r)| d as usize >= r))
        {
            return Err(invalid("compound message does not match the codebooks"));
        }
        Ok(())
    }

    /// Runs the four phases once over channel `channel`.
    pub fn run_epoch<R: Rng + ?Sized>(&self, channel: usize, message: &CompoundMessage, rng: &mut R) -> Result<EpochRecord> {
        self.check(channel, message)?;
        Ok(self.epoch(channel, message, false, rng))
    }

    /// Like [`Scheme::run_epoch`] but the decoded message is replaced by a
    /// wrong one, which must make the transmitter signal REJECT.
    pub fn run_epoch_forcing_error<R: Rng + ?Sized>(
        &self,
        channel: usize,
        message: &CompoundMessage,
        rng: &mut R,
    ) -> Result<EpochRecord> {
        self.check(channel, message)?;
        if self.codebooks.iter().any(|cb| cb.size() < 2) {
            return Err(invalid("cannot force a decoding error with a single-message codebook"));
        }
        Ok(self.epoch(channel, message, true, rng))
    }

    fn epoch<R: Rng + ?Sized>(&self, channel: usize, message: &CompoundMessage, force_error: bool, rng: &mut R) -> EpochRecord {
        let ch = self.family.channel(channel);
        let p = &self.params;
        let transmit = |inputs: &[usize], rng: &mut R| -> Vec<usize> { inputs.iter().map(|&x| ch.draw(x, rng)).collect() };

        let y = transmit(p.message_training.symbols(), rng);
        let message_estimate = estimate_unchecked(&p.message_rule, &self.family, p.message_training.symbols(), &y);

        let cb = &self.codebooks[message_estimate];
        let sent = message[message_estimate].clone();
        let y = transmit(&cb.encode(&sent), rng);
        let mut decoded = cb.decode(&y);
        if force_error && decoded == sent {
            let r = cb.radices()[0] as u32;
            decoded.0[0] = (decoded.0[0] + 1) % r;
        }

        let y = transmit(p.control_training.symbols(), rng);
        let control_estimate = estimate_unchecked(&p.control_rule, &self.family, p.control_training.symbols(), &y);

        let test = &p.controls[control_estimate];
        let control_sent = if decoded == sent {
            ControlDecision::Accept
        } else {
            ControlDecision::Reject
        };
        let symbol = test.symbol_for(control_sent);
        let y: Vec<usize> = (0..p.lengths.control[control_estimate]).map(|_| ch.draw(symbol, rng)).collect();
        let control_decided = test.decide(&y);

        EpochRecord {
            message_estimate,
            sent,
            decoded,
            control_estimate,
            control_sent,
            control_decided,
            length: p.epoch_length(message_estimate, control_estimate),
        }
    }

    /// Transmits a fresh compound message until the receiver accepts.
    pub fn run_session<R: Rng + ?Sized>(&self, channel: usize, rng: &mut R) -> Result<SessionTranscript> {
        if channel >= self.family.len() {
            return Err(invalid(format!("channel index {channel} out of range")));
        }
        let message = self.random_message(rng);
        self.run_session_with(channel, message, rng)
    }

    /// Transmits `message` until the receiver accepts.
    pub fn run_session_with<R: Rng + ?Sized>(
        &self,
        channel: usize,
        message: CompoundMessage,
        rng: &mut R,
    ) -> Result<SessionTranscript> {
        self.check(channel, &message)?;
        let mut epochs = Vec::new();
        let mut tau = 0;
        loop {
            if epochs.len() == self.max_epochs {
                return Err(Error::Runaway {
                    max_epochs: self.max_epochs,
                });
            }
            let rec = self.epoch(channel, &message, false, rng);
            tau += rec.length;
            let accept = rec.control_decided == ControlDecision::Accept;
            epochs.push(rec);
            if accept {
                break;
            }
        }
        let last = epochs.last().expect("at least one epoch");
        let decided_channel = last.message_estimate;
        let decided_message = last.decoded.clone();
        let error = decided_message != message[decided_channel];
        Ok(SessionTranscript {
            channel,
            k: epochs.len(),
            tau,
            decided_channel,
            bits: self.params.lengths.message_bits[decided_channel],
            decided_message,
            error,
            message,
            epochs,
        })
    }

    /// Session `index` of a reproducible experiment.
    pub fn run_indexed_session(&self, channel: usize, seed: RngSeed, index: u64) -> Result<SessionTranscript> {
        let mut rng: SimRng = seed.stream(index);
        self.run_session(channel, &mut rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Dmc;
    use crate::detection::{EstimationRule, SlackSchedule};
    use crate::info::binary_entropy;
    use crate::scheme::params::{derive_params, ParamSpec, PhaseLengths};

    fn noiseless() -> Scheme {
        let fam = CompoundFamily::new(vec![Dmc::identity(2).unwrap()]).unwrap();
        let ml = EstimationRule::MaximumLikelihood;
        let params = derive_params(&fam, &ParamSpec::new(vec![0.5], 32, ml, ml)).unwrap();
        Scheme::new(fam, params, RngSeed(3)).unwrap()
    }

    fn bsc_pair(n: usize) -> Scheme {
        let fam = CompoundFamily::bsc_pair(0.1).unwrap();
        let c = 1.0 - binary_entropy(0.1);
        let q = EstimationRule::bsc_threshold(&fam, 0.5).unwrap();
        let params = derive_params(&fam, &ParamSpec::new(vec![0.25 * c; 2], n, q, q)).unwrap();
        Scheme::new(fam, params, RngSeed(11)).unwrap()
    }

    #[test]
    fn noiseless_session_is_deterministic() {
        let s = noiseless();
        for i in 0..50 {
            let t = s.run_indexed_session(0, RngSeed(1), i).unwrap();
            assert_eq!(t.k, 1);
            assert!(!t.error);
            assert_eq!(t.tau, s.params().epoch_length(0, 0));
            assert_eq!(t.epochs[0].control_sent, ControlDecision::Accept);
        }
    }

    #[test]
    fn epoch_length_identity() {
        let s = bsc_pair(128);
        let mut rng = RngSeed(2).stream(0);
        for ch in 0..2 {
            for _ in 0..200 {
                let t = s.run_session(ch, &mut rng).unwrap();
                let sum: usize = t.epochs.iter().map(|e| e.length).sum();
                assert_eq!(sum, t.tau);
                for e in &t.epochs {
                    assert_eq!(e.length, s.params().epoch_length(e.message_estimate, e.control_estimate));
                }
                assert!(t.epochs[..t.k - 1].iter().all(|e| e.control_decided == ControlDecision::Reject));
                assert_eq!(t.epochs[t.k - 1].control_decided, ControlDecision::Accept);
            }
        }
    }

    #[test]
    fn forced_error_sends_reject() {
        let s = bsc_pair(128);
        let mut rng = RngSeed(4).stream(0);
        for _ in 0..50 {
            let m = s.random_message(&mut rng);
            let rec = s.run_epoch_forcing_error(1, &m, &mut rng).unwrap();
            assert_ne!(rec.sent, rec.decoded);
            assert_eq!(rec.control_sent, ControlDecision::Reject);
        }
    }

    #[test]
    fn runaway_is_reported() {
        // One-symbol control phases reject often, so a one-epoch cap trips.
        let fam = CompoundFamily::bsc_pair(0.1).unwrap();
        let q = EstimationRule::bsc_threshold(&fam, 0.5).unwrap();
        let lengths = PhaseLengths {
            message_training: 1,
            control_training: 1,
            message: vec![1, 1],
            control: vec![1, 1],
            message_bits: vec![0, 0],
        };
        let params = SchemeParams::from_lengths(&fam, lengths, q, q, SlackSchedule::default()).unwrap();
        let s = Scheme::new(fam, params, RngSeed(0)).unwrap().with_max_epochs(1);
        let mut rng = RngSeed(0).stream(0);
        let mut runaways = 0;
        for _ in 0..200 {
            match s.run_session(0, &mut rng) {
                Err(Error::Runaway { max_epochs: 1 }) => runaways += 1,
                Ok(t) => assert_eq!(t.k, 1),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(runaways > 0);
    }

    #[test]
    fn rejects_bad_message() {
        let s = bsc_pair(128);
        let mut rng = RngSeed(4).stream(0);
        assert!(s.run_epoch(0, &vec![], &mut rng).is_err());
        assert!(s.run_session(2, &mut rng).is_err());
    }
}
