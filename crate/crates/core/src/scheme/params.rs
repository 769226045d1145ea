use serde::{Deserialize, Serialize};

use crate::channel::CompoundFamily;
use crate::detection::{
    estimation_exponents, ControlTest, EstimationRule, SlackSchedule, TrainingSequence,
};
use crate::error::{invalid, Error, Result};
use crate::info::{burnashev_b, capacity_vector, DEFAULT_TOL};

/// Finite stand-in for `kappa` when the zero-rate exponent or the control
/// estimation exponent is infinite.
pub const DEFAULT_KAPPA_MAX: f64 = 10.0;

/// Default strength of the finite-length backoff of the message phase.
pub const DEFAULT_BACKOFF: f64 = 5.0;

/// Inputs to [`derive_params`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    /// Target rate per channel, bits per use; `0 <= R_l < C_l`.
    pub rates: Vec<f64>,
    /// Block scale.
    pub n: usize,
    /// Channel whose proportionality constant is normalized to 1.
    pub reference_index: usize,
    pub message_rule: EstimationRule,
    pub control_rule: EstimationRule,
    /// Control-phase estimation exponents `T_c`. Computed from
    /// `control_rule` and its training composition when absent.
    pub control_exponents: Option<Vec<f64>>,
    pub slack: SlackSchedule,
    pub kappa_max: f64,
    /// `c` in `beta_m n >= n xi gamma (1 + c n^(-1/4))`.
    pub backoff: f64,
}

impl ParamSpec {
    pub fn new(rates: Vec<f64>, n: usize, message_rule: EstimationRule, control_rule: EstimationRule) -> Self {
        ParamSpec {
            rates,
            n,
            reference_index: 0,
            message_rule,
            control_rule,
            control_exponents: None,
            slack: SlackSchedule::default(),
            kappa_max: DEFAULT_KAPPA_MAX,
            backoff: DEFAULT_BACKOFF,
        }
    }
}

/// Asymptotic constants of the parameter schedule, one entry per channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub rates: Vec<f64>,
    pub capacities: Vec<f64>,
    pub burnashev: Vec<f64>,
    pub control_exponents: Vec<f64>,
    pub kappa: Vec<f64>,
    pub gamma: Vec<f64>,
    pub zeta: Vec<f64>,
    pub xi: Vec<f64>,
    pub reference_index: usize,
}

impl DerivedConstants {
    /// Evaluates `kappa = T_c/B`, `gamma = R/C`, `zeta = (1-gamma)/(1+kappa)`
    /// and `xi = zeta_*/zeta`.
    pub fn compute(
        family: &CompoundFamily,
        rates: &[f64],
        control_exponents: &[f64],
        reference_index: usize,
        kappa_max: f64,
    ) -> Result<Self> {
        let l = family.len();
        if rates.len() != l || control_exponents.len() != l {
            return Err(invalid(format!("expected {l} rates and {l} control exponents")));
        }
        if reference_index >= l {
            return Err(invalid(format!("reference index {reference_index} out of range for {l} channels")));
        }
        if !(kappa_max > 0.0 && kappa_max.is_finite()) {
            return Err(invalid(format!("kappa cap {kappa_max} must be positive and finite")));
        }
        let capacities = capacity_vector(family, DEFAULT_TOL)?;
        let mut burnashev = Vec::with_capacity(l);
        let mut kappa = Vec::with_capacity(l);
        let mut gamma = Vec::with_capacity(l);
        for i in 0..l {
            let (r, c, t) = (rates[i], capacities[i], control_exponents[i]);
            if !(r >= 0.0 && r.is_finite()) {
                return Err(invalid(format!("rate {r} of channel {i} must be finite and nonnegative")));
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
            if !(t > 0.0) {
                return Err(invalid(format!("control estimation exponent {t} of channel {i} must be positive")));
            }
            let k = if b.is_infinite() || t.is_infinite() {
                kappa_max
            } else {
                t / b
            };
            burnashev.push(b);
            kappa.push(k);
            gamma.push(r / c);
        }
        let zeta: Vec<f64> = gamma.iter().zip(&kappa).map(|(g, k)| (1.0 - g) / (1.0 + k)).collect();
        let zeta_ref = zeta[reference_index];
        let xi = zeta.iter().map(|z| zeta_ref / z).collect();
        Ok(DerivedConstants {
            rates: rates.to_vec(),
            capacities,
            burnashev,
            control_exponents: control_exponents.to_vec(),
            kappa,
            gamma,
            zeta,
            xi,
            reference_index,
        })
    }

    pub fn zeta_ref(&self) -> f64 {
        self.zeta[self.reference_index]
    }
}

/// Integer phase lengths and message sizes of one scheme instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseLengths {
    /// `alpha_m n`.
    pub message_training: usize,
    /// `alpha_c n`.
    pub control_training: usize,
    /// `beta_{m,l} n`.
    pub message: Vec<usize>,
    /// `beta_{c,l} n`.
    pub control: Vec<usize>,
    /// `log2 M_l`.
    pub message_bits: Vec<u32>,
}

/// Everything the encoder and decoder agree on before transmission, except
/// the codebook instances.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    pub n: usize,
    /// `None` for hand-sized instances built from explicit lengths.
    pub constants: Option<DerivedConstants>,
    pub lengths: PhaseLengths,
    pub message_rule: EstimationRule,
    pub control_rule: EstimationRule,
    pub message_training: TrainingSequence,
    pub control_training: TrainingSequence,
    pub controls: Vec<ControlTest>,
}

impl SchemeParams {
    /// Instance with explicitly chosen lengths, for tiny exhaustive checks.
    pub fn from_lengths(
        family: &CompoundFamily,
        lengths: PhaseLengths,
        message_rule: EstimationRule,
        control_rule: EstimationRule,
        slack: SlackSchedule,
    ) -> Result<Self> {
        let l = family.len();
        if lengths.message.len() != l || lengths.control.len() != l || lengths.message_bits.len() != l {
            return Err(invalid(format!("per-channel lengths must have {l} entries")));
        }
        if lengths.message_training == 0 || lengths.control_training == 0 {
            return Err(invalid("training phases must be nonempty"));
        }
        if lengths.message.iter().chain(&lengths.control).any(|&v| v == 0) {
            return Err(invalid("message and control phases must be nonempty"));
        }
        let n = lengths.message_training
            + lengths.control_training
            + lengths.message.iter().max().copied().unwrap_or(0)
            + lengths.control.iter().max().copied().unwrap_or(0);
        Self::assemble(family, n, None, lengths, message_rule, control_rule, slack)
    }

    fn assemble(
        family: &CompoundFamily,
        n: usize,
        constants: Option<DerivedConstants>,
        lengths: PhaseLengths,
        message_rule: EstimationRule,
        control_rule: EstimationRule,
        slack: SlackSchedule,
    ) -> Result<Self> {
        let message_training = training_for(&message_rule, lengths.message_training, family.num_inputs())?;
        let control_training = training_for(&control_rule, lengths.control_training, family.num_inputs())?;
        // Validates the rules against the family.
        estimation_exponents(&message_rule, family, &message_training.composition(family.num_inputs()))?;
        estimation_exponents(&control_rule, family, &control_training.composition(family.num_inputs()))?;
        let controls = family
            .channels()
            .iter()
            .enumerate()
            .map(|(i, ch)| {
                if burnashev_b(ch).value == 0.0 {
                    Err(Error::DegenerateChannel { channel: i })
                } else {
                    ControlTest::for_channel(ch, slack)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SchemeParams {
            n,
            constants,
            lengths,
            message_rule,
            control_rule,
            message_training,
            control_training,
            controls,
        })
    }

    pub fn num_channels(&self) -> usize {
        self.controls.len()
    }

    /// `Lambda n` for an epoch with the given channel estimates.
    pub fn epoch_length(&self, message_estimate: usize, control_estimate: usize) -> usize {
        self.lengths.message_training
            + self.lengths.message[message_estimate]
            + self.lengths.control_training
            + self.lengths.control[control_estimate]
    }
}

/// Training sequence matched to an estimation rule: all zeros for the BSC
/// threshold rule, a cycle through the inputs for maximum likelihood.
pub fn training_for(rule: &EstimationRule, len: usize, num_inputs: usize) -> Result<TrainingSequence> {
    match rule {
        EstimationRule::BscThreshold { .. } => TrainingSequence::all_zero(len),
        EstimationRule::MaximumLikelihood => TrainingSequence::round_robin(len, num_inputs),
    }
}

/// Derives the phase lengths and message sizes for block scale `n`.
///
/// * `alpha_m n = floor(n / log2 n)`
/// * `alpha_c n = ceil(n zeta_*)`
/// * `beta_{c,l} n = max(1, ceil(n kappa_l zeta_*))`
/// * `log2 M_l = round(n xi_l R_l)`
/// * `beta_{m,l} n` is the smallest length above `n xi_l gamma_l` that also
///   exceeds `n xi_l gamma_l (1 + c n^(-1/4))` and keeps the codebook rate
///   strictly below `C_l`.
pub fn derive_params(family: &CompoundFamily, spec: &ParamSpec) -> Result<SchemeParams> {
    let l = family.len();
    let n = spec.n;
    if n < 4 {
        return Err(invalid(format!("block scale n = {n} is too small")));
    }
    if !(spec.backoff >= 0.0 && spec.backoff.is_finite()) {
        return Err(invalid(format!("backoff {} must be finite and nonnegative", spec.backoff)));
    }
    let control_exponents = match &spec.control_exponents {
        Some(t) => t.clone(),
        None => {
            // Composition of a long training sequence of this type.
            let probe = training_for(&spec.control_rule, family.num_inputs() * 64, family.num_inputs())?;
            estimation_exponents(&spec.control_rule, family, &probe.composition(family.num_inputs()))?.marginal
        }
    };
    if control_exponents.len() != l {
        return Err(invalid(format!("expected {l} control exponents")));
    }
    let c = DerivedConstants::compute(family, &spec.rates, &control_exponents, spec.reference_index, spec.kappa_max)?;
    let nf = n as f64;
    let zeta_ref = c.zeta_ref();
    let message_training = ((nf / nf.log2()).floor() as usize).max(1);
    let control_training = ((nf * zeta_ref).ceil() as usize).max(1);
    let mut message = Vec::with_capacity(l);
    let mut control = Vec::with_capacity(l);
    let mut message_bits = Vec::with_capacity(l);
    for i in 0..l {
        let bits = (nf * c.xi[i] * c.rates[i]).round();
        let target = nf * c.xi[i] * c.gamma[i];
        let by_target = target.floor() + 1.0;
        let by_backoff = (target * (1.0 + spec.backoff * nf.powf(-0.25))).ceil();
        let by_capacity = (bits / c.capacities[i]).floor() + 1.0;
        message.push(by_target.max(by_backoff).max(by_capacity) as usize);
        control.push(((nf * c.kappa[i] * zeta_ref).ceil() as usize).max(1));
        message_bits.push(bits as u32);
    }
    let lengths = PhaseLengths {
        message_training,
        control_training,
        message,
        control,
        message_bits,
    };
    SchemeParams::assemble(
        family,
        n,
        Some(c),
        lengths,
        spec.message_rule,
        spec.control_rule,
        spec.slack,
    )
}
