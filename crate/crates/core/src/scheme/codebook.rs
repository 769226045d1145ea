//! Random codebooks with exact maximum-likelihood decoding.
//!
//! Codewords are drawn i.i.d. from the capacity-achieving input law of the
//! target channel. Messages with more than [`MAX_CHUNK_BITS`] bits are split
//! into independent sub-messages, each carried by its own random sub-codebook
//! on a disjoint slice of the block. The likelihood factorizes over slices,
//! so slice-wise ML decoding is exact ML for the product codebook.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::Dmc;
use crate::error::{invalid, Error, Result};
use crate::info::{capacity, DEFAULT_TOL};

/// Largest number of message bits carried by a single sub-codebook.
pub const MAX_CHUNK_BITS: u32 = 16;
const MAX_REDRAWS: usize = 1000;

/// A message, one digit per sub-codebook.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Message(pub Vec<u32>);

#[derive(Debug, Clone)]
struct SubCode {
    size: usize,
    offset: usize,
    len: usize,
    /// `size x len` symbols, row-major.
    words: Vec<u8>,
    /// Bit-packed codewords for binary inputs, `words_per_code` u64 each.
    packed: Vec<u64>,
    words_per_code: usize,
}

/// A fixed-length block code for one channel with an ML decoder.
#[derive(Debug, Clone)]
pub struct Codebook {
    rate: f64,
    block_length: usize,
    size: u128,
    chunks: Vec<SubCode>,
    /// `log2 Q(y|x)` of the target channel, indexed `[x][y]`.
    loglik: Vec<Vec<f64>>,
    num_outputs: usize,
}

impl Codebook {
    /// Random codebook of `round(2^(block_length * rate))` codewords.
    ///
    /// Sizes above `2^MAX_CHUNK_BITS` are rounded to the nearest power of two.
    pub fn random<R: Rng + ?Sized>(channel: &Dmc, rate: f64, block_length: usize, rng: &mut R) -> Result<Self> {
        if !(rate >= 0.0) {
            return Err(invalid(format!("rate {rate} must be nonnegative")));
        }
        let cap = capacity(channel, DEFAULT_TOL)?;
        if rate > 0.0 && rate >= cap.value {
            return Err(Error::InfeasibleRate {
                channel: 0,
                rate,
                capacity: cap.value,
            });
        }
        let log_size = block_length as f64 * rate;
        if log_size > 127.0 {
            return Err(invalid(format!("codebook with 2^{log_size} messages is out of range")));
        }
        let size = log_size.exp2().round() as u128;
        let radices: Vec<usize> = if size <= 1 << MAX_CHUNK_BITS {
            if size > 1 {
                vec![size as usize]
            } else {
                vec![]
            }
        } else {
            split_bits(log_size.round() as u32)
                .into_iter()
                .map(|b| 1usize << b)
                .collect()
        };
        Self::with_radices(channel, cap.input.probs(), &radices, block_length, rng)
    }

    /// Random codebook carrying exactly `bits` message bits, for schemes that
    /// keep message sizes at powers of two.
    pub fn random_bits<R: Rng + ?Sized>(channel: &Dmc, bits: u32, block_length: usize, rng: &mut R) -> Result<Self> {
        if bits > 127 {
            return Err(invalid(format!("codebook with 2^{bits} messages is out of range")));
        }
        let cap = capacity(channel, DEFAULT_TOL)?;
        if bits > 0 && bits as f64 / block_length as f64 >= cap.value {
            return Err(Error::InfeasibleRate {
                channel: 0,
                rate: bits as f64 / block_length as f64,
                capacity: cap.value,
            });
        }
        let radices: Vec<usize> = split_bits(bits).into_iter().map(|b| 1usize << b).collect();
        Self::with_radices(channel, cap.input.probs(), &radices, block_length, rng)
    }

    fn with_radices<R: Rng + ?Sized>(
        channel: &Dmc,
        input_law: &[f64],
        radices: &[usize],
        block_length: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if channel.num_inputs() > u8::MAX as usize + 1 {
            return Err(invalid("codebooks support at most 256 input symbols"));
        }
        if radices.len() > block_length {
            return Err(invalid(format!(
                "block of {block_length} symbols cannot carry {} sub-codebooks",
                radices.len()
            )));
        }
        let size: u128 = radices.iter().map(|&r| r as u128).product();
        let total_bits: f64 = radices.iter().map(|&r| (r as f64).log2()).sum();
        // Slice lengths proportional to the bits each slice carries.
        let mut lens = Vec::with_capacity(radices.len());
        let mut used = 0usize;
        let mut bits_so_far = 0.0;
        for (i, &r) in radices.iter().enumerate() {
            bits_so_far += (r as f64).log2();
            let end = if i + 1 == radices.len() {
                block_length
            } else {
                ((bits_so_far / total_bits) * block_length as f64).round() as usize
            };
            let end = end.max(used + 1).min(block_length - (radices.len() - i - 1));
            lens.push(end - used);
            used = end;
        }
        let binary = channel.num_inputs() == 2;
        let mut chunks = Vec::with_capacity(radices.len());
        let mut offset = 0;
        for (&r, &len) in radices.iter().zip(&lens) {
            let distinct_possible =
                (channel.num_inputs() as f64).powi(len.min(1000) as i32) >= r as f64;
            let mut words = draw_words(input_law, r, len, rng);
            let mut redraws = 0;
            while distinct_possible && has_duplicates(&words, len) && redraws < MAX_REDRAWS {
                words = draw_words(input_law, r, len, rng);
                redraws += 1;
            }
            let words_per_code = if binary { len.div_ceil(64) } else { 0 };
            let packed = if binary { pack(&words, r, len) } else { Vec::new() };
            chunks.push(SubCode {
                size: r,
                offset,
                len,
                words,
                packed,
                words_per_code,
            });
            offset += len;
        }
        let rate = if block_length == 0 {
            0.0
        } else {
            (size as f64).log2() / block_length as f64
        };
        Ok(Codebook {
            rate,
            block_length,
            size,
            chunks,
            loglik: channel
                .rows()
                .iter()
                .map(|row| row.iter().map(|q| q.log2()).collect())
                .collect(),
            num_outputs: channel.num_outputs(),
        })
    }

    /// Bits per channel use, `log2(M) / block_length`.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    /// Number of codewords `M`.
    pub fn size(&self) -> u128 {
        self.size
    }

    /// Sizes of the sub-codebooks; a message has one digit per entry.
    pub fn radices(&self) -> Vec<usize> {
        self.chunks.iter().map(|c| c.size).collect()
    }

    /// Uniformly random message.
    pub fn random_message<R: Rng + ?Sized>(&self, rng: &mut R) -> Message {
        Message(self.chunks.iter().map(|c| rng.gen_range(0..c.size) as u32).collect())
    }

    /// All messages in lexicographic digit order. Only for tiny codebooks.
    pub fn messages(&self) -> Vec<Message> {
        let mut out = vec![Message(Vec::new())];
        for c in &self.chunks {
            out = out
                .into_iter()
                .flat_map(|m| {
                    (0..c.size as u32).map(move |d| {
                        let mut v = m.0.clone();
                        v.push(d);
                        Message(v)
                    })
                })
                .collect();
        }
        out
    }

    /// Channel input block for `message`.
    pub fn encode(&self, message: &Message) -> Vec<usize> {
        let mut x = vec![0usize; self.block_length];
        self.encode_into(message, &mut x);
        x
    }

    pub(crate) fn encode_into(&self, message: &Message, x: &mut [usize]) {
        for (c, &d) in self.chunks.iter().zip(&message.0) {
            let w = &c.words[d as usize * c.len..(d as usize + 1) * c.len];
            for (slot, &s) in x[c.offset..c.offset + c.len].iter_mut().zip(w) {
                *slot = s as usize;
            }
        }
    }

    /// Maximum-likelihood decision; ties, up to 1e-9 relative, go to the
    /// smallest digit in each slice.
    pub fn decode(&self, outputs: &[usize]) -> Message {
        Message(
            self.chunks
                .iter()
                .map(|c| self.decode_chunk(c, &outputs[c.offset..c.offset + c.len]) as u32)
                .collect(),
        )
    }

    fn decode_chunk(&self, c: &SubCode, y: &[usize]) -> usize {
        let mut best = 0;
        let mut best_ll = f64::NEG_INFINITY;
        if c.words_per_code > 0 {
            // Binary inputs: count, per output symbol, how many positions carry a 1.
            let wpc = c.words_per_code;
            let mut masks = vec![0u64; self.num_outputs * wpc];
            let mut totals = vec![0u32; self.num_outputs];
            for (t, &yt) in y.iter().enumerate() {
                masks[yt * wpc + t / 64] |= 1 << (t % 64);
                totals[yt] += 1;
            }
            let present: Vec<usize> = (0..self.num_outputs).filter(|&v| totals[v] > 0).collect();
            for i in 0..c.size {
                let word = &c.packed[i * wpc..(i + 1) * wpc];
                let mut ll = 0.0;
                for &v in &present {
                    let mask = &masks[v * wpc..(v + 1) * wpc];
                    let ones: u32 = word.iter().zip(mask).map(|(a, b)| (a & b).count_ones()).sum();
                    let zeros = totals[v] - ones;
                    ll += weighted(ones, self.loglik[1][v]) + weighted(zeros, self.loglik[0][v]);
                }
                if beats(ll, best_ll) {
                    best_ll = ll;
                    best = i;
                }
            }
        } else {
            for i in 0..c.size {
                let word = &c.words[i * c.len..(i + 1) * c.len];
                let ll: f64 = word
                    .iter()
                    .zip(y)
                    .map(|(&x, &yt)| self.loglik[x as usize][yt])
                    .sum();
                if beats(ll, best_ll) {
                    best_ll = ll;
                    best = i;
                }
            }
        }
        best
    }
}

/// Strictly better by more than rounding noise, so that equal likelihoods
/// summed in different orders still tie and go to the smaller index.
#[inline]
pub(crate) fn beats(ll: f64, best: f64) -> bool {
    ll > best && (best == f64::NEG_INFINITY || ll - best > 1e-9 * best.abs().max(1.0))
}

#[inline]
fn weighted(count: u32, ll: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * ll
    }
}

/// Splits `bits` into `ceil(bits / MAX_CHUNK_BITS)` nearly equal parts.
fn split_bits(bits: u32) -> Vec<u32> {
    if bits == 0 {
        return Vec::new();
    }
    let parts = bits.div_ceil(MAX_CHUNK_BITS);
    (0..parts)
        .map(|i| bits / parts + u32::from(i < bits % parts))
        .collect()
}

fn draw_words<R: Rng + ?Sized>(law: &[f64], count: usize, len: usize, rng: &mut R) -> Vec<u8> {
    let cum: Vec<f64> = law
        .iter()
        .scan(0.0, |a, p| {
            *a += p;
            Some(*a)
        })
        .collect();
    let last = law.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    (0..count * len)
        .map(|_| {
            let u: f64 = rng.gen();
            cum.iter().position(|&c| u < c).unwrap_or(last) as u8
        })
        .collect()
}

fn has_duplicates(words: &[u8], len: usize) -> bool {
    if len == 0 {
        return words.is_empty();
    }
    let mut seen = HashSet::with_capacity(words.len() / len);
    words.chunks(len).any(|w| !seen.insert(w))
}

fn pack(words: &[u8], count: usize, len: usize) -> Vec<u64> {
    let wpc = len.div_ceil(64);
    let mut out = vec![0u64; count * wpc];
    for i in 0..count {
        for t in 0..len {
            if words[i * len + t] == 1 {
                out[i * wpc + t / 64] |= 1 << (t % 64);
            }
        }
    }
    out
}
