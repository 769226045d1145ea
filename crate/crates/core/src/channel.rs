//! Discrete memoryless channels and finite compound families.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Row sums must be within this distance of one.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A discrete memoryless channel `Q(y|x)` over dense 0-based alphabets.
///
/// Rows are validated at construction and never renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Dmc {
    rows: Vec<Vec<f64>>,
    cumulative: Vec<Vec<f64>>,
    num_outputs: usize,
}

impl Dmc {
    /// Builds a channel from its transition rows, `rows[x][y] = Q(y|x)`.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::validated(rows, None)
    }

    fn validated(rows: Vec<Vec<f64>>, channel: Option<usize>) -> Result<Self> {
        let err = |row: Option<usize>, reason: String| Error::InvalidChannel { channel, row, reason };
        if rows.is_empty() {
            return Err(err(None, "no input symbols".into()));
        }
        let num_outputs = rows[0].len();
        if num_outputs == 0 {
            return Err(err(Some(0), "no output symbols".into()));
        }
        for (x, row) in rows.iter().enumerate() {
            if row.len() != num_outputs {
                return Err(err(
                    Some(x),
                    format!("row has {} entries, expected {num_outputs}", row.len()),
                ));
            }
            if let Some(q) = row.iter().find(|q| !(0.0..=1.0).contains(*q)) {
                return Err(err(Some(x), format!("entry {q} outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(err(Some(x), format!("row sums to {sum}, not 1")));
            }
        }
        let cumulative = rows
            .iter()
            .map(|row| {
                row.iter()
                    .scan(0.0, |acc, q| {
                        *acc += q;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        Ok(Dmc {
            rows,
            cumulative,
            num_outputs,
        })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("crossover probability {p} outside [0, 1]")));
        }
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Binary erasure channel; output 2 is the erasure symbol.
    pub fn bec(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(invalid(format!("erasure probability {eps} outside [0, 1]")));
        }
        Self::new(vec![vec![1.0 - eps, 0.0, eps], vec![0.0, 1.0 - eps, eps]])
    }

    /// Noiseless channel on `k` symbols.
    pub fn identity(k: usize) -> Result<Self> {
        Self::new(
            (0..k)
                .map(|x| (0..k).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn num_inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Output law `Q(.|x)`.
    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    /// `Q(y|x)`.
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    /// Draws one channel output for input `x`, consuming exactly one uniform
    /// variate from `rng`.
    pub fn sample_output<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> Result<usize> {
        self.check_input(x)?;
        Ok(self.draw(x, rng))
    }

    /// Passes every symbol of `inputs` through the channel independently.
    pub fn sample_block<R: Rng + ?Sized>(&self, inputs: &[usize], rng: &mut R) -> Result<Vec<usize>> {
        inputs.iter().try_for_each(|&x| self.check_input(x))?;
        Ok(inputs.iter().map(|&x| self.draw(x, rng)).collect())
    }

    pub(crate) fn check_input(&self, x: usize) -> Result<()> {
        if x >= self.num_inputs() {
            return Err(invalid(format!(
                "input symbol {x} out of range for {} inputs",
                self.num_inputs()
            )));
        }
        Ok(())
    }

    /// Unchecked inverse-CDF draw.
    #[inline]
    pub(crate) fn draw<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let cum = &self.cumulative[x];
        match cum.iter().position(|&c| u < c) {
            Some(y) => y,
            // u landed in the rounding gap above the last partial sum.
            None => self.rows[x].iter().rposition(|&q| q > 0.0).unwrap_or(0),
        }
    }
}

impl std::fmt::Display for Dmc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DMC {}x{} {:?}", self.num_inputs(), self.num_outputs, self.rows)
    }
}

/// A known finite family of channels sharing input and output alphabets.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundFamily {
    channels: Vec<Dmc>,
}

#[derive(Serialize, Deserialize)]
struct FamilyFile {
    channels: Vec<Vec<Vec<f64>>>,
}

impl CompoundFamily {
    pub fn new(channels: Vec<Dmc>) -> Result<Self> {
        let first = channels
            .first()
            .ok_or_else(|| invalid("compound family needs at least one channel"))?;
        let (nx, ny) = (first.num_inputs(), first.num_outputs());
        for (i, ch) in channels.iter().enumerate() {
            if ch.num_inputs() != nx || ch.num_outputs() != ny {
                return Err(Error::InvalidChannel {
                    channel: Some(i),
                    row: None,
                    reason: format!(
                        "alphabet {}x{} differs from {nx}x{ny}",
                        ch.num_inputs(),
                        ch.num_outputs()
                    ),
                });
            }
            if let Some(j) = channels[..i].iter().position(|other| other.rows == ch.rows) {
                return Err(Error::InvalidChannel {
                    channel: Some(i),
                    row: None,
                    reason: format!("identical to channel {j}"),
                });
            }
        }
        Ok(CompoundFamily { channels })
    }

    /// Builds a family from raw matrices; errors name the offending channel and row.
    pub fn from_matrices(matrices: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let channels = matrices
            .into_iter()
            .enumerate()
            .map(|(i, rows)| Dmc::validated(rows, Some(i)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(channels)
    }

    /// The two-member family `{BSC(p), BSC(1-p)}`.
    pub fn bsc_pair(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 0.5) {
            return Err(invalid(format!("bsc pair needs 0 < p < 1/2, got {p}")));
        }
        Self::new(vec![Dmc::bsc(p)?, Dmc::bsc(1.0 - p)?])
    }

    /// Parses `{"channels": [[[row], ...], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: FamilyFile =
            serde_json::from_str(text).map_err(|e| invalid(format!("family file: {e}")))?;
        Self::from_matrices(file.channels)
    }

    pub fn to_json(&self) -> String {
        let file = FamilyFile {
            channels: self.channels.iter().map(|c| c.rows.clone()).collect(),
        };
        serde_json::to_string(&file).expect("matrices serialize")
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn channels(&self) -> &[Dmc] {
        &self.channels
    }

    pub fn channel(&self, index: usize) -> &Dmc {
        &self.channels[index]
    }

    pub fn num_inputs(&self) -> usize {
        self.channels[0].num_inputs()
    }

    pub fn num_outputs(&self) -> usize {
        self.channels[0].num_outputs()
    }
}
