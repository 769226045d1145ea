//! The subcommands, as functions from a validated experiment to output text.

use std::io::Write;

use compound_feedback::analysis::{
    brute_force_epoch_oracle, eer_lower_bound, format_number, oracle_monte_carlo, phi_curve, phi_grid,
    trivial_upper_bound, OracleComparison,
};
use compound_feedback::info::{burnashev_b, compound_capacity_feedback, compound_capacity_nofeedback, DEFAULT_TOL};
use compound_feedback::scheme::{
    session_statistics, simulate_transcripts, simulate_with, Scheme, SessionStats, SessionSummary,
};
use compound_feedback::RngSeed;
use serde_json::{json, Value};

use crate::config::Experiment;
use crate::error::CliError;

/// Tag separating codebook seeds from session seeds within one block scale.
const SESSION_TAG: u64 = 0x5E55_0000;

/// `|z|` limit of `oracle-check`.
pub const ORACLE_Z_LIMIT: f64 = 4.0;

/// JSON number, or the string `"inf"` for infinities. NaN is a bug upstream.
pub fn num(v: f64) -> Value {
    assert!(!v.is_nan(), "NaN reached the output layer");
    if v.is_finite() {
        json!(v)
    } else {
        Value::String(format_number(v))
    }
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

fn csv_field(v: f64) -> String {
    assert!(!v.is_nan(), "NaN reached the output layer");
    format_number(v)
}

/// `{capacity_vector, C_NF, C_F, burnashev_vector}`.
pub fn capacity(exp: &Experiment) -> Result<Value, CliError> {
    let nf = compound_capacity_nofeedback(&exp.family, DEFAULT_TOL)?;
    let f = compound_capacity_feedback(&exp.family, DEFAULT_TOL)?;
    let b: Vec<f64> = exp.family.channels().iter().map(|c| burnashev_b(c).value).collect();
    Ok(json!({
        "capacity_vector": nums(&exp.capacities),
        "C_NF": num(nf.value),
        "C_F": num(f),
        "burnashev_vector": nums(&b),
    }))
}

/// Tradeoff curve of the BSC pair with crossover `p` over `points` thresholds.
pub fn phi(p: f64, points: usize) -> Result<String, CliError> {
    if !(p > 0.0 && p < 0.5) {
        return Err(CliError::Config(format!("p: crossover {p} must lie in (0, 0.5)")));
    }
    let grid = phi_grid(p, points).map_err(|e| CliError::Config(format!("points: {e}")))?;
    let curve = phi_curve(p, &grid)?;
    Ok(curve.to_csv())
}

/// Per-channel bounds at the configured rates.
pub fn exponents(exp: &Experiment) -> Result<Value, CliError> {
    let params = exp.params(exp.config.n[0])?;
    let k = params.constants.expect("derived parameters carry constants");
    let lower = eer_lower_bound(&exp.family, &exp.rates, &k.control_exponents)?;
    let upper = trivial_upper_bound(&exp.family, &exp.rates)?;
    Ok(json!({
        "rates": nums(&exp.rates),
        "capacities": nums(&exp.capacities),
        "gamma": nums(&k.gamma),
        "burnashev": nums(&k.burnashev),
        "control_exponents": nums(&k.control_exponents),
        "lower_bound": nums(&lower.values),
        "upper_bound": nums(&upper.values),
    }))
}

/// Statistics of one (n, channel) cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub n: usize,
    pub ell: usize,
    pub stats: SessionStats,
    pub summary: SessionSummary,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

pub const SIMULATE_HEADER: [&str; 12] = [
    "n",
    "ell",
    "sessions",
    "P_hat",
    "R_hat",
    "tau_mean",
    "tau_over_n",
    "K_mean",
    "rho_hat",
    "emp_exponent",
    "lower_bound",
    "upper_bound",
];

/// The scheme used at block scale `n`. Codebooks are seeded by `(seed, n)`.
pub fn scheme_at(exp: &Experiment, n: usize) -> Result<Scheme, CliError> {
    let params = exp.params(n)?;
    let seed = RngSeed(exp.config.seed).derive(n as u64);
    Ok(Scheme::new(exp.family.clone(), params, seed)?.with_max_epochs(exp.config.max_epochs))
}

/// Session seed of a cell; session `i` then draws from `.stream(i)`.
pub fn session_seed(exp: &Experiment, n: usize, ell: usize) -> RngSeed {
    RngSeed(exp.config.seed).derive(n as u64).derive(SESSION_TAG + ell as u64)
}

/// Runs every (n, channel) cell on the current rayon pool. When
/// `transcripts` is given, every session is written to it as a JSON line.
pub fn simulate(exp: &Experiment, mut transcripts: Option<&mut dyn Write>) -> Result<Vec<CellResult>, CliError> {
    let cfg = &exp.config;
    let upper = trivial_upper_bound(&exp.family, &exp.rates)?;
    let mut cells = Vec::new();
    for &n in &cfg.n {
        let scheme = scheme_at(exp, n)?;
        let k = scheme.params().constants.clone().expect("derived parameters carry constants");
        let lower = eer_lower_bound(&exp.family, &exp.rates, &k.control_exponents)?;
        for ell in 0..exp.family.len() {
            let seed = session_seed(exp, n, ell);
            let stats = match transcripts.as_deref_mut() {
                Some(sink) => {
                    let ts = simulate_transcripts(&scheme, ell, cfg.sessions, seed)
                        .map_err(|e| CliError::in_cell(e, n, ell))?;
                    for t in &ts {
                        let line = json!({ "n": n, "ell": ell, "transcript": t });
                        writeln!(sink, "{line}").map_err(|source| CliError::Io {
                            path: "transcripts".into(),
                            source,
                        })?;
                    }
                    SessionStats::from_transcripts(&ts)
                }
                None => simulate_with(&scheme, ell, cfg.sessions, seed, cfg.chunk, |_| {})
                    .map_err(|e| CliError::in_cell(e, n, ell))?,
            };
            let summary = session_statistics(&stats)?;
            cells.push(CellResult {
                n,
                ell,
                stats,
                summary,
                lower_bound: lower.values[ell],
                upper_bound: upper.values[ell],
            });
        }
    }
    Ok(cells)
}

/// CSV table of [`simulate`] results.
pub fn simulate_csv(cells: &[CellResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SIMULATE_HEADER).expect("writes to memory");
    for c in cells {
        let s = &c.summary;
        w.write_record([
            c.n.to_string(),
            c.ell.to_string(),
            s.sessions.to_string(),
            csv_field(s.p_hat),
            csv_field(s.r_hat),
            csv_field(s.tau_mean),
            csv_field(s.tau_mean / c.n as f64),
            csv_field(s.k_mean),
            csv_field(s.rho_pooled),
            csv_field(s.emp_exponent),
            csv_field(c.lower_bound),
            csv_field(c.upper_bound),
        ])
        .expect("writes to memory");
    }
    String::from_utf8(w.into_inner().expect("flushes to memory")).expect("CSV is UTF-8")
}

/// Exact oracle against Monte Carlo for every channel of the tiny configuration.
pub fn oracle_check(exp: &Experiment) -> Result<(Value, bool), CliError> {
    let cfg = &exp.config;
    let params = exp.oracle_params()?;
    let scheme = Scheme::new(exp.family.clone(), params, RngSeed(cfg.seed))?.with_max_epochs(cfg.max_epochs);
    // Fail on capability before spending time on sessions.
    brute_force_epoch_oracle(&scheme, 0)?;
    let mut channels = Vec::new();
    let mut passed = true;
    for ell in 0..exp.family.len() {
        let seed = RngSeed(cfg.seed).derive(SESSION_TAG + ell as u64);
        let cmp = oracle_monte_carlo(&scheme, ell, cfg.sessions, seed, ORACLE_Z_LIMIT)
            .map_err(|e| CliError::in_cell(e, 0, ell))?;
        passed &= cmp.passed;
        channels.push(comparison_json(&cmp));
    }
    let report = json!({
        "sessions": cfg.sessions,
        "z_limit": ORACLE_Z_LIMIT,
        "lengths": scheme.params().lengths,
        "channels": channels,
        "passed": passed,
    });
    Ok((report, passed))
}

fn comparison_json(c: &OracleComparison) -> Value {
    let o = &c.oracle;
    json!({
        "channel": o.channel,
        "oracle": {
            "rho": num(o.rho),
            "session_error": num(o.session_error),
            "assembled_error": num(o.assembled_error),
            "message_error": num(o.message_error),
            "false_accept": num(o.false_accept),
            "false_reject": num(o.false_reject),
            "epoch_length_mean": num(o.epoch_length_mean),
            "expected_tau": num(o.expected_tau),
        },
        "checks": c.checks.iter().map(|k| json!({
            "name": k.name,
            "exact": num(k.exact),
            "estimate": num(k.estimate),
            "std_error": num(k.std_error),
            "z": num(k.z),
            "passed": k.passed,
        })).collect::<Vec<_>>(),
        "passed": c.passed,
    })
}
