use std::path::Path;

use aklt_core::aklt::{exact_oracle, finite_expectation, AkltTensors, Axis, ObservableSpec};
use aklt_core::channels::{power_limit, KrausChannel, STRUCTURE_TOL};
use aklt_core::fcs::{convergence_sweep, correlator, omega_local, padding_rate, MAX_CORRELATOR_DISTANCE};
use aklt_core::hqmm::{search_witness, HqmmModel, WitnessFamily};
use aklt_core::sampling::random_factored_observable;
use aklt_core::serde_repr::{ChannelRepr, ObservableRepr};
use aklt_core::C64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::report::{Cell, Report};

pub const MAX_VERIFY_SITES: usize = 6;
pub const MAX_TRIALS: usize = 10_000;
pub const WITNESS_SAMPLES: usize = 256;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable input or malformed JSON.
    Parse(String),
    /// Well-formed input that violates a dimension, range or structure rule.
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Validation(m) => write!(f, "validation error: {m}"),
        }
    }
}

impl From<aklt_core::Error> for CliError {
    fn from(e: aklt_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// A finished report plus, for `hqmm-verify`, the failure that should turn
/// the exit code into 1.
pub struct Outcome {
    pub report: Report,
    pub failure: Option<Failure>,
}

pub struct Failure {
    pub message: String,
    pub dump: Value,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Self { report, failure: None }
    }
}

pub fn read_input(path: Option<&Path>) -> CliResult<Option<String>> {
    path.map(|p| {
        std::fs::read_to_string(p).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", p.display())))
    })
    .transpose()
}

fn require_input(text: Option<String>, command: &str) -> CliResult<String> {
    text.ok_or_else(|| CliError::Validation(format!("{command} needs --input PATH")))
}

fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

pub fn parse_observable(text: &str) -> CliResult<ObservableSpec> {
    let repr: ObservableRepr = parse_json(text, "observable")?;
    Ok(ObservableSpec::try_from(repr)?)
}

pub fn parse_channel(text: &str) -> CliResult<KrausChannel> {
    let repr: ChannelRepr = parse_json(text, "channel")?;
    Ok(KrausChannel::try_from(repr)?)
}

pub fn parse_model(text: &str) -> CliResult<HqmmModel> {
    let model: HqmmModel = parse_json(text, "model")?;
    model.validate()?;
    Ok(model)
}

/// The tolerance a command uses when `--tol` is absent.
pub fn tolerance(given: Option<f64>, default: f64) -> CliResult<f64> {
    let tol = given.unwrap_or(default);
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(CliError::Validation(format!("--tol must be positive, got {tol}")))
    }
}

fn complex_row(path: &str, z: C64) -> Vec<Cell> {
    vec![path.into(), z.re.into(), z.im.into()]
}

fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn expect(input: Option<String>) -> CliResult<Outcome> {
    let y = parse_observable(&require_input(input, "expect")?)?;
    let n = y.n_sites();
    let ring_norm = finite_expectation(&ObservableSpec::identity(n))?;
    let finite_raw = finite_expectation(&y)?;
    let exact_raw = exact_oracle(&y)?;
    let finite = finite_raw / ring_norm;
    let exact = exact_raw / exact_oracle(&ObservableSpec::identity(n))?;
    let infinite = omega_local(&y)?;

    let mut r = Report::new("expect", &["path", "value_re", "value_im"]);
    r.push(complex_row("finite_chain", finite));
    r.push(complex_row("infinite_volume", infinite));
    r.push(complex_row("exact_oracle", exact));
    for (name, a, b) in [
        ("deviation_finite_chain_exact_oracle", finite, exact),
        ("deviation_finite_chain_infinite_volume", finite, infinite),
        ("deviation_exact_oracle_infinite_volume", exact, infinite),
    ] {
        r.push(vec![name.into(), (a - b).norm().into(), 0.0.into()]);
    }
    r.note("n_sites", n);
    r.note("ring_norm", ring_norm.re);
    r.note("finite_chain_unnormalized", complex_json(finite_raw));
    Ok(r.into())
}

pub fn correlate(max_distance: usize, axis: Axis) -> CliResult<Outcome> {
    if !(1..=MAX_CORRELATOR_DISTANCE).contains(&max_distance) {
        return Err(CliError::Validation(format!(
            "--max-distance must be in 1..={MAX_CORRELATOR_DISTANCE}, got {max_distance}"
        )));
    }
    let mut r = Report::new("correlate", &["r", "value", "ratio_to_previous"]);
    let mut prev: Option<f64> = None;
    for d in 1..=max_distance {
        let v = correlator(axis, d)?;
        r.push(vec![d.into(), v.into(), prev.map(|p| v / p).into()]);
        prev = Some(v);
    }
    r.note("axis", format!("{axis:?}").to_lowercase());
    Ok(r.into())
}

/// `(k, k)` for `k = 0..=max(m_max, p_max)`, each side clipped to its bound.
pub fn converge_schedule(m_max: usize, p_max: usize) -> Vec<(usize, usize)> {
    (0..=m_max.max(p_max)).map(|k| (k.min(m_max), k.min(p_max))).collect()
}

pub fn converge(input: Option<String>, seed: u64, m_max: usize, p_max: usize) -> CliResult<Outcome> {
    let (y, source) = match input {
        Some(text) => (parse_observable(&text)?, "input".to_owned()),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (random_factored_observable(&mut rng, 2, false), format!("random, seed {seed}"))
        }
    };
    let sweep = convergence_sweep(&y, converge_schedule(m_max, p_max))?;
    let mut r = Report::new("converge", &["m", "p", "value_re", "value_im", "abs_error_vs_omega"]);
    for s in &sweep {
        r.push(vec![s.m.into(), s.p.into(), s.value.re.into(), s.value.im.into(), s.abs_error.into()]);
    }
    r.note("observable", source);
    r.note("omega", complex_json(omega_local(&y)?));
    r.note("rate_per_padding_site", padding_rate(&sweep));
    Ok(r.into())
}

pub fn hqmm_verify(
    input: Option<String>,
    seed: u64,
    tol: f64,
    n_sites: usize,
    trials: usize,
) -> CliResult<Outcome> {
    if !(1..=MAX_VERIFY_SITES).contains(&n_sites) {
        return Err(CliError::Validation(format!(
            "--n-sites must be in 1..={MAX_VERIFY_SITES}, got {n_sites}"
        )));
    }
    if trials > MAX_TRIALS {
        return Err(CliError::Validation(format!("--trials must be at most {MAX_TRIALS}, got {trials}")));
    }
    let model = match input {
        Some(text) => parse_model(&text)?,
        None => HqmmModel::aklt_causal(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = Report::new("hqmm-verify", &["record", "index", "value"]);
    let mut worst: Option<(usize, f64, ObservableSpec)> = None;
    for i in 0..trials {
        let y = random_factored_observable(&mut rng, n_sites, i % 2 == 0);
        let dev = (model.observation_process(&y)? - omega_local(&y)?).norm();
        r.push(vec!["trial".into(), i.into(), dev.into()]);
        if worst.as_ref().is_none_or(|w| dev > w.1) {
            worst = Some((i, dev, y));
        }
    }
    let max_dev = worst.as_ref().map(|w| w.1);
    r.push(vec!["max_deviation".into(), Cell::Empty, max_dev.into()]);

    let mut witness_rng = ChaCha8Rng::seed_from_u64(seed);
    witness_rng.set_stream(1);
    let mut witnesses = serde_json::Map::new();
    for (name, family) in [("rank_one", WitnessFamily::RankOne), ("isometry", WitnessFamily::Isometry)] {
        let w = search_witness(family, &mut witness_rng, WITNESS_SAMPLES)?;
        r.push(vec![format!("witness_gap_{name}").as_str().into(), Cell::Empty, w.gap.into()]);
        witnesses.insert(name.into(), serde_json::to_value(&w).expect("witness serializes"));
    }

    r.note("n_sites", n_sites);
    r.note("trials", trials);
    r.note("tolerance", tol);
    r.note("max_deviation", max_dev);
    r.note("witness", Value::Object(witnesses));

    let failure = match worst {
        Some((i, dev, y)) if dev >= tol => {
            let dump = json!({
                "trial": i,
                "deviation": dev,
                "observable": serde_json::to_value(&y).expect("observable serializes"),
            });
            r.note("offending", dump.clone());
            Some(Failure {
                message: format!("trial {i}: |psi_O(Y) - omega(Y)| = {dev:e} >= {tol:e}"),
                dump,
            })
        }
        _ => None,
    };
    Ok(Outcome { report: r, failure })
}

fn check_row(r: &mut Report, name: &str, value: f64, ok: bool) {
    r.push(vec![name.into(), value.into(), if ok { "ok" } else { "fail" }.into()]);
}

pub fn validate(input: Option<String>, tol: f64) -> CliResult<Outcome> {
    let text = require_input(input, "validate")?;
    let doc: Value = parse_json(&text, "input")?;
    let keys = doc
        .as_object()
        .ok_or_else(|| CliError::Parse("top-level JSON must be an object".into()))?;
    let mut r = Report::new("validate", &["check", "value", "status"]);
    let kind = if keys.contains_key("kraus") {
        let ch = parse_channel(&text)?;
        check_row(&mut r, "unital_deviation", ch.unital_deviation(), ch.unital_deviation() < tol);
        let tp = ch.trace_preserving_deviation();
        check_row(&mut r, "trace_preserving_deviation", tp, tp < tol);
        if ch.dim_in() == ch.dim_out() {
            let choi = ch.to_superoperator()?.min_choi_eigenvalue().unwrap_or(f64::NAN);
            check_row(&mut r, "min_choi_eigenvalue", choi, choi > -tol);
        }
        "channel"
    } else if keys.contains_key("n_sites") {
        let y = parse_observable(&text)?;
        r.push(vec!["n_sites".into(), (y.n_sites() as f64).into(), "ok".into()]);
        let dev = y.to_full().hermitian_deviation();
        check_row(&mut r, "hermitian_deviation", dev, dev < tol);
        "observable"
    } else if keys.contains_key("emission") {
        let model: HqmmModel = parse_json(&text, "model")?;
        let (d_h, d_o) = model.dims()?;
        let dh = model.hidden.unital_deviation(d_h, d_h)?;
        let de = model.emission.unital_deviation(d_h, d_o)?;
        check_row(&mut r, "hidden_unital_deviation", dh, dh < STRUCTURE_TOL);
        check_row(&mut r, "emission_unital_deviation", de, de < STRUCTURE_TOL);
        model.validate()?;
        "model"
    } else {
        return Err(CliError::Parse(
            "unrecognized document: expected \"kraus\", \"n_sites\" or \"emission\"".into(),
        ));
    };
    r.note("kind", kind);
    Ok(r.into())
}

pub fn spectrum(input: Option<String>, tol: f64) -> CliResult<Outcome> {
    let ch = match input {
        Some(text) => parse_channel(&text)?,
        None => AkltTensors::new().transfer_channel(),
    };
    if ch.dim_in() != ch.dim_out() {
        return Err(CliError::Validation(format!(
            "spectrum needs a channel on one algebra, got {} -> {}",
            ch.dim_in(),
            ch.dim_out()
        )));
    }
    let eig = ch.to_superoperator()?.eigenvalues()?;
    let mut r = Report::new("spectrum", &["index", "re", "im", "modulus"]);
    for (i, z) in eig.iter().enumerate() {
        r.push(vec![i.into(), z.re.into(), z.im.into(), z.norm().into()]);
    }
    match power_limit(&ch, tol) {
        Ok(pl) => {
            r.note("rate", pl.rate);
            r.note("steps", pl.steps);
        }
        Err(e) => r.note("power_limit_error", e.to_string()),
    }
    Ok(r.into())
}

