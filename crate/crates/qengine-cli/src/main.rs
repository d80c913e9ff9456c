//! Command-line front end for the heat-engine library.
//!
//! Four subcommands:
//!
//! * `point`    — one parameter point, reported as JSON on stdout through the
//!                numeric pipeline (vectorized generator, finite-difference
//!                cumulants, Drazin-inverse bound),
//! * `sweep`    — a 1- or 2-axis parameter grid written as CSV through the
//!                closed-form pipeline,
//! * `figure`   — named dataset presets with a headline scalar on stdout,
//! * `validate` — a seeded random battery cross-checking the numeric and
//!                closed-form routes against each other.
//!
//! All float output uses C-style `%.17e` scientific notation so identical
//! invocations produce byte-identical files. Exit codes: 0 success,
//! 1 validation failure, 2 usage or parameter error, 3 not an engine
//! (hot thermal exponent at or above the cold one).

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qengine_core::bounds::{ctur, fano, qtur_bound, qtur_bound_closed, tur_report, BoundsError};
use qengine_core::engine::{
    jump_operators, occupations, rates, EngineKind, EngineParams, Rates,
};
use qengine_core::fcs::{cumulants, cumulants_closed, lambda_cumulants, CountedObservable, FcsError};
use qengine_core::sample::{rng_from_seed, sample_well_conditioned};
use qengine_core::steady::{
    critical_alpha, observables, steady_closed, steady_numeric_for, DensityMatrix,
};

// ---------------------------------------------------------------------------
// Errors and exit codes
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum CliError {
    /// Bad flags, bad config, bad grid, unwritable output: exit 2.
    Usage(String),
    /// Valid parameters that do not form an engine: exit 3.
    NotAnEngine { x_hot: f64, x_cold: f64 },
    /// The validation battery found a broken invariant: exit 1.
    Validation(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::NotAnEngine { x_hot, x_cold } => write!(
                f,
                "not an engine: beta_h * omega_h = {x_hot} must be below beta_c * omega_c = {x_cold}"
            ),
            CliError::Validation(msg) => write!(f, "{msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::NotAnEngine { .. } => 3,
            CliError::Validation(_) => 1,
        }
    }
}

// ---------------------------------------------------------------------------
// Float formatting
// ---------------------------------------------------------------------------

/// C-style `%.17e`: one digit, 17 fractional digits, two-or-more exponent
/// digits with a mandatory sign. 17 fractional digits round-trip any f64.
/// Non-finite values render as `nan`, `inf`, `-inf`.
fn fmt_e17(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".to_string() } else { "-inf".to_string() };
    }
    let raw = format!("{x:.17e}");
    let (mantissa, exponent) = raw.split_once('e').expect("exponential format");
    let exp: i32 = exponent.parse().expect("integer exponent");
    format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

/// Inclusive log-spaced grid, endpoints exact up to rounding of the powers.
fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(llo + (lhi - llo) * i as f64 / (n - 1) as f64))
        .collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

// ---------------------------------------------------------------------------
// Argument surface
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "qengine",
    version,
    about = "Steady states, counting statistics, and uncertainty bounds for driven qutrit heat engines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report one parameter point as JSON (numeric pipeline)
    Point(PointArgs),
    /// Write a parameter sweep as CSV (closed-form pipeline)
    Sweep(SweepArgs),
    /// Write a named figure dataset and print its headline scalar
    Figure(FigureArgs),
    /// Cross-check the numeric and closed-form routes on random samples
    Validate(ValidateArgs),
}

/// Physical parameter flags shared by `point` and `sweep`. Every flag is
/// optional; unset flags fall back to the config file, then to defaults
/// (coherent, gamma0 0.01, wh 10, wc 5, bh 0.01, bc 0.8, alpha 0.5).
#[derive(Args)]
struct ParamFlags {
    /// Engine kind: coherent, incoherent, or both
    #[arg(long)]
    kind: Option<String>,
    /// Bare dissipation rate gamma0 > 0
    #[arg(long)]
    gamma0: Option<f64>,
    /// Hot transition frequency omega_h
    #[arg(long)]
    wh: Option<f64>,
    /// Cold transition frequency omega_c (0 < wc < wh)
    #[arg(long)]
    wc: Option<f64>,
    /// Hot inverse temperature beta_h > 0
    #[arg(long)]
    bh: Option<f64>,
    /// Cold inverse temperature beta_c > beta_h
    #[arg(long)]
    bc: Option<f64>,
    /// Drive amplitude alpha >= 0
    #[arg(long)]
    alpha: Option<f64>,
    /// Flat `key = value` config file (same keys as the flags)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// Varying axis, `NAME=SPACING:START:STOP:COUNT` with NAME one of
    /// alpha, beta_c, beta_h and SPACING lin or log; repeat for a 2-D grid
    #[arg(long, required = true)]
    vary: Vec<String>,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FigureArgs {
    /// Preset name: Fig2a, Fig2b, Fig3a, Fig3b, Fig3c, Fig4a, Fig4b, AlphaCrit
    preset: String,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Seed for the sample battery
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of sampled parameter points (>= 1)
    #[arg(long, default_value_t = 200)]
    samples: usize,
}

// ---------------------------------------------------------------------------
// Parameter resolution: flags > config > defaults
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq)]
enum KindChoice {
    Coherent,
    Incoherent,
    Both,
}

impl KindChoice {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "coherent" => Ok(KindChoice::Coherent),
            "incoherent" => Ok(KindChoice::Incoherent),
            "both" => Ok(KindChoice::Both),
            other => Err(CliError::Usage(format!(
                "unknown kind `{other}` (expected coherent, incoherent, or both)"
            ))),
        }
    }

    fn kinds(self) -> &'static [EngineKind] {
        match self {
            KindChoice::Coherent => &[EngineKind::Coherent],
            KindChoice::Incoherent => &[EngineKind::Incoherent],
            KindChoice::Both => &[EngineKind::Coherent, EngineKind::Incoherent],
        }
    }
}

#[derive(Clone, Copy)]
struct Resolved {
    kind: KindChoice,
    gamma0: f64,
    omega_h: f64,
    omega_c: f64,
    beta_h: f64,
    beta_c: f64,
    alpha: f64,
}

impl Resolved {
    /// Engine parameters for one kind; construction errors become usage
    /// errors naming the violated invariant.
    fn engine_params(&self, kind: EngineKind) -> Result<EngineParams, CliError> {
        EngineParams::new(
            kind,
            self.gamma0,
            self.omega_h,
            self.omega_c,
            self.beta_h,
            self.beta_c,
            self.alpha,
        )
        .map_err(|e| CliError::Usage(format!("invalid parameters: {e}")))
    }
}

/// Flat `key = value` config: one assignment per line, `#` comments and
/// blank lines ignored, keys matching the long flags.
fn parse_config(path: &PathBuf) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config {} line {}: expected `key = value`, got `{line}`",
                path.display(),
                lineno + 1
            ))
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn resolve(flags: &ParamFlags) -> Result<Resolved, CliError> {
    let mut kind = None;
    let mut gamma0 = None;
    let mut omega_h = None;
    let mut omega_c = None;
    let mut beta_h = None;
    let mut beta_c = None;
    let mut alpha = None;

    if let Some(path) = &flags.config {
        for (key, value) in parse_config(path)? {
            let parse_f64 = |v: &str| -> Result<f64, CliError> {
                v.parse().map_err(|_| {
                    CliError::Usage(format!("config key `{key}`: `{v}` is not a number"))
                })
            };
            match key.as_str() {
                "kind" => kind = Some(KindChoice::parse(&value)?),
                "gamma0" => gamma0 = Some(parse_f64(&value)?),
                "wh" => omega_h = Some(parse_f64(&value)?),
                "wc" => omega_c = Some(parse_f64(&value)?),
                "bh" => beta_h = Some(parse_f64(&value)?),
                "bc" => beta_c = Some(parse_f64(&value)?),
                "alpha" => alpha = Some(parse_f64(&value)?),
                other => {
                    return Err(CliError::Usage(format!(
                        "config key `{other}` is not recognized \
                         (expected kind, gamma0, wh, wc, bh, bc, alpha)"
                    )))
                }
            }
        }
    }

    if let Some(s) = &flags.kind {
        kind = Some(KindChoice::parse(s)?);
    }
    Ok(Resolved {
        kind: kind.unwrap_or(KindChoice::Coherent),
        gamma0: flags.gamma0.or(gamma0).unwrap_or(0.01),
        omega_h: flags.wh.or(omega_h).unwrap_or(10.0),
        omega_c: flags.wc.or(omega_c).unwrap_or(5.0),
        beta_h: flags.bh.or(beta_h).unwrap_or(0.01),
        beta_c: flags.bc.or(beta_c).unwrap_or(0.8),
        alpha: flags.alpha.or(alpha).unwrap_or(0.5),
    })
}

// ---------------------------------------------------------------------------
// point: JSON report through the numeric pipeline
// ---------------------------------------------------------------------------

/// Appends `"key": value` lines with fixed indentation; keys are emitted in
/// call order, so the report layout is stable by construction.
struct JsonWriter {
    buf: String,
}

impl JsonWriter {
    fn new() -> Self {
        JsonWriter { buf: String::from("{\n") }
    }

    fn field(&mut self, indent: usize, key: &str, value: &str, last: bool) {
        let pad = "  ".repeat(indent);
        let comma = if last { "" } else { "," };
        self.buf.push_str(&format!("{pad}\"{key}\": {value}{comma}\n"));
    }

    fn open(&mut self, indent: usize, key: &str, bracket: char) {
        let pad = "  ".repeat(indent);
        self.buf.push_str(&format!("{pad}\"{key}\": {bracket}\n"));
    }

    fn close(&mut self, indent: usize, bracket: char, last: bool) {
        let pad = "  ".repeat(indent);
        let comma = if last { "" } else { "," };
        self.buf.push_str(&format!("{pad}{bracket}{comma}\n"));
    }

    fn finish(mut self) -> String {
        self.buf.push_str("}\n");
        self.buf
    }
}

/// A float field that may be unrepresentable in JSON (nan/inf): rendered as
/// `null`; a companion boolean flag in the same object says why.
fn json_num(x: f64) -> String {
    if x.is_finite() {
        fmt_e17(x)
    } else {
        "null".to_string()
    }
}

fn json_bool(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}

fn steady_state_json(w: &mut JsonWriter, rho: &DensityMatrix, last: bool) {
    let d = rho.dim();
    let pad1 = "  ".repeat(1);
    let pad2 = "  ".repeat(2);
    w.buf.push_str(&format!("{pad1}\"steady_state\": [\n"));
    for i in 0..d {
        let mut row = String::from("[");
        for j in 0..d {
            let z = rho.entry(i, j);
            row.push_str(&format!("[{}, {}]", fmt_e17(z.re), fmt_e17(z.im)));
            if j + 1 < d {
                row.push_str(", ");
            }
        }
        row.push(']');
        let comma = if i + 1 < d { "," } else { "" };
        w.buf.push_str(&format!("{pad2}{row}{comma}\n"));
    }
    let comma = if last { "" } else { "," };
    w.buf.push_str(&format!("{pad1}]{comma}\n"));
}

fn point_report(p: &EngineParams) -> Result<String, CliError> {
    if !p.engine_valid() {
        return Err(CliError::NotAnEngine { x_hot: p.x_hot(), x_cold: p.x_cold() });
    }
    let occ = occupations(p);
    let rho = steady_numeric_for(p)
        .map_err(|e| CliError::Validation(format!("steady state failed: {e}")))?;
    let obs = observables(p)
        .map_err(|e| CliError::Validation(format!("observables failed: {e}")))?;
    // Zero transport (alpha = 0): every counted mean vanishes identically,
    // so noise-to-signal ratios get null + marker instead of numbers.
    let zero_mean = obs.power == 0.0;

    let mut w = JsonWriter::new();

    w.open(1, "occupations", '{');
    w.field(2, "n_h", &fmt_e17(occ.n_h), false);
    w.field(2, "n_c", &fmt_e17(occ.n_c), false);
    w.field(2, "hot_degenerate", &json_bool(occ.hot_degenerate), false);
    w.field(2, "cold_degenerate", &json_bool(occ.cold_degenerate), true);
    w.close(1, '}', false);

    w.open(1, "rates", '{');
    match rates(p) {
        Rates::Coherent { gamma1, gamma2, .. } => {
            w.field(2, "gamma_1", &fmt_e17(gamma1), false);
            w.field(2, "gamma_2", &fmt_e17(gamma2), true);
        }
        Rates::Incoherent { g1, g2, g3, g4, .. } => {
            w.field(2, "g_1", &fmt_e17(g1), false);
            w.field(2, "g_2", &fmt_e17(g2), false);
            w.field(2, "g_3", &fmt_e17(g3), false);
            w.field(2, "g_4", &fmt_e17(g4), true);
        }
    }
    w.close(1, '}', false);

    steady_state_json(&mut w, &rho, false);

    w.open(1, "observables", '{');
    w.field(2, "power", &fmt_e17(obs.power), false);
    w.field(2, "j_hot", &fmt_e17(obs.j_hot), false);
    w.field(2, "j_cold", &fmt_e17(obs.j_cold), false);
    w.field(2, "efficiency", &fmt_e17(obs.efficiency), false);
    w.field(2, "photon_flux", &fmt_e17(obs.photon_flux), false);
    w.field(2, "entropy_rate", &json_num(obs.entropy_rate), false);
    w.field(2, "entropy_infinite", &json_bool(obs.entropy_infinite), false);
    w.field(2, "coherence", &fmt_e17(obs.coherence), true);
    w.close(1, '}', false);

    w.open(1, "cumulants", '{');
    let all = CountedObservable::ALL;
    for (idx, obs_kind) in all.iter().enumerate() {
        w.open(2, obs_kind.label(), '{');
        match cumulants(p, *obs_kind) {
            Ok(report) => {
                w.field(3, "mean", &fmt_e17(report.mean), false);
                w.field(3, "variance", &fmt_e17(report.variance), false);
                if zero_mean {
                    w.field(3, "nsr", "null", false);
                } else {
                    w.field(3, "nsr", &fmt_e17(report.nsr), false);
                }
            }
            // Zero drive: all cumulant rates vanish and the library refuses
            // to report a noise-to-signal ratio; mark instead of failing.
            Err(FcsError::ZeroMean) => {
                w.field(3, "mean", "null", false);
                w.field(3, "variance", "null", false);
                w.field(3, "nsr", "null", false);
            }
            Err(e) => {
                return Err(CliError::Validation(format!("cumulants({obs_kind}) failed: {e}")))
            }
        }
        w.field(3, "zero_mean", &json_bool(zero_mean), true);
        w.close(2, '}', idx + 1 == all.len());
    }
    w.close(1, '}', false);

    let f = fano(p).map_err(|e| CliError::Validation(format!("fano failed: {e}")))?;
    w.open(1, "fano", '{');
    w.field(2, "f_total", &fmt_e17(f.f_total), false);
    w.field(2, "f_pop", &fmt_e17(f.f_pop), false);
    w.field(2, "coherent_correction", &fmt_e17(f.coherent_correction), true);
    w.close(1, '}', false);

    w.open(1, "tur", '{');
    if zero_mean {
        // Drive-free limit: the bound and the uncertainty value survive,
        // the signal-dependent entries do not.
        let q_value = match ctur(p) {
            Ok((q, _)) => json_num(q),
            Err(BoundsError::InfiniteEntropy) => "null".to_string(),
            Err(e) => return Err(CliError::Validation(format!("ctur failed: {e}"))),
        };
        let (upsilon, psi, f_bound) = qtur_bound(p)
            .map_err(|e| CliError::Validation(format!("quantum bound failed: {e}")))?;
        w.field(2, "q_value", &q_value, false);
        w.field(2, "nsr", "null", false);
        w.field(2, "entropy_rate", &json_num(obs.entropy_rate), false);
        w.field(2, "upsilon", &fmt_e17(upsilon), false);
        w.field(2, "psi", &fmt_e17(psi), false);
        w.field(2, "f_bound", &fmt_e17(f_bound), false);
        w.field(2, "slack", "null", false);
        w.field(2, "ctur_violated", "null", false);
        w.field(2, "qtur_ok", "null", false);
        w.field(2, "infinite_entropy", &json_bool(obs.entropy_infinite), false);
        w.field(2, "zero_mean", "true", true);
    } else {
        let r = tur_report(p)
            .map_err(|e| CliError::Validation(format!("uncertainty report failed: {e}")))?;
        // Replace the closed-route bound components with the numeric ones:
        // `point` showcases the numeric pipeline end to end.
        let (upsilon, psi, f_bound) = qtur_bound(p)
            .map_err(|e| CliError::Validation(format!("quantum bound failed: {e}")))?;
        w.field(2, "q_value", &json_num(r.q_value), false);
        w.field(2, "nsr", &fmt_e17(r.nsr), false);
        w.field(2, "entropy_rate", &json_num(r.entropy_rate), false);
        w.field(2, "upsilon", &fmt_e17(upsilon), false);
        w.field(2, "psi", &fmt_e17(psi), false);
        w.field(2, "f_bound", &fmt_e17(f_bound), false);
        w.field(2, "slack", &fmt_e17(r.nsr - f_bound), false);
        w.field(2, "ctur_violated", &json_bool(r.ctur_violated), false);
        w.field(2, "qtur_ok", &json_bool(r.nsr - f_bound >= -1e-9), false);
        w.field(2, "infinite_entropy", &json_bool(r.infinite_entropy), false);
        w.field(2, "zero_mean", "false", true);
    }
    w.close(1, '}', true);

    Ok(w.finish())
}

fn cmd_point(args: &PointArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.params)?;
    if resolved.kind == KindChoice::Both {
        return Err(CliError::Usage(
            "point reports a single parameter point; --kind both is not meaningful here"
                .to_string(),
        ));
    }
    let p = resolved.engine_params(resolved.kind.kinds()[0])?;
    let report = point_report(&p)?;
    match &args.out {
        Some(path) => fs::write(path, report)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{report}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// CSV rows through the closed-form pipeline
// ---------------------------------------------------------------------------

const CSV_HEADER: &str = "kind,gamma0,omega_h,omega_c,beta_h,beta_c,alpha,n_h,n_c,valid,\
coherence,power,j_hot,j_cold,efficiency,entropy_rate,var_power,nsr,F_p,fano,q_ctur,\
upsilon,psi,f_qtur,slack";

/// Everything one CSV row carries; engine-invalid points keep their inputs
/// and occupations but hold NaN in every derived column.
struct RowValues {
    params: EngineParams,
    n_h: f64,
    n_c: f64,
    valid: bool,
    coherence: f64,
    power: f64,
    j_hot: f64,
    j_cold: f64,
    efficiency: f64,
    entropy_rate: f64,
    var_power: f64,
    nsr: f64,
    f_p: f64,
    fano: f64,
    q_ctur: f64,
    upsilon: f64,
    psi: f64,
    f_qtur: f64,
    slack: f64,
}

/// Total jump activity sum_k Tr(L_k^dag L_k rho) over the closed steady
/// state (used only on the zero-drive branch, where the full uncertainty
/// report is unavailable).
fn closed_activity(p: &EngineParams, rho: &DensityMatrix) -> f64 {
    jump_operators(p)
        .iter()
        .map(|j| j.matrix.adjoint().mul(&j.matrix).mul(rho.matrix()).trace().re)
        .sum()
}

fn row_values(p: EngineParams) -> Result<RowValues, CliError> {
    let occ = occupations(&p);
    let nan = f64::NAN;
    let mut row = RowValues {
        params: p,
        n_h: occ.n_h,
        n_c: occ.n_c,
        valid: p.engine_valid(),
        coherence: nan,
        power: nan,
        j_hot: nan,
        j_cold: nan,
        efficiency: nan,
        entropy_rate: nan,
        var_power: nan,
        nsr: nan,
        f_p: nan,
        fano: nan,
        q_ctur: nan,
        upsilon: nan,
        psi: nan,
        f_qtur: nan,
        slack: nan,
    };
    if !row.valid {
        return Ok(row);
    }

    let internal = |e: String| CliError::Validation(e);
    let obs = observables(&p).map_err(|e| internal(format!("observables failed: {e}")))?;
    row.coherence = obs.coherence;
    row.power = obs.power;
    row.j_hot = obs.j_hot;
    row.j_cold = obs.j_cold;
    row.efficiency = obs.efficiency;
    row.entropy_rate = obs.entropy_rate;

    let f = fano(&p).map_err(|e| internal(format!("fano failed: {e}")))?;
    row.f_p = f.f_pop;
    row.fano = f.f_total;

    match tur_report(&p) {
        Ok(r) => {
            row.var_power = cumulants_closed(&p, CountedObservable::Power)
                .map_err(|e| internal(format!("power cumulants failed: {e}")))?
                .variance;
            row.nsr = r.nsr;
            row.q_ctur = r.q_value;
            row.upsilon = r.upsilon;
            row.psi = r.psi;
            row.f_qtur = r.f_bound;
            row.slack = r.slack;
        }
        Err(BoundsError::ZeroMean) => {
            // alpha = 0: no transport, so variance, nsr and slack are
            // undefined; the bound itself and the uncertainty value remain.
            row.q_ctur = match ctur(&p) {
                Ok((q, _)) => q,
                Err(BoundsError::InfiniteEntropy) => f64::INFINITY,
                Err(e) => return Err(internal(format!("ctur failed: {e}"))),
            };
            let sigma =
                steady_closed(&p).map_err(|e| internal(format!("steady state failed: {e}")))?;
            row.upsilon = closed_activity(&p, &sigma);
            row.f_qtur = qtur_bound_closed(&p)
                .map_err(|e| internal(format!("closed bound failed: {e}")))?;
            row.psi = 1.0 / row.f_qtur - row.upsilon;
        }
        Err(e) => return Err(internal(format!("uncertainty report failed: {e}"))),
    }
    Ok(row)
}

fn render_row(row: &RowValues) -> String {
    let p = &row.params;
    let kind = match p.kind {
        EngineKind::Coherent => "coherent",
        EngineKind::Incoherent => "incoherent",
    };
    let mut fields = vec![kind.to_string()];
    for x in [p.gamma0, p.omega_h, p.omega_c, p.beta_h, p.beta_c, p.alpha, row.n_h, row.n_c] {
        fields.push(fmt_e17(x));
    }
    fields.push(if row.valid { "true" } else { "false" }.to_string());
    for x in [
        row.coherence,
        row.power,
        row.j_hot,
        row.j_cold,
        row.efficiency,
        row.entropy_rate,
        row.var_power,
        row.nsr,
        row.f_p,
        row.fano,
        row.q_ctur,
        row.upsilon,
        row.psi,
        row.f_qtur,
        row.slack,
    ] {
        fields.push(fmt_e17(x));
    }
    fields.join(",")
}

fn write_csv(path: &PathBuf, comments: &[String], rows: &[String]) -> Result<(), CliError> {
    let mut text = String::new();
    for c in comments {
        text.push_str(&format!("# {c}\n"));
    }
    text.push_str(CSV_HEADER);
    text.push('\n');
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    fs::write(path, text)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq)]
enum AxisName {
    Alpha,
    BetaC,
    BetaH,
}

impl AxisName {
    fn label(self) -> &'static str {
        match self {
            AxisName::Alpha => "alpha",
            AxisName::BetaC => "beta_c",
            AxisName::BetaH => "beta_h",
        }
    }
}

struct Axis {
    name: AxisName,
    log: bool,
    start: f64,
    stop: f64,
    count: usize,
}

impl Axis {
    /// Parses `NAME=SPACING:START:STOP:COUNT`.
    fn parse(spec: &str) -> Result<Axis, CliError> {
        let usage = || {
            CliError::Usage(format!(
                "bad --vary `{spec}`: expected NAME=SPACING:START:STOP:COUNT, \
                 e.g. alpha=log:1e-3:1:400"
            ))
        };
        let (name, rest) = spec.split_once('=').ok_or_else(usage)?;
        let name = match name.trim() {
            "alpha" => AxisName::Alpha,
            "beta_c" => AxisName::BetaC,
            "beta_h" => AxisName::BetaH,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown sweep axis `{other}` (expected alpha, beta_c, or beta_h)"
                )))
            }
        };
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 4 {
            return Err(usage());
        }
        let log = match parts[0] {
            "log" => true,
            "lin" => false,
            _ => return Err(usage()),
        };
        let start: f64 = parts[1].parse().map_err(|_| usage())?;
        let stop: f64 = parts[2].parse().map_err(|_| usage())?;
        let count: usize = parts[3].parse().map_err(|_| usage())?;
        if !(start > 0.0) || !(stop > 0.0) {
            return Err(CliError::Usage(format!(
                "bad --vary `{spec}`: range endpoints must be positive"
            )));
        }
        if count < 2 {
            return Err(CliError::Usage(format!(
                "bad --vary `{spec}`: need at least 2 grid points per axis"
            )));
        }
        Ok(Axis { name, log, start, stop, count })
    }

    fn values(&self) -> Vec<f64> {
        if self.log {
            logspace(self.start, self.stop, self.count)
        } else {
            linspace(self.start, self.stop, self.count)
        }
    }
}

fn apply_axis(base: &Resolved, name: AxisName, value: f64) -> Resolved {
    let mut r = *base;
    match name {
        AxisName::Alpha => r.alpha = value,
        AxisName::BetaC => r.beta_c = value,
        AxisName::BetaH => r.beta_h = value,
    }
    r
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let base = resolve(&args.params)?;
    if args.vary.len() > 2 {
        return Err(CliError::Usage(format!(
            "at most 2 --vary axes are supported, got {}",
            args.vary.len()
        )));
    }
    let axes: Vec<Axis> = args.vary.iter().map(|s| Axis::parse(s)).collect::<Result<_, _>>()?;
    if axes.len() == 2 && axes[0].name == axes[1].name {
        return Err(CliError::Usage(format!(
            "both --vary axes name `{}`; they must differ",
            axes[0].name.label()
        )));
    }

    // Row-major over (first axis, second axis), kinds innermost.
    let first = axes[0].values();
    let second: Vec<Option<f64>> = match axes.get(1) {
        Some(axis) => axis.values().into_iter().map(Some).collect(),
        None => vec![None],
    };
    let mut rows = Vec::new();
    for &a in &first {
        for &b in &second {
            let mut point = apply_axis(&base, axes[0].name, a);
            if let (Some(axis), Some(value)) = (axes.get(1), b) {
                point = apply_axis(&point, axis.name, value);
            }
            for &kind in base.kind.kinds() {
                let p = point.engine_params(kind)?;
                rows.push(render_row(&row_values(p)?));
            }
        }
    }
    write_csv(&args.out, &[], &rows)
}

// ---------------------------------------------------------------------------
// figure presets
// ---------------------------------------------------------------------------

const PRESET_GAMMA0: f64 = 0.01;
const PRESET_OMEGA_H: f64 = 10.0;
const PRESET_OMEGA_C: f64 = 5.0;
const BOTH: [EngineKind; 2] = [EngineKind::Coherent, EngineKind::Incoherent];

fn preset_params(kind: EngineKind, beta_h: f64, beta_c: f64, alpha: f64) -> EngineParams {
    EngineParams::new(kind, PRESET_GAMMA0, PRESET_OMEGA_H, PRESET_OMEGA_C, beta_h, beta_c, alpha)
        .expect("preset parameters are valid by construction")
}

/// Tracks the extremum of a per-grid-point scalar and where it occurred.
struct Extremum {
    best: f64,
    at: (f64, f64),
    maximize: bool,
}

impl Extremum {
    fn max() -> Self {
        Extremum { best: f64::NEG_INFINITY, at: (f64::NAN, f64::NAN), maximize: true }
    }

    fn min() -> Self {
        Extremum { best: f64::INFINITY, at: (f64::NAN, f64::NAN), maximize: false }
    }

    fn update(&mut self, value: f64, at: (f64, f64)) {
        let better = if self.maximize { value > self.best } else { value < self.best };
        if value.is_finite() && better {
            self.best = value;
            self.at = at;
        }
    }
}

/// 1-D presets: both kinds on the drive grid at fixed temperatures.
/// Returns the rows plus per-kind (row values) for headline extraction.
fn one_d_rows(
    beta_h: f64,
    beta_c: f64,
    rows: &mut Vec<String>,
) -> Result<Vec<(f64, RowValues, RowValues)>, CliError> {
    let mut per_point = Vec::new();
    for &alpha in &logspace(1e-3, 1.0, 400) {
        let rc = row_values(preset_params(EngineKind::Coherent, beta_h, beta_c, alpha))?;
        let ri = row_values(preset_params(EngineKind::Incoherent, beta_h, beta_c, alpha))?;
        rows.push(render_row(&rc));
        rows.push(render_row(&ri));
        per_point.push((alpha, rc, ri));
    }
    Ok(per_point)
}

fn meta_common(beta_h: f64) -> Vec<String> {
    vec![
        format!("gamma0 = {}", fmt_e17(PRESET_GAMMA0)),
        format!("omega_h = {}", fmt_e17(PRESET_OMEGA_H)),
        format!("omega_c = {}", fmt_e17(PRESET_OMEGA_C)),
        format!("beta_h = {}", fmt_e17(beta_h)),
    ]
}

fn cmd_figure(args: &FigureArgs) -> Result<(), CliError> {
    let preset = args.preset.to_ascii_lowercase();
    let mut rows = Vec::new();
    let mut comments;
    let mut headline = Vec::new();

    match preset.as_str() {
        // Power versus drive at beta_h = 0.01, beta_c = 0.8.
        "fig2a" => {
            comments = vec!["preset: Fig2a".to_string()];
            comments.extend(meta_common(0.01));
            comments.push(format!("beta_c = {}", fmt_e17(0.8)));
            comments.push("alpha: log grid [1e-3, 1] x 400".to_string());
            let mut ratio = Extremum::max();
            for (alpha, rc, ri) in one_d_rows(0.01, 0.8, &mut rows)? {
                ratio.update(rc.power.abs() / ri.power.abs(), (alpha, 0.8));
            }
            headline.push(format!(
                "max power ratio coherent/incoherent = {} at alpha = {}",
                fmt_e17(ratio.best),
                fmt_e17(ratio.at.0)
            ));
        }
        // 2-D power-ratio and noise-ratio searches at beta_h = 0.001.
        "fig2b" | "fig3a" => {
            let tag = if preset == "fig2b" { "Fig2b" } else { "Fig3a" };
            comments = vec![format!("preset: {tag}")];
            comments.extend(meta_common(0.001));
            comments.push("alpha: log grid [1e-3, 2] x 400".to_string());
            comments.push("beta_c: log grid [0.0015, 30] x 200".to_string());
            let mut power_ratio = Extremum::max();
            let mut noise_ratio = Extremum::max();
            for &alpha in &logspace(1e-3, 2.0, 400) {
                for &beta_c in &logspace(0.0015, 30.0, 200) {
                    let rc = row_values(preset_params(EngineKind::Coherent, 0.001, beta_c, alpha))?;
                    let ri =
                        row_values(preset_params(EngineKind::Incoherent, 0.001, beta_c, alpha))?;
                    rows.push(render_row(&rc));
                    rows.push(render_row(&ri));
                    if rc.valid {
                        power_ratio.update(rc.power.abs() / ri.power.abs(), (alpha, beta_c));
                        noise_ratio.update(ri.nsr / rc.nsr, (alpha, beta_c));
                    }
                }
            }
            if preset == "fig2b" {
                headline.push(format!(
                    "max power ratio coherent/incoherent = {} at alpha = {}, beta_c = {}",
                    fmt_e17(power_ratio.best),
                    fmt_e17(power_ratio.at.0),
                    fmt_e17(power_ratio.at.1)
                ));
            } else {
                headline.push(format!(
                    "max noise ratio incoherent/coherent = {} at alpha = {}, beta_c = {}",
                    fmt_e17(noise_ratio.best),
                    fmt_e17(noise_ratio.at.0),
                    fmt_e17(noise_ratio.at.1)
                ));
            }
        }
        // Quantum-bound slack versus drive.
        "fig3b" | "fig3c" => {
            let (tag, beta_c) = if preset == "fig3b" { ("Fig3b", 0.8) } else { ("Fig3c", 3.0) };
            comments = vec![format!("preset: {tag}")];
            comments.extend(meta_common(0.01));
            comments.push(format!("beta_c = {}", fmt_e17(beta_c)));
            comments.push("alpha: log grid [1e-3, 1] x 400".to_string());
            let mut slack_c = Extremum::min();
            let mut slack_i = Extremum::min();
            for (alpha, rc, ri) in one_d_rows(0.01, beta_c, &mut rows)? {
                slack_c.update(rc.slack / rc.f_qtur, (alpha, beta_c));
                slack_i.update(ri.slack / ri.f_qtur, (alpha, beta_c));
            }
            headline.push(format!(
                "min relative slack coherent = {} at alpha = {}",
                fmt_e17(slack_c.best),
                fmt_e17(slack_c.at.0)
            ));
            headline.push(format!(
                "min relative slack incoherent = {} at alpha = {}",
                fmt_e17(slack_i.best),
                fmt_e17(slack_i.at.0)
            ));
        }
        // Classical uncertainty value versus drive.
        "fig4a" | "fig4b" => {
            let (tag, beta_h, beta_c) =
                if preset == "fig4a" { ("Fig4a", 0.01, 0.1) } else { ("Fig4b", 0.003, 0.7) };
            comments = vec![format!("preset: {tag}")];
            comments.extend(meta_common(beta_h));
            comments.push(format!("beta_c = {}", fmt_e17(beta_c)));
            comments.push("alpha: log grid [1e-3, 1] x 400".to_string());
            let mut q_c = Extremum::min();
            let mut q_i = Extremum::min();
            for (alpha, rc, ri) in one_d_rows(beta_h, beta_c, &mut rows)? {
                q_c.update(rc.q_ctur, (alpha, beta_c));
                q_i.update(ri.q_ctur, (alpha, beta_c));
            }
            headline.push(format!(
                "min q coherent = {} at alpha = {}",
                fmt_e17(q_c.best),
                fmt_e17(q_c.at.0)
            ));
            headline.push(format!(
                "min q incoherent = {} at alpha = {}",
                fmt_e17(q_i.best),
                fmt_e17(q_i.at.0)
            ));
        }
        // Both kinds evaluated at the kind-crossing drive for each beta_c.
        "alphacrit" => {
            comments = vec!["preset: AlphaCrit".to_string()];
            comments.extend(meta_common(0.001));
            comments.push("beta_c: log grid [0.003, 10] x 200".to_string());
            comments.push("alpha = critical drive alpha_cr(beta_c)".to_string());
            let mut mismatch = Extremum::max();
            let mut alpha_lo = f64::INFINITY;
            let mut alpha_hi = f64::NEG_INFINITY;
            for &beta_c in &logspace(0.003, 10.0, 200) {
                let probe = preset_params(EngineKind::Coherent, 0.001, beta_c, 1.0);
                let alpha = critical_alpha(&probe)
                    .map_err(|e| CliError::Validation(format!("critical drive failed: {e}")))?;
                alpha_lo = alpha_lo.min(alpha);
                alpha_hi = alpha_hi.max(alpha);
                let rc = row_values(preset_params(EngineKind::Coherent, 0.001, beta_c, alpha))?;
                let ri = row_values(preset_params(EngineKind::Incoherent, 0.001, beta_c, alpha))?;
                mismatch.update((rc.coherence - ri.coherence).abs(), (alpha, beta_c));
                rows.push(render_row(&rc));
                rows.push(render_row(&ri));
            }
            headline.push(format!(
                "max coherence mismatch at critical drive = {}",
                fmt_e17(mismatch.best)
            ));
            headline
                .push(format!("critical drive range = [{}, {}]", fmt_e17(alpha_lo), fmt_e17(alpha_hi)));
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown preset `{other}` (expected Fig2a, Fig2b, Fig3a, Fig3b, Fig3c, \
                 Fig4a, Fig4b, or AlphaCrit)"
            )))
        }
    }

    write_csv(&args.out, &comments, &rows)?;
    for line in headline {
        println!("{line}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct ValidationLog {
    failures: usize,
}

impl ValidationLog {
    fn check(&mut self, ok: bool, p: &EngineParams, what: &str, detail: String) {
        if !ok {
            self.failures += 1;
            eprintln!("FAIL {what}: {detail} at {p:?}");
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn validate_point(p: &EngineParams, log: &mut ValidationLog) -> Result<(), CliError> {
    let internal = |e: String| CliError::Validation(e);

    // Steady state: numeric solve against the closed form.
    let numeric = steady_numeric_for(p).map_err(|e| internal(format!("steady failed: {e}")))?;
    let closed = steady_closed(p).map_err(|e| internal(format!("steady failed: {e}")))?;
    let d = numeric.dim();
    let mut dev = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            dev = dev.max((numeric.entry(i, j) - closed.entry(i, j)).norm());
        }
    }
    log.check(dev <= 1e-10, p, "steady-state route agreement", format!("deviation {dev:.3e} > 1e-10"));

    // Cumulants: finite-difference and eigenvalue-branch routes against the
    // closed forms, for every counted observable.
    for obs in CountedObservable::ALL {
        let fd = cumulants(p, obs).map_err(|e| internal(format!("cumulants failed: {e}")))?;
        let cl =
            cumulants_closed(p, obs).map_err(|e| internal(format!("cumulants failed: {e}")))?;
        let worst = rel(fd.mean, cl.mean).max(rel(fd.variance, cl.variance));
        log.check(
            worst <= 1e-6,
            p,
            "finite-difference cumulants",
            format!("{obs} deviation {worst:.3e} > 1e-6"),
        );
        let (mean, var) =
            lambda_cumulants(p, obs).map_err(|e| internal(format!("branch failed: {e}")))?;
        let worst = rel(mean, cl.mean).max(rel(var, cl.variance));
        log.check(
            worst <= 1e-5,
            p,
            "eigenvalue-branch cumulants",
            format!("{obs} deviation {worst:.3e} > 1e-5"),
        );
    }

    // Quantum bound: numeric Drazin-inverse route against the closed form.
    let (upsilon, psi, _f) =
        qtur_bound(p).map_err(|e| internal(format!("quantum bound failed: {e}")))?;
    let f_closed =
        qtur_bound_closed(p).map_err(|e| internal(format!("closed bound failed: {e}")))?;
    let dev = rel(upsilon + psi, 1.0 / f_closed);
    log.check(dev <= 1e-8, p, "quantum bound routes", format!("deviation {dev:.3e} > 1e-8"));

    // Physics invariants: first law, second law, and both uncertainty bounds.
    let obs = observables(p).map_err(|e| internal(format!("observables failed: {e}")))?;
    log.check(
        (obs.j_hot + obs.j_cold + obs.power).abs() <= 1e-10 * obs.power.abs(),
        p,
        "energy balance",
        format!("residual {:.3e}", (obs.j_hot + obs.j_cold + obs.power).abs()),
    );
    log.check(
        obs.entropy_rate >= 0.0,
        p,
        "entropy production",
        format!("rate {:.3e} < 0", obs.entropy_rate),
    );
    let r = tur_report(p).map_err(|e| internal(format!("uncertainty report failed: {e}")))?;
    log.check(
        r.slack >= -1e-9,
        p,
        "quantum bound",
        format!("slack {:.3e} < -1e-9", r.slack),
    );
    // Population statistics alone always satisfy the classical bound; only
    // the coherent correction can push the full q below 2.
    let occ = occupations(p);
    let per_photon = (occ.n_h * (occ.n_c + 1.0) / (occ.n_c * (occ.n_h + 1.0))).ln();
    let baseline = per_photon * fano(p).map_err(|e| internal(format!("fano failed: {e}")))?.f_pop;
    log.check(
        baseline >= 2.0 - 1e-9,
        p,
        "classical population baseline",
        format!("ln(..) * F_p = {baseline:.17e} < 2"),
    );
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), CliError> {
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".to_string()));
    }
    let mut rng = rng_from_seed(args.seed);
    let mut log = ValidationLog { failures: 0 };
    let mut skipped = 0usize;
    for _ in 0..args.samples {
        let draw = sample_well_conditioned(&mut rng);
        if !draw.engine_valid() {
            skipped += 1;
            continue;
        }
        for kind in BOTH {
            let p = EngineParams { kind, ..draw };
            validate_point(&p, &mut log)?;
        }
    }
    println!(
        "validated {} samples across both kinds ({} not-an-engine skipped): {}",
        args.samples - skipped,
        skipped,
        if log.failures == 0 { "all checks passed".to_string() } else { format!("{} failures", log.failures) }
    );
    if log.failures > 0 {
        Err(CliError::Validation(format!("{} validation failures", log.failures)))
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Point(args) => cmd_point(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Figure(args) => cmd_figure(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
