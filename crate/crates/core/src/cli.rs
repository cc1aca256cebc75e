//! Command-line surface: parameter sweeps, `phi` reports, limit constants and oracle suites.
//!
//! Exit codes: `0` success, `1` I/O failure, `2` usage error, `3` numeric-regime refusal
//! (including `q = q_c`), `4` oracle failure.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::Pow;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::netgraph::{self, NetworkParams, VertexId};
use crate::{asymptotics, genfun, limits, moments, simulate};

/// Environment variable overriding the default cap on brute-force enumeration sizes.
pub const ENUM_CAP_ENV: &str = "SPIDERWEB_ENUM_CAP";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_REGIME: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

/// Column order of sweep CSV output.
pub const SWEEP_COLUMNS: [&str; 16] = [
    "b",
    "k",
    "l",
    "q",
    "samples",
    "seed",
    "q_hat",
    "ci_low",
    "ci_high",
    "q_limit",
    "ex_x",
    "ex_x2_exact",
    "ex_x2_asym",
    "markov_upper",
    "chebyshev_lower",
    "q_c",
];

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(io::Error),
    Model(Error),
    OracleFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::OracleFailed(_) => EXIT_ORACLE,
            CliError::Model(e) => match e {
                Error::Threshold { .. }
                | Error::Regime(_)
                | Error::NoConvergence(_)
                | Error::RootOrdering(_) => EXIT_REGIME,
                _ => EXIT_USAGE,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::OracleFailed(n) => write!(f, "{n} oracle case(s) failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Inclusive arithmetic grid `start, start + step, ..., <= stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl QGrid {
    pub fn validate(&self) -> CliResult<()> {
        let in_open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !(in_open_unit(self.start) && in_open_unit(self.stop)) {
            return Err(CliError::Usage(format!("q grid {self} must lie in (0, 1)")));
        }
        if !(self.step > 0.0) || self.stop < self.start {
            return Err(CliError::Usage(format!(
                "q grid {self} needs start <= stop and step > 0"
            )));
        }
        Ok(())
    }

    /// Grid points, rounded to 12 decimals so that e.g. `0.1 + 2 * 0.1` prints as `0.3`.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| ((self.start + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

impl fmt::Display for QGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

impl FromStr for QGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number {t:?}: {e}"))
        };
        match parts.as_slice() {
            [x] => {
                let x = num(x)?;
                Ok(QGrid {
                    start: x,
                    stop: x,
                    step: 1.0,
                })
            }
            [a, b, c] => Ok(QGrid {
                start: num(a)?,
                stop: num(b)?,
                step: num(c)?,
            }),
            _ => Err(format!(
                "expected start:stop:step or a single value, got {s:?}"
            )),
        }
    }
}

fn parse_k_list(s: &str) -> Result<Vec<u32>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|e| format!("bad k {t:?}: {e}"))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub b: u32,
    pub c: f64,
    pub k_list: Vec<u32>,
    pub q_grid: QGrid,
    pub samples: u64,
    pub seed: u64,
    /// Output file; standard output when absent.
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// Partial config read from a JSON file; present keys override command-line flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepOverrides {
    b: Option<u32>,
    c: Option<f64>,
    k_list: Option<Vec<u32>>,
    q_grid: Option<QGrid>,
    samples: Option<u64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

impl SweepConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.b < 2 {
            return Err(CliError::Usage(format!("b must be >= 2, got {}", self.b)));
        }
        if !(self.c > 1.0) {
            return Err(CliError::Usage(format!("c must exceed 1, got {}", self.c)));
        }
        if self.k_list.is_empty() {
            return Err(CliError::Usage("k list is empty".into()));
        }
        if self.samples == 0 {
            return Err(CliError::Usage("samples must be >= 1".into()));
        }
        self.q_grid.validate()
    }

    /// Depth `l = round(c k)`.
    pub fn depth(&self, k: u32) -> u32 {
        (self.c * k as f64).round() as u32
    }

    fn apply(&mut self, o: SweepOverrides) {
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = o.$f { self.$f = v; })* };
        }
        take!(b, c, k_list, q_grid, samples, seed, format);
        if o.out.is_some() {
            self.out = o.out;
        }
    }
}

/// One sweep row; `None` fields are written as empty CSV cells or JSON `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub b: u32,
    pub k: u32,
    pub l: u32,
    pub q: f64,
    pub samples: u64,
    pub seed: u64,
    pub q_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub q_limit: Option<f64>,
    pub ex_x: f64,
    pub ex_x2_exact: f64,
    pub ex_x2_asym: Option<f64>,
    pub markov_upper: f64,
    pub chebyshev_lower: f64,
    pub q_c: f64,
}

/// Round-trip exact float text (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `x` rounded to 15 significant digits, printed in shortest form.
pub fn fmt_sig15(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

impl SweepRow {
    pub fn csv_record(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        vec![
            self.b.to_string(),
            self.k.to_string(),
            self.l.to_string(),
            fmt_f64(self.q),
            self.samples.to_string(),
            self.seed.to_string(),
            fmt_f64(self.q_hat),
            fmt_f64(self.ci_low),
            fmt_f64(self.ci_high),
            opt(self.q_limit),
            fmt_f64(self.ex_x),
            fmt_f64(self.ex_x2_exact),
            opt(self.ex_x2_asym),
            fmt_f64(self.markov_upper),
            fmt_f64(self.chebyshev_lower),
            fmt_f64(self.q_c),
        ]
    }
}

/// Computes one row per `(k, q)`; every row uses the configured seed.
pub fn sweep_rows(config: &SweepConfig) -> CliResult<Vec<SweepRow>> {
    config.validate()?;
    let b = config.b;
    let q_c = limits::critical_vacancy(b, config.c)?;
    let mut rows = Vec::new();
    for &k in &config.k_list {
        let l = config.depth(k);
        let ck = config.c * k as f64;
        if (ck - ck.round()).abs() > 1e-9 {
            eprintln!("warning: c*k = {ck} is not an integer; using l = {l}");
        }
        let params = NetworkParams::new(b, k, l)?;
        for q in config.q_grid.points() {
            let est = simulate::estimate_q(&params, q, config.samples, config.seed)?;
            let report = moments::moment_report(b, k, l, q)?;
            let q_limit = match limits::limiting_q(b, q, config.c) {
                Ok(v) => Some(v),
                Err(Error::Threshold { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            rows.push(SweepRow {
                b,
                k,
                l,
                q,
                samples: config.samples,
                seed: config.seed,
                q_hat: est.p_hat,
                ci_low: est.ci_low,
                ci_high: est.ci_high,
                q_limit,
                ex_x: report.ex_x,
                ex_x2_exact: report.ex_x2_exact,
                ex_x2_asym: report.ex_x2_asymptotic,
                markov_upper: report.markov_upper,
                chebyshev_lower: report.chebyshev_lower,
                q_c,
            });
        }
    }
    Ok(rows)
}

pub fn write_rows<W: Write>(rows: &[SweepRow], format: Format, out: W) -> CliResult<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(SWEEP_COLUMNS)?;
            for row in rows {
                w.write_record(row.csv_record())?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Runs the sweep and writes it to `config.out` (or standard output).
pub fn cmd_sweep(config: &SweepConfig) -> CliResult<()> {
    let rows = sweep_rows(config)?;
    match &config.out {
        Some(path) => {
            let file = io::BufWriter::new(fs::File::create(path)?);
            write_rows(&rows, config.format, file)
        }
        None => write_rows(&rows, config.format, io::stdout().lock()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhiMode {
    Poly,
    Eval,
    Residue,
    Asym,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiOutput {
    pub b: u32,
    pub k: u32,
    pub l: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_eval: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asymptotic: Option<f64>,
    /// `|approx - phi_eval| / phi_eval` for the residue or asymptotic mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_deviation: Option<f64>,
}

pub fn phi_output(b: u32, k: u32, l: u32, mode: PhiMode, q: Option<f64>) -> CliResult<PhiOutput> {
    let mut out = PhiOutput {
        b,
        k,
        l,
        q,
        coefficients: None,
        polynomial: None,
        phi_eval: None,
        residue: None,
        asymptotic: None,
        rel_deviation: None,
    };
    if mode == PhiMode::Poly {
        let poly = genfun::phi_poly(b, k, l)?;
        out.coefficients = Some(poly.to_decimal_strings());
        out.polynomial = Some(poly.to_string());
        return Ok(out);
    }
    let q = q.ok_or_else(|| CliError::Usage(format!("mode {mode:?} needs --q")))?;
    let exact = genfun::phi_eval(b, k, l, q)?;
    out.phi_eval = Some(exact);
    let dev = |approx: f64| ((approx - exact) / exact).abs();
    match mode {
        PhiMode::Residue => {
            let r = asymptotics::residue_phi(b, k, l, q)?;
            out.residue = Some(r);
            out.rel_deviation = Some(dev(r));
        }
        PhiMode::Asym => {
            let a = asymptotics::phi_asymptotic(b, k, l, q)?;
            out.asymptotic = Some(a);
            out.rel_deviation = Some(dev(a));
        }
        _ => {}
    }
    Ok(out)
}

pub fn cmd_phi<W: Write>(
    b: u32,
    k: u32,
    l: u32,
    mode: PhiMode,
    q: Option<f64>,
    format: Format,
    mut w: W,
) -> CliResult<()> {
    let out = phi_output(b, k, l, mode, q)?;
    if format == Format::Json {
        serde_json::to_writer_pretty(&mut w, &out)?;
        writeln!(w)?;
        return Ok(());
    }
    if let Some(p) = &out.polynomial {
        writeln!(w, "{p}")?;
        return Ok(());
    }
    let fields = [
        ("phi_eval", out.phi_eval),
        ("residue", out.residue),
        ("asymptotic", out.asymptotic),
        ("rel_deviation", out.rel_deviation),
    ];
    for (name, value) in fields {
        if let Some(v) = value {
            writeln!(w, "{name}: {}", fmt_sig15(v))?;
        }
    }
    Ok(())
}

/// Prints the limit constants; at `q = q_c` prints them and then returns the threshold refusal.
pub fn cmd_limits<W: Write>(b: u32, q: f64, c: f64, format: Format, mut w: W) -> CliResult<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(CliError::Usage(format!("q must lie in (0, 1), got {q}")));
    }
    let report = limits::threshold_report(b, q, c)?;
    let one_minus_xi_sq = report.xi.map(|x| (1.0 - x) * (1.0 - x));
    if format == Format::Json {
        #[derive(Serialize)]
        struct Out {
            #[serde(flatten)]
            report: limits::ThresholdReport,
            one_minus_xi_sq: Option<f64>,
        }
        serde_json::to_writer_pretty(
            &mut w,
            &Out {
                report,
                one_minus_xi_sq,
            },
        )?;
        writeln!(w)?;
    } else {
        let show = |x: Option<f64>| x.map(fmt_sig15).unwrap_or_else(|| "unavailable".into());
        writeln!(w, "q_c: {}", fmt_sig15(report.q_c))?;
        writeln!(w, "xi: {}", show(report.xi))?;
        writeln!(w, "one_minus_xi_sq: {}", show(one_minus_xi_sq))?;
        writeln!(w, "q_limit: {}", show(report.q_limit))?;
        writeln!(w, "eta: {}", show(report.eta))?;
        writeln!(w, "alpha: {}", show(report.alpha))?;
        if c > 2.0 {
            writeln!(w, "q_star: {}", show(report.q_star))?;
        }
    }
    match report.q_limit {
        Some(_) => Ok(()),
        None => Err(Error::Threshold { q_c: report.q_c }.into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Paths,
    Phi,
    Moments,
    #[value(name = "exactQ", alias = "exactq")]
    ExactQ,
    All,
}

/// Outcome of one oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCase {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn case(name: String, passed: bool, detail: String) -> OracleCase {
    OracleCase {
        name,
        passed,
        detail,
    }
}

/// Enumeration cap from [`ENUM_CAP_ENV`], defaulting to [`netgraph::DEFAULT_PATH_CAP`].
pub fn enum_cap() -> CliResult<u128> {
    match std::env::var(ENUM_CAP_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|e| CliError::Usage(format!("{ENUM_CAP_ENV}={s:?}: {e}"))),
        Err(_) => Ok(netgraph::DEFAULT_PATH_CAP),
    }
}

fn small_grid() -> impl Iterator<Item = (u32, u32, u32)> {
    [2u32, 3].into_iter().flat_map(|b| {
        [1u32, 2]
            .into_iter()
            .flat_map(move |k| (k..=k + 4).map(move |l| (b, k, l)))
    })
}

fn paths_suite(cap: u128) -> CliResult<Vec<OracleCase>> {
    small_grid()
        .map(|(b, k, l)| {
            let params = NetworkParams::new(b, k, l)?;
            let n = netgraph::enumerate_paths_capped(
                &params,
                &VertexId::zero(0, k),
                &VertexId::zero(l, k),
                cap,
            )?
            .len() as u64;
            let want = (b as u64).pow(l - k);
            Ok(case(
                format!("paths b={b} k={k} l={l}"),
                n == want,
                format!("{n} vs {want}"),
            ))
        })
        .collect()
}

fn phi_suite(cap: u128) -> CliResult<Vec<OracleCase>> {
    small_grid()
        .map(|(b, k, l)| {
            let fast = genfun::phi_poly(b, k, l)?;
            let brute = genfun::brute_phi_capped(b, k, l, cap)?;
            let total = BigInt::from(b).pow(l - k);
            let ok = fast == brute
                && fast.coefficient_sum() == total
                && fast.coeff(0) == BigInt::from(1)
                && (l > k || fast == genfun::IntPoly::one());
            Ok(case(
                format!("phi b={b} k={k} l={l}"),
                ok,
                format!("{fast} vs {brute}"),
            ))
        })
        .collect()
}

fn moments_suite() -> CliResult<Vec<OracleCase>> {
    let mut cases = Vec::new();
    for (b, k, l) in small_grid() {
        for q in [0.3, 0.5, 0.8] {
            let brute = moments::brute_second_moment(b, k, l, q)?;
            let fast = moments::expected_paths(b, k, l, q)? * genfun::phi_eval(b, k, l, q)?;
            let rel = ((fast - brute) / brute).abs();
            cases.push(case(
                format!("moments b={b} k={k} l={l} q={q}"),
                rel <= 1e-12,
                format!("relative deviation {rel:.3e}"),
            ));
        }
    }
    Ok(cases)
}

fn exact_q_suite(seed: u64) -> CliResult<Vec<OracleCase>> {
    let mut cases = Vec::new();
    let base = simulate::exact_q(&NetworkParams::new(2, 1, 2)?, 0.5)?;
    cases.push(case(
        "exactQ b=2 k=1 l=2 q=0.5".into(),
        base == 0.75,
        format!("{base}"),
    ));
    for (b, k, l) in [(2, 1, 2), (2, 1, 3), (2, 2, 4)] {
        let params = NetworkParams::new(b, k, l)?;
        for q in [0.3, 0.5, 0.8] {
            let exact = simulate::exact_q(&params, q)?;
            let est = simulate::estimate_q(&params, q, 200_000, seed)?;
            cases.push(case(
                format!("estimateQ b={b} k={k} l={l} q={q}"),
                est.within_sigmas(exact, 3.0),
                format!(
                    "p_hat {} vs exact {}",
                    fmt_sig15(est.p_hat),
                    fmt_sig15(exact)
                ),
            ));
        }
    }
    Ok(cases)
}

pub fn run_suite(suite: Suite, seed: u64) -> CliResult<Vec<OracleCase>> {
    let cap = enum_cap()?;
    Ok(match suite {
        Suite::Paths => paths_suite(cap)?,
        Suite::Phi => phi_suite(cap)?,
        Suite::Moments => moments_suite()?,
        Suite::ExactQ => exact_q_suite(seed)?,
        Suite::All => {
            let mut all = paths_suite(cap)?;
            all.extend(phi_suite(cap)?);
            all.extend(moments_suite()?);
            all.extend(exact_q_suite(seed)?);
            all
        }
    })
}

pub fn cmd_oracle<W: Write>(suite: Suite, seed: u64, mut w: W) -> CliResult<()> {
    let cases = run_suite(suite, seed)?;
    for c in &cases {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        writeln!(w, "{tag} {} ({})", c.name, c.detail)?;
    }
    let failed = cases.iter().filter(|c| !c.passed).count();
    writeln!(w, "{} passed, {failed} failed", cases.len() - failed)?;
    if failed > 0 {
        Err(CliError::OracleFailed(failed))
    } else {
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "spiderweb",
    version,
    about = "Linking probabilities of spider-web networks"
)]
pub struct Cli {
    /// Seed for every Monte-Carlo estimate.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulated and predicted linking probabilities over a (k, q) grid with l = round(c k).
    Sweep(SweepArgs),
    /// The polynomial phi_l(y), its value, or its residue / asymptotic approximation.
    Phi(PhiArgs),
    /// Critical vacancy probability and limit constants.
    Limits(LimitsArgs),
    /// Brute-force cross-check suites.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    pub b: u32,
    #[arg(long, default_value_t = 2.0)]
    pub c: f64,
    /// Comma-separated scales.
    #[arg(long, default_value = "2,4,6")]
    pub k: String,
    /// start:stop:step (inclusive) or a single value.
    #[arg(long, default_value = "0.55:0.95:0.1")]
    pub q: QGrid,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file whose keys override the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PhiArgs {
    #[arg(long)]
    pub b: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub l: u32,
    #[arg(long, value_enum, default_value_t = PhiMode::Poly)]
    pub mode: PhiMode,
    #[arg(long)]
    pub q: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LimitsArgs {
    #[arg(long, default_value_t = 2)]
    pub b: u32,
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 2.0)]
    pub c: f64,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
}

/// Builds the sweep config from flags, then applies the optional JSON file.
pub fn sweep_config(args: &SweepArgs, seed: u64, format: Format) -> CliResult<SweepConfig> {
    let mut config = SweepConfig {
        b: args.b,
        c: args.c,
        k_list: parse_k_list(&args.k).map_err(CliError::Usage)?,
        q_grid: args.q,
        samples: args.samples,
        seed,
        out: args.out.clone(),
        format,
    };
    if let Some(path) = &args.config {
        config.apply(read_overrides(path)?);
    }
    config.validate()?;
    Ok(config)
}

fn read_overrides(path: &Path) -> CliResult<SweepOverrides> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn execute(cli: Cli) -> CliResult<()> {
    let stdout = io::stdout();
    match cli.command {
        Command::Sweep(args) => cmd_sweep(&sweep_config(&args, cli.seed, cli.format)?),
        Command::Phi(a) => cmd_phi(a.b, a.k, a.l, a.mode, a.q, cli.format, stdout.lock()),
        Command::Limits(a) => cmd_limits(a.b, a.q, a.c, cli.format, stdout.lock()),
        Command::Oracle(a) => cmd_oracle(a.suite, cli.seed, stdout.lock()),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
