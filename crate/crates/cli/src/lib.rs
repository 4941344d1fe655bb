//! Command-line front end for `entropy-bounds`.
//!
//! [`main_with_args`] parses arguments and dispatches to [`run`], which
//! writes the requested artifact and returns the process exit code:
//! 0 on success, 1 on validation or domain errors, 2 when a verification
//! suite records violations.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use entropy_bounds::bounds::{Bound, BoundResult};
use entropy_bounds::extremal::{expected_f, extremal_pair, shannon_entropy, tv_distance};
use entropy_bounds::gibbs::max_entropy_state;
use entropy_bounds::verify::{
    delta_oracle, sample_verify_classical, sample_verify_fano, sample_verify_quantum,
    VerificationReport,
};
use entropy_bounds::{LogBase, Spectrum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATIONS: i32 = 2;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "ENTROPY_BOUNDS_THREADS";

/// Exact column set of `bound` and `sweep` CSV output.
pub const SWEEP_HEADER: &str = "E,epsilon,kappa,branch,a,F,F_plus_arg,log_base";

/// Distances checked against the oracle by `verify` when `--eps` is absent.
const DEFAULT_ORACLE_EPS: [f64; 6] = [0.2, 0.3, 0.45, 0.6, 0.75, 0.9];
const ORACLE_TOL: f64 = 1e-4;
const IDENTITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Evaluate the bound at one (E, eps)
    Bound,
    /// Evaluate the bound over an (E, eps) grid
    Sweep,
    /// Solve for the Gibbs state at mean energy E
    Gibbs,
    /// Export the extremal distributions
    Witness,
    /// Run the sampling, oracle and identity suites
    Verify,
    /// Brute-force maximal entropy at one (E, eps)
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "entropy-bounds",
    version,
    about = "Energy-constrained entropy continuity bounds",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Spectrum file (JSON: levels, optional generator, optional name)
    #[arg(long)]
    pub spectrum: PathBuf,
    /// Energy budget: a value, `start:stop:count` or `log:start:stop:count`
    #[arg(long = "E", value_name = "E")]
    pub energy: Option<String>,
    /// Distance: a value, a grid, or a comma-separated list
    #[arg(long)]
    pub eps: Option<String>,
    /// Report entropies in bits instead of nats
    #[arg(long)]
    pub bits: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Write to this file instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Defaults to json for witness and verify, csv otherwise
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Trials per sampling suite
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Truncation dimension for quantum sampling
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    /// Number of levels kept by the oracle
    #[arg(long, default_value_t = 200)]
    pub cutoff: usize,
}

/// Validated run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub spectrum_path: PathBuf,
    pub energies: Vec<f64>,
    pub eps: Vec<f64>,
    pub log_base: LogBase,
    pub tol: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub trials: usize,
    pub dim: usize,
    pub cutoff: usize,
}

/// Parses `v`, `a,b,c`, `start:stop:count` or `log:start:stop:count`.
/// The result is finite and strictly increasing.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| -> Result<f64, String> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{s}` is not a number"))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [single] if single.contains(',') => {
            single.split(',').map(num).collect::<Result<Vec<_>, _>>()?
        }
        [single] => vec![num(single)?],
        [start, stop, count] | [_, start, stop, count] => {
            let log = parts.len() == 4;
            if log && parts[0] != "log" {
                return Err(format!("unknown grid kind `{}`", parts[0]));
            }
            let (a, b) = (num(start)?, num(stop)?);
            let n: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("`{count}` is not a count"))?;
            if n == 0 {
                return Err("grid count must be positive".into());
            }
            if log && !(a > 0.0 && b > 0.0) {
                return Err("log grids need positive endpoints".into());
            }
            if n == 1 {
                if a != b {
                    return Err("a one-point grid needs start = stop".into());
                }
                vec![a]
            } else {
                let (la, lb) = if log { (a.ln(), b.ln()) } else { (a, b) };
                let mut g: Vec<f64> = (0..n)
                    .map(|i| {
                        let x = la + (lb - la) * i as f64 / (n - 1) as f64;
                        if log {
                            x.exp()
                        } else {
                            x
                        }
                    })
                    .collect();
                g[0] = a;
                g[n - 1] = b;
                g
            }
        }
        _ => return Err(format!("cannot parse grid `{spec}`")),
    };
    if values.iter().any(|x| !x.is_finite()) {
        return Err(format!("grid `{spec}` has non-finite values"));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("grid `{spec}` is not strictly increasing"));
    }
    Ok(values)
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, String> {
        let energies = match &cli.energy {
            Some(spec) => parse_grid(spec)?,
            None => return Err("--E is required".into()),
        };
        if energies.iter().any(|&e| e <= 0.0) {
            return Err("energies must be positive".into());
        }
        let eps = match (&cli.eps, cli.command) {
            (Some(spec), _) => parse_grid(spec)?,
            (None, Command::Verify) => DEFAULT_ORACLE_EPS.to_vec(),
            (None, Command::Gibbs) => Vec::new(),
            (None, _) => return Err("--eps is required".into()),
        };
        if eps.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err("distances must lie in [0, 1]".into());
        }
        let single = matches!(
            cli.command,
            Command::Bound | Command::Witness | Command::Oracle
        );
        if single && (energies.len() != 1 || eps.len() != 1) {
            return Err(format!(
                "{:?} takes a single E and eps; use sweep for grids",
                cli.command
            )
            .to_lowercase());
        }
        if cli.command == Command::Verify && energies.len() != 1 {
            return Err("verify takes a single E".into());
        }
        if !(cli.tol > 0.0 && cli.tol.is_finite()) {
            return Err("--tol must be positive".into());
        }
        let format = cli.format.unwrap_or(match cli.command {
            Command::Witness | Command::Verify => Format::Json,
            _ => Format::Csv,
        });
        Ok(RunConfig {
            command: cli.command,
            spectrum_path: cli.spectrum,
            energies,
            eps,
            log_base: if cli.bits {
                LogBase::Bits
            } else {
                LogBase::Nats
            },
            tol: cli.tol,
            seed: cli.seed,
            output: cli.output,
            format,
            trials: cli.trials,
            dim: cli.dim,
            cutoff: cli.cutoff,
        })
    }
}

/// Parses arguments and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let first = e.to_string();
                    let line = first.lines().next().unwrap_or("invalid arguments");
                    let _ = writeln!(err, "{line}");
                    EXIT_ERROR
                }
            };
        }
    };
    match RunConfig::from_cli(cli) {
        Ok(config) => run(&config, out, err),
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

/// Executes a validated configuration.
pub fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = with_thread_cap(|| execute(config));
    match result {
        Ok((artifact, code)) => {
            let written = match &config.output {
                Some(path) => std::fs::write(path, artifact.as_bytes()).map_err(|e| e.to_string()),
                None => out
                    .write_all(artifact.as_bytes())
                    .map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => code,
                Err(e) => {
                    let _ = writeln!(err, "error: cannot write output: {e}");
                    EXIT_ERROR
                }
            }
        }
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    match cap.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

type Outcome = Result<(String, i32), String>;

fn load_spectrum(path: &PathBuf) -> Result<Spectrum, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    Spectrum::from_json_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn execute(config: &RunConfig) -> Outcome {
    let s = load_spectrum(&config.spectrum_path)?;
    match config.command {
        Command::Bound | Command::Sweep => sweep(config, &s),
        Command::Gibbs => gibbs(config, &s),
        Command::Witness => witness(config, &s),
        Command::Verify => verify(config, &s),
        Command::Oracle => oracle(config, &s),
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    text.push('\n');
    Ok(text)
}

/// Shortest round-trip form, scientific for very small or large magnitudes.
fn num(x: f64) -> String {
    let m = x.abs();
    if m != 0.0 && m.is_finite() && !(1e-4..1e16).contains(&m) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Serialize)]
struct SweepRow {
    #[serde(rename = "E")]
    energy: f64,
    epsilon: f64,
    kappa: f64,
    branch: &'static str,
    a: f64,
    #[serde(rename = "F")]
    f: f64,
    #[serde(rename = "F_plus_arg")]
    f_plus_arg: Option<f64>,
    log_base: LogBase,
}

impl SweepRow {
    fn new(r: &BoundResult, base: LogBase) -> Self {
        SweepRow {
            energy: r.energy,
            epsilon: r.epsilon,
            kappa: base.from_nats(r.value),
            branch: r.branch.as_str(),
            a: r.threshold_a,
            f: base.from_nats(r.capacity),
            f_plus_arg: r.f_plus_argument,
            log_base: base,
        }
    }
}

fn sweep(config: &RunConfig, s: &Spectrum) -> Outcome {
    let rows: Vec<Result<Vec<SweepRow>, String>> = config
        .energies
        .par_iter()
        .map(|&e| {
            let bound = Bound::new(s, e, config.tol).map_err(|err| format!("E = {e}: {err}"))?;
            config
                .eps
                .iter()
                .map(|&eps| {
                    let r = bound
                        .kappa(eps)
                        .map_err(|err| format!("E = {e}, eps = {eps}: {err}"))?;
                    Ok(SweepRow::new(&r, config.log_base))
                })
                .collect()
        })
        .collect();
    let rows: Vec<SweepRow> = rows
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    let text = match config.format {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let mut t = format!("{SWEEP_HEADER}\n");
            for r in &rows {
                let _ = writeln!(
                    t,
                    "{},{},{},{},{},{},{},{}",
                    num(r.energy),
                    num(r.epsilon),
                    num(r.kappa),
                    r.branch,
                    num(r.a),
                    num(r.f),
                    opt(r.f_plus_arg),
                    r.log_base
                );
            }
            t
        }
    };
    Ok((text, EXIT_OK))
}

#[derive(Debug, Serialize)]
struct GibbsRow {
    #[serde(rename = "E")]
    energy: f64,
    beta: f64,
    #[serde(rename = "Z")]
    z: f64,
    log_z: f64,
    #[serde(rename = "F")]
    f: f64,
    mean_energy: f64,
    residual: f64,
    log_base: LogBase,
}

fn gibbs(config: &RunConfig, s: &Spectrum) -> Outcome {
    let rows: Vec<Result<GibbsRow, String>> = config
        .energies
        .par_iter()
        .map(|&e| {
            let st =
                max_entropy_state(s, e, config.tol).map_err(|err| format!("E = {e}: {err}"))?;
            Ok(GibbsRow {
                energy: e,
                beta: st.beta,
                z: st.partition(),
                log_z: st.log_z,
                f: config.log_base.from_nats(st.entropy),
                mean_energy: st.mean_energy,
                residual: st.residual,
                log_base: config.log_base,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let text = match config.format {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let mut t = String::from("E,beta,Z,log_Z,F,mean_energy,residual,log_base\n");
            for r in &rows {
                let _ = writeln!(
                    t,
                    "{},{},{},{},{},{},{},{}",
                    num(r.energy),
                    num(r.beta),
                    num(r.z),
                    num(r.log_z),
                    num(r.f),
                    num(r.mean_energy),
                    num(r.residual),
                    r.log_base
                );
            }
            t
        }
    };
    Ok((text, EXIT_OK))
}

#[derive(Debug, Serialize)]
struct WitnessReport {
    #[serde(rename = "E")]
    energy: f64,
    epsilon: f64,
    branch: &'static str,
    a: f64,
    kappa: f64,
    /// `H(X) - H(Y)`
    achieved: f64,
    tv: f64,
    expected_energy: f64,
    log_base: LogBase,
    x: entropy_bounds::Distribution,
    y: entropy_bounds::Distribution,
}

fn witness(config: &RunConfig, s: &Spectrum) -> Outcome {
    let (e, eps) = (config.energies[0], config.eps[0]);
    let base = config.log_base;
    let bound = Bound::new(s, e, config.tol).map_err(|err| err.to_string())?;
    let k = bound.kappa(eps).map_err(|err| err.to_string())?;
    let pair = extremal_pair(s, e, eps, config.tol).map_err(|err| err.to_string())?;
    let report = WitnessReport {
        energy: e,
        epsilon: eps,
        branch: pair.branch.as_str(),
        a: pair.threshold_a,
        kappa: base.from_nats(k.value),
        achieved: base.from_nats(shannon_entropy(&pair.x) - shannon_entropy(&pair.y)),
        tv: tv_distance(&pair.x, &pair.y),
        expected_energy: expected_f(&pair.x, s).map_err(|err| err.to_string())?,
        log_base: base,
        x: pair.x,
        y: pair.y,
    };
    let text = match config.format {
        Format::Json => json(&report)?,
        Format::Csv => {
            let mut t = String::from("distribution,index,probability\n");
            for (name, d) in [("X", &report.x), ("Y", &report.y)] {
                for (i, p) in d.iter() {
                    let _ = writeln!(t, "{name},{i},{}", num(p));
                }
            }
            t
        }
    };
    Ok((text, EXIT_OK))
}

#[derive(Debug, Serialize)]
struct OraclePoint {
    #[serde(rename = "E")]
    energy: f64,
    epsilon: f64,
    cutoff: usize,
    oracle: f64,
    kappa: f64,
    abs_diff: f64,
    log_base: LogBase,
}

fn oracle_point(
    config: &RunConfig,
    s: &Spectrum,
    bound: &Bound,
    eps: f64,
) -> Result<OraclePoint, String> {
    let base = config.log_base;
    let e = bound.energy();
    let v = delta_oracle(s, e, eps, config.cutoff, config.tol).map_err(|err| err.to_string())?;
    let k = bound.kappa(eps).map_err(|err| err.to_string())?.value;
    Ok(OraclePoint {
        energy: e,
        epsilon: eps,
        cutoff: config.cutoff,
        oracle: base.from_nats(v),
        kappa: base.from_nats(k),
        abs_diff: base.from_nats((v - k).abs()),
        log_base: base,
    })
}

fn oracle(config: &RunConfig, s: &Spectrum) -> Outcome {
    let bound = Bound::new(s, config.energies[0], config.tol).map_err(|err| err.to_string())?;
    let p = oracle_point(config, s, &bound, config.eps[0])?;
    let text = match config.format {
        Format::Json => json(&p)?,
        Format::Csv => format!(
            "E,epsilon,cutoff,oracle,kappa,abs_diff,log_base\n{},{},{},{},{},{},{}\n",
            num(p.energy),
            num(p.epsilon),
            p.cutoff,
            num(p.oracle),
            num(p.kappa),
            num(p.abs_diff),
            p.log_base
        ),
    };
    Ok((text, EXIT_OK))
}

#[derive(Debug, Serialize)]
struct SuiteRow {
    suite: String,
    trials: usize,
    violations: usize,
    max_slack: f64,
    min_slack: f64,
    seed: u64,
}

impl SuiteRow {
    fn from_report(r: &VerificationReport, base: LogBase) -> Self {
        SuiteRow {
            suite: r.suite.clone(),
            trials: r.trials,
            violations: r.violations,
            max_slack: base.from_nats(r.max_slack),
            min_slack: base.from_nats(r.min_slack),
            seed: r.seed,
        }
    }
}

#[derive(Debug, Serialize)]
struct VerifySummary {
    spectrum: Option<String>,
    #[serde(rename = "E")]
    energy: f64,
    seed: u64,
    log_base: LogBase,
    suites: Vec<VerificationReport>,
    oracle: Vec<OraclePoint>,
    identity_residual: f64,
    violations: usize,
    passed: bool,
}

fn verify(config: &RunConfig, s: &Spectrum) -> Outcome {
    let e = config.energies[0];
    let err = |x: entropy_bounds::Error| x.to_string();
    let bound = Bound::new(s, e, config.tol).map_err(err)?;
    let mut suites = vec![
        sample_verify_classical(s, e, config.trials, config.seed, config.tol).map_err(err)?,
        sample_verify_fano(s, e, config.trials, config.seed, config.tol).map_err(err)?,
        sample_verify_quantum(s, e, config.dim, config.trials, config.seed, config.tol)
            .map_err(err)?,
    ];
    let oracle: Vec<OraclePoint> = config
        .eps
        .iter()
        .map(|&eps| oracle_point(config, s, &bound, eps))
        .collect::<Result<_, _>>()?;
    let oracle_bad = oracle
        .iter()
        .filter(|p| p.abs_diff > config.log_base.from_nats(ORACLE_TOL))
        .count();
    let mut oracle_report = VerificationReport::empty("oracle", config.seed);
    oracle_report.trials = oracle.len();
    oracle_report.violations = oracle_bad;
    for p in &oracle {
        let slack = p.kappa - p.oracle;
        oracle_report.max_slack = if oracle_report.max_slack.is_nan() {
            slack
        } else {
            oracle_report.max_slack.max(slack)
        };
        oracle_report.min_slack = if oracle_report.min_slack.is_nan() {
            slack
        } else {
            oracle_report.min_slack.min(slack)
        };
    }
    let identity_residual = bound.identity_residual().map_err(err)?;
    let mut identity_report = VerificationReport::empty("identity", config.seed);
    identity_report.trials = 1;
    identity_report.violations = usize::from(identity_residual > IDENTITY_TOL);
    identity_report.max_slack = -identity_residual;
    identity_report.min_slack = -identity_residual;
    if let Some(t) = suites[2].tightness_slack {
        suites[2]
            .notes
            .push(format!("injected extremal pair slack {t:e}"));
    }
    suites.push(oracle_report);
    suites.push(identity_report);
    let violations: usize = suites.iter().map(|r| r.violations).sum();
    let code = if violations == 0 {
        EXIT_OK
    } else {
        EXIT_VIOLATIONS
    };
    let text = match config.format {
        Format::Json => {
            let base = config.log_base;
            let suites = suites
                .into_iter()
                .map(|mut r| {
                    if r.suite != "oracle" {
                        r.max_slack = base.from_nats(r.max_slack);
                        r.min_slack = base.from_nats(r.min_slack);
                    }
                    r
                })
                .collect();
            json(&VerifySummary {
                spectrum: s.name().map(str::to_string),
                energy: e,
                seed: config.seed,
                log_base: base,
                suites,
                oracle,
                identity_residual,
                violations,
                passed: violations == 0,
            })?
        }
        Format::Csv => {
            let mut t = String::from("suite,trials,violations,max_slack,min_slack,seed,log_base\n");
            for r in &suites {
                let row = if r.suite == "oracle" {
                    SuiteRow {
                        suite: r.suite.clone(),
                        trials: r.trials,
                        violations: r.violations,
                        max_slack: r.max_slack,
                        min_slack: r.min_slack,
                        seed: r.seed,
                    }
                } else {
                    SuiteRow::from_report(r, config.log_base)
                };
                let _ = writeln!(
                    t,
                    "{},{},{},{},{},{},{}",
                    row.suite,
                    row.trials,
                    row.violations,
                    num(row.max_slack),
                    num(row.min_slack),
                    row.seed,
                    config.log_base
                );
            }
            t
        }
    };
    Ok((text, code))
}
