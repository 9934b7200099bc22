//! Command-line front end: configuration, sweeps over the fault count and
//! the accuracy weight, report writing, and the oracle self-check.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::FusionError;
use crate::fusion::{fuse_gbi, gbi_weights_oneopt, GbiWeights, LinearCoefficients};
use crate::metrics::{agent_pairs, simulate, AlgorithmSpec, MetricsReport};
use crate::optimal::{
    estimate_moments, solve_prop4_with, Evaluation, LinearFit, LinearProblem, Prop4Form, Prop4Solution,
};
use crate::oracle::posterior_mean_for;
use crate::scenario::{trial_at, ScenarioParams};

pub const SEED_ENV: &str = "FAULTFUSE_SEED";
pub const TRIALS_ENV: &str = "FAULTFUSE_TRIALS";
/// Tolerance of the oracle self-check.
pub const ORACLE_TOLERANCE: f64 = 1e-9;
/// Largest sensor count the oracle check enumerates.
pub const ORACLE_MAX_SENSORS: usize = 8;
/// The moment solver's coefficients are used when their objective is
/// within this factor of the empirical optimum.
pub const PROP4_ACCEPT_RATIO: f64 = 1.05;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error("oracle check failed: {0}")]
    OracleMismatch(String),
}

fn config_err(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.into(),
        message: message.into(),
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

#[derive(Debug, Parser)]
#[command(name = "faultfuse", version, about = "Fault-tolerant interval fusion experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every configured algorithm for every fault count.
    Sweep(RunArgs),
    /// Compare the 1-optimal GBI fuser against the exact posterior mean.
    OracleCheck {
        #[command(flatten)]
        run: RunArgs,
        /// Perturb one GBI weight per estimate (negative control).
        #[arg(long, hide = true)]
        corrupt_weights: bool,
    },
    /// Fit linear fusers at one accuracy weight and print both solutions.
    FitLinear {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        lambda: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_moment_samples() -> usize {
    200_000
}

fn default_objective_lambda() -> f64 {
    0.5
}

/// On-disk configuration (TOML, flat keys).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n: usize,
    pub m: usize,
    pub x_max: u32,
    #[serde(default)]
    pub seed: u64,
    pub taus: Vec<usize>,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub algorithms: Vec<String>,
    pub trials: usize,
    #[serde(default = "default_moment_samples")]
    pub moment_samples: usize,
    /// Accuracy weight of the objective column for rules without their own.
    #[serde(default = "default_objective_lambda")]
    pub objective_lambda: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selector {
    Marzullo,
    Bi,
    GbiOneOpt,
    /// Fitted linear fuser for the given accuracy weight.
    Linear(f64),
    Constant(f64),
}

impl Selector {
    pub fn label(&self) -> String {
        match self {
            Self::Marzullo => "marzullo".into(),
            Self::Bi => "bi".into(),
            Self::GbiOneOpt => "gbi_oneopt".into(),
            Self::Linear(l) => format!("linear@{l}"),
            Self::Constant(v) => format!("constant:{v}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: usize,
    pub m: usize,
    pub x_max: u32,
    pub seed: u64,
    pub taus: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub algorithms: Vec<Selector>,
    pub trials: usize,
    pub moment_samples: usize,
    pub objective_lambda: f64,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
}

fn check_lambda(field: &str, l: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&l) {
        Ok(l)
    } else {
        Err(config_err(field, format!("{l} is outside [0, 1]")))
    }
}

fn parse_selectors(names: &[String], lambdas: &[f64]) -> Result<Vec<Selector>, CliError> {
    let mut out = Vec::new();
    for name in names {
        let s = name.trim();
        let parsed = match s {
            "marzullo" => vec![Selector::Marzullo],
            "bi" => vec![Selector::Bi],
            "gbi_oneopt" => vec![Selector::GbiOneOpt],
            "linear" => {
                if lambdas.is_empty() {
                    return Err(config_err("lambdas", "a bare `linear` algorithm needs at least one lambda"));
                }
                lambdas.iter().map(|&l| Selector::Linear(l)).collect()
            }
            _ => {
                let number = |v: &str| {
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| config_err("algorithms", format!("bad number in `{s}`")))
                };
                if let Some(v) = s.strip_prefix("linear@") {
                    vec![Selector::Linear(check_lambda("algorithms", number(v)?)?)]
                } else if let Some(v) = s.strip_prefix("constant:") {
                    vec![Selector::Constant(number(v)?)]
                } else {
                    return Err(config_err(
                        "algorithms",
                        format!(
                            "unknown algorithm `{s}` (expected marzullo, bi, gbi_oneopt, linear, \
                             linear@<lambda> or constant:<value>)"
                        ),
                    ));
                }
            }
        };
        out.extend(parsed);
    }
    Ok(out)
}

fn env_override<T: std::str::FromStr>(var: &str, field: &str) -> Result<Option<T>, CliError> {
    match std::env::var(var) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| config_err(field, format!("{var}={v} is not a valid value"))),
        Err(_) => Ok(None),
    }
}

impl RunConfig {
    /// Validates a parsed file. Overrides apply flag first, then environment.
    pub fn from_file(file: ConfigFile, args: &RunArgs) -> Result<Self, CliError> {
        let seed = match args.seed {
            Some(s) => s,
            None => env_override(SEED_ENV, "seed")?.unwrap_or(file.seed),
        };
        let trials = match args.trials {
            Some(t) => t,
            None => env_override(TRIALS_ENV, "trials")?.unwrap_or(file.trials),
        };
        if file.n < 2 || file.n > 63 {
            return Err(config_err("n", format!("{} sensors; need 2 <= n <= 63", file.n)));
        }
        if file.m == 0 {
            return Err(config_err("m", "need at least one agent"));
        }
        if file.x_max == 0 {
            return Err(config_err("x_max", "must be at least 1"));
        }
        if file.taus.is_empty() {
            return Err(config_err("taus", "list is empty"));
        }
        if let Some(t) = file.taus.iter().find(|&&t| t + 2 > file.n) {
            return Err(config_err("taus", format!("tau = {t} exceeds n - 2 = {}", file.n - 2)));
        }
        for &l in &file.lambdas {
            check_lambda("lambdas", l)?;
        }
        check_lambda("objective_lambda", file.objective_lambda)?;
        if trials < crate::metrics::MIN_TRIALS {
            return Err(config_err(
                "trials",
                format!("{trials} < {}", crate::metrics::MIN_TRIALS),
            ));
        }
        if file.moment_samples < crate::optimal::linear_fit::MIN_FIT_SAMPLES {
            return Err(config_err(
                "moment_samples",
                format!("{} < {}", file.moment_samples, crate::optimal::linear_fit::MIN_FIT_SAMPLES),
            ));
        }
        Ok(Self {
            n: file.n,
            m: file.m,
            x_max: file.x_max,
            seed,
            taus: file.taus,
            algorithms: parse_selectors(&file.algorithms, &file.lambdas)?,
            lambdas: file.lambdas,
            trials,
            moment_samples: file.moment_samples,
            objective_lambda: file.objective_lambda,
            output_path: args.out.clone().or(file.out),
            format: file.format,
        })
    }

    pub fn load(args: &RunArgs) -> Result<Self, CliError> {
        let text = fs::read_to_string(&args.config).map_err(|e| io_err(&args.config, e))?;
        let file: ConfigFile = toml::from_str(&text).map_err(|e| {
            let message = e.message().to_string();
            // serde reports missing/unknown fields by name inside backticks
            let field = message
                .split('`')
                .nth(1)
                .map(str::to_string)
                .or_else(|| e.span().map(|s| text[s].split('=').next().unwrap_or("").trim().to_string()))
                .unwrap_or_else(|| "<file>".into());
            config_err(&field, message)
        })?;
        Self::from_file(file, args)
    }

    pub fn params(&self, tau: usize) -> Result<ScenarioParams, CliError> {
        ScenarioParams::new(self.n, self.m, tau, self.x_max, self.seed)
            .map_err(|e| config_err("taus", e.to_string()))
    }
}

/// How a linear fuser's coefficients were obtained.
#[derive(Debug, Clone, Serialize)]
pub struct LinearChoice {
    pub lambda: f64,
    pub coefficients: Vec<LinearCoefficients>,
    pub flags: Vec<String>,
    pub fit: LinearFit,
    pub prop4: Option<Prop4Solution>,
    pub prop4_evaluation: Option<Evaluation>,
    pub prop4_error: Option<String>,
}

/// Fits the empirical optimum and the moment-based solution on the same
/// samples, keeping the moment solution when it is within 5%.
pub fn choose_linear(
    params: &ScenarioParams,
    lambda: f64,
    samples: usize,
    form: Prop4Form,
) -> Result<LinearChoice, CliError> {
    let problem = LinearProblem::from_samples(params, lambda, samples)?;
    let fit = problem.minimize();
    let mut choice = LinearChoice {
        lambda,
        coefficients: fit.coefficients.clone(),
        flags: Vec::new(),
        fit,
        prop4: None,
        prop4_evaluation: None,
        prop4_error: None,
    };
    if params.m != 2 || !(lambda > 0.0 && lambda < 1.0) {
        choice.flags.push("prop4_unavailable".into());
        symmetrize(&problem, &mut choice)?;
        return Ok(choice);
    }
    let solved = estimate_moments(params, samples)
        .and_then(|m| solve_prop4_with(&m, lambda, params.n, form))
        .and_then(|s| {
            let ev = problem.evaluate_coefficients(&s.coefficients())?;
            Ok((s, ev))
        });
    match solved {
        Ok((s, ev)) => {
            if ev.objective <= PROP4_ACCEPT_RATIO * choice.fit.evaluation.objective {
                choice.coefficients = s.coefficients();
                choice.flags.push("source=prop4".into());
            } else {
                choice.flags.push("prop4_substituted".into());
            }
            choice.prop4 = Some(s);
            choice.prop4_evaluation = Some(ev);
        }
        Err(e) => {
            choice.flags.push("prop4_substituted".into());
            choice.prop4_error = Some(e.to_string());
        }
    }
    symmetrize(&problem, &mut choice)?;
    Ok(choice)
}

/// Replaces per-agent coefficients by their average across agents when that
/// scores at least as well on the fitting samples. With identical readings
/// at every agent this removes the solver noise that would otherwise leave
/// a tiny nonzero disagreement.
fn symmetrize(problem: &LinearProblem, choice: &mut LinearChoice) -> Result<(), CliError> {
    let m = choice.coefficients.len() as f64;
    let mut avg = choice.coefficients[0].clone();
    for c in &choice.coefficients[1..] {
        for (a, v) in avg.eps.iter_mut().zip(&c.eps) {
            *a += v;
        }
        for (a, v) in avg.del.iter_mut().zip(&c.del) {
            *a += v;
        }
        avg.gamma += c.gamma;
    }
    avg.eps.iter_mut().chain(avg.del.iter_mut()).for_each(|v| *v /= m);
    avg.gamma /= m;
    let symmetric = vec![avg; choice.coefficients.len()];
    if symmetric == choice.coefficients {
        return Ok(());
    }
    let current = problem.evaluate_coefficients(&choice.coefficients)?.objective;
    let averaged = problem.evaluate_coefficients(&symmetric)?.objective;
    if averaged <= current * (1.0 + 1e-9) {
        choice.coefficients = symmetric;
        choice.flags.push("symmetrized".into());
    }
    Ok(())
}

/// All report rows of a sweep, in (tau, algorithm) order.
pub fn run_sweep(config: &RunConfig) -> Result<Vec<MetricsReport>, CliError> {
    let mut rows = Vec::new();
    if config.algorithms.is_empty() {
        return Ok(rows);
    }
    for &tau in &config.taus {
        let params = config.params(tau)?;
        let mut specs = Vec::with_capacity(config.algorithms.len());
        let mut extra_flags = Vec::with_capacity(config.algorithms.len());
        for sel in &config.algorithms {
            let (spec, flags) = match *sel {
                Selector::Marzullo => (AlgorithmSpec::Marzullo, vec![]),
                Selector::Bi => (AlgorithmSpec::BrooksIyengar, vec![]),
                Selector::GbiOneOpt => (AlgorithmSpec::GbiOneOpt, vec![]),
                Selector::Constant(v) => (AlgorithmSpec::Constant(v), vec![]),
                Selector::Linear(l) => {
                    let c = choose_linear(&params, l, config.moment_samples, Prop4Form::UnitVariance)?;
                    (
                        AlgorithmSpec::Linear {
                            label: sel.label(),
                            coeffs: c.coefficients,
                        },
                        c.flags,
                    )
                }
            };
            specs.push(spec);
            extra_flags.push(flags);
        }
        let sim = simulate(&specs, &params, config.trials)?;
        for (i, sel) in config.algorithms.iter().enumerate() {
            let lambda = match sel {
                Selector::Linear(l) => *l,
                _ => config.objective_lambda,
            };
            let mut report = sim.report(i, lambda);
            report.flags.extend(extra_flags[i].iter().cloned());
            rows.push(report);
        }
    }
    Ok(rows)
}

pub fn csv_header(m: usize) -> Vec<String> {
    let mut h = vec!["algorithm".to_string(), "tau".into(), "lambda".into()];
    h.extend((1..=m).map(|j| format!("mse_agent_{j}")));
    h.extend((1..=m).map(|j| format!("mse_stderr_{j}")));
    let pairs = agent_pairs(m);
    h.extend(pairs.iter().map(|(j, k)| format!("cns_pair_{}_{}", j + 1, k + 1)));
    h.extend(pairs.iter().map(|(j, k)| format!("cns_stderr_{}_{}", j + 1, k + 1)));
    h.extend(["objective", "trials", "seed", "flags"].map(String::from));
    h
}

fn num(v: f64) -> String {
    format!("{v:.14e}")
}

pub fn csv_row(r: &MetricsReport) -> Vec<String> {
    let mut row = vec![r.algorithm.clone(), r.tau.to_string(), num(r.lambda)];
    row.extend(r.mse_per_agent.iter().map(|v| num(*v)));
    row.extend(r.mse_stderr.iter().map(|v| num(*v)));
    row.extend(r.cns_per_pair.iter().map(|v| num(*v)));
    row.extend(r.cns_stderr.iter().map(|v| num(*v)));
    row.push(num(r.objective));
    row.push(r.trials.to_string());
    row.push(r.seed.to_string());
    row.push(r.flags.join(";"));
    row
}

pub fn render(config: &RunConfig, rows: &[MetricsReport]) -> Result<Vec<u8>, CliError> {
    match config.format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let fail = |e: csv::Error| config_err("out", e.to_string());
            w.write_record(csv_header(config.m)).map_err(fail)?;
            for r in rows {
                w.write_record(csv_row(r)).map_err(fail)?;
            }
            w.into_inner().map_err(|e| config_err("out", e.to_string()))
        }
        OutputFormat::Json => {
            let mut v = serde_json::to_vec_pretty(rows).map_err(|e| config_err("out", e.to_string()))?;
            v.push(b'\n');
            Ok(v)
        }
    }
}

pub fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleFailure {
    pub seed: u64,
    pub tau: usize,
    pub trial: u64,
    pub agent: usize,
    pub gbi: f64,
    pub oracle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub estimates: usize,
    pub max_deviation: f64,
    pub failures: Vec<OracleFailure>,
}

impl OracleSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Test hook: doubles the first positive pattern weight.
pub fn corrupt_first_weight(w: &mut GbiWeights) {
    if let Some(p) = w.patterns.iter_mut().find(|p| p.weight > 0.0) {
        p.weight *= 2.0;
    }
}

/// Compares GBI (after `hook` edits its weights) to the exact posterior
/// mean for every agent of every configured trial.
pub fn oracle_check_with<H>(config: &RunConfig, hook: H) -> Result<OracleSummary, CliError>
where
    H: Fn(&mut GbiWeights) + Sync,
{
    if config.n > ORACLE_MAX_SENSORS {
        return Err(config_err(
            "n",
            format!("oracle check enumerates fault patterns; need n <= {ORACLE_MAX_SENSORS}"),
        ));
    }
    let mut summary = OracleSummary {
        estimates: 0,
        max_deviation: 0.0,
        failures: Vec::new(),
    };
    for &tau in &config.taus {
        let params = config.params(tau)?;
        let per_trial: Vec<Vec<(usize, f64, f64)>> = (0..config.trials as u64)
            .into_par_iter()
            .map(|t| {
                let trial = trial_at(&params, t);
                (0..params.m)
                    .map(|j| {
                        let r = trial.readings.agent(j);
                        let mut w = gbi_weights_oneopt(r, tau)?;
                        hook(&mut w);
                        Ok((j, fuse_gbi(&w)?, posterior_mean_for(r, &params)?))
                    })
                    .collect::<Result<Vec<_>, FusionError>>()
            })
            .collect::<Result<_, _>>()?;
        for (t, agents) in per_trial.into_iter().enumerate() {
            for (agent, gbi, oracle) in agents {
                let dev = (gbi - oracle).abs();
                summary.estimates += 1;
                summary.max_deviation = summary.max_deviation.max(dev);
                if !(dev <= ORACLE_TOLERANCE) {
                    summary.failures.push(OracleFailure {
                        seed: params.seed,
                        tau,
                        trial: t as u64,
                        agent,
                        gbi,
                        oracle,
                    });
                }
            }
        }
    }
    Ok(summary)
}

pub fn oracle_check(config: &RunConfig) -> Result<OracleSummary, CliError> {
    oracle_check_with(config, |_| {})
}

#[derive(Debug, Serialize)]
pub struct FitReport {
    pub tau: usize,
    pub unit_variance: LinearChoice,
    pub literal: Option<Prop4Solution>,
    pub literal_evaluation: Option<Evaluation>,
    pub literal_error: Option<String>,
}

/// Both moment-based solutions and the empirical optimum for every tau.
pub fn fit_linear(config: &RunConfig, lambda: f64) -> Result<Vec<FitReport>, CliError> {
    check_lambda("lambda", lambda)?;
    let mut out = Vec::new();
    for &tau in &config.taus {
        let params = config.params(tau)?;
        let choice = choose_linear(&params, lambda, config.moment_samples, Prop4Form::UnitVariance)?;
        let (mut literal, mut literal_evaluation, mut literal_error) = (None, None, None);
        if params.m == 2 && lambda > 0.0 && lambda < 1.0 {
            let problem = LinearProblem::from_samples(&params, lambda, config.moment_samples)?;
            match estimate_moments(&params, config.moment_samples)
                .and_then(|m| solve_prop4_with(&m, lambda, params.n, Prop4Form::Literal))
            {
                Ok(s) => {
                    literal_evaluation = problem.evaluate_coefficients(&s.coefficients()).ok();
                    literal = Some(s);
                }
                Err(e) => literal_error = Some(e.to_string()),
            }
        }
        out.push(FitReport {
            tau,
            unit_variance: choice,
            literal,
            literal_evaluation,
            literal_error,
        });
    }
    Ok(out)
}

/// Runs one parsed command line; the returned code is the process status.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Sweep(args) => {
            let config = RunConfig::load(&args)?;
            let path = config
                .output_path
                .clone()
                .ok_or_else(|| config_err("out", "no output path (set `out` or pass --out)"))?;
            let rows = run_sweep(&config)?;
            write_output(&path, &render(&config, &rows)?)?;
            println!("wrote {} rows to {}", rows.len(), path.display());
            Ok(0)
        }
        Command::OracleCheck { run, corrupt_weights } => {
            let config = RunConfig::load(&run)?;
            let summary = if corrupt_weights {
                oracle_check_with(&config, corrupt_first_weight)?
            } else {
                oracle_check(&config)?
            };
            println!(
                "checked {} estimates, max deviation {:.3e}: {}",
                summary.estimates,
                summary.max_deviation,
                if summary.passed() { "pass" } else { "FAIL" }
            );
            if summary.passed() {
                return Ok(0);
            }
            for f in summary.failures.iter().take(10) {
                eprintln!(
                    "mismatch: seed {} tau {} trial {} agent {}: gbi {} oracle {}",
                    f.seed,
                    f.tau,
                    f.trial,
                    f.agent + 1,
                    f.gbi,
                    f.oracle
                );
            }
            Err(CliError::OracleMismatch(format!(
                "{} of {} estimates deviate by more than {ORACLE_TOLERANCE:e}",
                summary.failures.len(),
                summary.estimates
            )))
        }
        Command::FitLinear { run, lambda } => {
            let config = RunConfig::load(&run)?;
            let reports = fit_linear(&config, lambda)?;
            let mut text = serde_json::to_string_pretty(&reports).map_err(|e| config_err("out", e.to_string()))?;
            text.push('\n');
            match &run.out {
                Some(path) => write_output(path, text.as_bytes())?,
                None => print!("{text}"),
            }
            Ok(0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(extra: &str) -> ConfigFile {
        toml::from_str(&format!(
            "n = 5\nm = 2\nx_max = 5\ntaus = [1, 2]\ntrials = 200\nlambdas = [0.1, 0.9]\n{extra}"
        ))
        .unwrap()
    }

    fn args() -> RunArgs {
        RunArgs {
            config: PathBuf::from("unused.toml"),
            seed: None,
            trials: None,
            out: None,
        }
    }

    #[test]
    fn bare_linear_expands_over_lambdas() {
        let f = file("algorithms = [\"linear\", \"bi\", \"constant:1.5\", \"linear@0.3\"]");
        let c = RunConfig::from_file(f, &args()).unwrap();
        assert_eq!(
            c.algorithms,
            vec![
                Selector::Linear(0.1),
                Selector::Linear(0.9),
                Selector::Bi,
                Selector::Constant(1.5),
                Selector::Linear(0.3)
            ]
        );
    }

    #[test]
    fn invalid_fields_are_named() {
        let cases = [
            ("algorithms = [\"nope\"]", "algorithms"),
            ("algorithms = [\"linear@2\"]", "algorithms"),
            ("objective_lambda = -1.0", "objective_lambda"),
            ("moment_samples = 10", "moment_samples"),
        ];
        for (extra, field) in cases {
            match RunConfig::from_file(file(extra), &args()) {
                Err(CliError::Config { field: f, .. }) => assert_eq!(f, field),
                other => panic!("{extra}: {other:?}"),
            }
        }
        let mut f = file("");
        f.taus = vec![4];
        assert!(matches!(
            RunConfig::from_file(f, &args()),
            Err(CliError::Config { field, .. }) if field == "taus"
        ));
    }

    #[test]
    fn flags_override_file() {
        let mut a = args();
        a.seed = Some(99);
        a.trials = Some(300);
        let c = RunConfig::from_file(file("seed = 4"), &a).unwrap();
        assert_eq!((c.seed, c.trials), (99, 300));
    }

    #[test]
    fn header_layout() {
        assert_eq!(
            csv_header(3),
            [
                "algorithm", "tau", "lambda", "mse_agent_1", "mse_agent_2", "mse_agent_3", "mse_stderr_1",
                "mse_stderr_2", "mse_stderr_3", "cns_pair_1_2", "cns_pair_1_3", "cns_pair_2_3",
                "cns_stderr_1_2", "cns_stderr_1_3", "cns_stderr_2_3", "objective", "trials", "seed", "flags"
            ]
        );
    }

    #[test]
    fn number_format_keeps_fifteen_digits() {
        assert_eq!(num(1.0 / 3.0), "3.33333333333333e-1");
        assert_eq!(num(0.0), "0.00000000000000e0");
    }
}
