//! Monte Carlo estimates of per-agent accuracy and pairwise consensus.
//!
//! Every algorithm in one [`simulate`] call sees the identical trial stream
//! (common random numbers). Per-trial squared errors are kept in trial order
//! so that paired comparisons between algorithms get their own standard
//! errors and results do not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};
use crate::fusion::{fuse_bi, fuse_gbi, fuse_linear, fuse_marzullo, gbi_weights_oneopt, LinearCoefficients};
use crate::scenario::{trial_at, ScenarioParams, TrialData};

pub const MIN_TRIALS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AlgorithmSpec {
    Marzullo,
    BrooksIyengar,
    /// Generalized Brooks-Iyengar with 1-optimal weights; falls back to
    /// Brooks-Iyengar when every subset weight vanishes.
    GbiOneOpt,
    Linear {
        label: String,
        coeffs: Vec<LinearCoefficients>,
    },
    Constant(f64),
}

impl AlgorithmSpec {
    pub fn label(&self) -> String {
        match self {
            Self::Marzullo => "marzullo".into(),
            Self::BrooksIyengar => "bi".into(),
            Self::GbiOneOpt => "gbi_oneopt".into(),
            Self::Linear { label, .. } => label.clone(),
            Self::Constant(v) => format!("constant:{v}"),
        }
    }

    fn check(&self, params: &ScenarioParams) -> Result<()> {
        if let Self::Linear { label, coeffs } = self {
            if coeffs.len() != params.m
                || coeffs.iter().any(|c| c.eps.len() != params.n || c.del.len() != params.n)
            {
                return Err(FusionError::Precondition(format!(
                    "{label}: need {} coefficient sets of length {}",
                    params.m, params.n
                )));
            }
        }
        Ok(())
    }

    /// One agent's estimate; the flag marks a fuser fallback.
    pub fn estimate(&self, trial: &TrialData, agent: usize, tau: usize) -> Result<(f64, bool)> {
        let readings = trial.readings.agent(agent);
        match self {
            Self::Marzullo => Ok((fuse_marzullo(readings, tau)?, false)),
            Self::BrooksIyengar => fuse_bi(readings, tau).map(|e| (e.value, e.fallback)),
            Self::GbiOneOpt => match gbi_weights_oneopt(readings, tau).and_then(|w| fuse_gbi(&w)) {
                Ok(v) => Ok((v, false)),
                Err(FusionError::Degenerate(_)) => fuse_bi(readings, tau).map(|e| (e.value, true)),
                Err(e) => Err(e),
            },
            Self::Linear { coeffs, .. } => Ok((fuse_linear(readings, &coeffs[agent])?, false)),
            Self::Constant(v) => Ok((*v, false)),
        }
    }
}

/// Per-trial squared errors of one algorithm, in trial order.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSamples {
    pub spec: AlgorithmSpec,
    /// `sq_err[j][t] = (X_t - estimate_j)^2`.
    pub sq_err: Vec<Vec<f64>>,
    /// `sq_gap[p][t]` for the unordered agent pair `p`.
    pub sq_gap: Vec<Vec<f64>>,
    /// Agent estimates that needed a fuser fallback.
    pub fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub params: ScenarioParams,
    pub trials: usize,
    pub algorithms: Vec<AlgorithmSamples>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub algorithm: String,
    pub tau: usize,
    pub lambda: f64,
    pub mse_per_agent: Vec<f64>,
    pub mse_stderr: Vec<f64>,
    /// Unordered pairs `(1,2), (1,3), ..., (m-1,m)`.
    pub cns_per_pair: Vec<f64>,
    pub cns_stderr: Vec<f64>,
    pub objective: f64,
    pub objective_stderr: f64,
    pub trials: usize,
    pub seed: u64,
    pub flags: Vec<String>,
}

/// Agent pairs `(j, k)` with `j < k`, in report order.
pub fn agent_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|j| (j + 1..m).map(move |k| (j, k))).collect()
}

/// Weight of the consensus sum in the objective.
pub fn consensus_weight(lambda: f64, m: usize) -> f64 {
    if m > 1 {
        (1.0 - lambda) / (m - 1) as f64
    } else {
        0.0
    }
}

/// `lambda sum mse + (1 - lambda)/(m - 1) sum cns` over unordered pairs.
pub fn objective(lambda: f64, mse: &[f64], cns: &[f64]) -> f64 {
    lambda * mse.iter().sum::<f64>() + consensus_weight(lambda, mse.len()) * cns.iter().sum::<f64>()
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean and standard error of `a[t] - b[t]`.
pub fn paired(a: &[f64], b: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    mean_stderr(&d)
}

struct TrialResult {
    sq_err: Vec<Vec<f64>>,
    sq_gap: Vec<Vec<f64>>,
    fallbacks: Vec<usize>,
}

fn run_trial(algos: &[AlgorithmSpec], params: &ScenarioParams, index: u64) -> Result<TrialResult> {
    let trial = trial_at(params, index);
    let pairs = agent_pairs(params.m);
    let mut out = TrialResult {
        sq_err: Vec::with_capacity(algos.len()),
        sq_gap: Vec::with_capacity(algos.len()),
        fallbacks: Vec::with_capacity(algos.len()),
    };
    for a in algos {
        let mut est = Vec::with_capacity(params.m);
        let mut fallbacks = 0;
        for j in 0..params.m {
            let (v, fell_back) = a.estimate(&trial, j, params.tau)?;
            est.push(v);
            fallbacks += usize::from(fell_back);
        }
        out.sq_err.push(est.iter().map(|v| (trial.x - v).powi(2)).collect());
        out.sq_gap.push(pairs.iter().map(|&(j, k)| (est[j] - est[k]).powi(2)).collect());
        out.fallbacks.push(fallbacks);
    }
    Ok(out)
}

/// Runs every algorithm on trials `0..trials` of `params`.
pub fn simulate(algos: &[AlgorithmSpec], params: &ScenarioParams, trials: usize) -> Result<Simulation> {
    params.validate()?;
    if trials < MIN_TRIALS {
        return Err(FusionError::Precondition(format!(
            "need at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    for a in algos {
        a.check(params)?;
    }
    let rows: Vec<TrialResult> = (0..trials as u64)
        .into_par_iter()
        .map(|t| run_trial(algos, params, t))
        .collect::<Result<_>>()?;

    let pairs = agent_pairs(params.m).len();
    let algorithms = algos
        .iter()
        .enumerate()
        .map(|(i, spec)| AlgorithmSamples {
            spec: spec.clone(),
            sq_err: (0..params.m)
                .map(|j| rows.iter().map(|r| r.sq_err[i][j]).collect())
                .collect(),
            sq_gap: (0..pairs)
                .map(|p| rows.iter().map(|r| r.sq_gap[i][p]).collect())
                .collect(),
            fallbacks: rows.iter().map(|r| r.fallbacks[i]).sum(),
        })
        .collect();
    Ok(Simulation {
        params: *params,
        trials,
        algorithms,
    })
}

impl Simulation {
    /// Per-trial objective terms of algorithm `idx`.
    pub fn objective_samples(&self, idx: usize, lambda: f64) -> Vec<f64> {
        let a = &self.algorithms[idx];
        let w = consensus_weight(lambda, self.params.m);
        (0..self.trials)
            .map(|t| {
                lambda * a.sq_err.iter().map(|e| e[t]).sum::<f64>()
                    + w * a.sq_gap.iter().map(|g| g[t]).sum::<f64>()
            })
            .collect()
    }

    /// Mean per-agent squared error, averaged over agents, per trial.
    pub fn mse_samples(&self, idx: usize) -> Vec<f64> {
        let a = &self.algorithms[idx];
        let m = a.sq_err.len() as f64;
        (0..self.trials)
            .map(|t| a.sq_err.iter().map(|e| e[t]).sum::<f64>() / m)
            .collect()
    }

    /// Mean pairwise squared gap, averaged over pairs, per trial.
    pub fn cns_samples(&self, idx: usize) -> Vec<f64> {
        let a = &self.algorithms[idx];
        let p = a.sq_gap.len().max(1) as f64;
        (0..self.trials)
            .map(|t| a.sq_gap.iter().map(|g| g[t]).sum::<f64>() / p)
            .collect()
    }

    pub fn report(&self, idx: usize, lambda: f64) -> MetricsReport {
        let a = &self.algorithms[idx];
        let (mse_per_agent, mse_stderr): (Vec<f64>, Vec<f64>) =
            a.sq_err.iter().map(|e| mean_stderr(e)).unzip();
        let (cns_per_pair, cns_stderr): (Vec<f64>, Vec<f64>) =
            a.sq_gap.iter().map(|g| mean_stderr(g)).unzip();
        let (_, objective_stderr) = mean_stderr(&self.objective_samples(idx, lambda));
        let mut flags = Vec::new();
        if a.fallbacks > 0 {
            let name = match a.spec {
                AlgorithmSpec::GbiOneOpt => "gbi_fallback",
                _ => "bi_fallback",
            };
            flags.push(format!("{name}={}", a.fallbacks));
        }
        MetricsReport {
            algorithm: a.spec.label(),
            tau: self.params.tau,
            lambda,
            objective: objective(lambda, &mse_per_agent, &cns_per_pair),
            mse_per_agent,
            mse_stderr,
            cns_per_pair,
            cns_stderr,
            objective_stderr,
            trials: self.trials,
            seed: self.params.seed,
            flags,
        }
    }
}

/// Reports for every algorithm at one accuracy weight.
pub fn evaluate(
    algos: &[AlgorithmSpec],
    params: &ScenarioParams,
    lambda: f64,
    trials: usize,
) -> Result<Vec<MetricsReport>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(FusionError::Precondition(format!("lambda = {lambda} outside [0, 1]")));
    }
    let sim = simulate(algos, params, trials)?;
    Ok((0..algos.len()).map(|i| sim.report(i, lambda)).collect())
}
