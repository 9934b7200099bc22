//! Direct empirical minimization of the accuracy/consensus objective over
//! symmetric linear fusers `gamma_j + eps_j sum_i L_ij + del_j sum_i U_ij`.
//!
//! Every such estimator is linear in `z = (1, X, SL_1, SU_1, ..., SL_m, SU_m)`,
//! so its squared errors and squared gaps are quadratic forms in the sample
//! second-moment matrix `E[z z^T]`. One pass over the samples therefore
//! suffices for any number of objective evaluations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linalg::Matrix;
use super::simplex::{multistart, SimplexOptions};
use crate::error::{FusionError, Result};
use crate::fusion::LinearCoefficients;
use crate::scenario::{derive_seed, trial_at, ScenarioParams};

const FIT_STREAM: u64 = 0x66_6974_7469_6e67;
const CHUNK: u64 = 1024;
const RESTARTS: usize = 20;
pub const MIN_FIT_SAMPLES: usize = 10_000;

/// Sample second moments of `z` for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProblem {
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
    /// `E[z z^T]`, dimension `2 + 2m`.
    pub second_moments: Matrix,
    /// Pooled sample mean of a single lower / upper endpoint.
    pub mean_l: f64,
    pub mean_u: f64,
    /// Pooled sample variance of a single lower endpoint.
    pub var_l: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub mse: Vec<f64>,
    /// Unordered agent pairs `(0,1), (0,2), ..., (m-2, m-1)`.
    pub cns: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub eps: Vec<f64>,
    pub del: Vec<f64>,
    pub gamma: Vec<f64>,
    pub coefficients: Vec<LinearCoefficients>,
    pub evaluation: Evaluation,
    pub samples: usize,
}

#[derive(Debug, Clone)]
struct Partial {
    zz: Vec<f64>,
    l: f64,
    u: f64,
    ll: f64,
}

impl LinearProblem {
    pub fn from_samples(params: &ScenarioParams, lambda: f64, samples: usize) -> Result<Self> {
        params.validate()?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(FusionError::Precondition(format!("lambda = {lambda} outside [0, 1]")));
        }
        if samples < MIN_FIT_SAMPLES {
            return Err(FusionError::Precondition(format!(
                "empirical fitting needs at least {MIN_FIT_SAMPLES} samples, got {samples}"
            )));
        }
        let sampling = ScenarioParams {
            seed: derive_seed(params.seed, FIT_STREAM),
            ..*params
        };
        let (n, m) = (params.n, params.m);
        let dim = 2 + 2 * m;
        let total = samples as u64;

        // fixed-size chunks summed in index order keep the result
        // independent of the worker count
        let partials: Vec<Partial> = (0..total.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut p = Partial {
                    zz: vec![0.0; dim * dim],
                    l: 0.0,
                    u: 0.0,
                    ll: 0.0,
                };
                let mut z = vec![0.0; dim];
                for t in c * CHUNK..((c + 1) * CHUNK).min(total) {
                    let trial = trial_at(&sampling, t);
                    z[0] = 1.0;
                    z[1] = trial.x;
                    for j in 0..m {
                        let r = trial.readings.agent(j);
                        z[2 + 2 * j] = r.iter().map(|v| v.lo).sum();
                        z[3 + 2 * j] = r.iter().map(|v| v.hi).sum();
                        for v in r {
                            p.l += v.lo;
                            p.u += v.hi;
                            p.ll += v.lo * v.lo;
                        }
                    }
                    for a in 0..dim {
                        for b in 0..dim {
                            p.zz[a * dim + b] += z[a] * z[b];
                        }
                    }
                }
                p
            })
            .collect();

        let mut zz = vec![0.0; dim * dim];
        let (mut l, mut u, mut ll) = (0.0, 0.0, 0.0);
        for p in &partials {
            for (acc, v) in zz.iter_mut().zip(&p.zz) {
                *acc += v;
            }
            l += p.l;
            u += p.u;
            ll += p.ll;
        }
        let s = samples as f64;
        let readings = s * (n * m) as f64;
        let mean_l = l / readings;
        Ok(Self {
            n,
            m,
            lambda,
            second_moments: (0..dim)
                .map(|a| (0..dim).map(|b| zz[a * dim + b] / s).collect())
                .collect(),
            mean_l,
            mean_u: u / readings,
            var_l: (ll / readings - mean_l * mean_l).max(0.0),
            samples,
        })
    }

    fn dim(&self) -> usize {
        2 + 2 * self.m
    }

    fn quad(&self, v: &[f64]) -> f64 {
        let q: f64 = self
            .second_moments
            .iter()
            .zip(v)
            .map(|(row, a)| a * row.iter().zip(v).map(|(m, b)| m * b).sum::<f64>())
            .sum();
        q.max(0.0)
    }

    /// Weight vector on `z` of agent `j`'s estimator.
    fn weights(&self, j: usize, eps: f64, del: f64, gamma: f64) -> Vec<f64> {
        let mut w = vec![0.0; self.dim()];
        w[0] = gamma;
        w[2 + 2 * j] = eps;
        w[3 + 2 * j] = del;
        w
    }

    /// The bias that makes `gamma + eps sum L + del sum U` centred on `E[X] = 0`.
    pub fn tied_gamma(&self, eps: f64, del: f64) -> f64 {
        -(self.n as f64) * (eps * self.mean_l + del * self.mean_u)
    }

    /// Objective terms of per-agent symmetric coefficients `(eps_j, del_j, gamma_j)`.
    pub fn evaluate(&self, eps: &[f64], del: &[f64], gamma: &[f64]) -> Result<Evaluation> {
        let m = self.m;
        if eps.len() != m || del.len() != m || gamma.len() != m {
            return Err(FusionError::Precondition(format!("need coefficients for {m} agents")));
        }
        let w: Vec<Vec<f64>> = (0..m).map(|j| self.weights(j, eps[j], del[j], gamma[j])).collect();
        let mse = w
            .iter()
            .map(|wj| {
                let mut e: Vec<f64> = wj.iter().map(|v| -v).collect();
                e[1] += 1.0;
                self.quad(&e)
            })
            .collect::<Vec<_>>();
        let mut cns = Vec::with_capacity(m * (m - 1) / 2);
        for j in 0..m {
            for k in j + 1..m {
                let d: Vec<f64> = w[j].iter().zip(&w[k]).map(|(a, b)| a - b).collect();
                cns.push(self.quad(&d));
            }
        }
        let weight = if m > 1 { (1.0 - self.lambda) / (m - 1) as f64 } else { 0.0 };
        let objective = self.lambda * mse.iter().sum::<f64>() + weight * cns.iter().sum::<f64>();
        Ok(Evaluation { mse, cns, objective })
    }

    /// Evaluates fusion rules that weight every sensor equally; other
    /// coefficient vectors are rejected.
    pub fn evaluate_coefficients(&self, coeffs: &[LinearCoefficients]) -> Result<Evaluation> {
        let uniform = |v: &[f64]| -> Result<f64> {
            match v.first() {
                Some(&first) if v.len() == self.n && v.iter().all(|x| *x == first) => Ok(first),
                _ => Err(FusionError::Precondition(
                    "coefficients must weight all sensors equally".into(),
                )),
            }
        };
        let mut eps = Vec::with_capacity(coeffs.len());
        let mut del = Vec::with_capacity(coeffs.len());
        for c in coeffs {
            eps.push(uniform(&c.eps)?);
            del.push(uniform(&c.del)?);
        }
        let gamma: Vec<f64> = coeffs.iter().map(|c| c.gamma).collect();
        self.evaluate(&eps, &del, &gamma)
    }

    fn objective_at(&self, x: &[f64]) -> f64 {
        let eps: Vec<f64> = x.iter().step_by(2).copied().collect();
        let del: Vec<f64> = x.iter().skip(1).step_by(2).copied().collect();
        let gamma: Vec<f64> = eps.iter().zip(&del).map(|(e, d)| self.tied_gamma(*e, *d)).collect();
        self.evaluate(&eps, &del, &gamma)
            .map_or(f64::INFINITY, |e| e.objective)
    }

    /// Multi-start simplex search over `(eps_1, del_1, ..., eps_m, del_m)`.
    pub fn minimize(&self) -> LinearFit {
        let half = 1.0 / (self.n as f64 * self.var_l + 1e-12).sqrt();
        let dim = 2 * self.m;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.samples as u64, FIT_STREAM));
        let opts = SimplexOptions {
            max_iter: 20_000,
            ..SimplexOptions::default()
        };
        let best = multistart(|x| self.objective_at(x), &vec![half; dim], RESTARTS, &opts, &mut rng)
            .map(|m| m.x)
            .unwrap_or_else(|| vec![0.0; dim]);

        let eps: Vec<f64> = best.iter().step_by(2).copied().collect();
        let del: Vec<f64> = best.iter().skip(1).step_by(2).copied().collect();
        let gamma: Vec<f64> = eps.iter().zip(&del).map(|(e, d)| self.tied_gamma(*e, *d)).collect();
        let evaluation = self
            .evaluate(&eps, &del, &gamma)
            .expect("coefficient count matches agents");
        let coefficients = (0..self.m)
            .map(|j| LinearCoefficients::uniform(self.n, eps[j], del[j], gamma[j]))
            .collect();
        LinearFit {
            eps,
            del,
            gamma,
            coefficients,
            evaluation,
            samples: self.samples,
        }
    }
}

/// Best symmetric linear fuser for `params` on `samples` simulated trials.
pub fn fit_linear_empirical(params: &ScenarioParams, lambda: f64, samples: usize) -> Result<LinearFit> {
    Ok(LinearProblem::from_samples(params, lambda, samples)?.minimize())
}
