//! Optimal amplitudes and biases for fixed zero-mean, unit-variance
//! direction functions.
//!
//! Each agent's estimator is written as `c_j * f_j + b_j`. With the
//! directions fixed, the objective
//!
//! ```text
//! L = lambda * sum_j mse_j + (1 - lambda) / (m - 1) * sum_{j < j'} cns_{j,j'}
//! ```
//!
//! is a convex quadratic in `c` whose stationarity conditions are the
//! linear system `A c = Theta` with `A_jj = 1`,
//! `A_jj' = -(1 - lambda) / (m - 1) * E[f_j f_j']` and
//! `Theta_j = lambda * E[X f_j]`. The bias is `E[X]` for every agent.

use serde::{Deserialize, Serialize};

use super::linalg::{condition_1, invert, mat_vec, solve, Matrix};
use crate::error::{FusionError, Result};

const MAX_CONDITION: f64 = 1e10;

/// Second moments of the direction functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionMoments {
    /// `E[f_j f_j']`, unit diagonal.
    pub cross: Matrix,
    /// `E[X f_j]`.
    pub target: Vec<f64>,
}

impl DirectionMoments {
    pub fn agents(&self) -> usize {
        self.target.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.target.len();
        if m == 0 || self.cross.len() != m || self.cross.iter().any(|r| r.len() != m) {
            return Err(FusionError::Precondition(
                "cross moments must be an m x m matrix matching the target vector".into(),
            ));
        }
        for j in 0..m {
            if (self.cross[j][j] - 1.0).abs() > 1e-9 {
                return Err(FusionError::Precondition(format!(
                    "direction {j} does not have unit variance"
                )));
            }
            for k in 0..m {
                let v = self.cross[j][k];
                if !v.is_finite() || v.abs() > 1.0 + 1e-9 || (v - self.cross[k][j]).abs() > 1e-9 {
                    return Err(FusionError::Precondition(format!(
                        "cross moment ({j}, {k}) = {v} is not a correlation"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Standardizes each sampled direction (zero mean, unit variance) and
    /// measures its correlations and its covariance with the target.
    /// `directions[j][s]` is agent `j`'s raw output on sample `s`.
    pub fn from_samples(x: &[f64], directions: &[Vec<f64>]) -> Result<Self> {
        let s = x.len() as f64;
        if x.len() < 2 || directions.iter().any(|d| d.len() != x.len()) {
            return Err(FusionError::Precondition(
                "need at least two samples of equal length".into(),
            ));
        }
        let mean_x = x.iter().sum::<f64>() / s;
        let standardized: Vec<Vec<f64>> = directions
            .iter()
            .map(|d| {
                let mu = d.iter().sum::<f64>() / s;
                let var = d.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / s;
                if !(var > 0.0) {
                    return Err(FusionError::Degenerate("constant direction function".into()));
                }
                let sd = var.sqrt();
                Ok(d.iter().map(|v| (v - mu) / sd).collect())
            })
            .collect::<Result<_>>()?;
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>() / s;
        let cross = standardized
            .iter()
            .map(|a| standardized.iter().map(|b| dot(a, b)).collect())
            .collect();
        let centered_x: Vec<f64> = x.iter().map(|v| v - mean_x).collect();
        let target = standardized.iter().map(|f| dot(&centered_x, f)).collect();
        Ok(Self { cross, target })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSolution {
    pub c: Vec<f64>,
    pub b: Vec<f64>,
    pub a_matrix: Matrix,
    pub theta: Vec<f64>,
    /// `Theta (A A^T)^-1 Theta^T`, i.e. `|c|^2`.
    pub objective_value: f64,
}

fn consensus_weight(lambda: f64, m: usize) -> f64 {
    if m > 1 {
        (1.0 - lambda) / (m - 1) as f64
    } else {
        0.0
    }
}

pub fn a_matrix(dm: &DirectionMoments, lambda: f64) -> Matrix {
    let m = dm.agents();
    let w = consensus_weight(lambda, m);
    (0..m)
        .map(|j| {
            (0..m)
                .map(|k| if j == k { 1.0 } else { -w * dm.cross[j][k] })
                .collect()
        })
        .collect()
}

pub fn amplitude_solution(dm: &DirectionMoments, mean_x: f64, lambda: f64) -> Result<AmplitudeSolution> {
    dm.validate()?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(FusionError::Precondition(format!("lambda = {lambda} outside [0, 1]")));
    }
    let a = a_matrix(dm, lambda);
    let singular = |condition: f64| FusionError::Singular {
        condition,
        lambda,
        cross: dm.cross.clone(),
    };
    let condition = condition_1(&a);
    if !(condition <= MAX_CONDITION) {
        return Err(singular(condition));
    }
    let theta: Vec<f64> = dm.target.iter().map(|t| lambda * t).collect();
    let c = solve(&a, &theta).ok_or_else(|| singular(f64::INFINITY))?;

    // Theta (A A^T)^-1 Theta^T
    let at_a: Matrix = (0..a.len())
        .map(|i| (0..a.len()).map(|k| a[i].iter().zip(&a[k]).map(|(p, q)| p * q).sum()).collect())
        .collect();
    let objective_value = match invert(&at_a) {
        Some(inv) => theta.iter().zip(mat_vec(&inv, &theta)).map(|(t, v)| t * v).sum(),
        None => c.iter().map(|v| v * v).sum(),
    };

    Ok(AmplitudeSolution {
        b: vec![mean_x; c.len()],
        c,
        a_matrix: a,
        theta,
        objective_value,
    })
}

/// The accuracy/consensus objective of `c_j f_j + b_j`, reconstructed
/// from the direction moments, `E[X]` and `Var(X)`.
pub fn objective_from_moments(
    dm: &DirectionMoments,
    mean_x: f64,
    var_x: f64,
    lambda: f64,
    c: &[f64],
    b: &[f64],
) -> f64 {
    let m = dm.agents();
    let mse: f64 = (0..m)
        .map(|j| var_x + c[j] * c[j] - 2.0 * c[j] * dm.target[j] + (mean_x - b[j]).powi(2))
        .sum();
    let mut cns = 0.0;
    for j in 0..m {
        for k in j + 1..m {
            cns += c[j] * c[j] + c[k] * c[k] - 2.0 * c[j] * c[k] * dm.cross[j][k]
                + (b[j] - b[k]).powi(2);
        }
    }
    lambda * mse + consensus_weight(lambda, m) * cns
}

/// `dL/dc_j = 2 lambda (c_j - E[X f_j]) + 2 (1-lambda)/(m-1) sum_{j' != j} (c_j - c_j' E[f_j f_j'])`.
pub fn stationarity_gradient(dm: &DirectionMoments, lambda: f64, c: &[f64]) -> Vec<f64> {
    let m = dm.agents();
    let w = consensus_weight(lambda, m);
    (0..m)
        .map(|j| {
            let consensus: f64 = (0..m)
                .filter(|&k| k != j)
                .map(|k| c[j] - c[k] * dm.cross[j][k])
                .sum();
            2.0 * lambda * (c[j] - dm.target[j]) + 2.0 * w * consensus
        })
        .collect()
}
