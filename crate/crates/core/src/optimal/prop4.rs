//! Accuracy/consensus-optimal linear fusion for two agents from moments.
//!
//! Both agents use the same weight on every sensor (sensors are
//! exchangeable), so agent `j`'s direction is `eps_j * sum L + del_j * sum U`
//! up to a bias. The search treats `(eps_1, eps_2)` as outer variables. For
//! each `eps_j`, `del_j` is a real root of `xi_1 x^2 + xi_2 x + xi_3`, and
//! the candidate is scored by a closed-form objective in `theta_j` and `z`.
//!
//! Two variants are provided:
//!
//! * [`Prop4Form::UnitVariance`] (default): the quadratic is the unit
//!   variance constraint `Var(eps sum L + del sum U) = 1`, `z` is
//!   `(1 - lambda)` times the cross-agent correlation of the two directions,
//!   `theta_j = lambda Cov(X, f_j)` and the score is `-Theta A^-1 Theta^T`
//!   with `A = [[1, -z], [-z, 1]]`. The resulting amplitudes `c = A^-1 Theta`
//!   scale the directions into the returned coefficients.
//! * [`Prop4Form::Literal`]: the published closed form taken verbatim
//!   (constant term `n Var(L1) + n(n-1) Cov(L1, L2)`, `z` without the
//!   cross-agent terms, `theta_j` without `lambda`, and the published
//!   objective). Kept so that its gap to the empirical optimum can be
//!   reported.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::moments::MomentSet;
use super::simplex::{multistart, SimplexOptions};
use crate::error::{FusionError, Result};
use crate::fusion::LinearCoefficients;

const RESTARTS: usize = 20;
const SEARCH_SEED: u64 = 0x70_726f_7034;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Prop4Form {
    #[default]
    UnitVariance,
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop4Solution {
    pub form: Prop4Form,
    /// Direction weights on every lower endpoint, per agent.
    pub eps: [f64; 2],
    /// Direction weights on every upper endpoint; a root of the agent's quadratic.
    pub del: [f64; 2],
    /// Amplitude applied to each direction (1 for the literal form).
    pub amplitude: [f64; 2],
    /// `-n (eps E[L] + del E[U])` for the scaled coefficients.
    pub gamma: [f64; 2],
    /// `(xi_1, xi_2, xi_3)` per agent at the returned point.
    pub xi: [[f64; 3]; 2],
    pub z: f64,
    /// Value of the form's closed-form score at the returned point.
    pub objective_value: f64,
    /// Objective predicted from the moments (unit-variance form only).
    pub predicted_objective: Option<f64>,
    pub n: usize,
}

impl Prop4Solution {
    /// Per-agent coefficients of the fusion rule.
    pub fn coefficients(&self) -> Vec<LinearCoefficients> {
        (0..2)
            .map(|j| {
                LinearCoefficients::uniform(
                    self.n,
                    self.amplitude[j] * self.eps[j],
                    self.amplitude[j] * self.del[j],
                    self.gamma[j],
                )
            })
            .collect()
    }

    /// `xi_1 del^2 + xi_2 del + xi_3` per agent.
    pub fn quadratic_residuals(&self) -> [f64; 2] {
        [0, 1].map(|j| {
            let [a, b, c] = self.xi[j];
            a * self.del[j] * self.del[j] + b * self.del[j] + c
        })
    }
}

/// Sums over `n` exchangeable sensors.
struct Sums {
    var_l: f64,
    var_u: f64,
    cov_lu: f64,
    agent_ll: f64,
    agent_uu: f64,
    agent_lu: f64,
    cov_lx: f64,
    cov_ux: f64,
    // as printed in the closed form: Var(L1) without the factor n
    literal_ll: f64,
    literal_uu: f64,
}

impl Sums {
    fn new(m: &MomentSet, n: usize) -> Self {
        let nf = n as f64;
        let pairs = nf * (nf - 1.0);
        Self {
            var_l: m.var_sum_l(n),
            var_u: m.var_sum_u(n),
            cov_lu: m.cov_sum_lu(n),
            agent_ll: m.agent_cov_sum_l(n),
            agent_uu: m.agent_cov_sum_u(n),
            agent_lu: m.agent_cov_sum_lu(n),
            cov_lx: nf * m.cov_lx,
            cov_ux: nf * m.cov_ux,
            literal_ll: m.var_l + pairs * m.cov_ll,
            literal_uu: m.var_u + pairs * m.cov_uu,
        }
    }
}

struct Problem {
    form: Prop4Form,
    lambda: f64,
    s: Sums,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    eps: [f64; 2],
    del: [f64; 2],
    theta: [f64; 2],
    z: f64,
    score: f64,
}

impl Problem {
    fn xi(&self, eps: f64) -> [f64; 3] {
        let s = &self.s;
        let constant = match self.form {
            Prop4Form::UnitVariance => eps * eps * s.var_l - 1.0,
            Prop4Form::Literal => s.var_l,
        };
        [s.var_u, 2.0 * eps * s.cov_lu, constant]
    }

    fn roots(&self, eps: f64) -> Vec<f64> {
        let [a, b, c] = self.xi(eps);
        let scale = a.abs().max(b.abs()).max(c.abs());
        if scale == 0.0 {
            return Vec::new();
        }
        if a.abs() <= 1e-14 * scale {
            return if b.abs() > 1e-14 * scale { vec![-c / b] } else { Vec::new() };
        }
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return Vec::new();
        }
        let sq = disc.sqrt();
        // numerically stable pair
        let q = -0.5 * (b + b.signum() * sq);
        if q == 0.0 {
            return vec![0.0];
        }
        vec![q / a, c / q]
    }

    fn score(&self, eps: [f64; 2], del: [f64; 2]) -> Option<Candidate> {
        let s = &self.s;
        let lbar = 1.0 - self.lambda;
        let cross = eps[0] * del[1] + eps[1] * del[0];
        let t = [0, 1].map(|j| eps[j] * s.cov_lx + del[j] * s.cov_ux);
        let (theta, z) = match self.form {
            Prop4Form::UnitVariance => (
                t.map(|v| self.lambda * v),
                lbar * (eps[0] * eps[1] * s.agent_ll + del[0] * del[1] * s.agent_uu + cross * s.agent_lu),
            ),
            Prop4Form::Literal => (
                t,
                -lbar * (eps[0] * eps[1] * s.literal_ll + del[0] * del[1] * s.literal_uu + cross * s.cov_lu),
            ),
        };
        let det = 1.0 - z * z;
        if det.abs() < 1e-12 {
            return None;
        }
        let [a, b] = theta;
        let score = match self.form {
            Prop4Form::UnitVariance => -(a * a + b * b + 2.0 * z * a * b) / det,
            Prop4Form::Literal => (a * a + b * b) / det + 2.0 * z * (a + b).powi(2) / (det * det),
        };
        score.is_finite().then_some(Candidate {
            eps,
            del,
            theta,
            z,
            score,
        })
    }

    /// Best candidate over the root choices for both agents.
    fn best_at(&self, eps: [f64; 2]) -> Option<Candidate> {
        let r0 = self.roots(eps[0]);
        let r1 = self.roots(eps[1]);
        r0.iter()
            .flat_map(|&d0| r1.iter().map(move |&d1| [d0, d1]))
            .filter_map(|del| self.score(eps, del))
            .min_by(|a, b| a.score.total_cmp(&b.score))
    }

    fn half_width(&self) -> f64 {
        let s = &self.s;
        match self.form {
            Prop4Form::UnitVariance => {
                // |eps| beyond sqrt(V_U / det) leaves no real root
                let det = s.var_l * s.var_u - s.cov_lu * s.cov_lu;
                if det > 1e-12 * s.var_l * s.var_u {
                    1.05 * (s.var_u / det).sqrt()
                } else {
                    1.0 / s.var_l.max(1e-300).sqrt()
                }
            }
            // real roots need |eps| >= sqrt(V_U V_L) / |C|
            Prop4Form::Literal => 4.0 * (s.var_l * s.var_u).sqrt() / s.cov_lu.abs().max(1e-300),
        }
    }
}

/// Unit-variance form; see [`solve_prop4_with`].
pub fn solve_prop4(moments: &MomentSet, lambda: f64, n: usize) -> Result<Prop4Solution> {
    solve_prop4_with(moments, lambda, n, Prop4Form::UnitVariance)
}

pub fn solve_prop4_with(
    moments: &MomentSet,
    lambda: f64,
    n: usize,
    form: Prop4Form,
) -> Result<Prop4Solution> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(FusionError::Precondition(format!(
            "lambda = {lambda} must lie strictly between 0 and 1"
        )));
    }
    if n < 2 {
        return Err(FusionError::Precondition("need at least two sensors".into()));
    }
    let problem = Problem {
        form,
        lambda,
        s: Sums::new(moments, n),
    };
    let half = problem.half_width();
    if !half.is_finite() {
        return Err(FusionError::Infeasible(format!(
            "{form:?}: search box is unbounded (sum variances {:.3e}, {:.3e}, covariance {:.3e})",
            problem.s.var_l, problem.s.var_u, problem.s.cov_lu
        )));
    }

    let objective = |x: &[f64]| {
        problem
            .best_at([x[0], x[1]])
            .map_or(f64::INFINITY, |c| c.score)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SEARCH_SEED);
    let found = multistart(objective, &[half, half], RESTARTS, &SimplexOptions::default(), &mut rng)
        .and_then(|m| problem.best_at([m.x[0], m.x[1]]))
        .ok_or_else(|| {
            FusionError::Infeasible(format!(
                "{form:?}: no (eps_1, eps_2) in [-{half:.3e}, {half:.3e}]^2 gives real roots for both \
                 agents (sum variances {:.3e}, {:.3e}, covariance {:.3e})",
                problem.s.var_l, problem.s.var_u, problem.s.cov_lu
            ))
        })?;

    let mut cand = found;
    let (amplitude, predicted) = match form {
        Prop4Form::UnitVariance => {
            // a direction and its negation are the same up to the amplitude
            // sign; orient each so that it correlates positively with X
            for j in 0..2 {
                if cand.theta[j] < 0.0 {
                    cand.eps[j] = -cand.eps[j];
                    cand.del[j] = -cand.del[j];
                }
            }
            cand = problem.score(cand.eps, cand.del).unwrap_or(cand);
            let det = 1.0 - cand.z * cand.z;
            let [a, b] = cand.theta;
            let c = [(a + cand.z * b) / det, (cand.z * a + b) / det];
            let predicted = 2.0 * lambda * moments.var_x + cand.score;
            (c, Some(predicted))
        }
        Prop4Form::Literal => ([1.0, 1.0], None),
    };

    let nf = n as f64;
    let gamma = [0, 1].map(|j| {
        let e = amplitude[j] * cand.eps[j];
        let d = amplitude[j] * cand.del[j];
        -nf * (e * moments.mean_l + d * moments.mean_u)
    });

    Ok(Prop4Solution {
        form,
        eps: cand.eps,
        del: cand.del,
        amplitude,
        gamma,
        xi: [problem.xi(cand.eps[0]), problem.xi(cand.eps[1])],
        z: cand.z,
        objective_value: cand.score,
        predicted_objective: predicted,
        n,
    })
}
