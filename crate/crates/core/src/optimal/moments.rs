use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};
use crate::scenario::{derive_seed, trial_at, ScenarioParams};

const MOMENT_STREAM: u64 = 0x6d6f_6d65_6e74;

/// Sensor-exchangeable first and second moments of one agent's readings
/// and the target. "Distinct" entries pair two different sensors; the
/// `agent_*` entries pair the same sensor as seen by two different agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub mean_x: f64,
    pub var_x: f64,
    pub mean_l: f64,
    pub mean_u: f64,
    /// Var(L1)
    pub var_l: f64,
    /// Cov(L1, L2), distinct sensors
    pub cov_ll: f64,
    /// Var(U1)
    pub var_u: f64,
    /// Cov(U1, U2), distinct sensors
    pub cov_uu: f64,
    /// Cov(L1, U1), same sensor
    pub cov_lu_same: f64,
    /// Cov(L1, U2), distinct sensors
    pub cov_lu_distinct: f64,
    pub cov_lx: f64,
    pub cov_ux: f64,
    /// Cov(L_{1,a}, L_{1,b}) for agents a != b
    pub agent_ll: f64,
    pub agent_uu: f64,
    pub agent_lu: f64,
    pub sample_count: usize,
}

impl MomentSet {
    /// Var(sum_i L_i) for `n` exchangeable sensors.
    pub fn var_sum_l(&self, n: usize) -> f64 {
        sum_cov(n, self.var_l, self.cov_ll)
    }

    pub fn var_sum_u(&self, n: usize) -> f64 {
        sum_cov(n, self.var_u, self.cov_uu)
    }

    /// Cov(sum_i L_i, sum_i U_i) within one agent.
    pub fn cov_sum_lu(&self, n: usize) -> f64 {
        sum_cov(n, self.cov_lu_same, self.cov_lu_distinct)
    }

    /// Cov of the lower-endpoint sums seen by two different agents.
    pub fn agent_cov_sum_l(&self, n: usize) -> f64 {
        sum_cov(n, self.agent_ll, self.cov_ll)
    }

    pub fn agent_cov_sum_u(&self, n: usize) -> f64 {
        sum_cov(n, self.agent_uu, self.cov_uu)
    }

    pub fn agent_cov_sum_lu(&self, n: usize) -> f64 {
        sum_cov(n, self.agent_lu, self.cov_lu_distinct)
    }
}

fn sum_cov(n: usize, same: f64, distinct: f64) -> f64 {
    let n = n as f64;
    n * same + n * (n - 1.0) * distinct
}

/// Per-trial sums; every field is an unbiased single-trial estimate of the
/// corresponding raw moment.
#[derive(Debug, Clone, Copy, Default)]
struct TrialMoments {
    x: f64,
    xx: f64,
    l: f64,
    u: f64,
    ll: f64,
    uu: f64,
    lu: f64,
    ll_distinct: f64,
    uu_distinct: f64,
    lu_distinct: f64,
    lx: f64,
    ux: f64,
    agent_ll: f64,
    agent_uu: f64,
    agent_lu: f64,
}

fn trial_moments(params: &ScenarioParams, index: u64) -> TrialMoments {
    let trial = trial_at(params, index);
    let n = params.n as f64;
    let pairs = n * (n - 1.0);
    let first = trial.readings.agent(0);
    let second = trial.readings.agent(1);

    let (mut sl, mut su, mut sll, mut suu, mut slu) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in first {
        sl += r.lo;
        su += r.hi;
        sll += r.lo * r.lo;
        suu += r.hi * r.hi;
        slu += r.lo * r.hi;
    }
    let (mut all, mut auu, mut alu) = (0.0, 0.0, 0.0);
    for (a, b) in first.iter().zip(second) {
        all += a.lo * b.lo;
        auu += a.hi * b.hi;
        alu += (a.lo * b.hi + a.hi * b.lo) / 2.0;
    }
    let x = trial.x;
    TrialMoments {
        x,
        xx: x * x,
        l: sl / n,
        u: su / n,
        ll: sll / n,
        uu: suu / n,
        lu: slu / n,
        ll_distinct: (sl * sl - sll) / pairs,
        uu_distinct: (su * su - suu) / pairs,
        lu_distinct: (sl * su - slu) / pairs,
        lx: x * sl / n,
        ux: x * su / n,
        agent_ll: all / n,
        agent_uu: auu / n,
        agent_lu: alu / n,
    }
}

/// Unbiased `E[A] E[B]` from paired per-trial values of `A` and `B`.
fn product_of_means(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let sa: f64 = a.iter().sum();
    let sb: f64 = b.iter().sum();
    let sab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (sa * sb - sab) / (n * (n - 1.0))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample moments of the model, pooled over sensors (and sensor pairs) in
/// every trial. Covariances subtract an unbiased estimate of the product
/// of means, so each entry is unbiased.
pub fn estimate_moments(params: &ScenarioParams, samples: usize) -> Result<MomentSet> {
    params.validate()?;
    if samples < 1000 {
        return Err(FusionError::Precondition(format!(
            "moment estimation needs at least 1000 samples, got {samples}"
        )));
    }
    // moments do not depend on m, but the cross-agent terms need two agents
    let sampling = ScenarioParams {
        m: params.m.max(2),
        seed: derive_seed(params.seed, MOMENT_STREAM),
        ..*params
    };
    let rows: Vec<TrialMoments> = (0..samples as u64)
        .into_par_iter()
        .map(|t| trial_moments(&sampling, t))
        .collect();

    let col = |f: fn(&TrialMoments) -> f64| -> Vec<f64> { rows.iter().map(f).collect() };
    let x = col(|r| r.x);
    let l = col(|r| r.l);
    let u = col(|r| r.u);
    let xx = product_of_means(&x, &x);
    let lx = product_of_means(&l, &x);
    let ux = product_of_means(&u, &x);
    let ll = product_of_means(&l, &l);
    let uu = product_of_means(&u, &u);
    let lu = product_of_means(&l, &u);

    Ok(MomentSet {
        mean_x: mean(&x),
        var_x: mean(&col(|r| r.xx)) - xx,
        mean_l: mean(&l),
        mean_u: mean(&u),
        var_l: mean(&col(|r| r.ll)) - ll,
        cov_ll: mean(&col(|r| r.ll_distinct)) - ll,
        var_u: mean(&col(|r| r.uu)) - uu,
        cov_uu: mean(&col(|r| r.uu_distinct)) - uu,
        cov_lu_same: mean(&col(|r| r.lu)) - lu,
        cov_lu_distinct: mean(&col(|r| r.lu_distinct)) - lu,
        cov_lx: mean(&col(|r| r.lx)) - lx,
        cov_ux: mean(&col(|r| r.ux)) - ux,
        agent_ll: mean(&col(|r| r.agent_ll)) - ll,
        agent_uu: mean(&col(|r| r.agent_uu)) - uu,
        agent_lu: mean(&col(|r| r.agent_lu)) - lu,
        sample_count: samples,
    })
}
