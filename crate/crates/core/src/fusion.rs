//! Per-agent fusion rules. Each takes the `n` intervals one agent received
//! and returns a point estimate of the target.

use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};
use crate::scenario::Interval;
use crate::subsets::{members, SubsetsOfSize};

fn sorted(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values
}

fn check_marzullo(readings: &[Interval], tau: usize) -> Result<()> {
    if readings.len() < tau + 2 {
        return Err(FusionError::Precondition(format!(
            "Marzullo needs n >= tau + 2, got n = {}, tau = {tau}",
            readings.len()
        )));
    }
    Ok(())
}

/// `(L_(tau+1) + U_(n-tau-1)) / 2` with both endpoint lists sorted ascending
/// and 1-based order statistics.
pub fn fuse_marzullo(readings: &[Interval], tau: usize) -> Result<f64> {
    check_marzullo(readings, tau)?;
    let n = readings.len();
    let lows = sorted(readings.iter().map(|r| r.lo).collect());
    let highs = sorted(readings.iter().map(|r| r.hi).collect());
    Ok((lows[tau] + highs[n - tau - 2]) / 2.0)
}

/// Classical Marzullo variant: midpoint of the smallest interval holding
/// every point covered by at least `n - tau` readings. Kept for comparison
/// with [`fuse_marzullo`], which differs on some inputs.
pub fn fuse_marzullo_hull(readings: &[Interval], tau: usize) -> Result<f64> {
    check_marzullo(readings, tau)?;
    let profile = transition_profile(readings);
    let need = readings.len() - tau;
    let mut covered = profile
        .regions()
        .filter(|&(_, _, count)| count >= need)
        .map(|(a, b, _)| (a, b));
    let first = covered.next().ok_or_else(|| {
        FusionError::Degenerate(format!("no region is covered by {need} intervals"))
    })?;
    let (lo, hi) = covered.fold(first, |(lo, _), (_, b)| (lo, b));
    Ok((lo + hi) / 2.0)
}

/// Coverage count `g(x) = #{i : x in [lo_i, hi_i]}` summarized on the open
/// regions between consecutive distinct endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionProfile {
    pub points: Vec<f64>,
    pub counts: Vec<usize>,
}

impl TransitionProfile {
    /// `(left, right, count)` for every open region.
    pub fn regions(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        self.points
            .windows(2)
            .zip(&self.counts)
            .map(|(w, &c)| (w[0], w[1], c))
    }
}

/// Every distinct endpoint is a transition point: the closed interval that
/// owns it makes `g` at the point differ from `g` on at least one side.
pub fn transition_profile(readings: &[Interval]) -> TransitionProfile {
    let lows = sorted(readings.iter().map(|r| r.lo).collect());
    let highs = sorted(readings.iter().map(|r| r.hi).collect());
    let mut points: Vec<f64> = lows.iter().chain(&highs).copied().collect();
    points.sort_by(f64::total_cmp);
    points.dedup();

    // (p_k, p_{k+1}) lies inside [lo, hi] iff lo <= p_k < hi
    let counts = points
        .iter()
        .take(points.len().saturating_sub(1))
        .map(|&p| lows.partition_point(|&l| l <= p) - highs.partition_point(|&h| h <= p))
        .collect();
    TransitionProfile { points, counts }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiEstimate {
    pub value: f64,
    /// Set when no region reached `n - tau` and the maximal-count regions
    /// were used instead.
    pub fallback: bool,
}

/// Brooks-Iyengar: count-weighted mean of the midpoints of regions covered
/// by at least `n - tau` intervals.
pub fn fuse_bi(readings: &[Interval], tau: usize) -> Result<BiEstimate> {
    if readings.is_empty() {
        return Err(FusionError::Precondition("no readings".into()));
    }
    let profile = transition_profile(readings);
    if profile.counts.is_empty() {
        // every interval is the same single point
        return Ok(BiEstimate {
            value: profile.points[0],
            fallback: true,
        });
    }

    let need = readings.len().saturating_sub(tau);
    let best = profile.counts.iter().copied().max().unwrap_or(0);
    let (threshold, fallback) = if best >= need {
        (need, false)
    } else {
        (best, true)
    };

    let mut num = 0.0;
    let mut den = 0.0;
    let mut hits = 0usize;
    let mut plain = 0.0;
    for (a, b, count) in profile.regions() {
        if count >= threshold && (!fallback || count == best) {
            let mid = (a + b) / 2.0;
            num += mid * count as f64;
            den += count as f64;
            plain += mid;
            hits += 1;
        }
    }
    let value = if den > 0.0 {
        num / den
    } else {
        // every region is uncovered (only zero-width readings)
        plain / hits as f64
    };
    Ok(BiEstimate { value, fallback })
}

/// Weight and intersection midpoint for one candidate set of truthful sensors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternWeight {
    /// Bitmask of the sensors assumed truthful (size `n - tau`).
    pub truthful: u64,
    pub weight: f64,
    pub midpoint: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbiWeights {
    pub patterns: Vec<PatternWeight>,
}

impl GbiWeights {
    pub fn total(&self) -> f64 {
        self.patterns.iter().map(|p| p.weight).sum()
    }
}

/// Weights that make GBI the posterior mean under the uniform-precision
/// model: for each `(n - tau)`-subset `S`, the length of the intersection of
/// `S`'s intervals times the product of their inverse widths.
pub fn gbi_weights_oneopt(readings: &[Interval], tau: usize) -> Result<GbiWeights> {
    let n = readings.len();
    if n == 0 || tau >= n {
        return Err(FusionError::Precondition(format!(
            "need tau < n, got n = {n}, tau = {tau}"
        )));
    }
    if n > 63 {
        return Err(FusionError::Precondition("at most 63 sensors".into()));
    }
    if let Some(r) = readings.iter().find(|r| !(r.hi > r.lo)) {
        return Err(FusionError::Precondition(format!(
            "zero-width reading [{}, {}] has no density",
            r.lo, r.hi
        )));
    }

    let patterns = SubsetsOfSize::new(n, n - tau)
        .map(|mask| {
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            let mut inv_width = 1.0;
            for i in members(mask) {
                let r = readings[i];
                lo = lo.max(r.lo);
                hi = hi.min(r.hi);
                inv_width /= r.width();
            }
            let overlap = hi - lo;
            if overlap > 0.0 {
                PatternWeight {
                    truthful: mask,
                    weight: overlap * inv_width,
                    midpoint: (hi + lo) / 2.0,
                }
            } else {
                PatternWeight {
                    truthful: mask,
                    weight: 0.0,
                    midpoint: 0.0,
                }
            }
        })
        .collect();
    Ok(GbiWeights { patterns })
}

pub fn fuse_gbi(weights: &GbiWeights) -> Result<f64> {
    let (num, den) = weights
        .patterns
        .iter()
        .fold((0.0, 0.0), |(num, den), p| {
            (num + p.weight * p.midpoint, den + p.weight)
        });
    if !(den > 0.0) {
        return Err(FusionError::Degenerate(
            "all GBI weights are zero".into(),
        ));
    }
    Ok(num / den)
}

/// `sum_i eps_i * lo_i + del_i * hi_i + gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearCoefficients {
    pub eps: Vec<f64>,
    pub del: Vec<f64>,
    pub gamma: f64,
}

impl LinearCoefficients {
    /// Same weights on every sensor.
    pub fn uniform(n: usize, eps: f64, del: f64, gamma: f64) -> Self {
        Self {
            eps: vec![eps; n],
            del: vec![del; n],
            gamma,
        }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self::uniform(n, 0.0, 0.0, value)
    }
}

pub fn fuse_linear(readings: &[Interval], coeffs: &LinearCoefficients) -> Result<f64> {
    if coeffs.eps.len() != readings.len() || coeffs.del.len() != readings.len() {
        return Err(FusionError::Precondition(format!(
            "coefficient length {} / {} does not match {} readings",
            coeffs.eps.len(),
            coeffs.del.len(),
            readings.len()
        )));
    }
    Ok(readings
        .iter()
        .zip(coeffs.eps.iter().zip(&coeffs.del))
        .map(|(r, (e, d))| e * r.lo + d * r.hi)
        .sum::<f64>()
        + coeffs.gamma)
}
