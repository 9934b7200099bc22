//! Exact posterior mean `E[X | one agent's readings]` under the
//! uniform-precision faulty-sensor model.
//!
//! The posterior is built directly from the generative law: for every
//! choice of `tau` faulty sensors, faulty readings contribute their marginal
//! probability and truthful readings contribute the conditional probability
//! of reporting that cell given `X = x`. Between consecutive endpoints the
//! resulting density is constant, so mass and first moment integrate in
//! closed form.

use crate::error::{FusionError, Result};
use crate::scenario::{Interval, ScenarioParams};
use crate::subsets::{members, SubsetsOfSize};

const LATTICE_TOL: f64 = 1e-9;

/// Unnormalized density, constant on each open piece between breakpoints
/// and zero outside them.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseDensity {
    pub breakpoints: Vec<f64>,
    pub levels: Vec<f64>,
}

impl PiecewiseDensity {
    fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.levels)
            .map(|(w, &level)| (w[0], w[1], level))
    }

    pub fn mass(&self) -> f64 {
        self.pieces().map(|(a, b, level)| level * (b - a)).sum()
    }

    pub fn first_moment(&self) -> f64 {
        self.pieces()
            .map(|(a, b, level)| level * (b * b - a * a) / 2.0)
            .sum()
    }

    pub fn mean(&self) -> Result<f64> {
        let mass = self.mass();
        if !(mass > 0.0) {
            return Err(FusionError::Inconsistent);
        }
        Ok(self.first_moment() / mass)
    }

    pub fn normalized(&self) -> Result<Self> {
        let mass = self.mass();
        if !(mass > 0.0) {
            return Err(FusionError::Inconsistent);
        }
        Ok(Self {
            breakpoints: self.breakpoints.clone(),
            levels: self.levels.iter().map(|l| l / mass).collect(),
        })
    }

    pub fn density_at(&self, x: f64) -> f64 {
        self.pieces()
            .find(|&(a, b, _)| a <= x && x < b)
            .map_or(0.0, |(_, _, level)| level)
    }
}

/// Precision of a lattice cell, or an error if `reading` is not one of the
/// cells the sensors can report.
fn lattice_precision(reading: &Interval, x_max: u32) -> Result<u32> {
    let off = || FusionError::OffLattice {
        lo: reading.lo,
        hi: reading.hi,
        x_max,
    };
    let range = 2.0 * f64::from(x_max);
    let width = reading.width();
    if !(width > 0.0) {
        return Err(off());
    }
    let precision = range / width;
    let rounded = precision.round();
    if (precision - rounded).abs() > LATTICE_TOL * rounded.max(1.0)
        || rounded < 1.0
        || rounded > f64::from(x_max)
    {
        return Err(off());
    }
    let index = (reading.lo + f64::from(x_max)) / width;
    let k = index.round();
    if (index - k).abs() > LATTICE_TOL * rounded || k < 0.0 || k >= rounded {
        return Err(off());
    }
    Ok(rounded as u32)
}

/// Posterior density of `X` given one agent's readings.
pub fn posterior_density(readings: &[Interval], tau: usize, x_max: u32) -> Result<PiecewiseDensity> {
    let n = readings.len();
    if n == 0 || tau >= n || n > 63 {
        return Err(FusionError::Precondition(format!(
            "need 0 <= tau < n <= 63, got n = {n}, tau = {tau}"
        )));
    }
    if x_max == 0 {
        return Err(FusionError::Precondition("x_max must be positive".into()));
    }
    let precisions = readings
        .iter()
        .map(|r| lattice_precision(r, x_max))
        .collect::<Result<Vec<u32>>>()?;

    let xm = f64::from(x_max);
    // P(reading = this cell) for a faulty sensor: P(precision) * P(phantom in cell)
    let faulty_marginal: Vec<f64> = precisions
        .iter()
        .map(|&d| 1.0 / (xm * f64::from(d)))
        .collect();
    // P(reading = this cell | X = x) for a truthful sensor, when x is in the cell
    let truthful_likelihood = 1.0 / xm;
    let prior = 1.0 / (2.0 * xm);

    let mut breakpoints: Vec<f64> = readings
        .iter()
        .flat_map(|r| [r.lo, r.hi])
        .chain([-xm, xm])
        .collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();

    let patterns: Vec<u64> = SubsetsOfSize::new(n, tau).collect();
    let levels = breakpoints
        .windows(2)
        .map(|w| {
            let x = (w[0] + w[1]) / 2.0;
            let contributions: f64 = patterns
                .iter()
                .map(|&faulty| {
                    let mut p = 1.0;
                    for (i, r) in readings.iter().enumerate() {
                        if faulty >> i & 1 == 1 {
                            p *= faulty_marginal[i];
                        } else if r.contains(x) {
                            p *= truthful_likelihood;
                        } else {
                            return 0.0;
                        }
                    }
                    p
                })
                .sum();
            prior * contributions
        })
        .collect();

    debug_assert!(patterns.iter().all(|&p| members(p).count() == tau));
    Ok(PiecewiseDensity { breakpoints, levels })
}

pub fn posterior_mean_exact(readings: &[Interval], tau: usize, x_max: u32) -> Result<f64> {
    posterior_density(readings, tau, x_max)?.mean()
}

pub fn posterior_mean_for(readings: &[Interval], params: &ScenarioParams) -> Result<f64> {
    posterior_mean_exact(readings, params.tau, params.x_max)
}
