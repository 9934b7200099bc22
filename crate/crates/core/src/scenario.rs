//! Uniform-precision faulty-sensor model.
//!
//! The target `X` is uniform on `[-x_max, x_max]`. Every sensor draws a
//! precision `d` uniformly from `{1, .., x_max}`, splits the range into `d`
//! equal cells and reports the cell containing `X`. A truthful sensor sends
//! the same cell to every agent. A faulty sensor sends each agent an
//! independent reading with the same marginal law as a truthful one, drawn
//! from a phantom target that is independent of everything else.
//!
//! Each trial has its own random stream derived from `(seed, trial index)`,
//! so trials can be generated in any order or in parallel.

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};

/// A closed interval `[lo, hi]` reported by one sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(FusionError::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        (self.lo + self.hi) / 2.0
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn shifted(&self, by: f64) -> Self {
        Self {
            lo: self.lo + by,
            hi: self.hi + by,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Sensor count.
    pub n: usize,
    /// Agent count.
    pub m: usize,
    /// Number of faulty sensors per trial.
    pub tau: usize,
    /// Target half-range; also the largest precision.
    pub x_max: u32,
    pub seed: u64,
}

impl ScenarioParams {
    pub fn new(n: usize, m: usize, tau: usize, x_max: u32, seed: u64) -> Result<Self> {
        let params = Self {
            n,
            m,
            tau,
            x_max,
            seed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(FusionError::InvalidScenario("m must be positive".into()));
        }
        if self.n < self.tau + 2 {
            return Err(FusionError::InvalidScenario(format!(
                "need n >= tau + 2, got n = {}, tau = {}",
                self.n, self.tau
            )));
        }
        if self.n > 63 {
            return Err(FusionError::InvalidScenario(format!(
                "at most 63 sensors are supported, got {}",
                self.n
            )));
        }
        if self.x_max == 0 {
            return Err(FusionError::InvalidScenario("x_max must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_tau(mut self, tau: usize) -> Result<Self> {
        self.tau = tau;
        self.validate()?;
        Ok(self)
    }
}

/// Which sensors are faulty in one trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultPattern {
    pub flags: Vec<bool>,
}

impl FaultPattern {
    pub fn faulty_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn is_faulty(&self, sensor: usize) -> bool {
        self.flags[sensor]
    }
}

/// Readings of all `n` sensors as received by all `m` agents, stored
/// agent-major so that one agent's readings form a contiguous slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadingMatrix {
    n: usize,
    m: usize,
    data: Vec<Interval>,
}

impl ReadingMatrix {
    pub fn from_agents(agents: Vec<Vec<Interval>>) -> Result<Self> {
        let m = agents.len();
        let n = agents.first().map_or(0, Vec::len);
        if m == 0 || n == 0 || agents.iter().any(|a| a.len() != n) {
            return Err(FusionError::Precondition(
                "reading matrix must be non-empty and rectangular".into(),
            ));
        }
        Ok(Self {
            n,
            m,
            data: agents.into_iter().flatten().collect(),
        })
    }

    pub fn sensors(&self) -> usize {
        self.n
    }

    pub fn agents(&self) -> usize {
        self.m
    }

    /// The `n` intervals seen by agent `j`.
    pub fn agent(&self, j: usize) -> &[Interval] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn get(&self, sensor: usize, agent: usize) -> Interval {
        self.data[agent * self.n + sensor]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialData {
    pub x: f64,
    pub readings: ReadingMatrix,
    pub pattern: FaultPattern,
    /// Precision behind every reading, same agent-major layout as `readings`.
    /// Faulty sensors draw a fresh precision per agent.
    precisions: Vec<u32>,
}

impl TrialData {
    pub fn precision(&self, sensor: usize, agent: usize) -> u32 {
        self.precisions[agent * self.readings.sensors() + sensor]
    }
}

/// Deterministic random stream for trial `index` under root `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mixes a root seed with a purpose tag (splitmix64 finalizer) so that
/// independent consumers of one root seed do not share streams.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn draw_target<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> f64 {
    let x_max = f64::from(params.x_max);
    Uniform::new_inclusive(-x_max, x_max).sample(rng)
}

fn draw_precision<R: Rng + ?Sized>(x_max: u32, rng: &mut R) -> u32 {
    rng.gen_range(1..=x_max)
}

/// Endpoints of cell `d` (1-based) when `[-x_max, x_max]` is split into
/// `precision` equal cells.
pub fn cell(d: u32, precision: u32, x_max: u32) -> Interval {
    let p = f64::from(precision);
    let x_max = f64::from(x_max);
    let k = f64::from(d);
    Interval {
        lo: x_max * (2.0 * (k - 1.0) - p) / p,
        hi: x_max * (2.0 * k - p) / p,
    }
}

/// 1-based index of the cell containing `x`; interior boundaries go to the
/// lower cell and `-x_max` to cell 1.
fn cell_index(x: f64, precision: u32, x_max: u32) -> u32 {
    let t = (x + f64::from(x_max)) * f64::from(precision) / (2.0 * f64::from(x_max));
    (t.ceil() as i64).clamp(1, i64::from(precision)) as u32
}

pub fn truthful_interval(x: f64, precision: u32, x_max: u32) -> Result<Interval> {
    if precision == 0 {
        return Err(FusionError::Precondition("precision must be positive".into()));
    }
    let bound = f64::from(x_max);
    if !x.is_finite() || x < -bound || x > bound {
        return Err(FusionError::OutOfRange { x, x_max });
    }
    Ok(cell(cell_index(x, precision, x_max), precision, x_max))
}

/// One faulty reading: a fresh precision and a phantom target, pushed
/// through the truthful cell mechanism.
pub fn draw_faulty_reading<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> Interval {
    draw_faulty_with_precision(params, rng).0
}

fn draw_faulty_with_precision<R: Rng + ?Sized>(
    params: &ScenarioParams,
    rng: &mut R,
) -> (Interval, u32) {
    let precision = draw_precision(params.x_max, rng);
    let phantom = draw_target(params, rng);
    let d = cell_index(phantom, precision, params.x_max);
    (cell(d, precision, params.x_max), precision)
}

pub fn draw_fault_pattern<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> FaultPattern {
    let mut flags = vec![false; params.n];
    for i in rand::seq::index::sample(rng, params.n, params.tau) {
        flags[i] = true;
    }
    FaultPattern { flags }
}

pub fn generate_trial<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> TrialData {
    let (n, m) = (params.n, params.m);
    let x = draw_target(params, rng);
    let pattern = draw_fault_pattern(params, rng);

    let mut data = vec![Interval { lo: 0.0, hi: 0.0 }; n * m];
    let mut precisions = vec![0u32; n * m];
    for i in 0..n {
        if pattern.flags[i] {
            for j in 0..m {
                let (reading, precision) = draw_faulty_with_precision(params, rng);
                data[j * n + i] = reading;
                precisions[j * n + i] = precision;
            }
        } else {
            let precision = draw_precision(params.x_max, rng);
            let reading = cell(cell_index(x, precision, params.x_max), precision, params.x_max);
            for j in 0..m {
                data[j * n + i] = reading;
                precisions[j * n + i] = precision;
            }
        }
    }

    TrialData {
        x,
        readings: ReadingMatrix { n, m, data },
        pattern,
        precisions,
    }
}

/// Trial `index` of the stream rooted at `params.seed`.
pub fn trial_at(params: &ScenarioParams, index: u64) -> TrialData {
    generate_trial(params, &mut trial_rng(params.seed, index))
}
