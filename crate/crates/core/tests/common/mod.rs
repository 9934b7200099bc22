//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use faultfuse::optimal::DirectionMoments;
use faultfuse::Interval;
use rand::Rng;

/// Brooks-Iyengar recomputed by sampling the coverage count `g` on a grid
/// of step 0.25, for readings with integer endpoints. Transition points are
/// grid points where `g` exceeds a neighbour (closed intervals make every
/// endpoint such a point); each region between
/// consecutive transitions takes the count found just inside it.
pub fn grid_bi(readings: &[Interval], tau: usize) -> f64 {
    const STEP: f64 = 0.25;
    let g = |x: f64| readings.iter().filter(|r| r.lo <= x && x <= r.hi).count();
    let lo = readings.iter().map(|r| r.lo).fold(f64::INFINITY, f64::min) - 1.0;
    let hi = readings.iter().map(|r| r.hi).fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let steps = ((hi - lo) / STEP).round() as i64;
    let transitions: Vec<f64> = (1..steps)
        .map(|k| lo + k as f64 * STEP)
        .filter(|&x| g(x) > g(x - STEP) || g(x) > g(x + STEP))
        .collect();
    let regions: Vec<(f64, usize)> = transitions
        .windows(2)
        .map(|w| ((w[0] + w[1]) / 2.0, g(w[0] + STEP / 2.0)))
        .collect();
    let need = readings.len() - tau;
    let best = regions.iter().map(|r| r.1).max().unwrap_or(0);
    let threshold = if best >= need { need } else { best };
    let (num, den) = regions
        .iter()
        .filter(|r| r.1 >= threshold && (best >= need || r.1 == best))
        .fold((0.0, 0.0), |(n, d), &(mid, c)| (n + mid * c as f64, d + c as f64));
    num / den
}

/// Posterior mean of the target by midpoint-rule integration on `points`
/// grid cells over `[-x_max, x_max]`. The likelihood of each fault pattern
/// is built directly: a faulty sensor's reading has probability
/// `1 / (x_max * precision)`, a truthful one `1 / x_max` if it contains `x`.
pub fn grid_posterior_mean(readings: &[Interval], tau: usize, x_max: u32, points: usize) -> f64 {
    let n = readings.len();
    let xm = x_max as f64;
    let faulty_factor: Vec<f64> = readings
        .iter()
        .map(|r| {
            let precision = (2.0 * xm / r.width()).round();
            1.0 / (xm * precision)
        })
        .collect();
    // likelihood summed over patterns, indexed by the set of sensors
    // whose reading contains x
    let table: Vec<f64> = (0..1u64 << n)
        .map(|inside| {
            (0..1u64 << n)
                .filter(|f| f.count_ones() as usize == tau)
                .filter(|f| (!f & ((1 << n) - 1)) & !inside == 0)
                .map(|f| {
                    (0..n)
                        .map(|i| if f >> i & 1 == 1 { faulty_factor[i] } else { 1.0 / xm })
                        .product::<f64>()
                })
                .sum()
        })
        .collect();
    let h = 2.0 * xm / points as f64;
    let (mut mass, mut moment) = (0.0, 0.0);
    for k in 0..points {
        let x = -xm + (k as f64 + 0.5) * h;
        let inside = readings
            .iter()
            .enumerate()
            .filter(|(_, r)| r.lo <= x && x <= r.hi)
            .fold(0u64, |acc, (i, _)| acc | 1 << i);
        let d = table[inside as usize];
        mass += d;
        moment += d * x;
    }
    moment / mass
}

/// Consistent random direction moments: directions `f_j = b_j . g / |b_j|`
/// and target `X = a . g + s e` for standard white `g` and `e`.
/// Returns the moments and `Var(X)`.
pub fn random_direction_moments<R: Rng>(rng: &mut R, m: usize) -> (DirectionMoments, f64) {
    let k = m + 2;
    let unit = |rng: &mut R| {
        let v: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect::<Vec<f64>>()
    };
    let b: Vec<Vec<f64>> = (0..m).map(|_| unit(rng)).collect();
    let a: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let s: f64 = rng.gen_range(0.1..1.0);
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
    let cross = (0..m)
        .map(|j| (0..m).map(|l| if j == l { 1.0 } else { dot(&b[j], &b[l]) }).collect())
        .collect();
    let target = b.iter().map(|bj| dot(&a, bj)).collect();
    (DirectionMoments { cross, target }, dot(&a, &a) + s * s)
}
