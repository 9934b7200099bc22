//! Nelder-Mead simplex search with random restarts.

use rand::Rng;

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub max_iter: usize,
    /// Stop once the simplex diameter falls below this.
    pub x_tol: f64,
    pub f_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iter: 5_000,
            x_tol: 1e-11,
            f_tol: 1e-14,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn eval<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64]) -> f64 {
    let v = f(x);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` starting from `x0` with an axis-aligned initial simplex of
/// edge `step[i]`. Non-finite objective values act as walls.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: &[f64], opts: &SimplexOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += step[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(&mut f, v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let spread = values[dim] - values[0];
        if diameter <= opts.x_tol
            || (spread.is_finite() && spread <= opts.f_tol * values[0].abs().max(1e-300) && diameter <= opts.x_tol.sqrt())
        {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; dim];
        for v in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim as f64;
            }
        }
        let toward = |coef: f64, from: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, x)| c + coef * (x - c))
                .collect()
        };

        let reflected = toward(-alpha, &simplex[dim]);
        let f_r = eval(&mut f, &reflected);
        if f_r < values[0] {
            let expanded = toward(-alpha * gamma, &simplex[dim]);
            let f_e = eval(&mut f, &expanded);
            if f_e < f_r {
                simplex[dim] = expanded;
                values[dim] = f_e;
            } else {
                simplex[dim] = reflected;
                values[dim] = f_r;
            }
            continue;
        }
        if f_r < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = f_r;
            continue;
        }

        let (contracted, f_c) = if f_r < values[dim] {
            let c = toward(-alpha * rho, &simplex[dim]);
            let v = eval(&mut f, &c);
            (c, v)
        } else {
            let c = toward(rho, &simplex[dim]);
            let v = eval(&mut f, &c);
            (c, v)
        };
        if f_c < values[dim].min(f_r) {
            simplex[dim] = contracted;
            values[dim] = f_c;
            continue;
        }

        // shrink toward the best vertex
        let best = simplex[0].clone();
        for k in 1..=dim {
            for (x, b) in simplex[k].iter_mut().zip(&best) {
                *x = b + sigma * (*x - b);
            }
            values[k] = eval(&mut f, &simplex[k]);
        }
    }

    let best = (0..=dim)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}

/// Runs `restarts` searches from uniform starting points in the box
/// `[-half_width[i], half_width[i]]` and keeps the best. Starting points
/// with a non-finite objective are redrawn (up to a bounded number of
/// tries). Returns `None` if no finite start was found.
pub fn multistart<F, R>(
    mut f: F,
    half_width: &[f64],
    restarts: usize,
    opts: &SimplexOptions,
    rng: &mut R,
) -> Option<Minimum>
where
    F: FnMut(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    const DRAWS_PER_START: usize = 2_000;
    let step: Vec<f64> = half_width.iter().map(|h| 0.1 * h).collect();
    let mut best: Option<Minimum> = None;
    for _ in 0..restarts {
        let start = (0..DRAWS_PER_START).find_map(|_| {
            let x: Vec<f64> = half_width
                .iter()
                .map(|&h| if h > 0.0 { rng.gen_range(-h..=h) } else { 0.0 })
                .collect();
            eval(&mut f, &x).is_finite().then_some(x)
        });
        let Some(start) = start else { continue };
        let found = nelder_mead(&mut f, &start, &step, opts);
        if best.as_ref().is_none_or(|b| found.value < b.value) {
            best = Some(found);
        }
    }
    best
}
