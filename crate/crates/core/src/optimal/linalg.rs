//! Small dense systems (m <= 16) by Gaussian elimination with partial pivoting.

pub type Matrix = Vec<Vec<f64>>;

/// Inverse of a square matrix, or `None` when a pivot vanishes.
pub fn invert(a: &[Vec<f64>]) -> Option<Matrix> {
    let n = a.len();
    let mut work: Matrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();

    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| work[r][col].abs().total_cmp(&work[s][col].abs()))?;
        if work[pivot][col] == 0.0 || !work[pivot][col].is_finite() {
            return None;
        }
        work.swap(col, pivot);
        let p = work[col][col];
        for v in work[col].iter_mut() {
            *v /= p;
        }
        let pivot_row = work[col].clone();
        for (r, row) in work.iter_mut().enumerate() {
            if r == col {
                continue;
            }
            let factor = row[col];
            if factor != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
            }
        }
    }
    Some(work.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Solves `a x = b` by forward elimination and back substitution.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut m: Matrix = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| m[r][col].abs().total_cmp(&m[s][col].abs()))?;
        if m[pivot][col] == 0.0 || !m[pivot][col].is_finite() {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            if factor != 0.0 {
                for k in col..n {
                    m[r][k] -= factor * m[col][k];
                }
                rhs[r] -= factor * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (rhs[r] - tail) / m[r][r];
    }
    Some(x)
}

/// Maximum absolute column sum.
pub fn norm1(a: &[Vec<f64>]) -> f64 {
    let n = a.first().map_or(0, Vec::len);
    (0..n)
        .map(|j| a.iter().map(|row| row[j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `||A||_1 * ||A^-1||_1`, infinite when `A` is singular.
pub fn condition_1(a: &[Vec<f64>]) -> f64 {
    match invert(a) {
        Some(inv) => norm1(a) * norm1(&inv),
        None => f64::INFINITY,
    }
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}
