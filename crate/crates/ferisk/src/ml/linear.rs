//! Ridge regression via the normal equations and lasso via cyclic
//! coordinate descent. Both expect standardized features and a centered
//! target; the intercept is handled outside and never penalized.

use crate::error::{Error, Result};

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
///
/// Fails with a numerical-rank error when the best available pivot is
/// negligible relative to the matrix scale, which is how an unregularized
/// fit on collinear features surfaces.
pub fn solve_linear_system(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = a.len();
    assert!(a.iter().all(|row| row.len() == n) && b.len() == n);
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::NumericalRank("all-zero system matrix".into()));
    }
    let tol = 1e-12 * scale;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("non-empty pivot range");
        if a[pivot_row][col].abs() < tol {
            return Err(Error::NumericalRank(format!(
                "pivot {:.3e} at column {col} is below tolerance; features are collinear",
                a[pivot_row][col]
            )));
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            // Indexed on purpose: a[row] and a[col] alias the same matrix.
            #[allow(clippy::needless_range_loop)]
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Ridge coefficients: solve `(Z'Z/n + alpha I) beta = Z'y/n`.
///
/// The `1/n` scaling makes `alpha` comparable across sample sizes and
/// matches the lasso objective below. `alpha = 0` is ordinary least squares
/// and fails on rank-deficient designs.
pub fn ridge_coefficients(z: &[Vec<f64>], y: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::Domain(format!("ridge alpha {alpha} must be >= 0")));
    }
    let n = z.len();
    let p = z.first().map_or(0, Vec::len);
    if n == 0 || p == 0 {
        return Err(Error::Domain("empty design matrix".into()));
    }
    let nf = n as f64;
    let mut gram = vec![vec![0.0; p]; p];
    let mut rhs = vec![0.0; p];
    for (row, &target) in z.iter().zip(y) {
        // Indexed on purpose: the upper triangle pairs row[j] with row[k].
        #[allow(clippy::needless_range_loop)]
        for j in 0..p {
            rhs[j] += row[j] * target;
            for k in j..p {
                gram[j][k] += row[j] * row[k];
            }
        }
    }
    // Indexed on purpose: mirrors gram[j][k] into gram[k][j].
    #[allow(clippy::needless_range_loop)]
    for j in 0..p {
        for k in j..p {
            let v = gram[j][k] / nf;
            gram[j][k] = v;
            gram[k][j] = v;
        }
        gram[j][j] += alpha;
        rhs[j] /= nf;
    }
    solve_linear_system(gram, rhs)
}

/// Stopping rule and penalty for [`lasso_coefficients`].
#[derive(Debug, Clone, Copy)]
pub struct LassoOptions {
    pub alpha: f64,
    /// Sweep converges when the largest coefficient change drops below this.
    pub tol: f64,
    /// Hard cap on full sweeps; reaching it ends the fit without error.
    pub max_sweeps: usize,
}

impl LassoOptions {
    pub fn new(alpha: f64) -> Self {
        LassoOptions {
            alpha,
            tol: 1e-10,
            max_sweeps: 10_000,
        }
    }
}

fn soft_threshold(value: f64, threshold: f64) -> f64 {
    if value > threshold {
        value - threshold
    } else if value < -threshold {
        value + threshold
    } else {
        0.0
    }
}

/// Outcome of a coordinate-descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub beta: Vec<f64>,
    pub sweeps: usize,
    /// Whether the tolerance was met before the sweep cap.
    pub converged: bool,
    /// Largest coefficient change in the final sweep.
    pub last_delta: f64,
}

/// Lasso coefficients minimizing `1/(2n) ||y - Z beta||^2 + alpha ||beta||_1`
/// by cyclic coordinate descent with soft thresholding.
///
/// Stops when the largest coefficient change in a sweep drops below
/// `opts.tol` or after `opts.max_sweeps` sweeps, whichever comes first; the
/// cap is a normal stopping point (near-collinear designs approach the
/// optimum long before meeting a 1e-10 tolerance) and is reported via
/// `converged`. A non-finite update, which only overflowing input data can
/// produce, aborts with the sweep index and the offending change.
pub fn lasso_coefficients(z: &[Vec<f64>], y: &[f64], opts: LassoOptions) -> Result<LassoFit> {
    if !opts.alpha.is_finite() || opts.alpha < 0.0 {
        return Err(Error::Domain(format!(
            "lasso alpha {} must be >= 0",
            opts.alpha
        )));
    }
    let n = z.len();
    let p = z.first().map_or(0, Vec::len);
    if n == 0 || p == 0 {
        return Err(Error::Domain("empty design matrix".into()));
    }
    let nf = n as f64;
    // column-major copy: coordinate updates walk one feature at a time
    let mut cols = vec![vec![0.0; n]; p];
    for (i, row) in z.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            cols[j][i] = v;
        }
    }
    let col_norm: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>() / nf)
        .collect();
    let mut beta = vec![0.0; p];
    let mut residual = y.to_vec();
    let mut last_delta = f64::INFINITY;
    for sweep in 1..=opts.max_sweeps {
        let mut max_delta = 0.0f64;
        for j in 0..p {
            if col_norm[j] == 0.0 {
                continue;
            }
            let partial: f64 = cols[j]
                .iter()
                .zip(&residual)
                .map(|(&zv, &r)| zv * r)
                .sum::<f64>()
                / nf
                + col_norm[j] * beta[j];
            let updated = soft_threshold(partial, opts.alpha) / col_norm[j];
            if !updated.is_finite() {
                return Err(Error::NonConvergence {
                    sweeps: sweep,
                    max_delta: (updated - beta[j]).abs(),
                });
            }
            let delta = updated - beta[j];
            if delta != 0.0 {
                for (r, &zv) in residual.iter_mut().zip(&cols[j]) {
                    *r -= delta * zv;
                }
                beta[j] = updated;
            }
            max_delta = max_delta.max(delta.abs());
        }
        last_delta = max_delta;
        if max_delta < opts.tol {
            return Ok(LassoFit {
                beta,
                sweeps: sweep,
                converged: true,
                last_delta,
            });
        }
    }
    Ok(LassoFit {
        beta,
        sweeps: opts.max_sweeps,
        converged: false,
        last_delta,
    })
}
