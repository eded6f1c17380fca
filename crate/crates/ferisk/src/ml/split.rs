//! Train/test index handling and feature standardization.

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Stream id so the split shuffle never shares draws with model internals.
const SPLIT_STREAM: u64 = 0xA11C;

/// Shuffled train/test index split.
///
/// `test_frac` of the rows (rounded, but at least 1 and leaving at least 2
/// for training) become the test set. Equal seeds give equal splits.
pub fn shuffled_split(n: usize, test_frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 4 {
        return Err(Error::Domain(format!(
            "need at least 4 rows to split, got {n}"
        )));
    }
    if !test_frac.is_finite() || test_frac <= 0.0 || test_frac >= 1.0 {
        return Err(Error::Domain(format!(
            "test fraction {test_frac} is outside (0, 1)"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = Rng::derive(seed, SPLIT_STREAM);
    rng.shuffle(&mut idx);
    let test_len = ((n as f64 * test_frac).round() as usize).clamp(1, n - 2);
    let test = idx[..test_len].to_vec();
    let train = idx[test_len..].to_vec();
    Ok((train, test))
}

/// Per-column affine map `(x - mean) / std` fitted on the training rows.
///
/// A zero-variance column maps to all zeros (its std is treated as 1), so
/// constant features stay harmless instead of producing NaN.
#[derive(Debug, Clone)]
pub struct Standardizer {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>], train_idx: &[usize]) -> Standardizer {
        let p = rows.first().map_or(0, Vec::len);
        let n = train_idx.len() as f64;
        let mut means = vec![0.0; p];
        for &i in train_idx {
            for (j, &v) in rows[i].iter().enumerate() {
                means[j] += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut stds = vec![0.0; p];
        for &i in train_idx {
            for (j, &v) in rows[i].iter().enumerate() {
                let d = v - means[j];
                stds[j] += d * d;
            }
        }
        for s in &mut stds {
            *s = (*s / n).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        Standardizer { means, stds }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>], idx: &[usize]) -> Vec<Vec<f64>> {
        idx.iter().map(|&i| self.transform_row(&rows[i])).collect()
    }
}
