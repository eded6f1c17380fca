//! A small feed-forward regressor trained by full-batch gradient descent.
//!
//! Architecture: two tanh hidden layers and a linear output. The parameter
//! vector is exposed flat (weights then biases, layer by layer) so analytic
//! gradients can be checked against finite differences.

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Stream id for weight initialization draws.
const INIT_STREAM: u64 = 0xA22D;

/// Network shape and training schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnParams {
    pub hidden: (usize, usize),
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for AnnParams {
    fn default() -> Self {
        AnnParams {
            hidden: (16, 8),
            epochs: 5000,
            learning_rate: 1e-2,
        }
    }
}

impl AnnParams {
    fn validate(&self) -> Result<()> {
        if self.hidden.0 == 0 || self.hidden.1 == 0 {
            return Err(Error::Domain("hidden layers must be non-empty".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Domain("need at least one epoch".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::Domain(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Views into the flat parameter vector: `(w1, b1, w2, b2, w3, b3)`.
type LayerSlices<'a> = (&'a [f64], &'a [f64], &'a [f64], &'a [f64], &'a [f64], f64);

/// `inputs -> tanh(h1) -> tanh(h2) -> linear` with a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Network {
    inputs: usize,
    h1: usize,
    h2: usize,
    /// Layout: w1 (h1 x inputs), b1 (h1), w2 (h2 x h1), b2 (h2), w3 (h2), b3.
    params: Vec<f64>,
}

impl Network {
    /// Fresh network with uniform `[-s, s]` weights, `s = 1/sqrt(fan_in)`
    /// per layer, drawn from stream [`INIT_STREAM`] of `seed`. Biases start
    /// at zero.
    pub fn new(inputs: usize, hidden: (usize, usize), seed: u64) -> Result<Network> {
        if inputs == 0 {
            return Err(Error::Domain("network needs at least one input".into()));
        }
        let (h1, h2) = hidden;
        if h1 == 0 || h2 == 0 {
            return Err(Error::Domain("hidden layers must be non-empty".into()));
        }
        let mut rng = Rng::derive(seed, INIT_STREAM);
        let mut params = Vec::with_capacity(h1 * inputs + h1 + h2 * h1 + h2 + h2 + 1);
        let mut init_layer = |rows: usize, cols: usize, params: &mut Vec<f64>| {
            let scale = 1.0 / (cols as f64).sqrt();
            for _ in 0..rows * cols {
                params.push((2.0 * rng.next_f64() - 1.0) * scale);
            }
            params.extend(std::iter::repeat_n(0.0, rows));
        };
        init_layer(h1, inputs, &mut params);
        init_layer(h2, h1, &mut params);
        init_layer(1, h2, &mut params);
        Ok(Network {
            inputs,
            h1,
            h2,
            params,
        })
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_param(&mut self, index: usize, value: f64) {
        self.params[index] = value;
    }

    fn split_params(&self) -> LayerSlices<'_> {
        let (i, h1, h2) = (self.inputs, self.h1, self.h2);
        let mut at = 0;
        let mut take = |len: usize| {
            let slice = &self.params[at..at + len];
            at += len;
            slice
        };
        let w1 = take(h1 * i);
        let b1 = take(h1);
        let w2 = take(h2 * h1);
        let b2 = take(h2);
        let w3 = take(h2);
        let b3 = take(1)[0];
        (w1, b1, w2, b2, w3, b3)
    }

    fn forward(&self, row: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let (w1, b1, w2, b2, w3, b3) = self.split_params();
        let a1: Vec<f64> = (0..self.h1)
            .map(|j| {
                let z: f64 = w1[j * self.inputs..(j + 1) * self.inputs]
                    .iter()
                    .zip(row)
                    .map(|(&w, &x)| w * x)
                    .sum();
                (z + b1[j]).tanh()
            })
            .collect();
        let a2: Vec<f64> = (0..self.h2)
            .map(|j| {
                let z: f64 = w2[j * self.h1..(j + 1) * self.h1]
                    .iter()
                    .zip(&a1)
                    .map(|(&w, &a)| w * a)
                    .sum();
                (z + b2[j]).tanh()
            })
            .collect();
        let output = w3.iter().zip(&a2).map(|(&w, &a)| w * a).sum::<f64>() + b3;
        (a1, a2, output)
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.forward(row).2
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Vec<f64> {
        x.iter().map(|row| self.predict_row(row)).collect()
    }

    /// Mean squared error over a batch.
    pub fn loss(&self, x: &[Vec<f64>], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        x.iter()
            .zip(y)
            .map(|(row, &t)| {
                let d = self.predict_row(row) - t;
                d * d
            })
            .sum::<f64>()
            / n
    }

    /// Analytic gradient of [`Network::loss`], flattened in parameter order.
    pub fn gradient(&self, x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let (_, _, w2, _, w3, _) = self.split_params();
        let (i, h1, h2) = (self.inputs, self.h1, self.h2);
        let n = x.len() as f64;
        let mut grad = vec![0.0; self.params.len()];
        let (gw1, rest) = grad.split_at_mut(h1 * i);
        let (gb1, rest) = rest.split_at_mut(h1);
        let (gw2, rest) = rest.split_at_mut(h2 * h1);
        let (gb2, rest) = rest.split_at_mut(h2);
        let (gw3, gb3) = rest.split_at_mut(h2);
        for (row, &t) in x.iter().zip(y) {
            let (a1, a2, out) = self.forward(row);
            let d_out = 2.0 * (out - t) / n;
            for j in 0..h2 {
                gw3[j] += d_out * a2[j];
            }
            gb3[0] += d_out;
            let d2: Vec<f64> = (0..h2)
                .map(|j| d_out * w3[j] * (1.0 - a2[j] * a2[j]))
                .collect();
            for j in 0..h2 {
                for k in 0..h1 {
                    gw2[j * h1 + k] += d2[j] * a1[k];
                }
                gb2[j] += d2[j];
            }
            let d1: Vec<f64> = (0..h1)
                .map(|k| {
                    let back: f64 = (0..h2).map(|j| d2[j] * w2[j * h1 + k]).sum();
                    back * (1.0 - a1[k] * a1[k])
                })
                .collect();
            for k in 0..h1 {
                for m in 0..i {
                    gw1[k * i + m] += d1[k] * row[m];
                }
                gb1[k] += d1[k];
            }
        }
        grad
    }

    /// Full-batch gradient descent for `params.epochs` steps.
    ///
    /// Returns the per-epoch loss (measured before each update). A non-finite
    /// loss aborts with the epoch at which training diverged.
    pub fn train(&mut self, x: &[Vec<f64>], y: &[f64], params: &AnnParams) -> Result<Vec<f64>> {
        params.validate()?;
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::Domain(format!(
                "{} rows vs {} targets",
                x.len(),
                y.len()
            )));
        }
        let mut history = Vec::with_capacity(params.epochs);
        for epoch in 0..params.epochs {
            let loss = self.loss(x, y);
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            history.push(loss);
            let grad = self.gradient(x, y);
            for (p, g) in self.params.iter_mut().zip(&grad) {
                *p -= params.learning_rate * g;
            }
        }
        let final_loss = self.loss(x, y);
        if !final_loss.is_finite() {
            return Err(Error::Divergence {
                epoch: params.epochs,
            });
        }
        Ok(history)
    }
}
