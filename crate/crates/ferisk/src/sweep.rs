//! Risk surfaces over a `(q, lambda)` grid.

use rayon::prelude::*;

use crate::entropy::EntropyParams;
use crate::error::{Error, Result};
use crate::prospect::Prospect;
use crate::risk::{rank, score, ActionSpace, Measure, Ranking, RiskConfig, RiskScore};

/// The entropy orders and entropy weights to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    q_values: Vec<f64>,
    lambda_values: Vec<f64>,
}

impl SweepGrid {
    pub fn new(q_values: Vec<f64>, lambda_values: Vec<f64>) -> Result<Self> {
        let check = |name: &str, values: &[f64]| -> Result<()> {
            if values.is_empty() {
                return Err(Error::Domain(format!("empty {name} grid")));
            }
            for &v in values {
                if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                    return Err(Error::Domain(format!("{name} value {v} is outside [0, 1]")));
                }
            }
            for w in values.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::Domain(format!(
                        "{name} grid must be strictly increasing, found {} then {}",
                        w[0], w[1]
                    )));
                }
            }
            Ok(())
        };
        check("q", &q_values)?;
        check("lambda", &lambda_values)?;
        Ok(SweepGrid {
            q_values,
            lambda_values,
        })
    }

    /// 20 q-values (0.05 to 1.00) crossed with 5 entropy weights.
    pub fn default_grid() -> SweepGrid {
        SweepGrid {
            q_values: (1..=20).map(|i| i as f64 * 0.05).collect(),
            lambda_values: vec![0.0, 0.25, 0.5, 0.75, 1.0],
        }
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    pub fn lambda_values(&self) -> &[f64] {
        &self.lambda_values
    }

    /// Number of `(q, lambda)` points.
    pub fn len(&self) -> usize {
        self.q_values.len() * self.lambda_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One evaluated grid point for one prospect.
#[derive(Debug, Clone, Copy)]
pub struct HeatmapPoint<'a> {
    pub stock: &'a str,
    pub q: f64,
    pub lambda: f64,
    pub score: &'a RiskScore,
}

/// Scores for every `(stock, q, lambda)` combination of one measure.
#[derive(Debug, Clone)]
pub struct HeatmapData {
    measure: Measure,
    stocks: Vec<String>,
    q_values: Vec<f64>,
    lambda_values: Vec<f64>,
    /// Indexed `[stock][q][lambda]`, flattened.
    scores: Vec<RiskScore>,
}

impl HeatmapData {
    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn stocks(&self) -> &[String] {
        &self.stocks
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    pub fn lambda_values(&self) -> &[f64] {
        &self.lambda_values
    }

    pub fn score(&self, stock: usize, qi: usize, li: usize) -> &RiskScore {
        let nq = self.q_values.len();
        let nl = self.lambda_values.len();
        &self.scores[(stock * nq + qi) * nl + li]
    }

    /// All points in stock-major, then q, then lambda order.
    pub fn points(&self) -> impl Iterator<Item = HeatmapPoint<'_>> {
        let nq = self.q_values.len();
        let nl = self.lambda_values.len();
        self.scores.iter().enumerate().map(move |(flat, score)| {
            let li = flat % nl;
            let qi = (flat / nl) % nq;
            let si = flat / (nl * nq);
            HeatmapPoint {
                stock: &self.stocks[si],
                q: self.q_values[qi],
                lambda: self.lambda_values[li],
                score,
            }
        })
    }
}

/// Evaluate one measure over the full grid.
///
/// `base` fixes the measure and the support rule; its `q` and `lambda` are
/// replaced by each grid point. The action-space normalizers are recomputed
/// at every grid point, so each point stands on its own even though the
/// normalizers do not in fact depend on `(q, lambda)`. Grid points are
/// independent and evaluated in parallel with a deterministic layout.
pub fn sweep(actions: &[Prospect], grid: &SweepGrid, base: &RiskConfig) -> Result<HeatmapData> {
    if actions.is_empty() {
        return Err(Error::Domain("empty action space".into()));
    }
    let points: Vec<(f64, f64)> = grid
        .q_values
        .iter()
        .flat_map(|&q| grid.lambda_values.iter().map(move |&l| (q, l)))
        .collect();
    // per grid point: scores for all stocks, stock-major within the point
    let per_point: Vec<Vec<RiskScore>> = points
        .par_iter()
        .map(|&(q, lambda)| {
            let cfg = RiskConfig::new(
                base.measure,
                lambda,
                EntropyParams::new(q, base.entropy.support_rule)?,
            )?;
            let ctx = ActionSpace::new(actions)?;
            actions.iter().map(|p| score(p, &ctx, &cfg)).collect()
        })
        .collect::<Result<_>>()?;
    let nq = grid.q_values.len();
    let nl = grid.lambda_values.len();
    let mut scores = Vec::with_capacity(actions.len() * nq * nl);
    // Indexed on purpose: transposing point-major results into stock-major order.
    #[allow(clippy::needless_range_loop)]
    for si in 0..actions.len() {
        for qi in 0..nq {
            for li in 0..nl {
                scores.push(per_point[qi * nl + li][si]);
            }
        }
    }
    Ok(HeatmapData {
        measure: base.measure,
        stocks: actions.iter().map(|p| p.label().to_string()).collect(),
        q_values: grid.q_values.clone(),
        lambda_values: grid.lambda_values.clone(),
        scores,
    })
}

/// The `k` least risky prospects under `cfg`.
///
/// `k = 0` yields an empty ranking; `k` beyond the action count yields the
/// full ranking.
pub fn top_k(actions: &[Prospect], cfg: &RiskConfig, k: usize) -> Result<Ranking> {
    Ok(rank(actions, cfg)?.truncate(k))
}
