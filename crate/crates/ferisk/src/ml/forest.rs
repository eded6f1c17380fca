//! Random forest regression built on variance-reduction CART trees.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Offset separating per-tree rng streams from other consumers of the seed.
const TREE_STREAM_BASE: u64 = 0xF0_0000;

/// Forest shape and sampling controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub trees: usize,
    /// Smallest number of training rows a leaf may hold.
    pub min_leaf: usize,
    /// Fraction of features examined at each split.
    pub feat_frac: f64,
    /// Draw each tree's rows with replacement. Turning this off trains every
    /// tree on the full sample, which together with `trees = 1`,
    /// `min_leaf = 1` and `feat_frac = 1` reduces the forest to plain CART.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: 200,
            min_leaf: 2,
            feat_frac: 1.0 / 3.0,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    fn validate(&self) -> Result<()> {
        if self.trees == 0 {
            return Err(Error::Domain("forest needs at least one tree".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::Domain("min_leaf must be at least 1".into()));
        }
        if !self.feat_frac.is_finite() || self.feat_frac <= 0.0 || self.feat_frac > 1.0 {
            return Err(Error::Domain(format!(
                "feature fraction {} is outside (0, 1]",
                self.feat_frac
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] < *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

/// A fitted forest: mean prediction over independently grown trees.
#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<Tree>,
}

impl RandomForest {
    /// Fit on `x` (row-major) against `y`.
    ///
    /// Tree `t` draws its bootstrap rows and split-candidate features from
    /// rng stream `t` of `seed`, so the forest is reproducible and trees can
    /// be grown in parallel without sharing generator state.
    pub fn fit(
        x: &[Vec<f64>],
        y: &[f64],
        params: &ForestParams,
        seed: u64,
    ) -> Result<RandomForest> {
        params.validate()?;
        let n = x.len();
        if n < 2 {
            return Err(Error::Domain(format!(
                "forest needs at least 2 training rows, got {n}"
            )));
        }
        if y.len() != n {
            return Err(Error::Domain(format!("{n} rows but {} targets", y.len())));
        }
        let p = x[0].len();
        if p == 0 || x.iter().any(|row| row.len() != p) {
            return Err(Error::Domain("ragged or empty feature rows".into()));
        }
        let trees: Vec<Tree> = (0..params.trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = Rng::derive(seed, TREE_STREAM_BASE + t as u64);
                let rows: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.next_index(n)).collect()
                } else {
                    (0..n).collect()
                };
                grow_tree(x, y, rows, params, &mut rng)
            })
            .collect();
        Ok(RandomForest { trees })
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        sum / self.trees.len() as f64
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Vec<f64> {
        x.iter().map(|row| self.predict_row(row)).collect()
    }
}

fn grow_tree(
    x: &[Vec<f64>],
    y: &[f64],
    rows: Vec<usize>,
    params: &ForestParams,
    rng: &mut Rng,
) -> Tree {
    let mut nodes = Vec::new();
    grow_node(x, y, rows, params, rng, &mut nodes);
    Tree { nodes }
}

fn mean_of(y: &[f64], rows: &[usize]) -> f64 {
    rows.iter().map(|&i| y[i]).sum::<f64>() / rows.len() as f64
}

fn grow_node(
    x: &[Vec<f64>],
    y: &[f64],
    rows: Vec<usize>,
    params: &ForestParams,
    rng: &mut Rng,
    nodes: &mut Vec<Node>,
) -> usize {
    let index = nodes.len();
    nodes.push(Node::Leaf {
        value: mean_of(y, &rows),
    });
    if rows.len() < 2 * params.min_leaf {
        return index;
    }
    let Some((feature, threshold)) = best_split(x, y, &rows, params, rng) else {
        return index;
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.into_iter().partition(|&i| x[i][feature] < threshold);
    let left = grow_node(x, y, left_rows, params, rng, nodes);
    let right = grow_node(x, y, right_rows, params, rng, nodes);
    nodes[index] = Node::Split {
        feature,
        threshold,
        left,
        right,
    };
    index
}

/// Pick the (feature, threshold) with the largest sum-of-squares reduction
/// among a random feature subset. Candidates are midpoints between distinct
/// consecutive sorted values; both sides must keep `min_leaf` rows.
fn best_split(
    x: &[Vec<f64>],
    y: &[f64],
    rows: &[usize],
    params: &ForestParams,
    rng: &mut Rng,
) -> Option<(usize, f64)> {
    let p = x[0].len();
    let k = ((params.feat_frac * p as f64).ceil() as usize).clamp(1, p);
    let mut features: Vec<usize> = (0..p).collect();
    rng.shuffle(&mut features);
    let mut candidates = features[..k].to_vec();
    // ascending order decouples tie-breaking from the shuffle order
    candidates.sort_unstable();

    let total: f64 = rows.iter().map(|&i| y[i]).sum();
    let n = rows.len() as f64;
    let baseline = total * total / n;
    let mut best: Option<(f64, usize, f64)> = None;

    let mut order: Vec<usize> = Vec::with_capacity(rows.len());
    for &feature in &candidates {
        order.clear();
        order.extend_from_slice(rows);
        order.sort_unstable_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]).then(a.cmp(&b)));
        let mut left_sum = 0.0;
        for (taken, window) in order.windows(2).enumerate() {
            let (lo, hi) = (window[0], window[1]);
            left_sum += y[lo];
            let left_n = taken + 1;
            let right_n = order.len() - left_n;
            if left_n < params.min_leaf || right_n < params.min_leaf {
                continue;
            }
            if x[lo][feature] == x[hi][feature] {
                continue;
            }
            let right_sum = total - left_sum;
            let objective =
                left_sum * left_sum / left_n as f64 + right_sum * right_sum / right_n as f64;
            let gain = objective - baseline;
            if gain > 1e-12 && best.is_none_or(|(g, _, _)| objective > g) {
                let threshold = 0.5 * (x[lo][feature] + x[hi][feature]);
                best = Some((objective, feature, threshold));
            }
        }
    }
    best.map(|(_, feature, threshold)| (feature, threshold))
}
