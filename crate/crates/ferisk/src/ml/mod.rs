//! Feature engineering and model validation for risk scores.
//!
//! [`build_features`] turns prospects into a 25-column entropy/utility
//! feature matrix; [`fit_model`] (or the per-model wrappers) fits one of the
//! four from-scratch regressors against a risk-score target and reports
//! train/test quality. The point of the exercise is a consistency check: if
//! a risk measure is well-behaved, simple models on entropy features should
//! reproduce it almost perfectly, and a harder model class should not beat
//! the linear ones on an affine target.

pub mod ann;
pub mod forest;
pub mod linear;
pub mod split;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::entropy::{
    fractional_entropy, normalized_fractional_entropy, Distribution, EntropyParams,
};
use crate::error::{Error, Result};
use crate::prospect::Prospect;
use crate::risk::{score, ActionSpace, RiskConfig};
use crate::rng::Rng;

pub use ann::{AnnParams, Network};
pub use forest::{ForestParams, RandomForest};
pub use linear::{lasso_coefficients, ridge_coefficients, LassoFit, LassoOptions};

/// Entropy orders the feature grid covers.
pub const FEATURE_Q_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Resample size of each bootstrap replicate.
///
/// Histogram prospects do not carry their original observation count, so the
/// resamples use this fixed draw count, matching one trading year of daily
/// returns. Reports flag the convention in their metadata.
pub const BOOTSTRAP_DRAWS: usize = 245;

/// Entropy order of the bootstrap-dispersion feature column.
pub const BOOTSTRAP_Q: f64 = 0.5;

/// Default fraction of rows held out for testing.
pub const TEST_FRACTION: f64 = 0.2;

const DEFAULT_RIDGE_ALPHA: f64 = 1e-3;
const DEFAULT_LASSO_ALPHA: f64 = 1e-4;

/// A labelled design matrix with one risk-score target per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    feature_names: Vec<String>,
    labels: Vec<String>,
    rows: Vec<Vec<f64>>,
    target: Vec<f64>,
    target_name: String,
}

impl FeatureMatrix {
    pub fn new(
        feature_names: Vec<String>,
        labels: Vec<String>,
        rows: Vec<Vec<f64>>,
        target: Vec<f64>,
        target_name: String,
    ) -> Result<Self> {
        if feature_names.is_empty() {
            return Err(Error::Features("no feature columns".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &feature_names {
            if name.is_empty() || !seen.insert(name.as_str()) {
                return Err(Error::Features(format!(
                    "feature names must be unique and non-empty, offending name {name:?}"
                )));
            }
        }
        if labels.len() != rows.len() || target.len() != rows.len() {
            return Err(Error::Features(format!(
                "{} labels, {} rows, {} targets",
                labels.len(),
                rows.len(),
                target.len()
            )));
        }
        if rows.len() < 2 {
            return Err(Error::Features(format!(
                "need at least 2 rows, got {}",
                rows.len()
            )));
        }
        for (label, row) in labels.iter().zip(&rows) {
            if row.len() != feature_names.len() {
                return Err(Error::Features(format!(
                    "{label}: {} values for {} features",
                    row.len(),
                    feature_names.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Features(format!(
                    "{label}: non-finite feature {bad}"
                )));
            }
        }
        if let Some(bad) = target.iter().find(|v| !v.is_finite()) {
            return Err(Error::Features(format!("non-finite target {bad}")));
        }
        Ok(FeatureMatrix {
            feature_names,
            labels,
            rows,
            target,
            target_name,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// New matrix keeping only the named columns, in the order given.
    pub fn select(&self, names: &[&str]) -> Result<FeatureMatrix> {
        let indices: Vec<usize> = names
            .iter()
            .map(|&n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| Error::Features(format!("unknown feature {n:?}")))
            })
            .collect::<Result<_>>()?;
        FeatureMatrix::new(
            names.iter().map(|&n| n.to_string()).collect(),
            self.labels.clone(),
            self.rows
                .iter()
                .map(|row| indices.iter().map(|&i| row[i]).collect())
                .collect(),
            self.target.clone(),
            self.target_name.clone(),
        )
    }

    /// Names of columns with zero variance (useless to any regressor).
    pub fn zero_variance_columns(&self) -> Vec<&str> {
        (0..self.feature_names.len())
            .filter(|&j| {
                let first = self.rows[0][j];
                self.rows.iter().all(|row| row[j] == first)
            })
            .map(|j| self.feature_names[j].as_str())
            .collect()
    }
}

/// Build the 25-column feature matrix for a set of prospects.
///
/// Columns: `NS_q` and `S_q` over [`FEATURE_Q_GRID`], expected utility (raw
/// and normalized by the action-space maximum), variance (raw and
/// normalized), skewness, fourth central moment, and the bootstrap standard
/// deviation of `NS_0.5` over `bootstrap_reps` resamples of
/// [`BOOTSTRAP_DRAWS`] draws each. The target is each prospect's risk score
/// under `cfg` within this action space.
pub fn build_features(
    prospects: &[Prospect],
    cfg: &RiskConfig,
    bootstrap_reps: usize,
    seed: u64,
) -> Result<FeatureMatrix> {
    if prospects.len() < 5 {
        return Err(Error::Features(format!(
            "need at least 5 prospects to validate against, got {}",
            prospects.len()
        )));
    }
    if bootstrap_reps < 10 {
        return Err(Error::Features(format!(
            "need at least 10 bootstrap replications, got {bootstrap_reps}"
        )));
    }
    let ctx = ActionSpace::new(prospects)?;
    let normalizers = ctx.normalizers();

    let mut feature_names: Vec<String> = Vec::with_capacity(25);
    for q in FEATURE_Q_GRID {
        feature_names.push(format!("ns_q_{q:.1}"));
    }
    for q in FEATURE_Q_GRID {
        feature_names.push(format!("s_q_{q:.1}"));
    }
    feature_names.extend(
        [
            "expected_utility",
            "normalized_eu",
            "variance",
            "normalized_variance",
            "skewness",
            "kurtosis_m4",
            "bootstrap_ns_std",
        ]
        .map(String::from),
    );

    let mut labels = Vec::with_capacity(prospects.len());
    let mut rows = Vec::with_capacity(prospects.len());
    let mut target = Vec::with_capacity(prospects.len());
    for (index, p) in prospects.iter().enumerate() {
        let dist = p.distribution();
        let mut row = Vec::with_capacity(feature_names.len());
        for q in FEATURE_Q_GRID {
            let params = EntropyParams::new(q, cfg.entropy.support_rule)?;
            row.push(normalized_fractional_entropy(&dist, &params)?);
        }
        for q in FEATURE_Q_GRID {
            row.push(fractional_entropy(&dist, q)?);
        }
        let eu = p.expected_utility()?;
        let m = p.moments();
        row.push(eu);
        row.push(if normalizers.max_abs_eu > 0.0 {
            eu / normalizers.max_abs_eu
        } else {
            0.0
        });
        row.push(m.variance);
        row.push(if normalizers.max_var > 0.0 {
            m.variance / normalizers.max_var
        } else {
            0.0
        });
        row.push(m.skewness);
        row.push(m.kurtosis_m4);
        row.push(bootstrap_ns_std(
            p,
            cfg,
            bootstrap_reps,
            seed,
            index as u64,
        )?);

        labels.push(p.label().to_string());
        rows.push(row);
        target.push(score(p, &ctx, cfg)?.total);
    }

    FeatureMatrix::new(
        feature_names,
        labels,
        rows,
        target,
        cfg.measure.name().to_string(),
    )
}

/// Standard deviation of `NS_0.5` across multinomial resamples of the
/// prospect's outcome distribution.
fn bootstrap_ns_std(
    p: &Prospect,
    cfg: &RiskConfig,
    reps: usize,
    seed: u64,
    stream: u64,
) -> Result<f64> {
    let probs = p.distribution();
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &prob in probs.probs() {
        acc += prob;
        cumulative.push(acc);
    }
    let params = EntropyParams::new(BOOTSTRAP_Q, cfg.entropy.support_rule)?;
    let mut values = Vec::with_capacity(reps);
    for rep in 0..reps {
        let mut rng = Rng::derive(seed, (stream << 24) | rep as u64);
        let mut counts = vec![0usize; probs.len()];
        for _ in 0..BOOTSTRAP_DRAWS {
            let u = rng.next_f64();
            let k = cumulative
                .partition_point(|&c| c <= u)
                .min(counts.len() - 1);
            counts[k] += 1;
        }
        let resampled = Distribution::new(
            counts
                .iter()
                .map(|&c| c as f64 / BOOTSTRAP_DRAWS as f64)
                .collect(),
        )?;
        values.push(normalized_fractional_entropy(&resampled, &params)?);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt())
}

/// Test-set quality of a prediction vector: `(mse, r2)`.
///
/// `r2 = 1 - SS_res / SS_tot`; a constant truth vector has no variance to
/// explain and is rejected.
pub fn evaluate(predictions: &[f64], truths: &[f64]) -> Result<(f64, f64)> {
    if predictions.is_empty() || predictions.len() != truths.len() {
        return Err(Error::Domain(format!(
            "{} predictions vs {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    let n = truths.len() as f64;
    let mean = truths.iter().sum::<f64>() / n;
    let ss_tot: f64 = truths.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Domain(
            "truth vector is constant; R^2 is undefined".into(),
        ));
    }
    let ss_res: f64 = predictions
        .iter()
        .zip(truths)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok((ss_res / n, 1.0 - ss_res / ss_tot))
}

/// The four supported model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ridge,
    Lasso,
    RandomForest,
    Ann,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Ridge,
        ModelKind::Lasso,
        ModelKind::RandomForest,
        ModelKind::Ann,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Ridge => "ridge",
            ModelKind::Lasso => "lasso",
            ModelKind::RandomForest => "random_forest",
            ModelKind::Ann => "ann",
        }
    }

    pub fn parse(text: &str) -> Result<ModelKind> {
        match text.to_ascii_lowercase().as_str() {
            "ridge" => Ok(ModelKind::Ridge),
            "lasso" => Ok(ModelKind::Lasso),
            "random_forest" | "random-forest" | "forest" | "rf" => Ok(ModelKind::RandomForest),
            "ann" | "nn" => Ok(ModelKind::Ann),
            other => Err(Error::Domain(format!(
                "unknown model {other:?} (expected ridge, lasso, random_forest or ann)"
            ))),
        }
    }
}

/// A model family with its hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Ridge { alpha: f64 },
    Lasso { alpha: f64 },
    Forest(ForestParams),
    Ann(AnnParams),
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Ridge { .. } => ModelKind::Ridge,
            ModelSpec::Lasso { .. } => ModelKind::Lasso,
            ModelSpec::Forest(_) => ModelKind::RandomForest,
            ModelSpec::Ann(_) => ModelKind::Ann,
        }
    }

    /// The defaults used by the CLI and the per-model wrappers.
    pub fn default_for(kind: ModelKind) -> ModelSpec {
        match kind {
            ModelKind::Ridge => ModelSpec::Ridge {
                alpha: DEFAULT_RIDGE_ALPHA,
            },
            ModelKind::Lasso => ModelSpec::Lasso {
                alpha: DEFAULT_LASSO_ALPHA,
            },
            ModelKind::RandomForest => ModelSpec::Forest(ForestParams::default()),
            ModelKind::Ann => ModelSpec::Ann(AnnParams::default()),
        }
    }
}

/// How rows are split for fitting and evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitPlan {
    /// One shuffled split with `test_frac` of the rows held out.
    Shuffled { test_frac: f64, seed: u64 },
    /// Fit once per row with that row held out; test metrics pool the
    /// held-out predictions, train metrics come from a full-data fit.
    LeaveOneOut { seed: u64 },
}

/// Everything recorded about one fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub model: ModelKind,
    pub mse: f64,
    pub r2: f64,
    pub train_mse: f64,
    pub train_r2: f64,
    pub split_seed: u64,
    pub hyperparams: BTreeMap<String, String>,
    /// Per-epoch training loss; empty for the non-iterative models.
    pub loss_history: Vec<f64>,
}

struct FittedModel {
    train_pred: Vec<f64>,
    test_pred: Vec<f64>,
    hyperparams: BTreeMap<String, String>,
    loss_history: Vec<f64>,
}

/// Fit one model on standardized features and report train/test quality.
///
/// Features are standardized on the training rows only; linear models see a
/// train-centered target so their intercept is never penalized. All
/// randomness (split, bootstrap rows, feature subsets, weight init) derives
/// from the plan's seed.
pub fn fit_model(f: &FeatureMatrix, spec: &ModelSpec, plan: &SplitPlan) -> Result<FitReport> {
    match *plan {
        SplitPlan::Shuffled { test_frac, seed } => {
            let (train_idx, test_idx) = split::shuffled_split(f.n_rows(), test_frac, seed)?;
            let fitted = fit_on_split(f, spec, &train_idx, &test_idx, seed)?;
            let train_truth: Vec<f64> = train_idx.iter().map(|&i| f.target()[i]).collect();
            let test_truth: Vec<f64> = test_idx.iter().map(|&i| f.target()[i]).collect();
            let (train_mse, train_r2) = evaluate(&fitted.train_pred, &train_truth)?;
            let (mse, r2) = evaluate(&fitted.test_pred, &test_truth)?;
            let mut hyperparams = fitted.hyperparams;
            hyperparams.insert("split".into(), "shuffled".into());
            hyperparams.insert("test_frac".into(), test_frac.to_string());
            Ok(FitReport {
                model: spec.kind(),
                mse,
                r2,
                train_mse,
                train_r2,
                split_seed: seed,
                hyperparams,
                loss_history: fitted.loss_history,
            })
        }
        SplitPlan::LeaveOneOut { seed } => {
            let n = f.n_rows();
            if n < 3 {
                return Err(Error::Domain(format!(
                    "leave-one-out needs at least 3 rows, got {n}"
                )));
            }
            let mut pooled = vec![0.0; n];
            for (hold, slot) in pooled.iter_mut().enumerate() {
                let train_idx: Vec<usize> = (0..n).filter(|&i| i != hold).collect();
                let fitted = fit_on_split(f, spec, &train_idx, &[hold], seed)?;
                *slot = fitted.test_pred[0];
            }
            let (mse, r2) = evaluate(&pooled, f.target())?;
            let all: Vec<usize> = (0..n).collect();
            let full = fit_on_split(f, spec, &all, &all, seed)?;
            let (train_mse, train_r2) = evaluate(&full.train_pred, f.target())?;
            let mut hyperparams = full.hyperparams;
            hyperparams.insert("split".into(), "leave_one_out".into());
            Ok(FitReport {
                model: spec.kind(),
                mse,
                r2,
                train_mse,
                train_r2,
                split_seed: seed,
                hyperparams,
                loss_history: full.loss_history,
            })
        }
    }
}

fn fit_on_split(
    f: &FeatureMatrix,
    spec: &ModelSpec,
    train_idx: &[usize],
    test_idx: &[usize],
    seed: u64,
) -> Result<FittedModel> {
    if train_idx.len() < 2 {
        return Err(Error::Domain(format!(
            "degenerate training set of {} rows",
            train_idx.len()
        )));
    }
    let standardizer = split::Standardizer::fit(f.rows(), train_idx);
    let z_train = standardizer.transform(f.rows(), train_idx);
    let z_test = standardizer.transform(f.rows(), test_idx);
    let y_train: Vec<f64> = train_idx.iter().map(|&i| f.target()[i]).collect();

    let mut hyperparams = BTreeMap::new();
    match spec {
        ModelSpec::Ridge { alpha } => {
            let y_mean = y_train.iter().sum::<f64>() / y_train.len() as f64;
            let centered: Vec<f64> = y_train.iter().map(|y| y - y_mean).collect();
            let beta = linear::ridge_coefficients(&z_train, &centered, *alpha)?;
            hyperparams.insert("alpha".into(), alpha.to_string());
            let predict = |rows: &[Vec<f64>]| {
                rows.iter()
                    .map(|row| row.iter().zip(&beta).map(|(&v, &b)| v * b).sum::<f64>() + y_mean)
                    .collect()
            };
            Ok(FittedModel {
                train_pred: predict(&z_train),
                test_pred: predict(&z_test),
                hyperparams,
                loss_history: Vec::new(),
            })
        }
        ModelSpec::Lasso { alpha } => {
            let y_mean = y_train.iter().sum::<f64>() / y_train.len() as f64;
            let centered: Vec<f64> = y_train.iter().map(|y| y - y_mean).collect();
            let opts = LassoOptions::new(*alpha);
            let fit = linear::lasso_coefficients(&z_train, &centered, opts)?;
            let beta = fit.beta;
            hyperparams.insert("alpha".into(), alpha.to_string());
            hyperparams.insert("tol".into(), opts.tol.to_string());
            hyperparams.insert("max_sweeps".into(), opts.max_sweeps.to_string());
            hyperparams.insert("sweeps_used".into(), fit.sweeps.to_string());
            hyperparams.insert("converged".into(), fit.converged.to_string());
            hyperparams.insert(
                "nonzero_coefficients".into(),
                beta.iter().filter(|b| b.abs() > 1e-8).count().to_string(),
            );
            let predict = |rows: &[Vec<f64>]| {
                rows.iter()
                    .map(|row| row.iter().zip(&beta).map(|(&v, &b)| v * b).sum::<f64>() + y_mean)
                    .collect()
            };
            Ok(FittedModel {
                train_pred: predict(&z_train),
                test_pred: predict(&z_test),
                hyperparams,
                loss_history: Vec::new(),
            })
        }
        ModelSpec::Forest(params) => {
            let forest = RandomForest::fit(&z_train, &y_train, params, seed)?;
            hyperparams.insert("trees".into(), params.trees.to_string());
            hyperparams.insert("min_leaf".into(), params.min_leaf.to_string());
            hyperparams.insert("feat_frac".into(), params.feat_frac.to_string());
            hyperparams.insert("bootstrap".into(), params.bootstrap.to_string());
            Ok(FittedModel {
                train_pred: forest.predict(&z_train),
                test_pred: forest.predict(&z_test),
                hyperparams,
                loss_history: Vec::new(),
            })
        }
        ModelSpec::Ann(params) => {
            let inputs = f.feature_names().len();
            let mut network = Network::new(inputs, params.hidden, seed)?;
            let history = network.train(&z_train, &y_train, params)?;
            hyperparams.insert(
                "hidden".into(),
                format!("{},{}", params.hidden.0, params.hidden.1),
            );
            hyperparams.insert("epochs".into(), params.epochs.to_string());
            hyperparams.insert("learning_rate".into(), params.learning_rate.to_string());
            if let Some(last) = history.last() {
                hyperparams.insert("final_loss".into(), last.to_string());
            }
            Ok(FittedModel {
                train_pred: network.predict(&z_train),
                test_pred: network.predict(&z_test),
                hyperparams,
                loss_history: history,
            })
        }
    }
}

/// Ridge fit with an 80/20 shuffled split.
pub fn fit_ridge(f: &FeatureMatrix, alpha: f64, split_seed: u64) -> Result<FitReport> {
    fit_model(
        f,
        &ModelSpec::Ridge { alpha },
        &SplitPlan::Shuffled {
            test_frac: TEST_FRACTION,
            seed: split_seed,
        },
    )
}

/// Lasso fit with an 80/20 shuffled split.
pub fn fit_lasso(f: &FeatureMatrix, alpha: f64, split_seed: u64) -> Result<FitReport> {
    fit_model(
        f,
        &ModelSpec::Lasso { alpha },
        &SplitPlan::Shuffled {
            test_frac: TEST_FRACTION,
            seed: split_seed,
        },
    )
}

/// Random-forest fit with an 80/20 shuffled split.
pub fn fit_random_forest(
    f: &FeatureMatrix,
    params: &ForestParams,
    split_seed: u64,
) -> Result<FitReport> {
    fit_model(
        f,
        &ModelSpec::Forest(*params),
        &SplitPlan::Shuffled {
            test_frac: TEST_FRACTION,
            seed: split_seed,
        },
    )
}

/// Neural-network fit with an 80/20 shuffled split.
pub fn fit_ann(f: &FeatureMatrix, params: &AnnParams, split_seed: u64) -> Result<FitReport> {
    fit_model(
        f,
        &ModelSpec::Ann(*params),
        &SplitPlan::Shuffled {
            test_frac: TEST_FRACTION,
            seed: split_seed,
        },
    )
}
