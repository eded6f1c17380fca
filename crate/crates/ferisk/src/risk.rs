//! Entropy-based risk measures and prospect ranking.
//!
//! Four measures combine uncertainty (fractional-order entropy), dispersion
//! (payoff variance) and attractiveness (expected utility) into one score.
//! With weight `lambda` in `[0, 1]` on the uncertainty side:
//!
//! ```text
//! EU-FE    R = lambda * S_q                        - (1 - lambda) * EU / max|EU|
//! NEU-FE   R = lambda * NS_q                       - (1 - lambda) * EU / max|EU|
//! EU-FEV   R = lambda/2 * (S_q  + Var)             - (1 - lambda) * EU / max|EU|
//! NEU-FEV  R = lambda/2 * (NS_q + Var / maxVar)    - (1 - lambda) * EU / max|EU|
//! ```
//!
//! `max|EU|` and `maxVar` are taken over the action space under comparison,
//! so a score is only meaningful relative to its [`ActionSpace`]. The NEU
//! variants keep every component in `[0, 1]`, which makes scores comparable
//! across action spaces of different scale; the EU variants keep the raw
//! entropy and variance. Lower scores are better.

use serde::{Deserialize, Serialize};

use crate::entropy::{fractional_entropy, normalized_fractional_entropy, EntropyParams};
use crate::error::{Error, Result};
use crate::prospect::{expected_utility, moments, Prospect};

/// Which of the four risk measures to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    EuFe,
    EuFev,
    NeuFe,
    NeuFev,
}

impl Measure {
    pub const ALL: [Measure; 4] = [
        Measure::EuFe,
        Measure::EuFev,
        Measure::NeuFe,
        Measure::NeuFev,
    ];

    /// Stable lowercase name used in CSV/JSON output and CLI flags.
    pub fn name(&self) -> &'static str {
        match self {
            Measure::EuFe => "eu-fe",
            Measure::EuFev => "eu-fev",
            Measure::NeuFe => "neu-fe",
            Measure::NeuFev => "neu-fev",
        }
    }

    pub fn parse(text: &str) -> Result<Measure> {
        match text.to_ascii_lowercase().as_str() {
            "eu-fe" | "eufe" => Ok(Measure::EuFe),
            "eu-fev" | "eufev" => Ok(Measure::EuFev),
            "neu-fe" | "neufe" => Ok(Measure::NeuFe),
            "neu-fev" | "neufev" => Ok(Measure::NeuFev),
            other => Err(Error::Domain(format!(
                "unknown measure {other:?} (expected eu-fe, eu-fev, neu-fe or neu-fev)"
            ))),
        }
    }

    fn uses_normalized_entropy(&self) -> bool {
        matches!(self, Measure::NeuFe | Measure::NeuFev)
    }

    fn uses_variance(&self) -> bool {
        matches!(self, Measure::EuFev | Measure::NeuFev)
    }
}

/// Measure, entropy weight and entropy parameters for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskConfig {
    pub measure: Measure,
    pub lambda: f64,
    pub entropy: EntropyParams,
}

impl RiskConfig {
    pub fn new(measure: Measure, lambda: f64, entropy: EntropyParams) -> Result<Self> {
        if !lambda.is_finite() || !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Domain(format!(
                "entropy weight lambda = {lambda} is outside [0, 1]"
            )));
        }
        Ok(RiskConfig {
            measure,
            lambda,
            entropy,
        })
    }
}

/// Scale constants of an action space: the largest absolute expected utility
/// and the largest payoff variance among the prospects under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normalizers {
    pub max_abs_eu: f64,
    pub max_var: f64,
}

/// The set of prospects a score is relative to.
#[derive(Debug, Clone)]
pub struct ActionSpace {
    normalizers: Normalizers,
}

impl ActionSpace {
    pub fn new(actions: &[Prospect]) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::Domain("empty action space".into()));
        }
        let mut max_abs_eu = 0.0f64;
        let mut max_var = 0.0f64;
        for p in actions {
            max_abs_eu = max_abs_eu.max(expected_utility(p)?.abs());
            max_var = max_var.max(moments(p).variance);
        }
        Ok(ActionSpace {
            normalizers: Normalizers {
                max_abs_eu,
                max_var,
            },
        })
    }

    pub fn normalizers(&self) -> Normalizers {
        self.normalizers
    }
}

/// A risk score broken into its raw components.
///
/// `entropy_term` is `NS_q` (or `S_q` for the EU variants), `variance_term`
/// is `Var/maxVar` (or raw variance; 0 for the FE variants), `utility_term`
/// is `EU/max|EU|`. `total` recombines them with the measure's weights, so
/// the decomposition can be audited after the fact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskScore {
    pub total: f64,
    pub entropy_term: f64,
    pub variance_term: f64,
    pub utility_term: f64,
    pub normalizers: Normalizers,
}

/// Recombine raw components into a total score.
///
/// Kept public so reports and tests can verify a stored decomposition
/// without access to the original prospects.
pub fn compose_total(
    measure: Measure,
    lambda: f64,
    entropy_term: f64,
    variance_term: f64,
    utility_term: f64,
) -> f64 {
    match measure {
        Measure::EuFe | Measure::NeuFe => lambda * entropy_term - (1.0 - lambda) * utility_term,
        Measure::EuFev | Measure::NeuFev => {
            lambda / 2.0 * (entropy_term + variance_term) - (1.0 - lambda) * utility_term
        }
    }
}

/// Score a prospect against explicit normalizers.
///
/// [`score`] derives the normalizers from an [`ActionSpace`]; this variant
/// exists for sweeps and sensitivity analyses that hold the scale constants
/// fixed while a prospect is perturbed.
pub fn score_with(p: &Prospect, normalizers: Normalizers, cfg: &RiskConfig) -> Result<RiskScore> {
    let dist = p.distribution();
    let entropy_term = if cfg.measure.uses_normalized_entropy() {
        normalized_fractional_entropy(&dist, &cfg.entropy)?
    } else {
        fractional_entropy(&dist, cfg.entropy.q)?
    };
    let variance_term = if cfg.measure.uses_variance() {
        let var = moments(p).variance;
        match cfg.measure {
            Measure::NeuFev => {
                if normalizers.max_var > 0.0 {
                    var / normalizers.max_var
                } else {
                    0.0
                }
            }
            _ => var,
        }
    } else {
        0.0
    };
    let utility_term = if normalizers.max_abs_eu > 0.0 {
        expected_utility(p)? / normalizers.max_abs_eu
    } else {
        0.0
    };
    Ok(RiskScore {
        total: compose_total(
            cfg.measure,
            cfg.lambda,
            entropy_term,
            variance_term,
            utility_term,
        ),
        entropy_term,
        variance_term,
        utility_term,
        normalizers,
    })
}

/// Score one prospect relative to an action space.
pub fn score(p: &Prospect, ctx: &ActionSpace, cfg: &RiskConfig) -> Result<RiskScore> {
    score_with(p, ctx.normalizers(), cfg)
}

/// One row of a ranking: 1-based rank, prospect label, full score.
#[derive(Debug, Clone, Serialize)]
pub struct RankEntry {
    pub rank: usize,
    pub label: String,
    pub score: RiskScore,
}

/// Prospects ordered from least to most risky.
#[derive(Debug, Clone, Serialize)]
pub struct Ranking {
    entries: Vec<RankEntry>,
}

impl Ranking {
    pub fn entries(&self) -> &[RankEntry] {
        &self.entries
    }

    pub fn top(&self, k: usize) -> &[RankEntry] {
        &self.entries[..k.min(self.entries.len())]
    }

    /// Keep only the first `k` entries.
    pub fn truncate(mut self, k: usize) -> Ranking {
        self.entries.truncate(k);
        self
    }
}

/// Rank prospects by a risk measure, least risky first.
///
/// The normalizers come from the full action space. Ties in the total are
/// broken by label so the order is deterministic.
pub fn rank(actions: &[Prospect], cfg: &RiskConfig) -> Result<Ranking> {
    let ctx = ActionSpace::new(actions)?;
    let mut scored: Vec<(String, RiskScore)> = actions
        .iter()
        .map(|p| Ok((p.label().to_string(), score(p, &ctx, cfg)?)))
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| {
        a.1.total
            .partial_cmp(&b.1.total)
            .expect("risk totals are finite")
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(Ranking {
        entries: scored
            .into_iter()
            .enumerate()
            .map(|(i, (label, score))| RankEntry {
                rank: i + 1,
                label,
                score,
            })
            .collect(),
    })
}

/// Influence of one observation on the variance functional:
/// `IF(x) = (x - mu)^2 - sigma^2`.
///
/// Positive for points more than one standard deviation from the mean; the
/// expectation over the data distribution is zero.
pub fn variance_influence(x: f64, mu: f64, sigma2: f64) -> f64 {
    let d = x - mu;
    d * d - sigma2
}

/// Plug-in estimate of the sampling variance of the sample variance:
/// `(m4 - m2^2) / n` with central moments `m2`, `m4`.
///
/// For large normal samples this approaches `2 sigma^4 / n`.
pub fn sample_variance_variance(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 4 {
        return Err(Error::Domain(format!(
            "need at least 4 observations to estimate the variance of a variance, got {n}"
        )));
    }
    for &x in series {
        if !x.is_finite() {
            return Err(Error::Domain(format!("non-finite observation {x}")));
        }
    }
    let nf = n as f64;
    let mean = series.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for &x in series {
        let d = x - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= nf;
    m4 /= nf;
    Ok((m4 - m2 * m2) / nf)
}

/// First-order sensitivity of an FEV-style total to a variance change:
/// `delta_total = lambda / (2 * max_var) * delta_s2`.
///
/// The variance enters the total linearly, so for perturbations that leave
/// entropy and expected utility (nearly) unchanged this is (nearly) exact.
pub fn target_shift(delta_s2: f64, lambda: f64, v_max: f64) -> Result<f64> {
    if !lambda.is_finite() || !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!(
            "entropy weight lambda = {lambda} is outside [0, 1]"
        )));
    }
    if !v_max.is_finite() || v_max <= 0.0 {
        return Err(Error::Domain(format!(
            "variance normalizer {v_max} must be positive"
        )));
    }
    if !delta_s2.is_finite() {
        return Err(Error::Domain(format!(
            "variance change {delta_s2} is not finite"
        )));
    }
    Ok(lambda / (2.0 * v_max) * delta_s2)
}

/// Largest entropy weight at which enlarging a non-negative prospect by
/// `k > 1` still lowers its NEU-FEV score:
///
/// ```text
/// b = (1 - rho) / (3/2 - 1/(2 k^2) - rho),   rho = EU(X) / EU(kX)
/// ```
///
/// Scaling leaves `NS_q` unchanged but pushes the prospect's variance to the
/// top of the variance normalizer, so for `lambda > b` the variance penalty
/// outweighs the utility gain and the scaled prospect scores as riskier.
/// As `k -> infinity`, `rho -> 0` and the bound tends to `2/3`.
pub fn scaling_lambda_bound(p: &Prospect, k: f64) -> Result<f64> {
    if !k.is_finite() || k <= 1.0 {
        return Err(Error::Domain(format!("scale factor k = {k} must exceed 1")));
    }
    for o in p.outcomes() {
        if o.payoff < 0.0 {
            return Err(Error::Domain(format!(
                "scaling bound requires non-negative payoffs, found {}",
                o.payoff
            )));
        }
    }
    let eu = expected_utility(p)?;
    let eu_k = expected_utility(&p.scale(k)?)?;
    if eu_k <= 0.0 {
        return Err(Error::Domain(
            "prospect has zero expected utility; the scaling bound is undefined".into(),
        ));
    }
    let rho = eu / eu_k;
    Ok((1.0 - rho) / (1.5 - 1.0 / (2.0 * k * k) - rho))
}
