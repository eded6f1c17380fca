//! Fractional-order entropy.
//!
//! For a discrete distribution `p` and order `q` in `[0, 1]`, the
//! fractional-order entropy (Ubriaco 2009) is
//!
//! ```text
//! S_q(p) = sum_i p_i * (-ln p_i)^q
//! ```
//!
//! `q = 1` recovers Shannon entropy in nats. Each term `p (-ln p)^q` attains
//! its maximum `q^q e^-q` at `p = e^-q`, so over `n` outcomes
//!
//! ```text
//! NS_q(p) = S_q(p) / (n * q^q * e^-q)
//! ```
//!
//! always lies in `[0, 1]`. How `n` is counted is a modelling choice captured
//! by [`SupportRule`].

use serde::Serialize;

use crate::error::{Error, Result};

/// Probabilities must sum to one within this tolerance.
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

/// A validated discrete probability distribution.
///
/// Entries may be zero (empty histogram bins) but never negative, above one,
/// or non-finite, and the whole vector must sum to one within
/// [`PROB_SUM_TOLERANCE`]. Entries are stored exactly as given; nothing is
/// renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Distribution("no outcomes".into()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::Distribution(format!(
                    "probability {p} at index {i} is outside [0, 1]"
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::Distribution(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        if !probs.iter().any(|&p| p > 0.0) {
            return Err(Error::Distribution("no positive probability".into()));
        }
        Ok(Distribution(probs))
    }

    /// Uniform distribution over `n` outcomes.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Distribution("no outcomes".into()));
        }
        Distribution::new(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of strictly positive entries.
    pub fn nonzero_count(&self) -> usize {
        self.0.iter().filter(|&&p| p > 0.0).count()
    }
}

/// How many outcomes the normalizer `n * q^q * e^-q` counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SupportRule {
    /// `n` = number of strictly positive probabilities. Appending impossible
    /// outcomes then never changes the normalized entropy.
    NonzeroSupport,
    /// `n` is fixed externally, e.g. the bin count of a histogram grid, so
    /// that prospects binned on a shared grid are normalized alike even when
    /// some of their bins are empty.
    FixedBinCount(usize),
}

/// Entropy order together with the support rule used for normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyParams {
    pub q: f64,
    pub support_rule: SupportRule,
}

impl EntropyParams {
    pub fn new(q: f64, support_rule: SupportRule) -> Result<Self> {
        check_order(q)?;
        if let SupportRule::FixedBinCount(n) = support_rule {
            if n == 0 {
                return Err(Error::Domain("fixed bin count must be at least 1".into()));
            }
        }
        Ok(EntropyParams { q, support_rule })
    }
}

fn check_order(q: f64) -> Result<()> {
    if !q.is_finite() || !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!(
            "entropy order q = {q} is outside [0, 1]"
        )));
    }
    Ok(())
}

/// Information gain `I_q(p) = (-ln p)^q` of observing an outcome with
/// probability `p`.
///
/// A sure outcome carries no information: `I_q(1) = 0` for every `q`,
/// including `q = 0` where the limit convention `0^0 = 0` applies to the
/// vanishing log, not the exponent.
pub fn information_gain(p: f64, q: f64) -> Result<f64> {
    check_order(q)?;
    if !p.is_finite() || p <= 0.0 || p > 1.0 {
        return Err(Error::Domain(format!("probability {p} is outside (0, 1]")));
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    Ok((-p.ln()).powf(q))
}

/// Fractional-order entropy `S_q(p) = sum p (-ln p)^q`.
///
/// Zero-probability outcomes contribute nothing, matching the limit
/// `p (-ln p)^q -> 0` as `p -> 0`.
pub fn fractional_entropy(d: &Distribution, q: f64) -> Result<f64> {
    check_order(q)?;
    let mut total = 0.0;
    for &p in d.probs() {
        if p > 0.0 && p < 1.0 {
            total += p * (-p.ln()).powf(q);
        }
    }
    Ok(total)
}

/// Maximum of a single entropy term: `max_p p (-ln p)^q = q^q e^-q`,
/// attained at `p = e^-q`. At `q = 0` the value is 1 (`0^0 = 1` by the
/// `x^x` limit).
pub fn entropy_term_max(q: f64) -> Result<f64> {
    check_order(q)?;
    Ok(q.powf(q) * (-q).exp())
}

/// Normalized fractional-order entropy `NS_q = S_q / (n q^q e^-q)`, always
/// in `[0, 1]`.
///
/// `n` follows `params.support_rule`; a fixed bin count smaller than the
/// number of occupied outcomes is rejected since it could push the ratio
/// above one.
pub fn normalized_fractional_entropy(d: &Distribution, params: &EntropyParams) -> Result<f64> {
    let n = match params.support_rule {
        SupportRule::NonzeroSupport => d.nonzero_count(),
        SupportRule::FixedBinCount(n) => {
            if n < d.nonzero_count() {
                return Err(Error::Domain(format!(
                    "fixed bin count {n} is below the {} occupied outcomes",
                    d.nonzero_count()
                )));
            }
            n
        }
    };
    let s = fractional_entropy(d, params.q)?;
    Ok(s / (n as f64 * entropy_term_max(params.q)?))
}

/// Shannon entropy divided by its maximum `ln n` over the nonzero support.
///
/// A single-outcome distribution has no uncertainty and returns 0.
pub fn normalized_shannon_entropy(d: &Distribution) -> Result<f64> {
    let n = d.nonzero_count();
    if n == 1 {
        return Ok(0.0);
    }
    let h: f64 = d
        .probs()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    Ok(h / (n as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn dist(probs: &[f64]) -> Distribution {
        Distribution::new(probs.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_probability_vectors() {
        assert!(Distribution::new(vec![]).is_err());
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(Distribution::new(vec![f64::NAN, 1.0]).is_err());
        assert!(Distribution::new(vec![0.0, 0.0]).is_err());
        assert!(Distribution::new(vec![0.5, 0.5 + 2e-9]).is_err());
        assert!(Distribution::new(vec![0.5, 0.5 + 2e-10]).is_ok());
    }

    #[test]
    fn information_gain_known_values() {
        // (-ln 0.5)^0.5
        assert!((information_gain(0.5, 0.5).unwrap() - 0.8325546111576977).abs() < TOL);
        assert_eq!(information_gain(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(information_gain(1.0, 1.0).unwrap(), 0.0);
        // q = 0 gives one unit of information for any non-sure outcome
        assert_eq!(information_gain(0.3, 0.0).unwrap(), 1.0);
        assert!((information_gain(0.5, 1.0).unwrap() - std::f64::consts::LN_2).abs() < TOL);
    }

    #[test]
    fn information_gain_domain_errors() {
        assert!(information_gain(0.0, 0.5).is_err());
        assert!(information_gain(-0.2, 0.5).is_err());
        assert!(information_gain(1.2, 0.5).is_err());
        assert!(information_gain(f64::NAN, 0.5).is_err());
        assert!(information_gain(0.5, -0.1).is_err());
        assert!(information_gain(0.5, 1.5).is_err());
        assert!(information_gain(0.5, f64::NAN).is_err());
    }

    #[test]
    fn fractional_entropy_fair_coin() {
        let coin = dist(&[0.5, 0.5]);
        // 2 * 0.5 * (ln 2)^0.5 = sqrt(ln 2)
        assert!((fractional_entropy(&coin, 0.5).unwrap() - 0.8325546111576977).abs() < TOL);
        assert!((fractional_entropy(&coin, 1.0).unwrap() - std::f64::consts::LN_2).abs() < TOL);
    }

    #[test]
    fn fractional_entropy_matches_shannon_at_q_one() {
        let d = dist(&[0.1, 0.2, 0.3, 0.4]);
        let shannon: f64 = d.probs().iter().map(|&p| -p * p.ln()).sum();
        assert!((fractional_entropy(&d, 1.0).unwrap() - shannon).abs() < TOL);
    }

    #[test]
    fn degenerate_distribution_has_zero_entropy() {
        let sure = dist(&[1.0]);
        for q in [0.0, 0.3, 1.0] {
            assert_eq!(fractional_entropy(&sure, q).unwrap(), 0.0);
        }
        let params = EntropyParams::new(0.5, SupportRule::NonzeroSupport).unwrap();
        assert_eq!(normalized_fractional_entropy(&sure, &params).unwrap(), 0.0);
        assert_eq!(normalized_shannon_entropy(&sure).unwrap(), 0.0);
    }

    #[test]
    fn entropy_term_max_known_values() {
        assert!((entropy_term_max(0.5).unwrap() - 0.42888194248035344).abs() < TOL);
        assert!((entropy_term_max(1.0).unwrap() - (-1.0f64).exp()).abs() < TOL);
        assert_eq!(entropy_term_max(0.0).unwrap(), 1.0);
        assert!(entropy_term_max(1.2).is_err());
    }

    #[test]
    fn normalized_entropy_fair_coin() {
        let coin = dist(&[0.5, 0.5]);
        let half = EntropyParams::new(0.5, SupportRule::NonzeroSupport).unwrap();
        let one = EntropyParams::new(1.0, SupportRule::NonzeroSupport).unwrap();
        assert!(
            (normalized_fractional_entropy(&coin, &half).unwrap() - 0.9706104742283898).abs() < TOL
        );
        assert!(
            (normalized_fractional_entropy(&coin, &one).unwrap() - 0.94208469268186).abs() < 1e-12
        );
    }

    #[test]
    fn fixed_bin_count_widens_the_normalizer() {
        let coin = dist(&[0.5, 0.5]);
        let fixed = EntropyParams::new(0.5, SupportRule::FixedBinCount(4)).unwrap();
        let free = EntropyParams::new(0.5, SupportRule::NonzeroSupport).unwrap();
        let a = normalized_fractional_entropy(&coin, &fixed).unwrap();
        let b = normalized_fractional_entropy(&coin, &free).unwrap();
        assert!((a - b / 2.0).abs() < TOL);
    }

    #[test]
    fn fixed_bin_count_below_support_is_rejected() {
        let d = dist(&[0.25; 4]);
        let params = EntropyParams::new(0.5, SupportRule::FixedBinCount(3)).unwrap();
        assert!(normalized_fractional_entropy(&d, &params).is_err());
    }

    #[test]
    fn normalized_shannon_known_value() {
        let d = dist(&[0.9, 0.1]);
        assert!((normalized_shannon_entropy(&d).unwrap() - 0.46899559358928117).abs() < TOL);
        let u = Distribution::uniform(4).unwrap();
        assert!((normalized_shannon_entropy(&u).unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn uniform_distribution_maximizes_shannon_but_not_ns() {
        // NS = 1 would need every probability at the per-term peak e^-q,
        // which the sum constraint forbids, so even the uniform distribution
        // stays strictly below 1 at q < 1.
        let u = Distribution::uniform(5).unwrap();
        let params = EntropyParams::new(0.5, SupportRule::NonzeroSupport).unwrap();
        let ns = normalized_fractional_entropy(&u, &params).unwrap();
        assert!(ns > 0.0 && ns < 1.0, "ns = {ns}");
        assert!((ns - 0.5916016113164448).abs() < 1e-12);
    }
}
