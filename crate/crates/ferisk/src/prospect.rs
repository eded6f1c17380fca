//! Risky prospects: payoffs with probabilities, utility and moments.
//!
//! Payoffs are net fractional returns (`0.05` = +5%), which keeps the
//! logarithmic utility below well-defined: a return of -100% or worse has no
//! finite utility and is rejected at evaluation time.

use serde::Serialize;

use crate::entropy::Distribution;
use crate::error::{Error, Result};

/// One payoff with its probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Outcome {
    pub payoff: f64,
    pub prob: f64,
}

/// A labelled discrete prospect.
///
/// Probabilities must form a valid [`Distribution`]; payoffs must be finite.
/// Outcome order is preserved everywhere so that entropy, moments and risk
/// scores are computed over the same indexing the caller supplied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prospect {
    label: String,
    outcomes: Vec<Outcome>,
}

impl Prospect {
    pub fn new(label: impl Into<String>, outcomes: Vec<(f64, f64)>) -> Result<Self> {
        let label = label.into();
        if outcomes.is_empty() {
            return Err(Error::Prospect(format!("{label}: no outcomes")));
        }
        for &(payoff, _) in &outcomes {
            if !payoff.is_finite() {
                return Err(Error::Prospect(format!(
                    "{label}: payoff {payoff} is not finite"
                )));
            }
        }
        // Validates the probability side (range, sum, at least one positive).
        Distribution::new(outcomes.iter().map(|&(_, p)| p).collect())?;
        Ok(Prospect {
            label,
            outcomes: outcomes
                .into_iter()
                .map(|(payoff, prob)| Outcome { payoff, prob })
                .collect(),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    /// The probability vector, in outcome order.
    pub fn distribution(&self) -> Distribution {
        Distribution::new(self.outcomes.iter().map(|o| o.prob).collect())
            .expect("probabilities were validated at construction")
    }

    /// Same probabilities with every payoff shifted by `c`.
    pub fn translate(&self, c: f64) -> Result<Prospect> {
        if !c.is_finite() {
            return Err(Error::Domain(format!(
                "translation offset {c} is not finite"
            )));
        }
        Prospect::new(
            self.label.clone(),
            self.outcomes
                .iter()
                .map(|o| (o.payoff + c, o.prob))
                .collect(),
        )
    }

    /// Same probabilities with every payoff multiplied by `k`.
    pub fn scale(&self, k: f64) -> Result<Prospect> {
        if !k.is_finite() {
            return Err(Error::Domain(format!("scale factor {k} is not finite")));
        }
        Prospect::new(
            self.label.clone(),
            self.outcomes
                .iter()
                .map(|o| (o.payoff * k, o.prob))
                .collect(),
        )
    }

    pub fn expected_utility(&self) -> Result<f64> {
        expected_utility(self)
    }

    pub fn moments(&self) -> MomentSummary {
        moments(self)
    }
}

/// S-shaped utility of a net return:
///
/// ```text
/// u(x) =  ln(1 + x)   for x >= 0   (concave: diminishing gains)
/// u(x) = -ln(1 - x)   for x <  0   (convex: losses loom steeply)
/// ```
///
/// Odd-symmetric (`u(-x) = -u(x)`), strictly increasing, `u(0) = 0`.
/// Returns of -100% or worse are outside the domain.
pub fn utility(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= -1.0 {
        return Err(Error::Domain(format!(
            "utility is undefined for return {x} (must be a finite value > -1)"
        )));
    }
    if x >= 0.0 {
        Ok((1.0 + x).ln())
    } else {
        Ok(-(1.0 - x).ln())
    }
}

/// Expected utility `sum_i prob_i * u(payoff_i)`.
pub fn expected_utility(p: &Prospect) -> Result<f64> {
    let mut total = 0.0;
    for o in p.outcomes() {
        total += o.prob * utility(o.payoff)?;
    }
    Ok(total)
}

/// Mean, variance, skewness and fourth central moment of the payoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    /// Standardized third moment; 0 for a degenerate prospect.
    pub skewness: f64,
    /// Fourth central moment (not standardized).
    pub kurtosis_m4: f64,
}

/// Probability-weighted moments of the payoff distribution.
pub fn moments(p: &Prospect) -> MomentSummary {
    let mean: f64 = p.outcomes().iter().map(|o| o.prob * o.payoff).sum();
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for o in p.outcomes() {
        let d = o.payoff - mean;
        m2 += o.prob * d * d;
        m3 += o.prob * d * d * d;
        m4 += o.prob * d * d * d * d;
    }
    let skewness = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
    MomentSummary {
        mean,
        variance: m2,
        skewness,
        kurtosis_m4: m4,
    }
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    fn arb_prospect() -> impl Strategy<Value = Prospect> {
        (
            prop::collection::vec((-0.9f64..2.0, 0.05f64..1.0), 1..8),
            "[a-z]{1,6}",
        )
            .prop_map(|(raw, label)| {
                let total: f64 = raw.iter().map(|&(_, w)| w).sum();
                Prospect::new(
                    label,
                    raw.into_iter().map(|(x, w)| (x, w / total)).collect(),
                )
                .unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn utility_is_odd(x in 0.0f64..0.99) {
            let plus = utility(x).unwrap();
            let minus = utility(-x).unwrap();
            prop_assert_eq!(plus, -minus);
        }

        #[test]
        fn utility_is_strictly_increasing(a in -0.99f64..0.98, gap in 0.001f64..1.0) {
            prop_assert!(utility(a).unwrap() < utility(a + gap).unwrap());
        }

        #[test]
        fn utility_curvature(x in 0.01f64..0.95, h in 0.001f64..0.01) {
            // Concave for gains, convex for losses: chord midpoint vs curve.
            let concave = utility(x).unwrap() + utility(x + 2.0 * h).unwrap();
            prop_assert!(concave / 2.0 < utility(x + h).unwrap());
            let convex = utility(-x).unwrap() + utility(-x - 2.0 * h).unwrap();
            prop_assert!(convex / 2.0 > utility(-x - h).unwrap());
        }

        #[test]
        fn variance_is_non_negative(p in arb_prospect()) {
            prop_assert!(moments(&p).variance >= 0.0);
        }

        #[test]
        fn translation_shifts_mean_only(p in arb_prospect(), c in -0.5f64..0.5) {
            let shifted = p.translate(c).unwrap();
            let a = moments(&p);
            let b = moments(&shifted);
            prop_assert!((b.mean - a.mean - c).abs() < 1e-9);
            prop_assert!((b.variance - a.variance).abs() < 1e-9);
            prop_assert!((b.kurtosis_m4 - a.kurtosis_m4).abs() < 1e-9);
        }

        #[test]
        fn scaling_scales_central_moments(p in arb_prospect(), k in 0.1f64..3.0) {
            let scaled = p.scale(k).unwrap();
            let a = moments(&p);
            let b = moments(&scaled);
            prop_assert!((b.mean - k * a.mean).abs() < 1e-9);
            prop_assert!((b.variance - k * k * a.variance).abs() < 1e-9);
            prop_assert!((b.kurtosis_m4 - k.powi(4) * a.kurtosis_m4).abs() < 1e-9);
        }

        #[test]
        fn positive_translation_raises_expected_utility(p in arb_prospect(), c in 0.001f64..0.5) {
            let eu = expected_utility(&p).unwrap();
            let shifted = expected_utility(&p.translate(c).unwrap()).unwrap();
            prop_assert!(shifted > eu);
        }
    }
}
