//! Ordering properties of the risk measures on randomized prospects.
//!
//! Every test drives a seeded generator through hundreds of prospects, so the
//! claims hold over a broad slice of the domain while staying reproducible.

use ferisk::risk::{compose_total, scaling_lambda_bound, score_with, target_shift};
use ferisk::rng::Rng;
use ferisk::{rank, score, ActionSpace, EntropyParams, Measure, Prospect, RiskConfig, SupportRule};

fn params(q: f64) -> EntropyParams {
    EntropyParams::new(q, SupportRule::NonzeroSupport).unwrap()
}

fn cfg(measure: Measure, lambda: f64, q: f64) -> RiskConfig {
    RiskConfig::new(measure, lambda, params(q)).unwrap()
}

/// Random prospect with 2..=8 outcomes, probabilities bounded away from zero
/// and payoffs drawn uniformly from [lo, hi].
fn gen_prospect(rng: &mut Rng, label: &str, lo: f64, hi: f64) -> Prospect {
    let n = 2 + rng.next_index(7);
    let weights: Vec<f64> = (0..n).map(|_| 0.05 + rng.next_f64()).collect();
    let total: f64 = weights.iter().sum();
    let outcomes = weights
        .into_iter()
        .map(|w| (lo + (hi - lo) * rng.next_f64(), w / total))
        .collect();
    Prospect::new(label, outcomes).unwrap()
}

/// Translation offset that moves `p`'s expected utility onto `target`, found
/// by bisection. Requires `target >= EU(p)`; expected utility is continuous
/// and strictly increasing in the offset, so the root is unique.
fn offset_matching_eu(p: &Prospect, target: f64) -> f64 {
    let eu = |c: f64| p.translate(c).unwrap().expected_utility().unwrap();
    let mut lo = 0.0;
    let mut hi = 1.0;
    while eu(hi) < target {
        hi *= 2.0;
        assert!(hi < 1e6, "expected-utility target is unreachable");
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eu(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn translation_lowers_risk_for_every_measure_below_lambda_one() {
    let mut rng = Rng::new(0x7a11_5f01);
    for _ in 0..600 {
        let a = gen_prospect(&mut rng, "base", 0.01, 0.5);
        let c = 0.01 + 0.49 * rng.next_f64();
        let shifted = a.translate(c).unwrap();
        let ctx = ActionSpace::new(&[a.clone(), shifted.clone()]).unwrap();
        let q = rng.next_f64();
        let lambda = 0.999 * rng.next_f64();
        for measure in Measure::ALL {
            let strict = cfg(measure, lambda, q);
            let r_base = score(&a, &ctx, &strict).unwrap().total;
            let r_shifted = score(&shifted, &ctx, &strict).unwrap().total;
            assert!(
                r_shifted < r_base,
                "{measure:?} lambda={lambda} q={q}: adding {c} did not lower the risk \
                 ({r_shifted} >= {r_base})"
            );

            // At lambda = 1 the utility side drops out, and a translation
            // changes neither the probabilities nor the spread.
            let pure = cfg(measure, 1.0, q);
            let e_base = score(&a, &ctx, &pure).unwrap().total;
            let e_shifted = score(&shifted, &ctx, &pure).unwrap().total;
            assert!(
                (e_shifted - e_base).abs() <= 1e-12,
                "{measure:?} q={q}: translation moved the lambda=1 score by \
                 {}",
                e_shifted - e_base
            );
        }
    }
}

#[test]
fn scaling_lowers_neu_fe_risk_below_lambda_one() {
    let mut rng = Rng::new(0x5ca1_e001);
    for _ in 0..600 {
        let a = gen_prospect(&mut rng, "base", 0.01, 0.5);
        let k = 1.01 + 18.99 * rng.next_f64();
        let scaled = a.scale(k).unwrap();
        let ctx = ActionSpace::new(&[a.clone(), scaled.clone()]).unwrap();
        let q = rng.next_f64();
        let lambda = 0.999 * rng.next_f64();

        let strict = cfg(Measure::NeuFe, lambda, q);
        let r_base = score(&a, &ctx, &strict).unwrap().total;
        let r_scaled = score(&scaled, &ctx, &strict).unwrap().total;
        assert!(
            r_scaled < r_base,
            "lambda={lambda} q={q} k={k}: scaling up did not lower the risk \
             ({r_scaled} >= {r_base})"
        );

        // Scaling payoffs leaves the probability vector alone, so at
        // lambda = 1 the normalized-entropy scores coincide.
        let pure = cfg(Measure::NeuFe, 1.0, q);
        let e_base = score(&a, &ctx, &pure).unwrap().total;
        let e_scaled = score(&scaled, &ctx, &pure).unwrap().total;
        assert!(
            (e_scaled - e_base).abs() <= 1e-12,
            "q={q} k={k}: scaling moved the lambda=1 score by {}",
            e_scaled - e_base
        );
    }
}

#[test]
fn neu_fev_scaling_preference_flips_at_the_lambda_bound() {
    let mut rng = Rng::new(0xb0c0_71e5);
    let margin = 1e-6;
    let mut used = 0;
    let mut attempts = 0;
    while used < 500 {
        attempts += 1;
        assert!(attempts < 2000, "generator kept producing unusable bounds");
        let a = gen_prospect(&mut rng, "base", 0.01, 0.5);
        if a.moments().variance <= 0.0 {
            continue;
        }
        let k = 1.01 + 18.99 * rng.next_f64();
        let b = scaling_lambda_bound(&a, k).unwrap();
        assert!(
            (0.0..1.0).contains(&b) && b > 0.0,
            "bound {b} fell outside (0, 1) for k={k}"
        );
        if b <= 2.0 * margin || b >= 1.0 - 2.0 * margin {
            continue;
        }
        used += 1;

        let scaled = a.scale(k).unwrap();
        let ctx = ActionSpace::new(&[a.clone(), scaled.clone()]).unwrap();
        for (lambda, scaling_helps) in [(b - margin, true), (b + margin, false)] {
            let c = cfg(Measure::NeuFev, lambda, 0.5);
            let diff = score(&scaled, &ctx, &c).unwrap().total - score(&a, &ctx, &c).unwrap().total;
            if scaling_helps {
                assert!(
                    diff < 0.0,
                    "k={k} bound={b}: scaling should be preferred at lambda={lambda}, diff={diff}"
                );
            } else {
                assert!(
                    diff > 0.0,
                    "k={k} bound={b}: scaling should be penalized at lambda={lambda}, diff={diff}"
                );
            }
        }
    }
}

#[test]
fn equal_expected_utility_orders_by_the_entropy_side() {
    let mut rng = Rng::new(0xeee0_0a01);
    let mut used = 0;
    let mut attempts = 0;
    while used < 500 {
        attempts += 1;
        assert!(attempts < 1500, "generator kept producing degenerate pairs");
        let first = gen_prospect(&mut rng, "first", 0.01, 0.5);
        let second = gen_prospect(&mut rng, "second", 0.01, 0.5);
        let eu_first = first.expected_utility().unwrap();
        let eu_second = second.expected_utility().unwrap();

        // Lift the lower prospect until the utility sides agree; risk
        // comparisons then depend on the entropy (and spread) terms alone.
        let (a, b) = if eu_first < eu_second {
            (
                first
                    .translate(offset_matching_eu(&first, eu_second))
                    .unwrap(),
                second,
            )
        } else {
            (
                first,
                second
                    .translate(offset_matching_eu(&second, eu_first))
                    .unwrap(),
            )
        };
        let ctx = ActionSpace::new(&[a.clone(), b.clone()]).unwrap();
        let q = rng.next_f64();
        let lambda = 0.05 + 0.949 * rng.next_f64();

        let mut scores = Vec::new();
        let mut degenerate = false;
        for measure in Measure::ALL {
            let c = cfg(measure, lambda, q);
            let sa = score(&a, &ctx, &c).unwrap();
            let sb = score(&b, &ctx, &c).unwrap();
            let gap = (sa.entropy_term + sa.variance_term) - (sb.entropy_term + sb.variance_term);
            if gap.abs() <= 1e-6 {
                degenerate = true;
                break;
            }
            scores.push((measure, sa.total, sb.total, gap));
        }
        if degenerate {
            continue;
        }
        used += 1;
        for (measure, ra, rb, gap) in scores {
            assert_eq!(
                ra > rb,
                gap > 0.0,
                "{measure:?} lambda={lambda} q={q}: with matched expected utility the \
                 riskier prospect must carry the larger entropy side (gap={gap})"
            );
        }
    }
}

#[test]
fn equal_entropy_reverses_the_expected_utility_order() {
    let mut rng = Rng::new(0xf11b_0b01);
    let mut used = 0;
    let mut attempts = 0;
    while used < 500 {
        attempts += 1;
        assert!(
            attempts < 1500,
            "generator kept producing symmetric prospects"
        );
        let a = gen_prospect(&mut rng, "plain", 0.01, 0.5);
        let mu = a.moments().mean;
        // Reflect every payoff through the mean: probabilities, variance and
        // entropy are preserved while the concave utility breaks the tie.
        let mirrored = Prospect::new(
            "mirrored",
            a.outcomes()
                .iter()
                .map(|o| (2.0 * mu - o.payoff, o.prob))
                .collect(),
        )
        .unwrap();
        let eu_a = a.expected_utility().unwrap();
        let eu_m = mirrored.expected_utility().unwrap();
        if (eu_a - eu_m).abs() <= 1e-8 {
            continue;
        }
        used += 1;

        let ctx = ActionSpace::new(&[a.clone(), mirrored.clone()]).unwrap();
        let q = rng.next_f64();
        let lambda = 0.999 * rng.next_f64();
        for measure in Measure::ALL {
            let c = cfg(measure, lambda, q);
            let sa = score(&a, &ctx, &c).unwrap();
            let sm = score(&mirrored, &ctx, &c).unwrap();
            assert_eq!(
                sa.entropy_term, sm.entropy_term,
                "reflection must not move the entropy term"
            );
            assert!(
                (sa.variance_term - sm.variance_term).abs() <= 1e-12,
                "reflection moved the variance term by {}",
                sa.variance_term - sm.variance_term
            );
            assert_eq!(
                sa.total < sm.total,
                eu_a > eu_m,
                "{measure:?} lambda={lambda} q={q}: with the entropy side tied, the \
                 higher expected utility must win (eu_a={eu_a}, eu_m={eu_m})"
            );
        }
    }
}

#[test]
fn degenerate_action_spaces_zero_out_the_affected_terms() {
    // All payoffs zero: both scale constants vanish, and the normalized
    // terms they feed are defined as zero.
    let flat = [
        Prospect::new("f1", vec![(0.0, 1.0)]).unwrap(),
        Prospect::new("f2", vec![(0.0, 0.5), (0.0, 0.5)]).unwrap(),
    ];
    let ctx = ActionSpace::new(&flat).unwrap();
    let nz = ctx.normalizers();
    assert_eq!(nz.max_abs_eu, 0.0);
    assert_eq!(nz.max_var, 0.0);
    for measure in Measure::ALL {
        let c = cfg(measure, 0.7, 0.5);
        for p in &flat {
            let s = score(p, &ctx, &c).unwrap();
            assert_eq!(s.utility_term, 0.0);
            assert_eq!(s.variance_term, 0.0);
            let expected = compose_total(measure, 0.7, s.entropy_term, 0.0, 0.0);
            assert!((s.total - expected).abs() <= 1e-12);
        }
    }

    // Constant nonzero payoffs: the variance normalizer vanishes while the
    // utility side still ranks the two prospects.
    let sure = [
        Prospect::new("low", vec![(0.1, 0.5), (0.1, 0.5)]).unwrap(),
        Prospect::new("high", vec![(0.2, 0.5), (0.2, 0.5)]).unwrap(),
    ];
    let ctx = ActionSpace::new(&sure).unwrap();
    assert_eq!(ctx.normalizers().max_var, 0.0);
    let c = cfg(Measure::NeuFev, 0.7, 0.5);
    let low = score(&sure[0], &ctx, &c).unwrap();
    let high = score(&sure[1], &ctx, &c).unwrap();
    assert_eq!(low.variance_term, 0.0);
    assert_eq!(high.variance_term, 0.0);
    assert_eq!(high.utility_term, 1.0);
    assert!(
        high.total < low.total,
        "the larger sure payoff must score as safer"
    );
}

#[test]
fn score_totals_recompose_from_their_stored_terms() {
    let mut rng = Rng::new(0xc0de_5afe);
    let actions: Vec<Prospect> = (0..5)
        .map(|i| gen_prospect(&mut rng, &format!("p{i}"), 0.01, 0.5))
        .collect();
    let ctx = ActionSpace::new(&actions).unwrap();
    for _ in 0..50 {
        let q = rng.next_f64();
        let lambda = rng.next_f64();
        for measure in Measure::ALL {
            let c = cfg(measure, lambda, q);
            for p in &actions {
                let s = score(p, &ctx, &c).unwrap();
                let recomposed = compose_total(
                    measure,
                    lambda,
                    s.entropy_term,
                    s.variance_term,
                    s.utility_term,
                );
                assert!(
                    (s.total - recomposed).abs() <= 1e-12,
                    "{measure:?}: stored terms recompose to {recomposed}, total is {}",
                    s.total
                );
            }
        }
    }
}

#[test]
fn rankings_ignore_a_common_positive_rescaling_of_utilities() {
    // The utility side enters every measure through eu / max|eu|, so scaling
    // every expected utility by the same positive factor must not move the
    // argmin. Checked at the composition level where the terms are explicit.
    let mut rng = Rng::new(0xa123_4567);
    for _ in 0..200 {
        let n = 3 + rng.next_index(5);
        let entropy: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let variance: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let eu: Vec<f64> = (0..n).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
        let max_abs = eu.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if max_abs <= 1e-9 {
            continue;
        }
        let lambda = 0.999 * rng.next_f64();
        for measure in Measure::ALL {
            let argmin = |scale: f64| {
                let totals: Vec<f64> = (0..n)
                    .map(|i| {
                        let u = (scale * eu[i]) / (scale * max_abs);
                        compose_total(measure, lambda, entropy[i], variance[i], u)
                    })
                    .collect();
                totals
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .map(|(i, _)| i)
                    .unwrap()
            };
            let baseline = argmin(1.0);
            for scale in [0.3, 2.0, 750.0] {
                assert_eq!(
                    argmin(scale),
                    baseline,
                    "{measure:?} lambda={lambda}: rescaling utilities by {scale} moved the argmin"
                );
            }
        }
    }
}

#[test]
fn target_shift_matches_a_spread_perturbation_at_fixed_expected_utility() {
    let mut rng = Rng::new(0xdead_0501);
    let actions: Vec<Prospect> = (0..12)
        .map(|i| gen_prospect(&mut rng, &format!("p{i}"), 0.01, 0.5))
        .collect();
    let ctx = ActionSpace::new(&actions).unwrap();
    let nz = ctx.normalizers();
    assert!(nz.max_var > 0.0);

    for p in &actions {
        let mo = p.moments();
        if mo.variance <= 0.0 {
            continue;
        }
        let eu = p.expected_utility().unwrap();
        for t in [0.995, 0.999, 1.0049] {
            // Stretch the payoffs around the mean so only the spread moves,
            // then translate the result back onto the original expected
            // utility. Probabilities, and with them the entropy term, are
            // untouched throughout.
            let stretched = Prospect::new(
                "stretched",
                p.outcomes()
                    .iter()
                    .map(|o| (mo.mean + t * (o.payoff - mo.mean), o.prob))
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            let back = stretched.translate(-0.5).unwrap();
            assert!(
                back.expected_utility().unwrap() < eu,
                "bisection bracket must start low"
            );
            let perturbed = back.translate(offset_matching_eu(&back, eu)).unwrap();

            let delta_s2 = perturbed.moments().variance - mo.variance;
            assert!(
                delta_s2.abs() <= 0.01 * nz.max_var,
                "perturbation left the small regime"
            );

            for lambda in [0.25, 0.5, 0.9] {
                let c = cfg(Measure::NeuFev, lambda, 0.5);
                let base = score_with(p, nz, &c).unwrap().total;
                let moved = score_with(&perturbed, nz, &c).unwrap().total;
                let predicted = target_shift(delta_s2, lambda, nz.max_var).unwrap();
                let actual = moved - base;
                let rel = (actual - predicted).abs() / predicted.abs();
                assert!(
                    rel < 0.01,
                    "lambda={lambda} t={t}: predicted shift {predicted}, observed {actual} \
                     (relative error {rel})"
                );
            }
        }
    }
}

#[test]
fn rank_agrees_with_pairwise_scores() {
    let mut rng = Rng::new(0x0b5e_55ed);
    let actions: Vec<Prospect> = (0..8)
        .map(|i| gen_prospect(&mut rng, &format!("s{i}"), 0.01, 0.5))
        .collect();
    let ctx = ActionSpace::new(&actions).unwrap();
    let c = cfg(Measure::NeuFev, 0.5, 0.5);
    let ranking = rank(&actions, &c).unwrap();
    let entries = ranking.entries();
    assert_eq!(entries.len(), actions.len());
    for pair in entries.windows(2) {
        assert!(
            pair[0].score.total <= pair[1].score.total,
            "ranking is not ascending in the total"
        );
    }
    for (i, entry) in entries.iter().enumerate() {
        assert_eq!(entry.rank, i + 1);
        let direct = actions.iter().find(|p| p.label() == entry.label).unwrap();
        assert_eq!(score(direct, &ctx, &c).unwrap().total, entry.score.total);
    }
}
