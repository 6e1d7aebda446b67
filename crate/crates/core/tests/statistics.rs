use std::collections::BTreeMap;

use proptest::prelude::*;
use sciq_core::indicators::{quintile_stars, rmse_report, sentiment_face, Condition, ExpertLabels};
use sciq_core::learn::{anova_f, f_survival, significance_stars, Forest, ForestParams};
use sciq_core::social::{aggregate_stance, WeightedStance};
use sciq_core::{RatingRecord, StanceLabel};

/// Composite Simpson over [lo, hi].
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

/// Upper tail of F(d1, d2) as a regularized incomplete beta, both integrals numeric.
fn f_survival_oracle(f: f64, d1: f64, d2: f64) -> f64 {
    let (a, b) = (d2 / 2.0, d1 / 2.0);
    let density = |t: f64| t.powf(a - 1.0) * (1.0 - t).powf(b - 1.0);
    let x = d2 / (d2 + d1 * f);
    simpson(density, 0.0, x, 200_000) / simpson(density, 0.0, 1.0, 200_000)
}

#[test]
fn incomplete_beta_matches_numeric_integration() {
    let points = [
        (0.5, 2.0, 2.0),
        (1.0, 2.0, 4.0),
        (2.5, 2.0, 10.0),
        (4.0, 3.0, 6.0),
        (0.2, 4.0, 4.0),
        (7.0, 2.0, 20.0),
        (1.7, 6.0, 12.0),
        (3.3, 4.0, 30.0),
        (12.0, 2.0, 8.0),
        (0.9, 8.0, 16.0),
        (5.0, 5.0, 5.0),
        (2.0, 3.0, 40.0),
        (0.05, 2.0, 6.0),
        (9.5, 4.0, 10.0),
        (1.2, 10.0, 10.0),
        (3.0, 2.0, 3.0),
        (6.5, 6.0, 2.0),
        (0.7, 3.0, 3.0),
        (15.0, 3.0, 12.0),
        (2.2, 7.0, 9.0),
    ];
    for (f, d1, d2) in points {
        let got = f_survival(f, d1, d2);
        let want = f_survival_oracle(f, d1, d2);
        assert!((got - want).abs() < 1e-6, "F={f} ({d1},{d2}): {got} vs {want}");
    }
}

#[test]
fn two_group_anova_by_hand() {
    // Means 2 and 8, grand mean 5: SSB = 6 * 9 = 54, SSW = 4, dof (1, 4).
    let r = anova_f(&[vec![1.0, 2.0, 3.0], vec![7.0, 8.0, 9.0]]).unwrap();
    assert!((r.f_statistic - 54.0).abs() < 1e-12);
    // With d1 = 1, the F upper tail equals the two-sided t tail for t = sqrt(54).
    assert!((r.p_value - 0.001826).abs() < 5e-6, "{}", r.p_value);
}

#[test]
fn significance_star_thresholds() {
    assert_eq!(significance_stars(0.0049), "***");
    assert_eq!(significance_stars(0.005), "**");
    assert_eq!(significance_stars(0.0099), "**");
    assert_eq!(significance_stars(0.01), "*");
    assert_eq!(significance_stars(0.0499), "*");
    assert_eq!(significance_stars(0.05), "");
}

#[test]
fn quintile_legend_cases() {
    let reference: Vec<f64> = (1..=100).map(f64::from).collect();
    assert_eq!(quintile_stars(-5.0, &reference), 1);
    assert_eq!(quintile_stars(500.0, &reference), 5);
    assert_eq!(quintile_stars(50.0, &reference), 3);
}

#[test]
fn face_thresholds() {
    for (p, face) in [
        (1.0, "++"),
        (0.5, "++"),
        (0.4999, "+"),
        (0.1, "+"),
        (0.0999, "0"),
        (0.0, "0"),
        (-0.0999, "0"),
        (-0.1, "-"),
        (-0.4999, "-"),
        (-0.5, "--"),
        (-1.0, "--"),
    ] {
        assert_eq!(sentiment_face(p), face, "{p}");
    }
}

#[test]
fn aggregate_stance_hand_case() {
    let w = |stance, weight: u64| WeightedStance {
        stance,
        likes: weight - 1,
        retweets: 0,
    };
    let items = [
        w(StanceLabel::Supporting, 3),
        w(StanceLabel::Commenting, 1),
        w(StanceLabel::Contradicting, 4),
    ];
    assert_eq!(aggregate_stance(&items), 0.0);
    assert_eq!(aggregate_stance(&[]), 0.0);
}

fn rating(rater: &str, article: &str, condition: Condition, score: u8) -> RatingRecord {
    RatingRecord {
        article_id: article.into(),
        rater_id: rater.into(),
        condition,
        score,
        timestamp: 1,
    }
}

#[test]
fn rmse_report_hand_case() {
    let experts: ExpertLabels = [("a1", (4, 4)), ("a2", (2, 3)), ("a3", (1, 5))]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let without = Condition::WithoutIndicators;
    let with = Condition::WithIndicators;
    let ratings = vec![
        rating("w1", "a1", without, 5),
        rating("w1", "a2", without, 2),
        rating("w1", "a3", without, 3),
        rating("v1", "a1", with, 4),
        rating("v1", "a2", with, 3),
        rating("v2", "a1", with, 4),
        rating("v2", "a2", with, 2),
        // Repeat submission: ignored.
        rating("v2", "a2", with, 5),
    ];
    let automated: BTreeMap<String, f64> = [("a1", 3.5), ("a2", 2.5), ("a3", 5.0)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let rep = rmse_report(&ratings, &experts, Some(&automated)).unwrap();
    assert_eq!(rep.n_ratings, 7);
    assert!(rep.dropped_raters.is_empty());
    let row = |name: &str| rep.rows.iter().find(|r| r.bucket == name).unwrap().clone();
    let close = |got: Option<f64>, want: f64| (got.unwrap() - want).abs() <= 1e-12;

    let strong = row("strong_agreement");
    assert_eq!(strong.n_articles, 1);
    assert!(close(strong.without_indicators, 1.0));
    assert!(close(strong.with_indicators, 0.0));
    assert!(close(strong.automated, 0.5));

    let weak = row("weak_agreement");
    assert!(close(weak.without_indicators, 0.5));
    assert!(close(weak.with_indicators, 0.0));
    assert!(close(weak.automated, 0.0));

    let dis = row("disagreement");
    assert!(close(dis.without_indicators, 0.0));
    assert_eq!(dis.with_indicators, None);
    assert!(close(dis.automated, 2.0));

    let all = row("all_articles");
    assert_eq!(all.n_articles, 3);
    assert!(close(all.without_indicators, (1.25f64 / 3.0).sqrt()));
    assert!(close(all.with_indicators, 0.0));
    assert!(close(all.automated, (4.25f64 / 3.0).sqrt()));
}

#[test]
fn rmse_is_zero_when_crowd_matches_experts() {
    let experts: ExpertLabels = [("a1", (4, 4)), ("a2", (2, 4)), ("a3", (1, 5))]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let mut ratings = Vec::new();
    for (id, (a, b)) in &experts {
        ratings.push(rating("x", id, Condition::WithIndicators, *a));
        ratings.push(rating("y", id, Condition::WithIndicators, *b));
    }
    let rep = rmse_report(&ratings, &experts, None).unwrap();
    // No expert pair differs by exactly one, so the weak bucket is empty.
    for r in &rep.rows {
        let want = (r.n_articles > 0).then_some(0.0);
        assert_eq!(r.with_indicators, want, "{}", r.bucket);
        assert_eq!(r.automated, None);
    }
}

fn groups() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 2..7), 2..5)
}

fn rel_eq(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= 1e-7 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #[test]
    fn anova_ignores_shift_and_scale(g in groups(), shift in -1e3f64..1e3, scale in 0.01f64..100.0) {
        let base = anova_f(&g).unwrap();
        let moved: Vec<Vec<f64>> = g.iter().map(|v| v.iter().map(|x| x + shift).collect()).collect();
        let scaled: Vec<Vec<f64>> = g.iter().map(|v| v.iter().map(|x| x * scale).collect()).collect();
        let m = anova_f(&moved).unwrap();
        let s = anova_f(&scaled).unwrap();
        prop_assert!(rel_eq(base.f_statistic, m.f_statistic), "{} vs {}", base.f_statistic, m.f_statistic);
        prop_assert!(rel_eq(base.f_statistic, s.f_statistic), "{} vs {}", base.f_statistic, s.f_statistic);
    }

    #[test]
    fn p_value_falls_as_f_grows(f1 in 0.0f64..50.0, df in 0.0f64..50.0, d1 in 1u32..10, d2 in 1u32..60) {
        let (d1, d2) = (f64::from(d1), f64::from(d2));
        let p1 = f_survival(f1, d1, d2);
        let p2 = f_survival(f1 + df, d1, d2);
        prop_assert!((0.0..=1.0).contains(&p1));
        prop_assert!(p2 <= p1 + 1e-15, "{} > {}", p2, p1);
    }

    #[test]
    fn quintile_stars_are_monotone(reference in prop::collection::vec(-50.0f64..50.0, 1..40), a in -60.0f64..60.0, b in -60.0f64..60.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (s_lo, s_hi) = (quintile_stars(lo, &reference), quintile_stars(hi, &reference));
        prop_assert!((1..=5).contains(&s_lo) && (1..=5).contains(&s_hi));
        prop_assert!(s_lo <= s_hi);
    }

    #[test]
    fn aggregate_stance_is_bounded_and_scale_free(
        items in prop::collection::vec((0usize..4, 0u64..50, 0u64..50), 1..20),
        k in 1u64..7,
    ) {
        let base: Vec<WeightedStance> = items
            .iter()
            .map(|&(s, likes, retweets)| WeightedStance { stance: StanceLabel::ALL[s], likes, retweets })
            .collect();
        // Multiply every weight 1 + likes + retweets by k.
        let scaled: Vec<WeightedStance> = base
            .iter()
            .map(|w| WeightedStance { likes: k * (1 + w.likes + w.retweets) - 1 - w.retweets, ..*w })
            .collect();
        let a = aggregate_stance(&base);
        prop_assert!((-1.0..=1.0).contains(&a));
        prop_assert!((a - aggregate_stance(&scaled)).abs() < 1e-12);
    }

    #[test]
    fn forest_ignores_row_order(
        rows in prop::collection::vec((prop::collection::vec(-5.0f64..5.0, 3), 0u32..3), 6..30),
        seed in any::<u64>(),
    ) {
        let (x, y): (Vec<Vec<f64>>, Vec<u32>) = rows.iter().cloned().unzip();
        prop_assume!(y.iter().any(|&c| c != y[0]));
        let params = ForestParams { n_trees: 8, ..ForestParams::with_seed(seed) };
        let a = Forest::fit(&x, &y, params).unwrap();
        let (rx, ry): (Vec<Vec<f64>>, Vec<u32>) = rows.iter().rev().cloned().unzip();
        let b = Forest::fit(&rx, &ry, params).unwrap();
        for r in &x {
            prop_assert_eq!(a.predict_proba(r), b.predict_proba(r));
            prop_assert!(a.class_labels().contains(&a.predict(r)));
        }
    }
}
