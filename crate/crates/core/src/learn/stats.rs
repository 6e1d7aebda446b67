//! One-way ANOVA, F-distribution tail, RMSE.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use super::LearnError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f_statistic: f64,
    pub p_value: f64,
    pub dof_between: usize,
    pub dof_within: usize,
}

/// Survival function of the F distribution, `P(X > f)` for `X ~ F(d1, d2)`,
/// via the regularized incomplete beta function.
pub fn f_survival(f: f64, d1: f64, d2: f64) -> f64 {
    if f.is_nan() {
        return f64::NAN;
    }
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let x = d2 / (d2 + d1 * f);
    beta_reg(d2 / 2.0, d1 / 2.0, x).clamp(0.0, 1.0)
}

/// Classic one-way ANOVA.
///
/// Zero within-group variance: F is 0 when the group means coincide and
/// infinite (p = 0) otherwise.
pub fn anova_f(groups: &[Vec<f64>]) -> Result<AnovaResult, LearnError> {
    if groups.len() < 2 {
        return Err(LearnError::TooFewGroups);
    }
    if let Some(g) = groups.iter().position(|g| g.len() < 2) {
        return Err(LearnError::GroupTooSmall(g));
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    let k = groups.len();
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += g.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    }
    let dof_between = k - 1;
    let dof_within = n - k;
    // Relative cut-offs keep the statistic invariant under shifting and
    // scaling the data.
    let scale = groups
        .iter()
        .flatten()
        .map(|v| (v - grand).powi(2))
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    let ssb = if ssb <= 1e-12 * scale { 0.0 } else { ssb };
    let ssw = if ssw <= 1e-12 * scale { 0.0 } else { ssw };
    let f_statistic = if ssb == 0.0 {
        0.0
    } else if ssw == 0.0 {
        f64::INFINITY
    } else {
        (ssb / dof_between as f64) / (ssw / dof_within as f64)
    };
    Ok(AnovaResult {
        f_statistic,
        p_value: f_survival(f_statistic, dof_between as f64, dof_within as f64),
        dof_between,
        dof_within,
    })
}

/// Significance stars: `***` below 0.005, `**` below 0.01, `*` below 0.05.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.005 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64, LearnError> {
    if a.len() != b.len() {
        return Err(LearnError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(LearnError::EmptyVectors);
    }
    let mse = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64;
    Ok(mse.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_means_give_zero() {
        let r = anova_f(&[vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]]).unwrap();
        assert_eq!(r.f_statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn textbook_two_groups() {
        // SSB = 3*9 + 3*9 = 54 (dof 1), SSW = 2 + 2 = 4 (dof 4) => F = 54.
        let r = anova_f(&[vec![1.0, 2.0, 3.0], vec![7.0, 8.0, 9.0]]).unwrap();
        assert!((r.f_statistic - 54.0).abs() < 1e-12);
        assert_eq!((r.dof_between, r.dof_within), (1, 4));
        // Equivalent pooled t-test: t = 6 / sqrt(2/3) with 4 dof.
        assert!((r.p_value - 0.001_826_260_668_259_983).abs() < 1e-9);
    }

    #[test]
    fn constant_groups_with_equal_means() {
        let r = anova_f(&[vec![2.0, 2.0], vec![2.0, 2.0]]).unwrap();
        assert_eq!(r.f_statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn constant_groups_with_distinct_means() {
        let r = anova_f(&[vec![1.0, 1.0], vec![4.0, 4.0]]).unwrap();
        assert!(r.f_statistic.is_infinite());
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn preconditions() {
        assert_eq!(anova_f(&[vec![1.0, 2.0]]).unwrap_err(), LearnError::TooFewGroups);
        assert_eq!(
            anova_f(&[vec![1.0, 2.0], vec![3.0]]).unwrap_err(),
            LearnError::GroupTooSmall(1)
        );
    }

    #[test]
    fn stars_follow_thresholds() {
        assert_eq!(significance_stars(0.004), "***");
        assert_eq!(significance_stars(0.005), "**");
        assert_eq!(significance_stars(0.0099), "**");
        assert_eq!(significance_stars(0.01), "*");
        assert_eq!(significance_stars(0.049), "*");
        assert_eq!(significance_stars(0.05), "");
    }

    #[test]
    fn rmse_cases() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[1.0, 2.0], &[2.0, 4.0]).unwrap() - 2.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(rmse(&[1.0], &[1.0, 2.0]).unwrap_err(), LearnError::LengthMismatch(1, 2));
        assert_eq!(rmse(&[], &[]).unwrap_err(), LearnError::EmptyVectors);
    }

    #[test]
    fn survival_is_monotone_in_f() {
        let mut last = 1.0;
        for i in 1..50 {
            let p = f_survival(i as f64 * 0.5, 3.0, 12.0);
            assert!(p <= last);
            last = p;
        }
    }
}
