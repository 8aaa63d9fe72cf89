//! Trial summaries and Welch's unequal-variance t-test.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Accuracies from repeated runs of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSet {
    pub label: String,
    pub accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator); zero for one value.
    pub std: f64,
}

impl TrialSet {
    pub fn len(&self) -> usize {
        self.accuracies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accuracies.is_empty()
    }

    pub fn variance(&self) -> f64 {
        self.std * self.std
    }
}

pub fn summarize(label: impl Into<String>, accuracies: &[f64]) -> Result<TrialSet> {
    if accuracies.is_empty() {
        return Err(Error::Parameter("cannot summarise an empty trial list".into()));
    }
    let n = accuracies.len() as f64;
    let mean = accuracies.iter().sum::<f64>() / n;
    let std = if accuracies.len() > 1 {
        let ss: f64 = accuracies.iter().map(|x| (x - mean).powi(2)).sum();
        (ss / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(TrialSet {
        label: label.into(),
        accuracies: accuracies.to_vec(),
        mean,
        std,
    })
}

/// Outcome of a two-sample test between `a` and `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: TrialSet,
    pub b: TrialSet,
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub alpha: f64,
    pub significant: bool,
    /// Both sets have zero variance but different means.
    pub degenerate_variance: bool,
    pub test: String,
}

pub fn welch_t_test(a: &TrialSet, b: &TrialSet) -> Result<Comparison> {
    welch_t_test_at(a, b, DEFAULT_ALPHA)
}

/// Two-tailed Welch test: `t = (mean_a − mean_b) / √(s_a²/n_a + s_b²/n_b)`
/// with Welch–Satterthwaite degrees of freedom.
pub fn welch_t_test_at(a: &TrialSet, b: &TrialSet, alpha: f64) -> Result<Comparison> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Parameter(format!(
            "Welch's test needs at least two trials per set ({}: {}, {}: {})",
            a.label,
            a.len(),
            b.label,
            b.len()
        )));
    }
    if !(a.variance().is_finite() && b.variance().is_finite()) {
        return Err(Error::Parameter("trial variances must be finite".into()));
    }
    let va = a.variance() / a.len() as f64;
    let vb = b.variance() / b.len() as f64;
    let diff = a.mean - b.mean;

    let (t, df, p, degenerate) = if va + vb == 0.0 {
        let df = (a.len() + b.len() - 2) as f64;
        if diff == 0.0 {
            (0.0, df, 1.0, false)
        } else {
            (diff.signum() * f64::INFINITY, df, 0.0, true)
        }
    } else {
        let se2 = va + vb;
        let t = diff / se2.sqrt();
        let df = se2 * se2
            / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
        (t, df, two_tailed_p(t, df), false)
    };

    Ok(Comparison {
        a: a.clone(),
        b: b.clone(),
        t,
        df,
        p,
        alpha,
        significant: p < alpha,
        degenerate_variance: degenerate,
        test: "welch-two-tailed".into(),
    })
}

/// `P(|T| ≥ |t|)` for Student's t with `df` degrees of freedom.
pub fn two_tailed_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(x, df / 2.0, 0.5).clamp(0.0, 1.0)
}

/// Student's t cumulative distribution function.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * two_tailed_p(t, df);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Lanczos approximation (g = 7, nine coefficients), relative error well
/// below 1e-13 for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `I_x(a, b)` by the modified Lentz continued fraction, using the
/// symmetry `I_x(a, b) = 1 − I_{1−x}(b, a)` where that converges faster.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - ln_front.exp() * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// A comparison between two named configurations, with a winner recorded
/// only when the difference is significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedComparison {
    pub first: String,
    pub second: String,
    pub comparison: Comparison,
    pub winner: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyComparisons {
    pub pairwise: Vec<RankedComparison>,
    pub versus_baseline: Vec<RankedComparison>,
}

fn ranked(first: &str, a: &TrialSet, second: &str, b: &TrialSet, alpha: f64) -> Result<RankedComparison> {
    let comparison = welch_t_test_at(a, b, alpha)?;
    let winner = comparison.significant.then(|| {
        if comparison.a.mean > comparison.b.mean {
            first.to_string()
        } else {
            second.to_string()
        }
    });
    Ok(RankedComparison {
        first: first.to_string(),
        second: second.to_string(),
        comparison,
        winner,
    })
}

/// All pairwise comparisons plus each configuration against the baseline,
/// ordered by name.
pub fn compare_strategies(
    table: &BTreeMap<String, TrialSet>,
    baseline: &TrialSet,
    alpha: f64,
) -> Result<StrategyComparisons> {
    if table.len() < 2 {
        return Err(Error::Parameter(
            "strategy comparison needs at least two strategies".into(),
        ));
    }
    let names: Vec<&String> = table.keys().collect();
    let mut pairwise = Vec::new();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            pairwise.push(ranked(a, &table[*a], b, &table[*b], alpha)?);
        }
    }
    let versus_baseline = names
        .iter()
        .map(|name| ranked(name, &table[*name], "baseline", baseline, alpha))
        .collect::<Result<_>>()?;
    Ok(StrategyComparisons {
        pairwise,
        versus_baseline,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summaries() {
        let s = summarize("x", &[0.5, 0.5, 0.5]).unwrap();
        assert_eq!((s.mean, s.std), (0.5, 0.0));
        let s = summarize("x", &[0.0, 1.0]).unwrap();
        assert_eq!(s.mean, 0.5);
        assert!((s.std - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(summarize("x", &[0.3]).unwrap().std, 0.0);
        assert!(summarize("x", &[]).is_err());
    }

    #[test]
    fn identical_sets() {
        let a = summarize("a", &[0.9, 0.91, 0.92]).unwrap();
        let c = welch_t_test(&a, &a).unwrap();
        assert_eq!((c.t, c.p), (0.0, 1.0));
        assert!(!c.significant);
    }

    #[test]
    fn shifted_sequences() {
        let a = summarize("a", &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let b = summarize("b", &[2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let c = welch_t_test(&a, &b).unwrap();
        assert!((c.t + 1.0).abs() < 1e-12);
        assert!((c.df - 8.0).abs() < 1e-12);
        assert!((c.p - 0.346_593_507_087_3).abs() < 1e-9, "p = {}", c.p);
    }

    #[test]
    fn zero_variance_cases() {
        let a = summarize("a", &[0.5, 0.5]).unwrap();
        let b = summarize("b", &[0.7, 0.7]).unwrap();
        let c = welch_t_test(&a, &a).unwrap();
        assert_eq!((c.t, c.p, c.degenerate_variance), (0.0, 1.0, false));
        let c = welch_t_test(&a, &b).unwrap();
        assert_eq!(c.p, 0.0);
        assert!(c.degenerate_variance && c.significant);
        assert!(welch_t_test(&summarize("x", &[1.0]).unwrap(), &a).is_err());
    }

    #[test]
    fn special_functions() {
        // Γ(5) = 24, Γ(0.5) = √π
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
        // I_x(1, 1) = x; I_x(a, 1) = x^a
        assert!((regularized_incomplete_beta(0.3, 1.0, 1.0) - 0.3).abs() < 1e-14);
        assert!((regularized_incomplete_beta(0.6, 3.0, 1.0) - 0.216).abs() < 1e-14);
        // Cauchy (df = 1): P(|T| > 1) = 1/2
        assert!((two_tailed_p(1.0, 1.0) - 0.5).abs() < 1e-14);
        assert!((student_t_cdf(0.0, 4.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identical_strategies_have_no_winner() {
        let t = summarize("x", &[0.9, 0.91, 0.905]).unwrap();
        let table: BTreeMap<String, TrialSet> = ["central", "lateral", "random"]
            .iter()
            .map(|n| (n.to_string(), t.clone()))
            .collect();
        let out = compare_strategies(&table, &t, DEFAULT_ALPHA).unwrap();
        assert_eq!(out.pairwise.len(), 3);
        assert!(out
            .pairwise
            .iter()
            .chain(&out.versus_baseline)
            .all(|r| r.winner.is_none() && r.comparison.p == 1.0));
        assert_eq!(out.pairwise[0].first, "central");
        assert_eq!(out.pairwise[0].second, "lateral");
    }
}
