//! Reliability, correlation, and agreement statistics.
//!
//! Everything here is pure and deterministic. Sample (n−1) variance is used
//! throughout — for standard deviations, Cronbach's alpha, and Pearson —
//! so the three never disagree about scale. The Student-t p-value is
//! computed from the regularized incomplete beta function directly rather
//! than through a stats crate; the two special functions below are all the
//! machinery that requires.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::persona::Level;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} data points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("need at least 2 items, got {got}")]
    TooFewItems { got: usize },
    #[error("input has zero variance")]
    ZeroVariance,
    #[error("total score variance is zero; alpha is undefined")]
    DegenerateVariance,
    #[error("empty input")]
    Empty,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance, n−1 denominator.
fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Descriptive {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

/// Mean and sample standard deviation.
pub fn descriptive(values: &[f64]) -> Result<Descriptive, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if values.len() < 2 {
        return Err(StatsError::TooFewPoints { needed: 2, got: values.len() });
    }
    Ok(Descriptive {
        mean: mean(values),
        sd: sample_variance(values).sqrt(),
        n: values.len(),
    })
}

/// Cronbach's alpha over an n-respondents × k-items matrix:
/// α = (k/(k−1)) · (1 − Σᵢ var(itemᵢ) / var(row totals)).
pub fn cronbach_alpha(matrix: &[Vec<f64>]) -> Result<f64, StatsError> {
    let n = matrix.len();
    if n < 2 {
        return Err(StatsError::TooFewPoints { needed: 2, got: n });
    }
    let k = matrix[0].len();
    if k < 2 {
        return Err(StatsError::TooFewItems { got: k });
    }
    for row in matrix {
        if row.len() != k {
            return Err(StatsError::LengthMismatch { left: k, right: row.len() });
        }
    }

    let item_variance_sum: f64 = (0..k)
        .map(|item| {
            let column: Vec<f64> = matrix.iter().map(|row| row[item]).collect();
            sample_variance(&column)
        })
        .sum();
    let totals: Vec<f64> = matrix.iter().map(|row| row.iter().sum()).collect();
    let total_variance = sample_variance(&totals);
    if total_variance == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }

    Ok((k as f64 / (k as f64 - 1.0)) * (1.0 - item_variance_sum / total_variance))
}

/// One correlation: coefficient, two-tailed p, and the sample size behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

/// Pearson correlation with a two-tailed p-value from Student's t with
/// n−2 degrees of freedom. |r| = 1 maps to p = 0.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationCell, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { left: x.len(), right: y.len() });
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFewPoints { needed: 3, got: n });
    }
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx).powi(2);
        syy += (yi - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }

    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let dof = (n - 2) as f64;
    let p = if 1.0 - r * r <= f64::EPSILON {
        0.0
    } else {
        let t = r * (dof / (1.0 - r * r)).sqrt();
        student_t_two_tailed_p(t, dof)
    };
    Ok(CorrelationCell { r, p, n })
}

/// Two-tailed tail mass of Student's t: P(|T| ≥ |t|) = I_x(ν/2, 1/2)
/// with x = ν/(ν + t²).
pub fn student_t_two_tailed_p(t: f64, dof: f64) -> f64 {
    let x = dof / (dof + t * t);
    inc_beta(x, dof / 2.0, 0.5).clamp(0.0, 1.0)
}

/// Significance stars as conventionally printed next to correlations:
/// `***` p < .001, `**` p < .01, `*` p < .05, blank otherwise.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Precision/recall/F1 for one class treated as positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassAgreement {
    pub class: Level,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// True when a 0/0 ratio was coerced to 0 for this class.
    pub degenerate: bool,
}

/// Per-class scores plus their unweighted (macro) average over {High, Low}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub per_class: [ClassAgreement; 2],
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Label agreement between a gold and a predicted High/Low sequence.
/// Undefined ratios (0/0) score 0 and set the class's degenerate flag.
pub fn agreement(gold: &[Level], pred: &[Level]) -> Result<AgreementReport, StatsError> {
    if gold.is_empty() {
        return Err(StatsError::Empty);
    }
    if gold.len() != pred.len() {
        return Err(StatsError::LengthMismatch { left: gold.len(), right: pred.len() });
    }

    let class_scores = |positive: Level| -> ClassAgreement {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_ = 0usize;
        for (g, p) in gold.iter().zip(pred) {
            match (*g == positive, *p == positive) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
        let mut degenerate = false;
        let mut ratio = |num: usize, den: usize| {
            if den == 0 {
                degenerate = true;
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassAgreement { class: positive, precision, recall, f1, degenerate }
    };

    let high = class_scores(Level::High);
    let low = class_scores(Level::Low);
    Ok(AgreementReport {
        precision: (high.precision + low.precision) / 2.0,
        recall: (high.recall + low.recall) / 2.0,
        f1: (high.f1 + low.f1) / 2.0,
        per_class: [high, low],
    })
}

/// ln Γ(z) by the Lanczos approximation (g = 5, 6 coefficients), accurate to
/// well past the 1e−10 this module needs. Valid for z > 0, which is all the
/// beta-function plumbing ever passes.
fn ln_gamma(z: f64) -> f64 {
    const COEFFS: [f64; 6] = [
        76.180_091_729_471_46,
        -86.505_320_329_416_77,
        24.014_098_240_830_91,
        -1.231_739_572_450_155,
        0.120_865_097_386_617_9e-2,
        -0.539_523_938_495_3e-5,
    ];
    const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

    let mut series = 1.000_000_000_190_015;
    for (i, coefficient) in COEFFS.iter().enumerate() {
        series += coefficient / (z + i as f64 + 1.0);
    }
    let tmp = z + 5.5;
    (z + 0.5) * tmp.ln() - tmp + (SQRT_TWO_PI * series / z).ln()
}

/// Regularized incomplete beta I_x(a, b) via the continued-fraction
/// expansion (modified Lentz), switching to the symmetric form when x is
/// past the convergence crossover.
fn inc_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        return 1.0 - inc_beta(1.0 - x, b, a);
    }

    let ln_front = a * x.ln() + b * (1.0 - x).ln() - (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b));
    ln_front.exp() * beta_fraction(x, a, b) / a
}

fn beta_fraction(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITERATIONS: usize = 300;
    const EPSILON: f64 = 1e-15;
    const TINY: f64 = 1e-30;

    let mut c = 1.0;
    let mut d = 0.0;
    let mut value = 1.0;
    for m in 0..MAX_ITERATIONS {
        let m = m as f64;
        // Odd then even continued-fraction terms for step m.
        let odd = -(a + m) * (a + b + m) * x / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
        let even = (m + 1.0) * (b - m - 1.0) * x / ((a + 2.0 * m + 1.0) * (a + 2.0 * m + 2.0));
        for term in [odd, even] {
            d = 1.0 + term * d;
            if d.abs() < TINY {
                d = TINY;
            }
            d = 1.0 / d;
            c = 1.0 + term / c;
            if c.abs() < TINY {
                c = TINY;
            }
            let delta = c * d;
            value *= delta;
            if (delta - 1.0).abs() < EPSILON {
                return 1.0 / value;
            }
        }
    }
    1.0 / value
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn descriptive_basics() {
        let d = descriptive(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!((d.mean, d.sd), (2.0, 0.0));
        let d = descriptive(&[1.0, 3.0]).unwrap();
        assert_eq!(d.mean, 2.0);
        assert!((d.sd - 2.0_f64.sqrt()).abs() < 1e-12);
        assert_eq!(descriptive(&[]), Err(StatsError::Empty));
        assert_eq!(descriptive(&[5.0]), Err(StatsError::TooFewPoints { needed: 2, got: 1 }));
    }

    #[test]
    fn alpha_of_duplicated_items_is_one() {
        // Two identical items over respondents [1,2,3]: item variances 1
        // each, totals [2,4,6] with variance 4 → α = 2·(1 − 2/4) = 1.
        let matrix = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        assert!((cronbach_alpha(&matrix).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_hand_oracle_case() {
        // Items [1,2,3] and [2,1,3]: variances 1 and 1; totals [3,3,6]
        // with variance 3 → α = 2·(1 − 2/3) = 2/3.
        let matrix = vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![3.0, 3.0]];
        assert!((cronbach_alpha(&matrix).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_rejects_bad_shapes() {
        assert_eq!(
            cronbach_alpha(&[vec![1.0, 2.0]]),
            Err(StatsError::TooFewPoints { needed: 2, got: 1 })
        );
        assert_eq!(
            cronbach_alpha(&[vec![1.0], vec![2.0]]),
            Err(StatsError::TooFewItems { got: 1 })
        );
        assert_eq!(
            cronbach_alpha(&[vec![1.0, 2.0], vec![1.0]]),
            Err(StatsError::LengthMismatch { left: 2, right: 1 })
        );
        let constant = vec![vec![2.0, 2.0], vec![2.0, 2.0]];
        assert_eq!(cronbach_alpha(&constant), Err(StatsError::DegenerateVariance));
    }

    #[test]
    fn perfect_correlations() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y_pos: Vec<f64> = x.to_vec();
        let cell = pearson(&x, &y_pos).unwrap();
        assert_eq!((cell.r, cell.p), (1.0, 0.0));
        let y_neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let cell = pearson(&x, &y_neg).unwrap();
        assert_eq!((cell.r, cell.p), (-1.0, 0.0));
    }

    #[test]
    fn pearson_matches_reference_values() {
        // Cross-checked against SciPy's pearsonr.
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 1.0, 4.0, 3.0, 5.0];
        let cell = pearson(&x, &y).unwrap();
        assert!((cell.r - 0.8).abs() < 1e-12);
        assert!((cell.p - 0.104_088_038_661_827_99).abs() < 1e-9, "p = {}", cell.p);

        let x = [3.0, 7.0, 1.0, 9.0, 4.0, 6.0, 8.0, 2.0];
        let y = [5.0, 6.0, 2.0, 8.0, 5.0, 5.0, 9.0, 1.0];
        let cell = pearson(&x, &y).unwrap();
        assert!((cell.r - 0.904_986_640_233_334_4).abs() < 1e-9, "r = {}", cell.r);
        assert!((cell.p - 0.001_994_439_788_300_689_7).abs() < 1e-9, "p = {}", cell.p);
    }

    #[test]
    fn pearson_input_guards() {
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0]),
            Err(StatsError::LengthMismatch { left: 2, right: 1 })
        );
        assert_eq!(
            pearson(&[1.0, 2.0], &[2.0, 1.0]),
            Err(StatsError::TooFewPoints { needed: 3, got: 2 })
        );
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::ZeroVariance)
        );
    }

    #[test]
    fn pearson_symmetry_and_affine_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let n = rng.gen_range(3..30);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let Ok(forward) = pearson(&x, &y) else { continue };
            let backward = pearson(&y, &x).unwrap();
            assert!((forward.r - backward.r).abs() < 1e-12);

            let scaled: Vec<f64> = x.iter().map(|v| -2.5 * v + 7.0).collect();
            let flipped = pearson(&scaled, &y).unwrap();
            assert!((flipped.r + forward.r).abs() < 1e-9);
        }
    }

    #[test]
    fn p_value_decreases_with_correlation_strength() {
        // At fixed n, a stronger |r| must not raise p.
        for n in [4usize, 8, 20, 100] {
            let dof = (n - 2) as f64;
            let mut previous = 1.0_f64;
            for step in 1..100 {
                let r = step as f64 / 100.0;
                let t = r * (dof / (1.0 - r * r)).sqrt();
                let p = student_t_two_tailed_p(t, dof);
                assert!((0.0..=1.0).contains(&p));
                assert!(p <= previous + 1e-12, "n={n} r={r}: p={p} previous={previous}");
                previous = p;
            }
        }
    }

    #[test]
    fn stars_thresholds() {
        assert_eq!(stars(0.0005), "***");
        assert_eq!(stars(0.005), "**");
        assert_eq!(stars(0.04), "*");
        assert_eq!(stars(0.05), "");
        assert_eq!(stars(0.2), "");
    }

    #[test]
    fn agreement_perfect_prediction() {
        use Level::*;
        let gold = [High, Low, High, Low];
        let report = agreement(&gold, &gold).unwrap();
        assert_eq!((report.precision, report.recall, report.f1), (1.0, 1.0, 1.0));
        for class in report.per_class {
            assert_eq!((class.precision, class.recall, class.f1), (1.0, 1.0, 1.0));
            assert!(!class.degenerate);
        }
    }

    #[test]
    fn agreement_hand_counted_half() {
        use Level::*;
        // Class High: TP=1, FP=1, FN=1 → P=R=F1=0.5; Low is symmetric.
        let gold = [High, High, Low, Low];
        let pred = [High, Low, High, Low];
        let report = agreement(&gold, &pred).unwrap();
        assert_eq!(report.f1, 0.5);
        assert_eq!(report.precision, 0.5);
        assert_eq!(report.recall, 0.5);
    }

    #[test]
    fn agreement_total_miss_is_degenerate_zero() {
        use Level::*;
        let gold = [High, High, High];
        let pred = [Low, Low, Low];
        let report = agreement(&gold, &pred).unwrap();
        assert_eq!(report.f1, 0.0);
        assert!(report.per_class.iter().all(|c| c.degenerate));
    }

    #[test]
    fn agreement_encoding_swap_preserves_macro() {
        use Level::*;
        let gold = [High, High, Low, High, Low];
        let pred = [High, Low, Low, High, High];
        let report = agreement(&gold, &pred).unwrap();

        let flip = |l: Level| if l == High { Low } else { High };
        let gold_f: Vec<Level> = gold.iter().copied().map(flip).collect();
        let pred_f: Vec<Level> = pred.iter().copied().map(flip).collect();
        let flipped = agreement(&gold_f, &pred_f).unwrap();

        assert!((report.f1 - flipped.f1).abs() < 1e-12);
        assert!((report.precision - flipped.precision).abs() < 1e-12);
        // Per-class rows swap places.
        assert_eq!(report.per_class[0].precision, flipped.per_class[1].precision);
        assert_eq!(report.per_class[1].recall, flipped.per_class[0].recall);
    }

    #[test]
    fn agreement_input_guards() {
        use Level::*;
        assert_eq!(agreement(&[], &[]), Err(StatsError::Empty));
        assert_eq!(
            agreement(&[High], &[High, Low]),
            Err(StatsError::LengthMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(5.0) - 24.0_f64.ln()).abs() < 1e-10);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-10);
        assert!((ln_gamma(1.0)).abs() < 1e-10);
    }

    #[test]
    fn inc_beta_endpoints_and_symmetry() {
        assert_eq!(inc_beta(0.0, 2.0, 3.0), 0.0);
        assert_eq!(inc_beta(1.0, 2.0, 3.0), 1.0);
        // I_x(a,b) = 1 − I_{1−x}(b,a)
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x: f64 = rng.gen_range(0.01..0.99);
            let a = rng.gen_range(0.5..10.0);
            let b = rng.gen_range(0.5..10.0);
            let lhs = inc_beta(x, a, b);
            let rhs = 1.0 - inc_beta(1.0 - x, b, a);
            assert!((lhs - rhs).abs() < 1e-12, "x={x} a={a} b={b}");
        }
        // I_x(1,1) is the identity.
        assert!((inc_beta(0.37, 1.0, 1.0) - 0.37).abs() < 1e-12);
    }
}
