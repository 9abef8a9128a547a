use std::collections::BTreeMap;

use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::beta::beta_reg;

use super::EvalError;

/// Neumaier-compensated sum.
fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Arithmetic mean with compensated summation. Constant inputs give back
/// their value exactly. Empty input gives NaN.
pub fn mean(xs: &[f64]) -> f64 {
    if let Some(&first) = xs.first() {
        if xs.iter().all(|&x| x == first) {
            return first;
        }
    }
    compensated_sum(xs.iter().copied()) / xs.len() as f64
}

/// Sample variance (n − 1 denominator) around `m`.
fn sample_variance(xs: &[f64], m: f64) -> f64 {
    compensated_sum(xs.iter().map(|x| (x - m) * (x - m))) / (xs.len() - 1) as f64
}

/// Student t CDF with `df` degrees of freedom, via the regularized
/// incomplete beta function. Exactly 0.5 at 0.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let tail = 0.5 * beta_reg(df / 2.0, 0.5, df / (df + t * t));
    if t < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Two-sided p-value `P(|T| ≥ |t|)`.
fn two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

/// Quantile of the Student t distribution.
pub fn student_t_quantile(p: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df)
        .expect("df must be positive")
        .inverse_cdf(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTestResult {
    pub t: f64,
    pub df: usize,
    /// Two-sided.
    pub p: f64,
    pub n: usize,
    /// Mean of `a − b`.
    pub mean_diff: f64,
}

/// Paired t-test on index-aligned samples.
///
/// When all differences are equal the statistic is undefined; we report
/// `t = 0, p = 1` if they are all zero and `t = ±∞, p = 0` otherwise.
pub fn paired_t_test_values(a: &[f64], b: &[f64]) -> Result<TTestResult, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(EvalError::TooFewSamples { needed: 2, got: n });
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let m = mean(&d);
    let var = sample_variance(&d, m);
    let df = n - 1;
    let (t, p) = if var == 0.0 {
        if m == 0.0 {
            (0.0, 1.0)
        } else {
            (m.signum() * f64::INFINITY, 0.0)
        }
    } else {
        let t = m / (var.sqrt() / (n as f64).sqrt());
        (t, two_sided_p(t, df as f64))
    };
    Ok(TTestResult {
        t,
        df,
        p,
        n,
        mean_diff: m,
    })
}

/// Paired t-test over per-topic values, paired by topic id in sorted
/// order. Both maps must cover the same topics.
pub fn paired_t_test(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> Result<TTestResult, EvalError> {
    let only_a: Vec<&String> = a.keys().filter(|k| !b.contains_key(*k)).collect();
    let only_b: Vec<&String> = b.keys().filter(|k| !a.contains_key(*k)).collect();
    if !only_a.is_empty() || !only_b.is_empty() {
        let example = only_a
            .first()
            .or(only_b.first())
            .map(|s| s.to_string())
            .unwrap_or_default();
        return Err(EvalError::MismatchedTopics {
            only_a: only_a.len(),
            only_b: only_b.len(),
            example,
        });
    }
    let xs: Vec<f64> = a.values().copied().collect();
    let ys: Vec<f64> = b.values().copied().collect();
    paired_t_test_values(&xs, &ys)
}

/// `min(1, p·m)`.
pub fn bonferroni_adjust(p: f64, m: usize) -> Result<f64, EvalError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(EvalError::InvalidP(p));
    }
    if m == 0 {
        return Err(EvalError::NoComparisons);
    }
    Ok((p * m as f64).min(1.0))
}

/// Mean and 95% confidence half-width `t(0.975, n−1) · sd / √n`.
pub fn mean_ci95(samples: &[f64]) -> Result<(f64, f64), EvalError> {
    let n = samples.len();
    if n < 2 {
        return Err(EvalError::TooFewSamples { needed: 2, got: n });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let m = mean(samples);
    let sd = sample_variance(samples, m).sqrt();
    let q = student_t_quantile(0.975, (n - 1) as f64);
    Ok((m, q * sd / (n as f64).sqrt()))
}
