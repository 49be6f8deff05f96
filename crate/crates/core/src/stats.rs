//! Outlier filtering, descriptive statistics, the two-sample
//! Kolmogorov-Smirnov test and Spearman rank correlation.

use std::cmp::Ordering;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("sample contains a non-finite value at position {0}")]
    NonFinite(usize),
    #[error("outlier filtering removed every value")]
    AllFiltered,
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} paired values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("degenerate sample: all values are tied")]
    DegenerateSample,
}

/// A non-empty list of finite values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample(Vec<f64>);

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Sample, StatsError> {
        if values.is_empty() {
            return Err(StatsError::EmptySample);
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite(pos));
        }
        Ok(Sample(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    /// Sample standard deviation (n − 1 denominator); 0 for a singleton.
    pub fn std_dev(&self) -> f64 {
        let n = self.0.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean();
        let ss: f64 = self.0.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    }
}

impl Deref for Sample {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = StatsError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Sample::new(values)
    }
}

impl TryFrom<&[f64]> for Sample {
    type Error = StatsError;

    fn try_from(values: &[f64]) -> Result<Self, Self::Error> {
        Sample::new(values.to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

pub fn describe(sample: &Sample) -> DescriptiveStats {
    let (min, max) = sample
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    DescriptiveStats {
        count: sample.len(),
        mean: sample.mean(),
        std: sample.std_dev(),
        min,
        max,
    }
}

/// Acceptance bounds frozen from one sample, so the same thresholds can be
/// applied again elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierBounds {
    pub mean: f64,
    /// Largest allowed |v − mean|.
    pub max_deviation: f64,
    pub hard_max: f64,
}

impl OutlierBounds {
    pub fn from_sample(sample: &Sample, sigma_k: f64, hard_max: f64) -> OutlierBounds {
        OutlierBounds {
            mean: sample.mean(),
            max_deviation: sigma_k * sample.std_dev(),
            hard_max,
        }
    }

    pub fn keeps(&self, v: f64) -> bool {
        (v - self.mean).abs() <= self.max_deviation && v <= self.hard_max
    }

    pub fn apply(&self, sample: &Sample) -> Result<Sample, StatsError> {
        let kept: Vec<f64> = sample.iter().copied().filter(|&v| self.keeps(v)).collect();
        if kept.is_empty() {
            return Err(StatsError::AllFiltered);
        }
        Ok(Sample(kept))
    }
}

/// Single-pass removal of values further than `sigma_k` standard deviations
/// from the mean and of values above `hard_max`. Order is preserved.
pub fn filter_outliers(sample: &Sample, sigma_k: f64, hard_max: f64) -> Result<Sample, StatsError> {
    OutlierBounds::from_sample(sample, sigma_k, hard_max).apply(sample)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Supremum distance between the two right-continuous ECDFs, evaluated at
/// every pooled value.
pub fn ks_statistic(a: &Sample, b: &Sample) -> f64 {
    let (xs, ys) = (sorted(a), sorted(b));
    let (n1, n2) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = if xs[i] <= ys[j] { xs[i] } else { ys[j] };
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    // once one sample is exhausted the remaining gap only shrinks
    d
}

/// Asymptotic Kolmogorov survival function
/// `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} exp(−2 j² λ²)`.
///
/// The series is cut once a term drops below 1e-10 or after 100 terms. If it
/// has not converged by then λ is so small that Q(λ) is 1 to machine
/// precision.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    const EPS: f64 = 1e-10;
    if lambda <= 0.0 {
        return 1.0;
    }
    let a2 = -2.0 * lambda * lambda;
    let mut sign = 2.0;
    let mut sum = 0.0;
    for j in 1..=100u32 {
        let jf = j as f64;
        let term = sign * (a2 * jf * jf).exp();
        sum += term;
        if term.abs() < EPS {
            return sum.clamp(0.0, 1.0);
        }
        sign = -sign;
    }
    1.0
}

/// Two-sided two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// and the `0.12 + 0.11/√nₑ` small-sample correction.
pub fn ks_two_sample(a: &Sample, b: &Sample) -> KsResult {
    let statistic = ks_statistic(a, b);
    let (n1, n2) = (a.len(), b.len());
    let ne = (n1 as f64 * n2 as f64) / (n1 + n2) as f64;
    let root = ne.sqrt();
    let lambda = statistic * (root + 0.12 + 0.11 / root);
    KsResult {
        statistic,
        p_value: kolmogorov_q(lambda),
        n1,
        n2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpearmanResult {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
}

/// 1-based ranks with tied values sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]].total_cmp(&values[order[start]]) == Ordering::Equal {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Spearman's ρ as the Pearson correlation of average ranks, with a two-sided
/// p-value from the t approximation on n − 2 degrees of freedom.
pub fn spearman(x: &Sample, y: &Sample) -> Result<SpearmanResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFew { needed: 3, got: n });
    }
    let rho = pearson(&average_ranks(x), &average_ranks(y))
        .ok_or(StatsError::DegenerateSample)?
        .clamp(-1.0, 1.0);
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let df = (n - 2) as f64;
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
        (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
    };
    Ok(SpearmanResult { rho, p_value, n })
}
