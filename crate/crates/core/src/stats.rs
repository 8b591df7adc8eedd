//! Descriptive statistics, box-whisker summaries and least-squares trends.

use alloc::vec::Vec;

use crate::math::sqrt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("too few values: need at least {needed}, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("all x values are equal; the trend is undefined")]
    DegenerateX,
    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },
    #[error("values and labels differ in length ({values} vs {labels})")]
    LengthMismatch { values: usize, labels: usize },
}

/// The columns of a monthly descriptive-statistics table.
///
/// Skewness and excess kurtosis are `None` when there are too few values
/// (fewer than 3 and 4 respectively) or the standard deviation is zero.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub mode: Option<f64>,
    pub standard_deviation: f64,
    pub excess_kurtosis: Option<f64>,
    pub skewness: Option<f64>,
    pub range: f64,
    pub minimum: f64,
    pub maximum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Outlier {
    pub year: i32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub lower_adjacent: f64,
    pub upper_adjacent: f64,
    pub outliers: Vec<Outlier>,
}

impl BoxStats {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }

    pub fn lower_fence(&self) -> f64 {
        self.q1 - 1.5 * self.iqr()
    }

    pub fn upper_fence(&self) -> f64 {
        self.q3 + 1.5 * self.iqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct TrendLine {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl TrendLine {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

fn check_finite(values: &[f64]) -> Result<(), StatsError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(StatsError::NonFinite { index }),
        None => Ok(()),
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance with the n − 1 denominator.
pub fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() as f64 - 1.0)
}

/// Population standard deviation (n denominator).
pub fn population_sd(values: &[f64]) -> f64 {
    let m = mean(values);
    sqrt(values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64)
}

pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Type-7 quantile (linear interpolation between order statistics) of
/// already-sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    quantile_sorted(&sorted(values), 0.5)
}

/// Bias-corrected sample skewness n/((n−1)(n−2)) Σ((xᵢ−x̄)/s)³.
pub fn skewness(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 3 {
        return None;
    }
    let m = mean(values);
    let s = sqrt(sample_variance(values));
    if s == 0.0 {
        return None;
    }
    let nf = n as f64;
    let sum: f64 = values.iter().map(|v| {
        let z = (v - m) / s;
        z * z * z
    }).sum();
    Some(nf / ((nf - 1.0) * (nf - 2.0)) * sum)
}

/// Bias-corrected sample excess kurtosis (normal distribution scores 0).
pub fn excess_kurtosis(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 4 {
        return None;
    }
    let m = mean(values);
    let s = sqrt(sample_variance(values));
    if s == 0.0 {
        return None;
    }
    let nf = n as f64;
    let sum: f64 = values.iter().map(|v| {
        let z2 = (v - m) * (v - m) / (s * s);
        z2 * z2
    }).sum();
    let lead = nf * (nf + 1.0) / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0));
    let tail = 3.0 * (nf - 1.0) * (nf - 1.0) / ((nf - 2.0) * (nf - 3.0));
    Some(lead * sum - tail)
}

/// Most frequent exact value; ties go to the smallest value. `None` when
/// every value is distinct.
pub fn mode(values: &[f64]) -> Option<f64> {
    let s = sorted(values);
    let mut best: Option<(f64, usize)> = None;
    let mut i = 0;
    while i < s.len() {
        let mut j = i + 1;
        while j < s.len() && s[j] == s[i] {
            j += 1;
        }
        let count = j - i;
        if count > 1 && best.is_none_or(|(_, c)| count > c) {
            best = Some((s[i], count));
        }
        i = j;
    }
    best.map(|(v, _)| v)
}

pub fn describe(values: &[f64]) -> Result<SummaryStats, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::TooFewValues { needed: 2, got: values.len() });
    }
    check_finite(values)?;
    let s = sorted(values);
    let minimum = s[0];
    let maximum = s[s.len() - 1];
    Ok(SummaryStats {
        n: values.len(),
        mean: mean(values),
        median: quantile_sorted(&s, 0.5),
        mode: mode(values),
        standard_deviation: sqrt(sample_variance(values)),
        excess_kurtosis: excess_kurtosis(values),
        skewness: skewness(values),
        range: maximum - minimum,
        minimum,
        maximum,
    })
}

/// Five-number summary with 1.5·IQR fences. `years` labels each value and
/// is carried into the outlier list.
pub fn box_stats(values: &[f64], years: &[i32]) -> Result<BoxStats, StatsError> {
    if values.len() != years.len() {
        return Err(StatsError::LengthMismatch { values: values.len(), labels: years.len() });
    }
    if values.len() < 4 {
        return Err(StatsError::TooFewValues { needed: 4, got: values.len() });
    }
    check_finite(values)?;
    let s = sorted(values);
    let q1 = quantile_sorted(&s, 0.25);
    let median = quantile_sorted(&s, 0.5);
    let q3 = quantile_sorted(&s, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);

    let inside = || s.iter().copied().filter(|&v| v >= lo_fence && v <= hi_fence);
    // The quartiles lie inside the fences, so `inside` is never empty.
    let lower_adjacent = inside().fold(f64::INFINITY, f64::min);
    let upper_adjacent = inside().fold(f64::NEG_INFINITY, f64::max);
    let outliers = values
        .iter()
        .zip(years)
        .filter(|(&v, _)| v < lo_fence || v > hi_fence)
        .map(|(&value, &year)| Outlier { year, value })
        .collect();
    Ok(BoxStats { q1, median, q3, lower_adjacent, upper_adjacent, outliers })
}

/// Ordinary least squares fit y = intercept + slope·x.
pub fn linear_trend(points: &[(f64, f64)]) -> Result<TrendLine, StatsError> {
    if points.len() < 2 {
        return Err(StatsError::TooFewValues { needed: 2, got: points.len() });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        if !x.is_finite() || !y.is_finite() {
            return Err(StatsError::NonFinite { index: 0 });
        }
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(StatsError::DegenerateX);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        0.0
    } else {
        let ss_res: f64 = points.iter().map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        }).sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(TrendLine { slope, intercept, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn describe_constant_data() {
        let s = describe(&[5.0, 5.0, 5.0, 5.0]).unwrap();
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.standard_deviation, 0.0);
        assert_eq!(s.range, 0.0);
        assert_eq!(s.mode, Some(5.0));
        assert_eq!(s.skewness, None);
        assert_eq!(s.excess_kurtosis, None);
    }

    // Oracle: hand evaluation. x̄ = 4, Σd² = 50, s = √12.5,
    // Σd³ = 180, skew = 5/(4·3) · 180/12.5^1.5 = 1.2·√2.
    #[test]
    fn describe_small_skewed_sample() {
        let s = describe(&[1.0, 2.0, 3.0, 4.0, 10.0]).unwrap();
        assert_eq!(s.mean, 4.0);
        assert_eq!(s.median, 3.0);
        assert!((s.standard_deviation - 3.535_533_905_932_737_6).abs() < 1e-12);
        assert!((s.skewness.unwrap() - 1.2 * core::f64::consts::SQRT_2).abs() < 1e-12);
        assert_eq!(s.mode, None);
        // Σd⁴ = 81+16+1+0+1296 = 1394; Σz⁴ = 1394/156.25
        let k = 5.0 * 6.0 / (4.0 * 3.0 * 2.0) * (1394.0 / 156.25) - 3.0 * 16.0 / (3.0 * 2.0);
        assert!((s.excess_kurtosis.unwrap() - k).abs() < 1e-12);
    }

    #[test]
    fn describe_needs_two_values() {
        assert_eq!(describe(&[1.0]), Err(StatsError::TooFewValues { needed: 2, got: 1 }));
        assert!(describe(&[1.0, f64::NAN]).is_err());
        let s = describe(&[1.0, 2.0]).unwrap();
        assert!(s.skewness.is_none() && s.excess_kurtosis.is_none());
    }

    #[test]
    fn mode_tie_breaks_to_smallest() {
        assert_eq!(mode(&[3.0, 1.0, 3.0, 1.0, 2.0]), Some(1.0));
        assert_eq!(mode(&[0.0, 0.0, 0.0, 2.0, 2.0]), Some(0.0));
        assert_eq!(mode(&[1.0, 2.0]), None);
    }

    #[test]
    fn type7_quartiles() {
        let b = box_stats(&[1.0, 2.0, 3.0, 4.0], &[1, 2, 3, 4]).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (1.75, 2.5, 3.25));
        assert!(b.outliers.is_empty());
        assert_eq!((b.lower_adjacent, b.upper_adjacent), (1.0, 4.0));
    }

    #[test]
    fn zero_iqr_flags_outlier() {
        let b = box_stats(&[0.0, 0.0, 0.0, 0.0, 100.0], &[1901, 1902, 1903, 1904, 1905]).unwrap();
        assert_eq!(b.iqr(), 0.0);
        assert_eq!(b.outliers, vec![Outlier { year: 1905, value: 100.0 }]);
        assert_eq!(b.upper_adjacent, 0.0);
    }

    #[test]
    fn constant_box() {
        let b = box_stats(&[7.0; 6], &[1, 2, 3, 4, 5, 6]).unwrap();
        assert!(b.outliers.is_empty());
        for v in [b.q1, b.median, b.q3, b.lower_adjacent, b.upper_adjacent] {
            assert_eq!(v, 7.0);
        }
        assert!(matches!(box_stats(&[1.0; 3], &[1, 2, 3]), Err(StatsError::TooFewValues { .. })));
    }

    #[test]
    fn trend_examples() {
        let t = linear_trend(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]).unwrap();
        assert!((t.slope - 1.0).abs() < 1e-15 && t.intercept.abs() < 1e-15);
        assert!((t.r_squared - 1.0).abs() < 1e-15);
        let t = linear_trend(&[(1.0, 4.0), (2.0, 4.0), (3.0, 4.0)]).unwrap();
        assert_eq!((t.slope, t.r_squared), (0.0, 0.0));
        // Normal equations: x̄ = ȳ = 1, Sxy = 1, Sxx = 2.
        let t = linear_trend(&[(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)]).unwrap();
        assert!((t.slope - 0.5).abs() < 1e-15 && (t.intercept - 0.5).abs() < 1e-15);
        assert_eq!(linear_trend(&[(2.0, 1.0), (2.0, 3.0)]), Err(StatsError::DegenerateX));
    }
}
