//! Fit many families to one sample, rank them by an information criterion,
//! and place the sample on the Cullen-Frey (skewness², kurtosis) plane.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distributions::{fit_mle, DistError, Family, FittedDistribution, Support};
use crate::math::{exp, ln, sq};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Criterion {
    #[default]
    Aic,
    Bic,
    Loglik,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Aic => "aic",
            Criterion::Bic => "bic",
            Criterion::Loglik => "loglik",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Criterion::Aic),
            "bic" => Ok(Criterion::Bic),
            "loglik" | "loglikelihood" => Ok(Criterion::Loglik),
            other => Err(alloc::format!("unknown criterion `{other}` (expected aic, bic or loglik)")),
        }
    }
}

/// How observations outside a family's support (zeros, for positive-support
/// families) are handled.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ZeroPolicy {
    /// Skip any family whose support excludes an observation.
    #[default]
    SkipFamily,
    /// Fit positive-support families on the strictly positive subsample.
    DropZeros,
    /// Add a constant (mm) to every observation before fitting.
    Epsilon(f64),
}

impl fmt::Display for ZeroPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZeroPolicy::SkipFamily => f.write_str("skip-family"),
            ZeroPolicy::DropZeros => f.write_str("drop-zeros"),
            ZeroPolicy::Epsilon(v) => write!(f, "epsilon={v}"),
        }
    }
}

impl FromStr for ZeroPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("skip-family") {
            return Ok(ZeroPolicy::SkipFamily);
        }
        if s.eq_ignore_ascii_case("drop-zeros") {
            return Ok(ZeroPolicy::DropZeros);
        }
        if let Some(v) = s.strip_prefix("epsilon=") {
            return match v.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => Ok(ZeroPolicy::Epsilon(v)),
                _ => Err(alloc::format!("epsilon must be a positive number, got `{v}`")),
            };
        }
        Err(alloc::format!("unknown zero policy `{s}` (expected skip-family, drop-zeros or epsilon=V)"))
    }
}

/// How the data behind one fit differ from the input sample.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase", tag = "kind"))]
pub enum DataAdjustment {
    DroppedZeros { dropped: usize },
    Epsilon { added: f64 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase", tag = "kind"))]
pub enum SkipReason {
    SupportViolation { index: usize, value: f64 },
    NonConvergence { iterations: usize, last_iterate: Vec<f64>, gradient_norm: f64 },
    DegenerateData { detail: String },
    TooFewValues { needed: usize, got: usize },
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::SupportViolation { index, value } => {
                write!(f, "support violation (datum {value} at index {index})")
            }
            SkipReason::NonConvergence { iterations, last_iterate, gradient_norm } => write!(
                f,
                "non-convergence after {iterations} iterations (last iterate {last_iterate:?}, gradient norm {gradient_norm:.3e})"
            ),
            SkipReason::DegenerateData { detail } => write!(f, "degenerate data ({detail})"),
            SkipReason::TooFewValues { needed, got } => write!(f, "too few values ({got} < {needed})"),
        }
    }
}

impl SkipReason {
    fn from_error(e: DistError) -> Self {
        match e {
            DistError::UnsupportedData { index, value, .. } => SkipReason::SupportViolation { index, value },
            DistError::ZeroDensityDatum { index, value } => SkipReason::SupportViolation { index, value },
            DistError::NonConvergence { iterations, params, gradient_norm, .. } => {
                SkipReason::NonConvergence { iterations, last_iterate: params, gradient_norm }
            }
            DistError::TooFewValues { needed, got, .. } => SkipReason::TooFewValues { needed, got },
            other => SkipReason::DegenerateData { detail: other.to_string() },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct FitResult {
    pub fitted: FittedDistribution,
    pub aic: f64,
    pub bic: f64,
    pub rank: usize,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub adjustment: Option<DataAdjustment>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct SkippedFamily {
    pub family: Family,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct FitRanking {
    pub label: String,
    pub criterion: Criterion,
    pub zero_policy: ZeroPolicy,
    /// Ranked fits, best first.
    pub results: Vec<FitResult>,
    pub skipped: Vec<SkippedFamily>,
}

impl FitRanking {
    pub fn best(&self) -> &FitResult {
        &self.results[0]
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SelectionError {
    #[error("too few values: need at least {needed}, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("every requested family was skipped")]
    AllFamiliesSkipped { skipped: Vec<SkippedFamily> },
    #[error("no families requested")]
    NoFamilies,
    #[error("zero variance: the sample has no shape")]
    DegenerateData,
}

/// AIC = 2k − 2·LL.
pub fn aic(k: usize, log_likelihood: f64) -> f64 {
    2.0 * k as f64 - 2.0 * log_likelihood
}

/// BIC = k·ln(n) − 2·LL.
pub fn bic(k: usize, n: usize, log_likelihood: f64) -> f64 {
    k as f64 * ln(n as f64) - 2.0 * log_likelihood
}

fn criterion_order(c: Criterion, a: &FitResult, b: &FitResult) -> Ordering {
    let primary = match c {
        Criterion::Aic => a.aic.total_cmp(&b.aic),
        Criterion::Bic => a.bic.total_cmp(&b.bic),
        Criterion::Loglik => b.fitted.log_likelihood.total_cmp(&a.fitted.log_likelihood),
    };
    primary
        .then(a.fitted.param_count().cmp(&b.fitted.param_count()))
        .then(a.fitted.family.id().cmp(b.fitted.family.id()))
}

/// Fits every family in `families` and ranks the successful fits.
pub fn fit_all(
    label: &str,
    data: &[f64],
    families: &[Family],
    criterion: Criterion,
    zero_policy: ZeroPolicy,
) -> Result<FitRanking, SelectionError> {
    if data.len() < 5 {
        return Err(SelectionError::TooFewValues { needed: 5, got: data.len() });
    }
    if families.is_empty() {
        return Err(SelectionError::NoFamilies);
    }
    let shifted: Vec<f64>;
    let mut results = Vec::new();
    let mut skipped = Vec::new();

    let (base, base_adjustment) = match zero_policy {
        ZeroPolicy::Epsilon(v) => {
            shifted = data.iter().map(|x| x + v).collect();
            (&shifted[..], Some(DataAdjustment::Epsilon { added: v }))
        }
        _ => (data, None),
    };
    let positive: Vec<f64> = base.iter().copied().filter(|&x| x > 0.0).collect();

    let mut seen: Vec<Family> = Vec::new();
    for &family in families {
        if seen.contains(&family) {
            continue;
        }
        seen.push(family);
        let (sample, adjustment) = match (zero_policy, family.support()) {
            (ZeroPolicy::DropZeros, Support::PositiveReals) if positive.len() < base.len() => {
                (&positive[..], Some(DataAdjustment::DroppedZeros { dropped: base.len() - positive.len() }))
            }
            _ => (base, base_adjustment),
        };
        match fit_mle(family, sample) {
            Ok(fitted) => {
                let k = fitted.param_count();
                let a = aic(k, fitted.log_likelihood);
                let b = bic(k, fitted.n, fitted.log_likelihood);
                results.push(FitResult { fitted, aic: a, bic: b, rank: 0, adjustment });
            }
            Err(e) => skipped.push(SkippedFamily { family, reason: SkipReason::from_error(e) }),
        }
    }
    if results.is_empty() {
        return Err(SelectionError::AllFamiliesSkipped { skipped });
    }
    results.sort_by(|a, b| criterion_order(criterion, a, b));
    for (i, r) in results.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(FitRanking { label: label.into(), criterion, zero_policy, results, skipped })
}

/// A point on the Cullen-Frey plane. Kurtosis is raw (normal = 3).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct CullenFreyPoint {
    pub skewness_squared: f64,
    pub kurtosis: f64,
    pub is_bootstrap: bool,
}

/// Theoretical locations of reference families on the Cullen-Frey plane.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct ReferenceGeometry {
    pub normal: (f64, f64),
    pub uniform: (f64, f64),
    pub exponential: (f64, f64),
    pub logistic: (f64, f64),
    /// Gamma line: kurtosis = intercept + slope·skewness².
    pub gamma_line: (f64, f64),
    /// Lognormal curve sampled over sdlog ∈ (0, 1].
    pub lognormal_curve: Vec<(f64, f64)>,
    /// Lower edge of the attainable region (and of the beta region):
    /// kurtosis = intercept + slope·skewness².
    pub beta_lower_bound: (f64, f64),
}

/// (skewness², raw kurtosis) of a lognormal with log-scale `sdlog`.
pub fn lognormal_moments(sdlog: f64) -> (f64, f64) {
    let w = exp(sq(sdlog));
    let skew2 = sq(w + 2.0) * (w - 1.0);
    let kurt = w * w * w * w + 2.0 * w * w * w + 3.0 * w * w - 3.0;
    (skew2, kurt)
}

impl ReferenceGeometry {
    pub fn standard() -> Self {
        Self {
            normal: (0.0, 3.0),
            uniform: (0.0, 1.8),
            exponential: (4.0, 9.0),
            logistic: (0.0, 4.2),
            gamma_line: (3.0, 1.5),
            lognormal_curve: (1..=50).map(|i| lognormal_moments(i as f64 / 50.0)).collect(),
            beta_lower_bound: (1.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct CullenFrey {
    pub observation: CullenFreyPoint,
    pub bootstrap: Vec<CullenFreyPoint>,
    pub seed: u64,
    pub reference: ReferenceGeometry,
}

fn moment_point(data: &[f64], is_bootstrap: bool) -> Option<CullenFreyPoint> {
    let skew = stats::skewness(data)?;
    let kurt = stats::excess_kurtosis(data)?;
    Some(CullenFreyPoint { skewness_squared: skew * skew, kurtosis: kurt + 3.0, is_bootstrap })
}

/// Random-number stream for replicate `replicate` under `seed`. Each replicate
/// gets its own ChaCha stream, so results do not depend on evaluation order.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Observed and bootstrap moment-plane coordinates. Bootstrap resamples with
/// zero variance have no defined skewness and are left out of the cloud.
pub fn cullen_frey(data: &[f64], n_boot: usize, seed: u64) -> Result<CullenFrey, SelectionError> {
    if data.len() < 4 {
        return Err(SelectionError::TooFewValues { needed: 4, got: data.len() });
    }
    let observation = moment_point(data, false).ok_or(SelectionError::DegenerateData)?;
    let n = data.len();
    let mut resample = alloc::vec![0.0; n];
    let mut bootstrap = Vec::with_capacity(n_boot);
    for r in 0..n_boot {
        let mut rng = replicate_rng(seed, r as u64);
        for slot in resample.iter_mut() {
            *slot = data[rng.random_range(0..n as u64) as usize];
        }
        if let Some(p) = moment_point(&resample, true) {
            bootstrap.push(p);
        }
    }
    Ok(CullenFrey { observation, bootstrap, seed, reference: ReferenceGeometry::standard() })
}
