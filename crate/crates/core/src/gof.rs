//! Goodness-of-fit: Kolmogorov-Smirnov and Pearson chi-squared tests of a
//! fitted model against its data.

use alloc::vec;
use alloc::vec::Vec;

use crate::distributions::{fit_mle, DistError, FittedDistribution, Model};
use crate::math::{ceil, exp, ln, sq, sqrt, PI};
use crate::selection::replicate_rng;
use crate::special::gamma_q;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GofError {
    #[error("no data")]
    EmptyData,
    #[error("datum {value} at index {index} is outside the model's support")]
    UnsupportedData { index: usize, value: f64 },
    #[error("{bins} bins leave no degrees of freedom for {params} estimated parameters (need at least {needed})")]
    TooFewBins { bins: usize, params: usize, needed: usize },
    #[error(transparent)]
    Distribution(#[from] DistError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct ChiSquaredResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub bins: usize,
    pub observed: Vec<usize>,
    /// Interior bin edges: the model quantiles at j / bins.
    pub edges: Vec<f64>,
}

/// Goodness-of-fit summary for one fitted model.
///
/// `estimated_params_note` is always set: the classical p-values assume the
/// model was fixed in advance, so with parameters estimated from the same
/// data they are only approximate (and optimistic for KS).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct GofReport {
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub chi_sq_statistic: f64,
    pub chi_sq_df: usize,
    pub chi_sq_p_value: f64,
    pub bin_count: usize,
    pub estimated_params_note: bool,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub bootstrap: Option<BootstrapKs>,
}

/// Parametric-bootstrap KS p-value: refit on samples drawn from the fitted
/// model and count how often the refit statistic reaches the observed one.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct BootstrapKs {
    pub p_value: f64,
    pub replicates: usize,
    pub failed_refits: usize,
    pub seed: u64,
}

fn check_support(model: &Model, data: &[f64]) -> Result<(), GofError> {
    if data.is_empty() {
        return Err(GofError::EmptyData);
    }
    match data.iter().position(|&x| !model.in_support(x)) {
        Some(index) => Err(GofError::UnsupportedData { index, value: data[index] }),
        None => Ok(()),
    }
}

/// D = maxᵢ max(i/n − F(x₍ᵢ₎), F(x₍ᵢ₎) − (i−1)/n) over the sorted sample.
pub fn ks_statistic(model: &Model, data: &[f64]) -> f64 {
    let mut xs = data.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = model.cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        d.max(above).max(below)
    })
}

/// Kolmogorov survival function Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}.
///
/// For small λ the alternating series converges slowly, so the equivalent
/// Jacobi-theta form 1 − (√(2π)/λ) Σ e^{−(2k−1)²π²/(8λ²)} is used there.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let c = -PI * PI / (8.0 * lambda * lambda);
        let mut sum = 0.0;
        for k in 1..=100 {
            let term = exp(c * sq((2 * k - 1) as f64));
            sum += term;
            if term < 1e-16 {
                break;
            }
        }
        return (1.0 - sqrt(2.0 * PI) / lambda * sum).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = exp(-2.0 * sq(k as f64 * lambda));
        sum += sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic p-value with the (√n + 0.12 + 0.11/√n) small-sample factor.
pub fn ks_p_value(statistic: f64, n: usize) -> f64 {
    let rn = sqrt(n as f64);
    kolmogorov_q((rn + 0.12 + 0.11 / rn) * statistic)
}

pub fn ks_test(model: &Model, data: &[f64]) -> Result<KsResult, GofError> {
    check_support(model, data)?;
    let statistic = ks_statistic(model, data);
    Ok(KsResult { statistic, p_value: ks_p_value(statistic, data.len()) })
}

/// Sturges' rule ⌈1 + log₂ n⌉.
pub fn sturges_bins(n: usize) -> usize {
    ceil(1.0 + ln(n as f64) / ln(2.0)) as usize
}

/// Pearson's Σ (Oⱼ − E)² / E for equal expected counts E = n / bins.
pub fn pearson_statistic(observed: &[usize]) -> f64 {
    let n: usize = observed.iter().sum();
    let expected = n as f64 / observed.len() as f64;
    observed.iter().map(|&o| sq(o as f64 - expected) / expected).sum()
}

/// Chi-squared test on equal-probability bins under the fitted model. Degrees
/// of freedom are bins − 1 − (number of estimated parameters).
pub fn chi_squared_test(
    fit: &FittedDistribution,
    data: &[f64],
    bins: Option<usize>,
) -> Result<ChiSquaredResult, GofError> {
    let model = fit.model();
    check_support(&model, data)?;
    let bins = bins.unwrap_or_else(|| sturges_bins(data.len()));
    let params = fit.param_count();
    let needed = params + 2;
    if bins < needed {
        return Err(GofError::TooFewBins { bins, params, needed });
    }
    let edges = (1..bins)
        .map(|j| model.quantile(j as f64 / bins as f64))
        .collect::<Result<Vec<_>, _>>()?;
    let mut observed = vec![0usize; bins];
    for &x in data {
        observed[edges.partition_point(|&e| e <= x)] += 1;
    }
    let statistic = pearson_statistic(&observed);
    let df = bins - 1 - params;
    let p_value = gamma_q(df as f64 / 2.0, statistic / 2.0);
    Ok(ChiSquaredResult { statistic, df, p_value, bins, observed, edges })
}

/// Parametric bootstrap of the KS statistic with refitting. Replicate `r`
/// draws from its own random stream, so the result does not depend on the
/// order replicates are evaluated in. Returns `None` when every refit failed.
pub fn bootstrap_ks(fit: &FittedDistribution, data: &[f64], replicates: usize, seed: u64) -> Option<BootstrapKs> {
    let model = fit.model();
    let observed = ks_statistic(&model, data);
    let mut at_least = 0usize;
    let mut failed = 0usize;
    for r in 0..replicates {
        let mut rng = replicate_rng(seed, r as u64);
        let sample = model.sample_n(&mut rng, data.len());
        match fit_mle(fit.family, &sample) {
            Ok(refit) => {
                if ks_statistic(&refit.model(), &sample) >= observed {
                    at_least += 1;
                }
            }
            Err(_) => failed += 1,
        }
    }
    let ok = replicates - failed;
    (ok > 0).then(|| BootstrapKs {
        p_value: at_least as f64 / ok as f64,
        replicates,
        failed_refits: failed,
        seed,
    })
}

pub fn gof_report(
    fit: &FittedDistribution,
    data: &[f64],
    bins: Option<usize>,
    boot_replicates: usize,
    seed: u64,
) -> Result<GofReport, GofError> {
    let ks = ks_test(&fit.model(), data)?;
    let chi = chi_squared_test(fit, data, bins)?;
    let bootstrap = if boot_replicates > 0 { bootstrap_ks(fit, data, boot_replicates, seed) } else { None };
    Ok(GofReport {
        ks_statistic: ks.statistic,
        ks_p_value: ks.p_value,
        chi_sq_statistic: chi.statistic,
        chi_sq_df: chi.df,
        chi_sq_p_value: chi.p_value,
        bin_count: chi.bins,
        estimated_params_note: true,
        bootstrap,
    })
}
