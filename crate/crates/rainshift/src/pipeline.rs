//! The analysis steps behind each subcommand, assembled from the core crate.

use rainshift_core::cluster::{
    agglomerate, cut_k, distance_matrix, ClusterError, Linkage, Metric, Standardize,
};
use rainshift_core::gof::{gof_report, GofError};
use rainshift_core::ingest::{annual_totals, decadal_profiles, month_series, DecadalProfile, MonthSeries, MONTH_NAMES};
use rainshift_core::selection::{cullen_frey, fit_all, Criterion, DataAdjustment, FitResult, SelectionError, ZeroPolicy};
use rainshift_core::stats::{box_stats, describe, linear_trend, StatsError, TrendLine};
use rainshift_core::{Family, RainfallSeries};

use crate::report::{
    AnalysisReport, ClusterItems, ClusterSection, Metadata, MonthFit, MonthGof, MonthStats, MonthTrend, SectionError,
    Trends,
};
use crate::svg::{render, PlotData, PlotKind, PlotSpec};

/// Every tunable of the pipeline, echoed into report metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub seed: u64,
    pub criterion: Criterion,
    pub zero_policy: ZeroPolicy,
    pub families: Vec<Family>,
    pub linkage: Linkage,
    pub metric: Metric,
    pub standardize: Standardize,
    pub cut_k: Option<usize>,
    pub decade_length: usize,
    pub bins: Option<usize>,
    pub boot: usize,
    pub boot_gof: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            seed: 0,
            criterion: Criterion::Aic,
            zero_policy: ZeroPolicy::SkipFamily,
            families: Family::ALL.to_vec(),
            linkage: Linkage::Average,
            metric: Metric::Euclidean,
            standardize: Standardize::None,
            cut_k: None,
            decade_length: 10,
            bins: None,
            boot: 100,
            boot_gof: 0,
        }
    }
}

impl Options {
    pub fn record(&self, mut m: Metadata) -> Metadata {
        let families: Vec<&str> = self.families.iter().map(|f| f.id()).collect();
        m = m
            .option("criterion", self.criterion)
            .option("zeroPolicy", self.zero_policy)
            .option("families", families.join(","))
            .option("linkage", self.linkage)
            .option("metric", self.metric)
            .option("standardize", self.standardize)
            .option("decadeLength", self.decade_length)
            .option("bins", self.bins.map_or("sturges".to_string(), |b| b.to_string()))
            .option("boot", self.boot)
            .option("bootGof", self.boot_gof);
        if let Some(k) = self.cut_k {
            m = m.option("cutK", k);
        }
        m
    }
}

/// Seed for month-specific resampling, so months do not share random streams.
pub fn month_seed(seed: u64, month: u8) -> u64 {
    seed ^ (month as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn month_abbreviation(month: u8) -> String {
    MONTH_NAMES[month as usize - 1][..3].to_ascii_lowercase()
}

fn all_months(series: &RainfallSeries) -> Vec<MonthSeries> {
    (1..=12).map(|m| month_series(series, m).expect("month in range")).collect()
}

pub fn monthly_stats(series: &RainfallSeries) -> Result<Vec<MonthStats>, StatsError> {
    all_months(series)
        .into_iter()
        .map(|m| {
            Ok(MonthStats {
                month: m.month,
                name: m.name().to_string(),
                summary: describe(&m.values)?,
                box_stats: box_stats(&m.values, &m.years)?,
            })
        })
        .collect()
}

fn trend_of(years: &[i32], values: &[f64]) -> Result<TrendLine, StatsError> {
    let pts: Vec<(f64, f64)> = years.iter().zip(values).map(|(&y, &v)| (y as f64, v)).collect();
    linear_trend(&pts)
}

pub fn trends(series: &RainfallSeries) -> Result<Trends, StatsError> {
    let totals = annual_totals(series);
    let (years, values): (Vec<i32>, Vec<f64>) = totals.into_iter().unzip();
    let annual = trend_of(&years, &values)?;
    let monthly = all_months(series)
        .iter()
        .map(|m| Ok(MonthTrend { month: m.month, trend: trend_of(&m.years, &m.values)? }))
        .collect::<Result<_, StatsError>>()?;
    Ok(Trends { annual, monthly })
}

pub fn decade_label(p: &DecadalProfile) -> String {
    format!("{}-{}", p.start_year, p.end_year)
}

#[derive(Debug, thiserror::Error)]
pub enum ClusterStepError {
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error("decade length must be at least 1")]
    DecadeLength,
}

pub fn cluster(series: &RainfallSeries, items: ClusterItems, opts: &Options) -> Result<ClusterSection, ClusterStepError> {
    let vectors: Vec<(String, Vec<f64>)> = match items {
        ClusterItems::Years => series.records().iter().map(|r| (r.year.to_string(), r.depths.to_vec())).collect(),
        ClusterItems::Decades => decadal_profiles(series, opts.decade_length)
            .map_err(|_| ClusterStepError::DecadeLength)?
            .iter()
            .map(|p| (decade_label(p), p.monthly_means.to_vec()))
            .collect(),
    };
    let dm = distance_matrix(&vectors, opts.metric, opts.standardize)?;
    let dendrogram = agglomerate(&dm, opts.linkage);
    let assignment = opts.cut_k.map(|k| cut_k(&dendrogram, k)).transpose()?;
    Ok(ClusterSection {
        items,
        metric: opts.metric,
        standardize: opts.standardize,
        linkage: opts.linkage,
        dendrogram,
        assignment,
    })
}

/// The sample a fit was actually computed from.
pub fn fitted_sample(values: &[f64], adjustment: Option<DataAdjustment>) -> Vec<f64> {
    match adjustment {
        None => values.to_vec(),
        Some(DataAdjustment::DroppedZeros { .. }) => values.iter().copied().filter(|&v| v > 0.0).collect(),
        Some(DataAdjustment::Epsilon { added }) => values.iter().map(|v| v + added).collect(),
    }
}

pub fn month_fit(series: &RainfallSeries, month: u8, opts: &Options) -> Result<MonthFit, SelectionError> {
    let m = month_series(series, month as u32).expect("month in range");
    let ranking = fit_all(m.name(), &m.values, &opts.families, opts.criterion, opts.zero_policy)?;
    // Moment plots need a non-constant sample; leave them out otherwise.
    let cullen_frey = cullen_frey(&m.values, opts.boot, month_seed(opts.seed, month)).ok();
    Ok(MonthFit { month, ranking, cullen_frey })
}

pub fn month_gof(values: &[f64], month: u8, best: &FitResult, opts: &Options) -> Result<MonthGof, GofError> {
    let sample = fitted_sample(values, best.adjustment);
    let report = gof_report(&best.fitted, &sample, opts.bins, opts.boot_gof, month_seed(opts.seed, month))?;
    Ok(MonthGof { month, fitted: best.fitted.clone(), report })
}

/// A rendered figure and the file-name suffix it is saved under.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub kind: PlotKind,
    /// `<kind>` or `<kind>.<qualifier>`.
    pub name: String,
    pub svg: String,
}

fn figure(kind: PlotKind, qualifier: Option<&str>, title: String, data: PlotData<'_>) -> Option<Figure> {
    let name = match qualifier {
        Some(q) => format!("{kind}.{q}"),
        None => kind.to_string(),
    };
    render(&PlotSpec::new(kind, title), &data).ok().map(|svg| Figure { kind, name, svg })
}

/// Figures that depend only on the data (and the clustering options).
pub fn data_figures(series: &RainfallSeries, clusters: &[ClusterSection], opts: &Options, kinds: &[PlotKind]) -> Vec<Figure> {
    let label = series.label();
    let months = all_months(series);
    let want = |k: PlotKind| kinds.contains(&k);
    let mut out = Vec::new();
    if want(PlotKind::MonthlyDistribution) {
        out.extend(figure(
            PlotKind::MonthlyDistribution,
            None,
            format!("Monthly rainfall distribution, {label}"),
            PlotData::MonthlyDistribution(&months),
        ));
    }
    if want(PlotKind::Polar) {
        let mut means = [0.0; 12];
        for (slot, m) in means.iter_mut().zip(&months) {
            *slot = m.values.iter().sum::<f64>() / m.values.len() as f64;
        }
        out.extend(figure(PlotKind::Polar, None, format!("Mean monthly rainfall, {label}"), PlotData::Polar(&means)));
    }
    if want(PlotKind::BoxWhisker) {
        let boxes: Vec<_> = months.iter().filter_map(|m| box_stats(&m.values, &m.years).ok()).collect();
        if boxes.len() == 12 {
            out.extend(figure(PlotKind::BoxWhisker, None, format!("Monthly rainfall, {label}"), PlotData::BoxWhisker(&boxes)));
        }
    }
    if want(PlotKind::MonthlyTrends) {
        let panels: Vec<(MonthSeries, TrendLine)> = months
            .iter()
            .filter_map(|m| trend_of(&m.years, &m.values).ok().map(|t| (m.clone(), t)))
            .collect();
        out.extend(figure(
            PlotKind::MonthlyTrends,
            None,
            format!("Monthly rainfall trends, {label}"),
            PlotData::MonthlyTrends(&panels),
        ));
    }
    if want(PlotKind::AnnualTrend) {
        let totals = annual_totals(series);
        let (years, values): (Vec<i32>, Vec<f64>) = totals.iter().copied().unzip();
        if let Ok(trend) = trend_of(&years, &values) {
            out.extend(figure(
                PlotKind::AnnualTrend,
                None,
                format!("Annual rainfall, {label}"),
                PlotData::AnnualTrend { totals: &totals, trend: &trend },
            ));
        }
    }
    if want(PlotKind::Dendrogram) {
        for c in clusters {
            let title = format!("Clusters of {} ({} linkage), {label}", c.items.as_str(), c.linkage);
            out.extend(figure(PlotKind::Dendrogram, Some(c.items.as_str()), title, PlotData::Dendrogram(&c.dendrogram)));
        }
    }
    if want(PlotKind::DecadalPattern) {
        if let Ok(profiles) = decadal_profiles(series, opts.decade_length) {
            out.extend(figure(
                PlotKind::DecadalPattern,
                None,
                format!("Decadal pattern of monthly rainfall, {label}"),
                PlotData::DecadalPattern(&profiles),
            ));
        }
    }
    out
}

/// Diagnostics and Cullen-Frey figures for one month's fit.
pub fn fit_figures(series: &RainfallSeries, fit: &MonthFit, kinds: &[PlotKind]) -> Vec<Figure> {
    let m = month_series(series, fit.month as u32).expect("month in range");
    let abbr = month_abbreviation(fit.month);
    let mut out = Vec::new();
    if kinds.contains(&PlotKind::FitDiagnostics) {
        let best = fit.ranking.best();
        let sample = fitted_sample(&m.values, best.adjustment);
        let title = format!("{}: {} model, {}", m.name(), best.fitted.family, series.label());
        out.extend(figure(
            PlotKind::FitDiagnostics,
            Some(&abbr),
            title,
            PlotData::FitDiagnostics { fitted: &best.fitted, data: &sample },
        ));
    }
    if kinds.contains(&PlotKind::CullenFrey) {
        if let Some(cf) = &fit.cullen_frey {
            let title = format!("Cullen and Frey graph, {}, {}", m.name(), series.label());
            out.extend(figure(PlotKind::CullenFrey, Some(&abbr), title, PlotData::CullenFrey(cf)));
        }
    }
    out
}

/// The full study: every section of the report and every figure.
pub fn full_report(series: &RainfallSeries, metadata: Metadata, opts: &Options) -> (AnalysisReport, Vec<Figure>) {
    let mut report = AnalysisReport::new(opts.record(metadata));
    let mut errors = Vec::new();
    let mut fail = |section: &str, month: Option<u8>, message: String| {
        errors.push(SectionError { section: section.into(), month, message });
    };

    match monthly_stats(series) {
        Ok(s) => report.monthly_stats = Some(s),
        Err(e) => fail("monthlyStats", None, e.to_string()),
    }
    report.annual_totals = Some(annual_totals(series));
    match trends(series) {
        Ok(t) => report.trends = Some(t),
        Err(e) => fail("trends", None, e.to_string()),
    }
    match decadal_profiles(series, opts.decade_length) {
        Ok(p) => report.decadal_profiles = Some(p),
        Err(e) => fail("decadalProfiles", None, e.to_string()),
    }
    let mut clusters = Vec::new();
    for items in [ClusterItems::Years, ClusterItems::Decades] {
        match cluster(series, items, opts) {
            Ok(c) => clusters.push(c),
            Err(e) => fail(&format!("clusters.{}", items.as_str()), None, e.to_string()),
        }
    }

    let mut fits = Vec::new();
    let mut gofs = Vec::new();
    for month in 1..=12u8 {
        let fit = match month_fit(series, month, opts) {
            Ok(f) => f,
            Err(e) => {
                fail("fits", Some(month), e.to_string());
                continue;
            }
        };
        let values = month_series(series, month as u32).expect("month in range").values;
        match month_gof(&values, month, fit.ranking.best(), opts) {
            Ok(g) => gofs.push(g),
            Err(e) => fail("gof", Some(month), e.to_string()),
        }
        fits.push(fit);
    }

    let mut figures = data_figures(series, &clusters, opts, &PlotKind::ALL);
    for fit in &fits {
        figures.extend(fit_figures(series, fit, &PlotKind::ALL));
    }
    report.clusters = (!clusters.is_empty()).then_some(clusters);
    report.fits = (!fits.is_empty()).then_some(fits);
    report.gof = (!gofs.is_empty()).then_some(gofs);
    report.errors = (!errors.is_empty()).then_some(errors);
    (report, figures)
}
