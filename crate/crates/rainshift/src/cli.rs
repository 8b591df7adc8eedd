//! The `rainshift` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 numeric failure (an optimizer did not converge).

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rainshift_core::cluster::{Linkage, Metric, Standardize};
use rainshift_core::gof::{gof_report, GofError};
use rainshift_core::ingest::{decadal_profiles, month_series, parse_month};
use rainshift_core::selection::{fit_all, Criterion, SelectionError, SkipReason, ZeroPolicy};
use rainshift_core::{Family, RainfallSeries};
use serde::Serialize;

use crate::pipeline::{self, Figure, Options};
use crate::report::{to_canonical_json, write_report, AnalysisReport, ClusterItems, Metadata};
use crate::svg::PlotKind;
use crate::table::parse_csv;

pub const OUT_ENV: &str = "RAINSHIFT_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seed {
    Fixed(u64),
    Random,
}

impl FromStr for Seed {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("random") {
            return Ok(Seed::Random);
        }
        s.parse().map(Seed::Fixed).map_err(|_| format!("seed must be a non-negative integer or `random`, got `{s}`"))
    }
}

impl Seed {
    fn resolve(self) -> u64 {
        match self {
            Seed::Fixed(s) => s,
            Seed::Random => rand::random(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Month(pub u8);

impl FromStr for Month {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_month(s).map(Month).ok_or_else(|| format!("`{s}` is not a month (use 1-12, jan..dec or a full name)"))
    }
}

/// `all` or a comma-separated list of family ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Families(pub Vec<Family>);

impl FromStr for Families {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(Families(Family::ALL.to_vec()));
        }
        let mut out = Vec::new();
        for id in s.split(',').map(str::trim).filter(|id| !id.is_empty()) {
            let f = Family::from_id(id).ok_or_else(|| format!("unknown family `{id}`"))?;
            if !out.contains(&f) {
                out.push(f);
            }
        }
        if out.is_empty() {
            return Err("no families given".into());
        }
        Ok(Families(out))
    }
}

#[derive(Debug, Parser)]
#[command(name = "rainshift", version, about = "Detect and quantify shifts in monthly rainfall patterns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Rainfall table: Year,Jan,...,Dec
    #[arg(long, short)]
    input: PathBuf,
    /// Output directory (falls back to $RAINSHIFT_OUT)
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Random seed, or `random`
    #[arg(long, default_value = "0")]
    seed: Seed,
}

#[derive(Debug, Args)]
struct ClusterOpts {
    #[arg(long, default_value = "average")]
    linkage: Linkage,
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
    #[arg(long, default_value = "none")]
    standardize: Standardize,
    /// Cut the tree into this many clusters
    #[arg(long)]
    cut_k: Option<usize>,
}

#[derive(Debug, Args)]
struct FitOpts {
    /// Comma-separated family ids, or `all`
    #[arg(long, default_value = "all")]
    families: Families,
    #[arg(long, default_value = "aic")]
    criterion: Criterion,
    /// skip-family, drop-zeros or epsilon=V
    #[arg(long, default_value = "skip-family")]
    zero_policy: ZeroPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Descriptive statistics for every month
    Stats {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Least-squares trends of annual totals and monthly rainfall
    Trend {
        #[command(flatten)]
        common: Common,
        /// Restrict the monthly trends to one month
        #[arg(long)]
        month: Option<Month>,
    },
    /// Hierarchical clustering of years or decadal profiles
    Cluster {
        #[arg(value_enum)]
        items: Items,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        cluster: ClusterOpts,
        #[arg(long, default_value = "10", value_parser = clap::value_parser!(u32).range(1..))]
        decade_length: u32,
    },
    /// Decadal profiles of monthly means
    Decadal {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "10", value_parser = clap::value_parser!(u32).range(1..))]
        decade_length: u32,
    },
    /// Fit and rank candidate distributions for one month
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        month: Month,
        #[command(flatten)]
        fit: FitOpts,
        /// Bootstrap resamples for the Cullen-Frey graph
        #[arg(long, default_value = "100")]
        boot: usize,
    },
    /// Goodness-of-fit tests for one month's fitted model
    Gof {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        month: Month,
        /// Family to test (default: the AIC-best family)
        #[arg(long)]
        family: Option<String>,
        /// Chi-squared bins (default: Sturges)
        #[arg(long)]
        bins: Option<usize>,
        /// Parametric-bootstrap replicates for the KS p-value
        #[arg(long, default_value = "0")]
        boot_gof: usize,
    },
    /// Run the whole study and write the report and every figure
    Report {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        cluster: ClusterOpts,
        #[command(flatten)]
        fit: FitOpts,
        #[arg(long, default_value = "10", value_parser = clap::value_parser!(u32).range(1..))]
        decade_length: u32,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long, default_value = "100")]
        boot: usize,
        #[arg(long, default_value = "0")]
        boot_gof: usize,
    },
    /// Write figures only
    Plot {
        #[command(flatten)]
        common: Common,
        /// Plot kind, or `all`
        #[arg(long, default_value = "all")]
        kind: KindArg,
        /// Month for fit-diagnostics and cullen-frey (default: every month)
        #[arg(long)]
        month: Option<Month>,
        #[command(flatten)]
        cluster: ClusterOpts,
        #[command(flatten)]
        fit: FitOpts,
        #[arg(long, default_value = "10", value_parser = clap::value_parser!(u32).range(1..))]
        decade_length: u32,
        #[arg(long, default_value = "100")]
        boot: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Items {
    Years,
    Decades,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct KindArg(Option<PlotKind>);

impl FromStr for KindArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            Ok(KindArg(None))
        } else {
            s.parse().map(|k| KindArg(Some(k)))
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Numeric(m) => m,
        }
    }
}

fn selection_failure(e: SelectionError) -> Failure {
    match &e {
        SelectionError::AllFamiliesSkipped { skipped }
            if skipped.iter().all(|s| matches!(s.reason, SkipReason::NonConvergence { .. })) =>
        {
            let detail: Vec<String> = skipped.iter().map(|s| format!("{}: {}", s.family, s.reason)).collect();
            Failure::Numeric(format!("{e}: {}", detail.join("; ")))
        }
        SelectionError::AllFamiliesSkipped { skipped } => {
            let detail: Vec<String> = skipped.iter().map(|s| format!("{}: {}", s.family, s.reason)).collect();
            Failure::Data(format!("{e}: {}", detail.join("; ")))
        }
        _ => Failure::Data(e.to_string()),
    }
}

fn gof_failure(e: GofError) -> Failure {
    match e {
        GofError::TooFewBins { .. } => Failure::Usage(e.to_string()),
        GofError::Distribution(rainshift_core::distributions::DistError::NonConvergence { .. }) => {
            Failure::Numeric(e.to_string())
        }
        _ => Failure::Data(e.to_string()),
    }
}

/// Everything a run produces; nothing is written until the run succeeds.
#[derive(Default)]
struct Output {
    stdout: String,
    files: Vec<(String, String)>,
}

struct Input {
    series: RainfallSeries,
    stem: String,
    file_name: String,
    bytes: Vec<u8>,
}

fn load(path: &Path) -> Result<Input, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Data(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Failure::Data(format!("{}: not UTF-8: {e}", path.display())))?;
    let stem = path.file_stem().map_or_else(|| "rainfall".into(), |s| s.to_string_lossy().into_owned());
    let file_name = path.file_name().map_or_else(|| stem.clone(), |s| s.to_string_lossy().into_owned());
    let series = parse_csv(text, &stem).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    Ok(Input { series, stem, file_name, bytes })
}

fn out_dir(common: &Common) -> Option<PathBuf> {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
}

fn json<T: Serialize>(value: &T) -> String {
    to_canonical_json(value).expect("report values serialize")
}

fn figure_files(stem: &str, figures: Vec<Figure>) -> Vec<(String, String)> {
    figures.into_iter().map(|f| (format!("{stem}.{}.svg", f.name), f.svg)).collect()
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Document<T: Serialize> {
    schema_version: u32,
    metadata: Metadata,
    #[serde(flatten)]
    body: T,
}

fn document<T: Serialize>(metadata: Metadata, body: T) -> String {
    json(&Document { schema_version: crate::report::SCHEMA_VERSION, metadata, body })
}

fn metadata(command: &str, input: &Input, seed: u64) -> Metadata {
    Metadata::new(command, &input.file_name, &input.bytes, seed)
}

fn run(cli: Cli) -> Result<Output, Failure> {
    let mut out = Output::default();
    match cli.command {
        Command::Stats { common, format } => {
            let input = load(&common.input)?;
            let rows = pipeline::monthly_stats(&input.series).map_err(|e| Failure::Data(e.to_string()))?;
            let doc = document(metadata("stats", &input, common.seed.resolve()), serde_json::json!({ "monthlyStats": rows }));
            out.stdout = match format {
                Format::Json => doc.clone(),
                Format::Table => crate::report::stats_table(&rows),
            };
            if let Some(_dir) = out_dir(&common) {
                out.files.push((format!("{}.stats.json", input.stem), doc));
            }
        }
        Command::Trend { common, month } => {
            let input = load(&common.input)?;
            let mut trends = pipeline::trends(&input.series).map_err(|e| Failure::Data(e.to_string()))?;
            if let Some(Month(m)) = month {
                trends.monthly.retain(|t| t.month == m);
            }
            let meta = metadata("trend", &input, common.seed.resolve());
            let meta = match month {
                Some(Month(m)) => meta.option("month", m),
                None => meta,
            };
            out.stdout = document(meta, serde_json::json!({ "trends": trends }));
            if out_dir(&common).is_some() {
                let opts = Options::default();
                out.files = figure_files(
                    &input.stem,
                    pipeline::data_figures(&input.series, &[], &opts, &[PlotKind::AnnualTrend, PlotKind::MonthlyTrends]),
                );
            }
        }
        Command::Cluster { items, common, cluster, decade_length } => {
            let input = load(&common.input)?;
            let opts = Options {
                linkage: cluster.linkage,
                metric: cluster.metric,
                standardize: cluster.standardize,
                cut_k: cluster.cut_k,
                decade_length: decade_length as usize,
                ..Options::default()
            };
            let items = match items {
                Items::Years => ClusterItems::Years,
                Items::Decades => ClusterItems::Decades,
            };
            let section = pipeline::cluster(&input.series, items, &opts).map_err(|e| match e {
                pipeline::ClusterStepError::Cluster(rainshift_core::cluster::ClusterError::KOutOfRange { .. }) => {
                    Failure::Usage(e.to_string())
                }
                _ => Failure::Data(e.to_string()),
            })?;
            let mut meta = metadata("cluster", &input, common.seed.resolve())
                .option("items", items.as_str())
                .option("linkage", opts.linkage)
                .option("metric", opts.metric)
                .option("standardize", opts.standardize)
                .option("decadeLength", opts.decade_length);
            if let Some(k) = opts.cut_k {
                meta = meta.option("cutK", k);
            }
            out.stdout = document(meta, serde_json::json!({ "clusters": [&section] }));
            if out_dir(&common).is_some() {
                out.files = figure_files(
                    &input.stem,
                    pipeline::data_figures(&input.series, &[section], &opts, &[PlotKind::Dendrogram]),
                );
            }
        }
        Command::Decadal { common, decade_length } => {
            let input = load(&common.input)?;
            let profiles = decadal_profiles(&input.series, decade_length as usize).map_err(|e| Failure::Usage(e.to_string()))?;
            let meta = metadata("decadal", &input, common.seed.resolve()).option("decadeLength", decade_length);
            out.stdout = document(meta, serde_json::json!({ "decadalProfiles": profiles }));
            if out_dir(&common).is_some() {
                let opts = Options { decade_length: decade_length as usize, ..Options::default() };
                out.files = figure_files(
                    &input.stem,
                    pipeline::data_figures(&input.series, &[], &opts, &[PlotKind::DecadalPattern]),
                );
            }
        }
        Command::Fit { common, month: Month(month), fit, boot } => {
            let input = load(&common.input)?;
            let opts = Options {
                seed: common.seed.resolve(),
                criterion: fit.criterion,
                zero_policy: fit.zero_policy,
                families: fit.families.0,
                boot,
                ..Options::default()
            };
            let month_fit = pipeline::month_fit(&input.series, month, &opts).map_err(selection_failure)?;
            let families: Vec<&str> = opts.families.iter().map(|f| f.id()).collect();
            let meta = metadata("fit", &input, opts.seed)
                .option("month", month)
                .option("families", families.join(","))
                .option("criterion", opts.criterion)
                .option("zeroPolicy", opts.zero_policy)
                .option("boot", boot);
            out.stdout = document(meta, serde_json::json!({ "fits": [&month_fit] }));
            if out_dir(&common).is_some() {
                out.files = figure_files(
                    &input.stem,
                    pipeline::fit_figures(&input.series, &month_fit, &[PlotKind::FitDiagnostics, PlotKind::CullenFrey]),
                );
            }
        }
        Command::Gof { common, month: Month(month), family, bins, boot_gof } => {
            let family = family
                .map(|f| Family::from_id(&f).ok_or_else(|| Failure::Usage(format!("unknown family `{f}`"))))
                .transpose()?;
            let input = load(&common.input)?;
            let seed = common.seed.resolve();
            let values = month_series(&input.series, month as u32).expect("month in range").values;
            let families = family.map_or_else(|| Family::ALL.to_vec(), |f| vec![f]);
            let ranking = fit_all("gof", &values, &families, Criterion::Aic, ZeroPolicy::SkipFamily)
                .map_err(selection_failure)?;
            let best = ranking.best();
            let report = gof_report(&best.fitted, &values, bins, boot_gof, pipeline::month_seed(seed, month))
                .map_err(gof_failure)?;
            let mut meta = metadata("gof", &input, seed)
                .option("month", month)
                .option("family", family.map_or("best-aic", |f| f.id()))
                .option("bins", bins.map_or("sturges".to_string(), |b| b.to_string()))
                .option("bootGof", boot_gof);
            meta = meta.option("zeroPolicy", ZeroPolicy::SkipFamily);
            out.stdout = document(meta, serde_json::json!({ "gof": [{ "month": month, "fitted": best.fitted, "report": report }] }));
        }
        Command::Report { common, cluster, fit, decade_length, bins, boot, boot_gof } => {
            let dir = out_dir(&common)
                .ok_or_else(|| Failure::Usage(format!("report needs --out or ${OUT_ENV}")))?;
            let input = load(&common.input)?;
            let opts = Options {
                seed: common.seed.resolve(),
                criterion: fit.criterion,
                zero_policy: fit.zero_policy,
                families: fit.families.0,
                linkage: cluster.linkage,
                metric: cluster.metric,
                standardize: cluster.standardize,
                cut_k: cluster.cut_k,
                decade_length: decade_length as usize,
                bins,
                boot,
                boot_gof,
            };
            let (report, figures) = pipeline::full_report(&input.series, metadata("report", &input, opts.seed), &opts);
            out.files = figure_files(&input.stem, figures);
            out.files.push((format!("{}.report.json", input.stem), write_report(&report).expect("report serializes")));
            out.stdout = summary(&report, out.files.len(), &dir);
        }
        Command::Plot { common, kind, month, cluster, fit, decade_length, boot } => {
            let dir = out_dir(&common).ok_or_else(|| Failure::Usage(format!("plot needs --out or ${OUT_ENV}")))?;
            let input = load(&common.input)?;
            let opts = Options {
                seed: common.seed.resolve(),
                criterion: fit.criterion,
                zero_policy: fit.zero_policy,
                families: fit.families.0,
                linkage: cluster.linkage,
                metric: cluster.metric,
                standardize: cluster.standardize,
                cut_k: cluster.cut_k,
                decade_length: decade_length as usize,
                boot,
                ..Options::default()
            };
            let kinds: Vec<PlotKind> = kind.0.map_or_else(|| PlotKind::ALL.to_vec(), |k| vec![k]);
            let mut clusters = Vec::new();
            if kinds.contains(&PlotKind::Dendrogram) {
                for items in [ClusterItems::Years, ClusterItems::Decades] {
                    if let Ok(c) = pipeline::cluster(&input.series, items, &opts) {
                        clusters.push(c);
                    }
                }
            }
            let mut figures = pipeline::data_figures(&input.series, &clusters, &opts, &kinds);
            if kinds.iter().any(|k| matches!(k, PlotKind::FitDiagnostics | PlotKind::CullenFrey)) {
                let months: Vec<u8> = month.map_or_else(|| (1..=12).collect(), |Month(m)| vec![m]);
                for m in months {
                    match pipeline::month_fit(&input.series, m, &opts) {
                        Ok(f) => figures.extend(pipeline::fit_figures(&input.series, &f, &kinds)),
                        Err(e) if month.is_some() => return Err(selection_failure(e)),
                        Err(_) => {}
                    }
                }
            }
            out.files = figure_files(&input.stem, figures);
            out.stdout = format!("wrote {} figures to {}\n", out.files.len(), dir.display());
        }
    }
    Ok(out)
}

fn summary(report: &AnalysisReport, files: usize, dir: &Path) -> String {
    let best: Vec<String> = report
        .fits
        .iter()
        .flatten()
        .map(|f| format!("{}={}", pipeline::month_abbreviation(f.month), f.ranking.best().fitted.family))
        .collect();
    let errors = report.errors.as_ref().map_or(0, Vec::len);
    format!(
        "wrote {files} files to {}; best fits: {}; {errors} section error(s)\n",
        dir.display(),
        if best.is_empty() { "none".into() } else { best.join(" ") }
    )
}

fn write_files(dir: &Path, files: &[(String, String)]) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Data(format!("cannot create {}: {e}", dir.display())))?;
    for (name, content) in files {
        let path = dir.join(name);
        std::fs::write(&path, content).map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Runs the CLI on explicit arguments and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let dir = match &cli.command {
        Command::Stats { common, .. }
        | Command::Trend { common, .. }
        | Command::Cluster { common, .. }
        | Command::Decadal { common, .. }
        | Command::Fit { common, .. }
        | Command::Gof { common, .. }
        | Command::Report { common, .. }
        | Command::Plot { common, .. } => out_dir(common),
    };
    let result = run(cli).and_then(|out| {
        if !out.files.is_empty() {
            write_files(dir.as_deref().expect("files are only produced with an output directory"), &out.files)?;
        }
        Ok(out.stdout)
    });
    match result {
        Ok(stdout) => {
            let mut lock = std::io::stdout().lock();
            let _ = lock.write_all(stdout.as_bytes());
            0
        }
        Err(f) => {
            eprintln!("rainshift: {}", f.message());
            f.code()
        }
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}
