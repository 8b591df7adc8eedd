//! The JSON analysis report.
//!
//! Documents are written with keys in lexicographic order and every
//! floating-point number rounded to 10 significant digits, so two runs over
//! the same input with the same seed produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rainshift_core::cluster::{ClusterAssignment, Dendrogram, Linkage, Metric, Standardize};
use rainshift_core::gof::GofReport;
use rainshift_core::ingest::{DecadalProfile, MONTH_NAMES};
use rainshift_core::selection::{CullenFrey, FitRanking};
use rainshift_core::stats::{BoxStats, SummaryStats, TrendLine};
use rainshift_core::FittedDistribution;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;
pub const SIGNIFICANT_DIGITS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input_file: String,
    /// Lower-case hex SHA-256 of the input bytes.
    pub input_sha256: String,
    pub seed: u64,
    pub options: BTreeMap<String, String>,
}

impl Metadata {
    pub fn new(command: &str, input_file: &str, input: &[u8], seed: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            input_file: input_file.into(),
            input_sha256: sha256_hex(input),
            seed,
            options: BTreeMap::new(),
        }
    }

    pub fn option(mut self, key: &str, value: impl ToString) -> Self {
        self.options.insert(key.into(), value.to_string());
        self
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MonthStats {
    pub month: u8,
    pub name: String,
    pub summary: SummaryStats,
    pub box_stats: BoxStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MonthTrend {
    pub month: u8,
    pub trend: TrendLine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Trends {
    pub annual: TrendLine,
    pub monthly: Vec<MonthTrend>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterItems {
    Years,
    Decades,
}

impl ClusterItems {
    pub fn as_str(self) -> &'static str {
        match self {
            ClusterItems::Years => "years",
            ClusterItems::Decades => "decades",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClusterSection {
    pub items: ClusterItems,
    pub metric: Metric,
    pub standardize: Standardize,
    pub linkage: Linkage,
    pub dendrogram: Dendrogram,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<ClusterAssignment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MonthFit {
    pub month: u8,
    pub ranking: FitRanking,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cullen_frey: Option<CullenFrey>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MonthGof {
    pub month: u8,
    pub fitted: FittedDistribution,
    pub report: GofReport,
}

/// A failure confined to one part of the pipeline that did not stop the
/// rest of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SectionError {
    pub section: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub month: Option<u8>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub metadata: Metadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monthly_stats: Option<Vec<MonthStats>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annual_totals: Option<Vec<(i32, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trends: Option<Trends>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decadal_profiles: Option<Vec<DecadalProfile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clusters: Option<Vec<ClusterSection>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fits: Option<Vec<MonthFit>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gof: Option<Vec<MonthGof>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<Vec<SectionError>>,
}

impl AnalysisReport {
    pub fn new(metadata: Metadata) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            metadata,
            monthly_stats: None,
            annual_totals: None,
            trends: None,
            decadal_profiles: None,
            clusters: None,
            fits: None,
            gof: None,
            errors: None,
        }
    }

    /// The report as it reads back after serialization: every float rounded
    /// to [`SIGNIFICANT_DIGITS`].
    pub fn canonical(&self) -> Result<Self, serde_json::Error> {
        serde_json::from_value(canonical_value(self)?)
    }
}

/// Rounds to `SIGNIFICANT_DIGITS` significant decimal digits.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_significant(n.as_f64().expect("f64 number"));
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// Serializes `value` to a JSON tree with sorted keys and rounded floats.
pub fn canonical_value<T: Serialize>(value: &T) -> Result<Value, serde_json::Error> {
    let mut v = serde_json::to_value(value)?;
    round_numbers(&mut v);
    Ok(v)
}

/// Pretty-printed canonical JSON with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let mut s = serde_json::to_string_pretty(&canonical_value(value)?)?;
    s.push('\n');
    Ok(s)
}

pub fn write_report(report: &AnalysisReport) -> Result<String, serde_json::Error> {
    to_canonical_json(report)
}

pub fn read_report(text: &str) -> Result<AnalysisReport, serde_json::Error> {
    serde_json::from_str(text)
}

/// Table 1 layout: one row per month, columns Mean .. Maximum.
pub fn stats_table(rows: &[MonthStats]) -> String {
    const HEADERS: [&str; 10] =
        ["Month", "Mean", "Median", "Mode", "Std. Dev.", "Kurtosis", "Skewness", "Range", "Minimum", "Maximum"];
    let fmt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
    let body: Vec<[String; 10]> = rows
        .iter()
        .map(|r| {
            let s = &r.summary;
            [
                MONTH_NAMES[r.month as usize - 1].to_string(),
                fmt(Some(s.mean)),
                fmt(Some(s.median)),
                fmt(s.mode),
                fmt(Some(s.standard_deviation)),
                fmt(s.excess_kurtosis),
                fmt(s.skewness),
                fmt(Some(s.range)),
                fmt(Some(s.minimum)),
                fmt(Some(s.maximum)),
            ]
        })
        .collect();
    let mut widths = HEADERS.map(str::len);
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[&str]| {
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if i == 0 {
                write!(out, "{cell:<w$}").unwrap();
            } else {
                write!(out, "  {cell:>w$}").unwrap();
            }
        }
        out.push('\n');
    };
    line(&HEADERS);
    for row in &body {
        line(&row.each_ref().map(String::as_str));
    }
    out
}
