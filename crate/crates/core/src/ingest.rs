//! Validated monthly rainfall records and the column/aggregate views the
//! rest of the pipeline works on.

use alloc::string::String;
use alloc::vec::Vec;

/// Three-letter month abbreviations, January first.
pub const MONTH_ABBREVIATIONS: [&str; 12] =
    ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"];

pub const MONTH_NAMES: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September",
    "October", "November", "December",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IngestError {
    #[error("no records")]
    EmptyInput,
    #[error("too few values: a series needs at least 2 years, got {got}")]
    TooFewValues { got: usize },
    #[error("duplicate year {year}")]
    DuplicateYear { year: i32 },
    #[error("negative rainfall {value} in year {year}, month {month}")]
    NegativeRainfall { year: i32, month: u8, value: f64 },
    #[error("non-finite rainfall in year {year}, month {month}")]
    NonFiniteRainfall { year: i32, month: u8 },
    #[error("month {0} out of range 1..=12")]
    MonthOutOfRange(u32),
    #[error("decade length must be at least 1")]
    InvalidDecadeLength,
}

/// Parses a month given as `1`-`12`, a three-letter abbreviation or a full
/// English name (case-insensitive).
pub fn parse_month(s: &str) -> Option<u8> {
    let s = s.trim();
    if let Ok(n) = s.parse::<u8>() {
        return (1..=12).contains(&n).then_some(n);
    }
    MONTH_ABBREVIATIONS
        .iter()
        .zip(MONTH_NAMES.iter())
        .position(|(a, f)| s.eq_ignore_ascii_case(a) || s.eq_ignore_ascii_case(f))
        .map(|i| i as u8 + 1)
}

/// One year of monthly rainfall depths in millimetres, January..December.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RainfallRecord {
    pub year: i32,
    pub depths: [f64; 12],
}

impl RainfallRecord {
    pub fn total(&self) -> f64 {
        self.depths.iter().sum()
    }
}

/// A station's records in strictly increasing year order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RainfallSeries {
    label: String,
    records: Vec<RainfallRecord>,
}

impl RainfallSeries {
    /// Validates and sorts the records by year.
    pub fn new(label: impl Into<String>, mut records: Vec<RainfallRecord>) -> Result<Self, IngestError> {
        if records.is_empty() {
            return Err(IngestError::EmptyInput);
        }
        for r in &records {
            for (m, &v) in r.depths.iter().enumerate() {
                let month = m as u8 + 1;
                if !v.is_finite() {
                    return Err(IngestError::NonFiniteRainfall { year: r.year, month });
                }
                if v < 0.0 {
                    return Err(IngestError::NegativeRainfall { year: r.year, month, value: v });
                }
            }
        }
        records.sort_by_key(|r| r.year);
        if let Some(w) = records.windows(2).find(|w| w[0].year == w[1].year) {
            return Err(IngestError::DuplicateYear { year: w[0].year });
        }
        if records.len() < 2 {
            return Err(IngestError::TooFewValues { got: records.len() });
        }
        Ok(Self { label: label.into(), records })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn records(&self) -> &[RainfallRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn years(&self) -> Vec<i32> {
        self.records.iter().map(|r| r.year).collect()
    }

    pub fn first_year(&self) -> i32 {
        self.records[0].year
    }

    pub fn last_year(&self) -> i32 {
        self.records[self.records.len() - 1].year
    }
}

/// One month's column, ordered by year.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonthSeries {
    pub month: u8,
    pub values: Vec<f64>,
    pub years: Vec<i32>,
}

impl MonthSeries {
    pub fn name(&self) -> &'static str {
        MONTH_NAMES[self.month as usize - 1]
    }
}

/// Monthly means over one block of consecutive years.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct DecadalProfile {
    pub decade_index: usize,
    pub start_year: i32,
    pub end_year: i32,
    pub monthly_means: [f64; 12],
    pub year_count: usize,
}

pub fn month_series(series: &RainfallSeries, month: u32) -> Result<MonthSeries, IngestError> {
    if !(1..=12).contains(&month) {
        return Err(IngestError::MonthOutOfRange(month));
    }
    let idx = month as usize - 1;
    Ok(MonthSeries {
        month: month as u8,
        values: series.records.iter().map(|r| r.depths[idx]).collect(),
        years: series.years(),
    })
}

pub fn annual_totals(series: &RainfallSeries) -> Vec<(i32, f64)> {
    series.records.iter().map(|r| (r.year, r.total())).collect()
}

/// Splits the record into blocks of `decade_length` calendar years starting
/// at the first year. The last block may be partial. Blocks that contain no
/// records (possible only when the series has gaps) are omitted, and
/// `decade_index` keeps counting calendar blocks.
pub fn decadal_profiles(
    series: &RainfallSeries,
    decade_length: usize,
) -> Result<Vec<DecadalProfile>, IngestError> {
    if decade_length == 0 {
        return Err(IngestError::InvalidDecadeLength);
    }
    let first = series.first_year() as i64;
    let len = decade_length as i64;
    let mut out: Vec<DecadalProfile> = Vec::new();
    let mut block: Vec<&RainfallRecord> = Vec::new();
    let mut block_index = 0i64;

    let flush = |block: &mut Vec<&RainfallRecord>, index: i64, out: &mut Vec<DecadalProfile>| {
        if block.is_empty() {
            return;
        }
        let mut sums = [0.0; 12];
        for r in block.iter() {
            for (s, d) in sums.iter_mut().zip(r.depths.iter()) {
                *s += d;
            }
        }
        let count = block.len();
        out.push(DecadalProfile {
            decade_index: index as usize + 1,
            start_year: block[0].year,
            end_year: block[count - 1].year,
            monthly_means: sums.map(|s| s / count as f64),
            year_count: count,
        });
        block.clear();
    };

    for r in &series.records {
        let idx = (r.year as i64 - first) / len;
        if idx != block_index {
            flush(&mut block, block_index, &mut out);
            block_index = idx;
        }
        block.push(r);
    }
    flush(&mut block, block_index, &mut out);
    Ok(out)
}
