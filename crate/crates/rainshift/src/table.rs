//! The CSV interchange format: a `Year` column followed by the twelve months.
//!
//! ```text
//! Year,Jan,Feb,Mar,Apr,May,Jun,Jul,Aug,Sep,Oct,Nov,Dec
//! 1901,12.4,0,3.1,...
//! ```
//!
//! Month headers are matched case-insensitively and may be abbreviations or
//! full names, but must appear in calendar order.

use std::fmt::Write as _;

use rainshift_core::ingest::{IngestError, MONTH_ABBREVIATIONS, MONTH_NAMES};
use rainshift_core::{RainfallRecord, RainfallSeries};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CsvError {
    #[error("input is empty")]
    EmptyInput,
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: negative rainfall {value} for {month} {year}")]
    NegativeRainfall { line: u64, year: i32, month: &'static str, value: f64 },
    #[error("line {line}: duplicate year {year} (first seen on line {first_line})")]
    DuplicateYear { line: u64, year: i32, first_line: u64 },
    #[error("too few values: a series needs at least 2 years, got {got}")]
    TooFewValues { got: usize },
}

fn malformed(line: u64, reason: impl Into<String>) -> CsvError {
    CsvError::MalformedRow { line, reason: reason.into() }
}

fn check_header(line: u64, header: &csv::StringRecord) -> Result<(), CsvError> {
    if header.len() != 13 {
        return Err(malformed(line, format!("header has {} columns, expected 13", header.len())));
    }
    if !header[0].trim().eq_ignore_ascii_case("year") {
        return Err(malformed(line, format!("first header cell is `{}`, expected `Year`", &header[0])));
    }
    for (m, cell) in header.iter().skip(1).enumerate() {
        let cell = cell.trim();
        if !cell.eq_ignore_ascii_case(MONTH_ABBREVIATIONS[m]) && !cell.eq_ignore_ascii_case(MONTH_NAMES[m]) {
            return Err(malformed(line, format!("header cell `{cell}` should be `{}`", MONTH_ABBREVIATIONS[m])));
        }
    }
    Ok(())
}

/// Parses a rainfall table. Rows may come in any year order; the series is
/// returned sorted.
pub fn parse_csv(text: &str, label: &str) -> Result<RainfallSeries, CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = reader.records();
    let header = match rows.next() {
        None => return Err(CsvError::EmptyInput),
        Some(r) => r.map_err(|e| malformed(1, e.to_string()))?,
    };
    check_header(header.position().map_or(1, |p| p.line()), &header)?;

    let mut records = Vec::new();
    let mut lines: Vec<(i32, u64)> = Vec::new();
    for row in rows {
        let row = row.map_err(|e| malformed(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 13 {
            return Err(malformed(line, format!("{} columns, expected 13", row.len())));
        }
        let year: i32 = row[0].parse().map_err(|_| malformed(line, format!("year `{}` is not an integer", &row[0])))?;
        let mut depths = [0.0; 12];
        for (m, cell) in row.iter().skip(1).enumerate() {
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| malformed(line, format!("{} value `{cell}` is not a number", MONTH_ABBREVIATIONS[m])))?;
            if v < 0.0 {
                return Err(CsvError::NegativeRainfall { line, year, month: MONTH_ABBREVIATIONS[m], value: v });
            }
            depths[m] = v;
        }
        if let Some(&(_, first_line)) = lines.iter().find(|(y, _)| *y == year) {
            return Err(CsvError::DuplicateYear { line, year, first_line });
        }
        lines.push((year, line));
        records.push(RainfallRecord { year, depths });
    }
    if records.is_empty() {
        return Err(CsvError::EmptyInput);
    }
    RainfallSeries::new(label, records).map_err(|e| match e {
        IngestError::TooFewValues { got } => CsvError::TooFewValues { got },
        other => malformed(0, other.to_string()),
    })
}

/// Writes the series in the canonical format. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn to_csv(series: &RainfallSeries) -> String {
    let mut out = String::from("Year");
    for m in MONTH_ABBREVIATIONS {
        out.push(',');
        out.push_str(m);
    }
    out.push('\n');
    for r in series.records() {
        write!(out, "{}", r.year).unwrap();
        for d in r.depths {
            write!(out, ",{d}").unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "Year,Jan,Feb,Mar,Apr,May,Jun,Jul,Aug,Sep,Oct,Nov,Dec\n";

    fn zeros(year: i32) -> String {
        format!("{year}{}\n", ",0".repeat(12))
    }

    #[test]
    fn two_zero_rows() {
        let text = format!("{HEADER}{}{}", zeros(1901), zeros(1902));
        let s = parse_csv(&text, "x").unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.records().iter().all(|r| r.total() == 0.0));
    }

    #[test]
    fn negative_cell_names_the_line() {
        let text = format!("{HEADER}{}1902,0,0,-3.2,0,0,0,0,0,0,0,0,0\n", zeros(1901));
        let err = parse_csv(&text, "x").unwrap_err();
        assert_eq!(err, CsvError::NegativeRainfall { line: 3, year: 1902, month: "Mar", value: -3.2 });
        assert!(err.to_string().starts_with("line 3:"));
    }

    #[test]
    fn malformed_rows() {
        let short = format!("{HEADER}{}1902,1,2\n", zeros(1901));
        assert!(matches!(parse_csv(&short, "x"), Err(CsvError::MalformedRow { line: 3, .. })));
        let blank = format!("{HEADER}{}1902,,0,0,0,0,0,0,0,0,0,0,0\n", zeros(1901));
        assert!(matches!(parse_csv(&blank, "x"), Err(CsvError::MalformedRow { line: 3, .. })));
        let nan = format!("{HEADER}1901,NaN,0,0,0,0,0,0,0,0,0,0,0\n{}", zeros(1902));
        assert!(matches!(parse_csv(&nan, "x"), Err(CsvError::MalformedRow { line: 2, .. })));
        let year = format!("{HEADER}19x1,0,0,0,0,0,0,0,0,0,0,0,0\n");
        assert!(matches!(parse_csv(&year, "x"), Err(CsvError::MalformedRow { line: 2, .. })));
        assert!(matches!(parse_csv("Year,Jan\n", "x"), Err(CsvError::MalformedRow { line: 1, .. })));
    }

    #[test]
    fn duplicates_empty_and_short() {
        let dup = format!("{HEADER}{}{}{}", zeros(1901), zeros(1902), zeros(1901));
        assert_eq!(parse_csv(&dup, "x"), Err(CsvError::DuplicateYear { line: 4, year: 1901, first_line: 2 }));
        assert_eq!(parse_csv("", "x"), Err(CsvError::EmptyInput));
        assert_eq!(parse_csv(HEADER, "x"), Err(CsvError::EmptyInput));
        assert_eq!(parse_csv(&format!("{HEADER}{}", zeros(1901)), "x"), Err(CsvError::TooFewValues { got: 1 }));
    }

    #[test]
    fn headers_are_flexible_but_ordered() {
        let full = "year,JANUARY,february,March,April,May,June,July,August,September,October,November,December\n";
        assert!(parse_csv(&format!("{full}{}{}", zeros(1901), zeros(1902)), "x").is_ok());
        let swapped = "Year,Feb,Jan,Mar,Apr,May,Jun,Jul,Aug,Sep,Oct,Nov,Dec\n";
        assert!(parse_csv(&format!("{swapped}{}{}", zeros(1901), zeros(1902)), "x").is_err());
    }

    #[test]
    fn rows_are_sorted_and_round_trip() {
        let text = format!("{HEADER}1903,0.1,1e-3,2.5,0,0,0,0,0,0,0,0,608.89\n{}", zeros(1901));
        let s = parse_csv(&text, "x").unwrap();
        assert_eq!(s.years(), vec![1901, 1903]);
        assert_eq!(parse_csv(&to_csv(&s), "x").unwrap(), s);
    }
}
