//! Series files: CSV with a `date,value` header, one month per row, dates as
//! `YYYY-MM` (a trailing `-DD` is accepted and ignored).

use std::fs;
use std::path::Path;

use mdpso_core::timeseries::{MonthlySeries, YearMonth};

use crate::error::{Error, Result};

pub fn load_series(path: &Path) -> Result<MonthlySeries> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_series(&text, path)
}

/// Parses series text; `path` only labels errors.
pub fn parse_series(text: &str, path: &Path) -> Result<MonthlySeries> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if headers.len() != 2 || &headers[0] != "date" || &headers[1] != "value" {
        return Err(parse_err(1, "expected header `date,value`".into()));
    }
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let date = &record[0];
        let date = if date.len() == 10 { &date[..7] } else { date };
        let month: YearMonth = date.parse().map_err(|e| parse_err(line, format!("{e}")))?;
        let value: f64 = record[1]
            .parse()
            .map_err(|_| parse_err(line, format!("invalid value `{}`", &record[1])))?;
        points.push((month, value));
    }
    MonthlySeries::from_points(points).map_err(|source| Error::Series {
        path: path.to_path_buf(),
        source,
    })
}

pub fn series_to_csv(series: &MonthlySeries) -> String {
    let mut out = String::from("date,value\n");
    for (m, v) in series.iter() {
        out.push_str(&format!("{m},{v}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<MonthlySeries> {
        parse_series(text, Path::new("x.csv"))
    }

    #[test]
    fn reads_months() {
        let s = parse("date,value\n2020-01,1.5\n2020-02-01, 2\n").unwrap();
        assert_eq!(s.values(), &[1.5, 2.0]);
        assert_eq!(s.start().to_string(), "2020-01");
        assert_eq!(series_to_csv(&s), "date,value\n2020-01,1.5\n2020-02,2\n");
    }

    #[test]
    fn errors_carry_file_and_line() {
        let e = parse("date,value\n2020-01,1\n2020-02,abc\n").unwrap_err();
        assert_eq!(e.to_string(), "x.csv, line 3: invalid value `abc`");
        let e = parse("date,value\n2020-01,1\n2020-13,2\n").unwrap_err();
        assert!(e.to_string().starts_with("x.csv, line 3:"), "{e}");
        let e = parse("when,value\n").unwrap_err();
        assert!(e.to_string().contains("line 1"));
        let e = parse("date,value\n2020-01,1\n2020-03,2\n").unwrap_err();
        assert!(e.to_string().contains("missing 2020-02"), "{e}");
        assert_eq!(e.exit_code(), 1);
    }
}
