//! Parser for the HMD 1x1 period table layout.
//!
//! Files look like
//!
//! ```text
//! Japan, Deaths (period 1x1),    Last modified: ...
//!
//!   Year          Age             Female            Male           Total
//!   1951           0            9136.44         11937.53        21073.97
//!   1951         110+              0.00             1.00            1.00
//! ```
//!
//! Values may be `.` for missing; the open age group `110+` is read as age
//! 110. The caller picks one of the value columns (`Female`, `Male`,
//! `Total`) per population.

use std::io::BufRead;

use super::DataError;

/// One data line of an HMD table, restricted to the selected value column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HmdRecord {
    pub year: i32,
    pub age: u32,
    /// `None` for the HMD missing marker `.`.
    pub value: Option<f64>,
}

/// Deaths and exposures tables for one population, ready for assembly.
#[derive(Debug, Clone)]
pub struct PopulationSource {
    pub label: String,
    pub deaths: Vec<HmdRecord>,
    pub exposures: Vec<HmdRecord>,
}

fn parse_age(tok: &str, line: usize) -> Result<u32, DataError> {
    let digits = tok.strip_suffix('+').unwrap_or(tok);
    digits.parse().map_err(|_| DataError::Parse {
        line,
        msg: format!("unparseable age {tok:?}"),
    })
}

fn parse_value(tok: &str, line: usize) -> Result<Option<f64>, DataError> {
    if tok == "." {
        return Ok(None);
    }
    tok.parse()
        .map(Some)
        .map_err(|_| DataError::Parse {
            line,
            msg: format!("unparseable value {tok:?}"),
        })
}

/// Parse an HMD 1x1 table, keeping the named value column.
///
/// Header lines before the `Year Age ...` column row are skipped. Every
/// subsequent non-empty line must have one field per header column.
pub fn parse_hmd_table<R: BufRead>(reader: R, value_column: &str) -> Result<Vec<HmdRecord>, DataError> {
    let mut records = Vec::new();
    let mut value_idx: Option<usize> = None;
    let mut n_cols = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        match value_idx {
            None => {
                // Still looking for the column header row.
                if fields[0].eq_ignore_ascii_case("Year") && fields.len() > 2 {
                    let pos = fields
                        .iter()
                        .position(|f| f.eq_ignore_ascii_case(value_column))
                        .ok_or_else(|| {
                            DataError::Config(format!(
                                "value column {value_column:?} not found in header {fields:?}"
                            ))
                        })?;
                    value_idx = Some(pos);
                    n_cols = fields.len();
                }
            }
            Some(pos) => {
                if fields.len() != n_cols {
                    return Err(DataError::Parse {
                        line: line_no,
                        msg: format!("expected {n_cols} columns, found {}", fields.len()),
                    });
                }
                let year = fields[0].parse().map_err(|_| DataError::Parse {
                    line: line_no,
                    msg: format!("unparseable year {:?}", fields[0]),
                })?;
                let age = parse_age(fields[1], line_no)?;
                let value = parse_value(fields[pos], line_no)?;
                records.push(HmdRecord { year, age, value });
            }
        }
    }

    if value_idx.is_none() {
        return Err(DataError::Config(format!(
            "no header row with a Year column found while looking for {value_column:?}"
        )));
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    const SAMPLE: &str = "Japan, Deaths (period 1x1)\n\n\
  Year          Age             Female            Male           Total\n\
  1951           0            9136.44         11937.53        21073.97\n\
  1951         110+              0.00             1.00            1.00\n\
  1951           3                  .                .               .\n";

    #[test]
    fn parses_well_formed_line() {
        let recs = parse_hmd_table(Cursor::new(SAMPLE), "Female").unwrap();
        assert_eq!(recs[0], HmdRecord { year: 1951, age: 0, value: Some(9136.44) });
    }

    #[test]
    fn open_age_group_maps_to_110() {
        let recs = parse_hmd_table(Cursor::new(SAMPLE), "Male").unwrap();
        assert_eq!(recs[1], HmdRecord { year: 1951, age: 110, value: Some(1.00) });
    }

    #[test]
    fn dot_is_missing() {
        let recs = parse_hmd_table(Cursor::new(SAMPLE), "Total").unwrap();
        assert_eq!(recs[2], HmdRecord { year: 1951, age: 3, value: None });
    }

    #[test]
    fn unknown_column_is_config_error() {
        let err = parse_hmd_table(Cursor::new(SAMPLE), "Both").unwrap_err();
        assert!(matches!(err, DataError::Config(_)));
    }

    #[test]
    fn short_row_reports_line_number() {
        let bad = "Year Age Female Male Total\n1951 0 1.0 2.0 3.0\n1952 0 1.0\n";
        let err = parse_hmd_table(Cursor::new(bad), "Female").unwrap_err();
        match err {
            DataError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_numeric_year_reports_line_number() {
        let bad = "Year Age Female Male Total\nabcd 0 1.0 2.0 3.0\n";
        let err = parse_hmd_table(Cursor::new(bad), "Female").unwrap_err();
        assert!(matches!(err, DataError::Parse { line: 2, .. }));
    }
}
