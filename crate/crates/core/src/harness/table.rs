//! CSV read/write shared by the experiment, bound and plot commands.

use std::path::Path;

use crate::{Error, Result};

/// 17 significant digits, round-trips every finite `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
    w.write_record(header).map_err(csv_io)?;
    for r in rows {
        w.write_record(r).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::MalformedCsv(format!("{other:?}")),
    }
}

/// Numeric CSV: header plus rows; empty cells become `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = rd
            .headers()
            .map_err(|e| Error::MalformedCsv(e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        if header.len() < 2 || header.iter().any(|h| h.is_empty()) {
            return Err(Error::MalformedCsv("missing or incomplete header".into()));
        }
        let mut rows = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec.map_err(|e| Error::MalformedCsv(e.to_string()))?;
            let row = rec
                .iter()
                .map(|cell| {
                    let cell = cell.trim();
                    if cell.is_empty() {
                        Ok(None)
                    } else {
                        cell.parse::<f64>()
                            .map(Some)
                            .map_err(|_| Error::MalformedCsv(format!("row {}: bad number {cell:?}", i + 1)))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::MalformedCsv("no data rows".into()));
        }
        if rows.iter().any(|r| r[0].is_none()) {
            return Err(Error::MalformedCsv("sweep column has empty cells".into()));
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, idx: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r[idx]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::f64::consts::PI] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn parse_rejects_empty_and_garbage() {
        assert!(matches!(Table::parse("x,y\n"), Err(Error::MalformedCsv(_))));
        assert!(matches!(Table::parse(""), Err(Error::MalformedCsv(_))));
        assert!(matches!(Table::parse("x,y\n1,abc\n"), Err(Error::MalformedCsv(_))));
        assert!(matches!(Table::parse("x,y\n1,2,3\n"), Err(Error::MalformedCsv(_))));
        let t = Table::parse("x,y\n1,\n2,3.5\n").unwrap();
        assert_eq!(t.column(1), vec![None, Some(3.5)]);
    }
}
