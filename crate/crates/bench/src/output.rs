//! Result rows on disk: CSV with a header, or JSON lines.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;
use wbtree::MetricsRecord;

/// CSV column order; identical to the field order of [`MetricsRecord`].
pub const COLUMNS: [&str; 20] = [
    "experiment",
    "tree_variant",
    "params",
    "distribution",
    "base_size",
    "operation",
    "repetition",
    "seed",
    "ops",
    "elapsed_ns",
    "timing_repetitions",
    "mean_ns_per_op",
    "stddev_ns_per_op",
    "normalized_time",
    "rotation_count",
    "rotated_weight_total",
    "violation_count",
    "tree_size",
    "average_depth",
    "absent_deletes",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(format!("unknown format `{other}` (csv, jsonl)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum OutputError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub fn write_rows<W: Write>(
    rows: &[MetricsRecord],
    format: Format,
    out: W,
) -> Result<(), OutputError> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(out);
            w.write_record(COLUMNS)?;
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let mut out = out;
            for row in rows {
                serde_json::to_writer(&mut out, row)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

/// Writes `rows` to `path`, or to stdout when `path` is `-`.
pub fn emit_results(
    rows: &[MetricsRecord],
    format: Format,
    path: &Path,
) -> Result<(), OutputError> {
    if path.as_os_str() == "-" {
        write_rows(rows, format, io::stdout().lock())
    } else {
        write_rows(rows, format, BufWriter::new(File::create(path)?))
    }
}

pub fn read_csv(path: &Path) -> Result<Vec<MetricsRecord>, OutputError> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<Result<_, _>>()?;
    Ok(rows)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<MetricsRecord>, OutputError> {
    let text = std::fs::read_to_string(path)?;
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect::<Result<_, _>>()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(i: u64) -> MetricsRecord {
        MetricsRecord {
            experiment: "insert-pct".into(),
            tree_variant: "top-down".into(),
            params: "custom:5/2:3/2".into(),
            distribution: "zipf".into(),
            base_size: 1000,
            operation: "insert".into(),
            repetition: i,
            seed: u64::MAX - i,
            ops: 50,
            elapsed_ns: 123_456,
            timing_repetitions: 3,
            mean_ns_per_op: 0.1 + i as f64 / 3.0,
            stddev_ns_per_op: 1e-7,
            normalized_time: i.is_multiple_of(2).then_some(1.0 / 3.0),
            rotation_count: 7,
            rotated_weight_total: 99,
            violation_count: 0,
            tree_size: 1050,
            average_depth: 9.123_456_789,
            absent_deletes: 1,
        }
    }

    #[test]
    fn header_matches_field_order() {
        let mut buf = Vec::new();
        let mut w = csv::Writer::from_writer(&mut buf);
        w.serialize(row(0)).unwrap();
        drop(w);
        let header = String::from_utf8(buf)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        assert_eq!(header, COLUMNS.join(","));
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        write_rows(&[], Format::Csv, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("{}\n", COLUMNS.join(","))
        );
    }

    #[test]
    fn csv_and_jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rows: Vec<_> = (0..5).map(row).collect();
        let csv_path = dir.path().join("r.csv");
        emit_results(&rows, Format::Csv, &csv_path).unwrap();
        assert_eq!(read_csv(&csv_path).unwrap(), rows);
        let json_path = dir.path().join("r.jsonl");
        emit_results(&rows, Format::Jsonl, &json_path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&json_path).unwrap().lines().count(),
            5
        );
        assert_eq!(read_jsonl(&json_path).unwrap(), rows);
    }
}
