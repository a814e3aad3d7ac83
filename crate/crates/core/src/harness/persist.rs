//! CSV output. Floats are written as `{:.16e}` (17 significant digits), which
//! round-trips every `f64` exactly.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::integrators::{Scheme, SchemeKind};
use crate::step::StepSize;

use super::ensemble::{cell_order, record_order};
use super::{Aggregate, ConvergenceRecord};

pub const RECORD_HEADER: [&str; 7] = [
    "alpha",
    "dt",
    "scheme",
    "lambda",
    "corrected",
    "realization",
    "l2_error",
];
pub const AGGREGATE_HEADER: [&str; 8] = [
    "alpha",
    "dt",
    "scheme",
    "lambda",
    "corrected",
    "mean_error",
    "std_error",
    "n",
];

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// `runs/fig1.csv` becomes `runs/fig1.summary.csv`.
pub fn summary_path(members: &Path) -> PathBuf {
    let stem = members
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    members.with_file_name(format!("{stem}.summary.csv"))
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse {
            path: path.to_path_buf(),
            reason: format!("{other:?}"),
        },
    }
}

fn scheme_fields(s: &Scheme) -> [String; 3] {
    [
        s.kind.name().to_string(),
        float(s.lambda),
        s.corrected.to_string(),
    ]
}

/// Writes member rows sorted by `(alpha, dt, scheme, realization)`.
pub fn write_records(records: &[ConvergenceRecord], path: &Path) -> Result<()> {
    let mut sorted = records.to_vec();
    sorted.sort_by(record_order);
    let mut w = writer(path)?;
    w.write_record(RECORD_HEADER)
        .map_err(|e| csv_error(path, e))?;
    for r in &sorted {
        let [kind, lambda, corrected] = scheme_fields(&r.scheme);
        w.write_record([
            float(r.alpha),
            float(r.step.dt()),
            kind,
            lambda,
            corrected,
            r.realization.to_string(),
            float(r.l2_error),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_aggregates(aggregates: &[Aggregate], path: &Path) -> Result<()> {
    let mut sorted = aggregates.to_vec();
    sorted.sort_by(|a, b| cell_order((a.alpha, a.step, &a.scheme), (b.alpha, b.step, &b.scheme)));
    let mut w = writer(path)?;
    w.write_record(AGGREGATE_HEADER)
        .map_err(|e| csv_error(path, e))?;
    for a in &sorted {
        let [kind, lambda, corrected] = scheme_fields(&a.scheme);
        w.write_record([
            float(a.alpha),
            float(a.step.dt()),
            kind,
            lambda,
            corrected,
            float(a.mean_error),
            float(a.std_error),
            a.n.to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

struct Row<'a> {
    path: &'a Path,
    line: u64,
    record: csv::StringRecord,
}

impl Row<'_> {
    fn get<T: std::str::FromStr>(&self, i: usize, name: &str) -> Result<T> {
        self.record
            .get(i)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse {
                path: self.path.to_path_buf(),
                reason: format!("line {}: bad `{name}`", self.line),
            })
    }

    fn head(&self) -> Result<(f64, StepSize, Scheme)> {
        let alpha = self.get(0, "alpha")?;
        let step = StepSize::from_dt(self.get(1, "dt")?).map_err(|e| self.wrap(e))?;
        let kind: SchemeKind = self
            .get::<String>(2, "scheme")?
            .parse()
            .map_err(|e| self.wrap(e))?;
        let scheme = Scheme {
            kind,
            lambda: self.get(3, "lambda")?,
            corrected: self.get(4, "corrected")?,
        };
        Ok((alpha, step, scheme))
    }

    fn wrap(&self, e: Error) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            reason: format!("line {}: {e}", self.line),
        }
    }
}

fn read_rows<'a>(path: &'a Path, header: &[&str]) -> Result<Vec<Row<'a>>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let found = reader.headers().map_err(|e| csv_error(path, e))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            reason: format!(
                "unexpected header `{}`",
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    reader
        .records()
        .map(|r| {
            let record = r.map_err(|e| csv_error(path, e))?;
            let line = record.position().map_or(0, |p| p.line());
            Ok(Row { path, line, record })
        })
        .collect()
}

pub fn read_records(path: &Path) -> Result<Vec<ConvergenceRecord>> {
    read_rows(path, &RECORD_HEADER)?
        .iter()
        .map(|row| {
            let (alpha, step, scheme) = row.head()?;
            Ok(ConvergenceRecord {
                alpha,
                step,
                scheme,
                realization: row.get(5, "realization")?,
                l2_error: row.get(6, "l2_error")?,
            })
        })
        .collect()
}

pub fn read_aggregates(path: &Path) -> Result<Vec<Aggregate>> {
    read_rows(path, &AGGREGATE_HEADER)?
        .iter()
        .map(|row| {
            let (alpha, step, scheme) = row.head()?;
            Ok(Aggregate {
                alpha,
                step,
                scheme,
                mean_error: row.get(5, "mean_error")?,
                std_error: row.get(6, "std_error")?,
                n: row.get(7, "n")?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(realization: usize, err: f64) -> ConvergenceRecord {
        ConvergenceRecord {
            alpha: 1e-6,
            step: StepSize::per_unit(22).unwrap(),
            scheme: Scheme::decentered(0.25, true).unwrap(),
            realization,
            l2_error: err,
        }
    }

    #[test]
    fn empty_list_gives_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        write_records(&[], &path).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "alpha,dt,scheme,lambda,corrected,realization,l2_error\n"
        );
        assert!(read_records(&path).unwrap().is_empty());
    }

    #[test]
    fn one_record_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/one.csv");
        let r = record(3, 0.1 + 0.2);
        write_records(&[r], &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "9.9999999999999995e-7,4.5454545454545456e-2,decentered,2.5000000000000000e-1,true,3,3.0000000000000004e-1"
        );
        assert_eq!(read_records(&path).unwrap(), vec![r]);
    }

    #[test]
    fn aggregates_round_trip_and_sort() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        let mut records = vec![record(1, 0.5), record(0, 0.25), record(2, 1.0 / 3.0)];
        let aggs = super::super::aggregate(&mut records);
        write_aggregates(&aggs, &path).unwrap();
        assert_eq!(read_aggregates(&path).unwrap(), aggs);
    }

    #[test]
    fn wrong_header_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_records(&path), Err(Error::Parse { .. })));
        assert!(matches!(
            read_records(&dir.path().join("missing.csv")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn summary_path_naming() {
        assert_eq!(
            summary_path(Path::new("runs/fig1.csv")),
            PathBuf::from("runs/fig1.summary.csv")
        );
    }
}
