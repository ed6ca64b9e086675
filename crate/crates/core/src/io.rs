//! CSV readers for sampled loops (`t,x,y,z`) and time series (`t,value`).

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::Axis;
use crate::numerics::Vec3;
use crate::phases::LoopPath;
use crate::series::TimeSeries;

/// Rows of `expected.len()` numbers under the exact header `expected`.
fn read_rows<R: Read>(reader: R, expected: &[&str]) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let header = csv.headers().map_err(|e| parse_error(1, e))?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names != expected {
        return Err(Error::Parse {
            line: header.position().map_or(1, |p| p.line() as usize),
            msg: format!("expected header `{}`, found `{}`", expected.join(","), names.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != expected.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, found {}", expected.len(), record.len()),
            });
        }
        let mut values = Vec::with_capacity(expected.len());
        for (field, name) in record.iter().zip(expected) {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("column `{name}`: `{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { line, msg: format!("column `{name}` is not finite") });
            }
            values.push(v);
        }
        rows.push((line, values));
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 1, msg: "no data rows".into() });
    }
    Ok(rows)
}

fn parse_error(line: usize, e: csv::Error) -> Error {
    Error::Parse { line, msg: e.to_string() }
}

fn check_increasing(rows: &[(usize, Vec<f64>)]) -> Result<()> {
    for w in rows.windows(2) {
        if w[1].1[0] <= w[0].1[0] {
            return Err(Error::Parse {
                line: w[1].0,
                msg: format!("time {} does not increase past {}", w[1].1[0], w[0].1[0]),
            });
        }
    }
    Ok(())
}

/// A closed loop sampled as `t,x,y,z`; the last row must repeat the first
/// position. The winding about `axis` is read off the samples.
pub fn read_path_csv<R: Read>(reader: R, axis: Axis) -> Result<LoopPath> {
    let rows = read_rows(reader, &["t", "x", "y", "z"])?;
    check_increasing(&rows)?;
    let times = rows.iter().map(|(_, r)| r[0]).collect();
    let points = rows.iter().map(|(_, r)| Vec3::new(r[1], r[2], r[3])).collect();
    LoopPath::detect(points, times, axis)
}

pub fn read_path_file(path: impl AsRef<Path>, axis: Axis) -> Result<LoopPath> {
    read_path_csv(File::open(path)?, axis)
}

/// A time series sampled as `t,value`.
pub fn read_series_csv<R: Read>(reader: R) -> Result<TimeSeries> {
    let rows = read_rows(reader, &["t", "value"])?;
    check_increasing(&rows)?;
    let (t, v) = rows.into_iter().map(|(_, r)| (r[0], r[1])).unzip();
    TimeSeries::new(t, v)
}

pub fn read_series_file(path: impl AsRef<Path>) -> Result<TimeSeries> {
    read_series_csv(File::open(path)?)
}
