//! Result files: CSV with ten significant digits or JSON, written atomically.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{Error, Result};
use crate::optimize::{SampleRow, SearchRecord, SweepGrid, TemperaturePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// From the file extension; anything but `.json` is CSV.
    pub fn from_path(path: impl AsRef<Path>) -> Self {
        match path.as_ref().extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Missing,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Float(v) => f.write_str(&format_significant(*v, 10)),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Missing => Ok(()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

/// A record with a flat CSV form. `header` must be the same for every record
/// of a file.
pub trait Tabular {
    fn header(&self) -> Vec<String>;
    fn row(&self) -> Vec<Cell>;
}

/// `v` with `digits` significant digits, shortest form that keeps them.
pub fn format_significant(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let exponent = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exponent) {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // rounding may carry into a new leading digit; the text is still exact to `digits`
        trim_fraction(s)
    } else {
        let s = format!("{:.*e}", digits - 1, v);
        let (mantissa, exp) = s.split_once('e').expect("exponent form");
        format!("{}e{}", trim_fraction(mantissa.to_owned()), exp)
    }
}

fn trim_fraction(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_owned()
}

/// Writes to a temporary file beside `path` and renames it into place only
/// when `body` succeeds. On failure the previous file, if any, is untouched.
pub fn atomic_write<F>(path: impl AsRef<Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    body(&mut tmp)?;
    tmp.as_file_mut().flush()?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Surfaces I/O failures inside the CSV writer as [`Error::Io`].
fn csv_error(e: csv::Error) -> Error {
    if !e.is_io_error() {
        return Error::Csv(e);
    }
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        _ => unreachable!("is_io_error checked"),
    }
}

pub fn write_csv<T: Tabular>(out: &mut dyn Write, records: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header = records.first().map(Tabular::header).unwrap_or_default();
    w.write_record(&header).map_err(csv_error)?;
    for r in records {
        let row = r.row();
        if row.len() != header.len() {
            return Err(Error::Format(format!("row has {} cells, header has {}", row.len(), header.len())));
        }
        w.write_record(row.iter().map(Cell::to_string)).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| if e.is_io() { Error::Io(e.into()) } else { Error::Json(e) })?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes `records` to `path`. An empty slice is an error and leaves no file.
pub fn write_results<T: Tabular + Serialize>(path: impl AsRef<Path>, records: &[T], format: OutputFormat) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Parameter("no records to write".into()));
    }
    atomic_write(path, |out| match format {
        OutputFormat::Csv => write_csv(out, records),
        OutputFormat::Json => write_json(out, records),
    })
}

fn rate_names(n: usize) -> impl Iterator<Item = String> {
    (0..n).map(|k| format!("gamma_{}", k + 3))
}

impl Tabular for SearchRecord {
    fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = rate_names(self.parameters.rates.len()).collect();
        h.extend(
            [
                "omega8",
                "h28",
                "objective",
                "seed",
                "evaluations",
                "failed_evaluations",
                "provenance",
                "sample_index",
                "boundary_contacts",
            ]
            .map(String::from),
        );
        h
    }

    fn row(&self) -> Vec<Cell> {
        let mut r: Vec<Cell> = self.parameters.rates.iter().map(|&v| Cell::Float(v)).collect();
        r.push(self.parameters.sink_energy.into());
        r.push(self.parameters.sink_coupling.into());
        r.push(self.objective.into());
        r.push(self.seed.into());
        r.push(self.evaluations.into());
        r.push(self.failed_evaluations.into());
        r.push(match self.provenance {
            crate::optimize::Provenance::Sampled => "sampled".into(),
            crate::optimize::Provenance::Refined => "refined".into(),
        });
        r.push(self.sample_index.map_or(Cell::Missing, Cell::from));
        r.push(self.boundary_contacts.join(";").into());
        r
    }
}

impl Tabular for SampleRow {
    fn header(&self) -> Vec<String> {
        let mut h = vec!["index".to_owned()];
        h.extend(rate_names(self.parameters.rates.len()));
        h.extend(["omega8", "h28", "objective"].map(String::from));
        h
    }

    fn row(&self) -> Vec<Cell> {
        let mut r = vec![Cell::from(self.index)];
        r.extend(self.parameters.rates.iter().map(|&v| Cell::Float(v)));
        r.push(self.parameters.sink_energy.into());
        r.push(self.parameters.sink_coupling.into());
        r.push(self.objective.into());
        r
    }
}

impl Tabular for TemperaturePoint {
    fn header(&self) -> Vec<String> {
        vec!["temperature".into(), "overlap".into()]
    }

    fn row(&self) -> Vec<Cell> {
        vec![self.temperature.into(), self.overlap.into()]
    }
}

/// One cell of a [`SweepGrid`] in long form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub h28: f64,
    pub omega8: f64,
    pub overlap: Option<f64>,
}

impl Tabular for SweepCell {
    fn header(&self) -> Vec<String> {
        vec!["h28".into(), "omega8".into(), "overlap".into()]
    }

    fn row(&self) -> Vec<Cell> {
        vec![self.h28.into(), self.omega8.into(), self.overlap.into()]
    }
}

impl SweepGrid {
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::with_capacity(self.values.len());
        for (i, &h28) in self.h28.iter().enumerate() {
            for (j, &omega8) in self.omega8.iter().enumerate() {
                out.push(SweepCell { h28, omega8, overlap: self.get(i, j) });
            }
        }
        out
    }
}
