use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use momentflow::diagnostics::LayerBound;
use momentflow::oracle::MetricReport;
use momentflow::{Error, Gaussian, Result};
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;
use serde_json::{json, Value};

pub const METHODS: [&str; 6] = ["pseudo-true", "analytic", "mean-field", "linear", "unscented95", "unscented02"];

pub const COLUMNS: [&str; 8] = [
    "method",
    "mean",
    "variance",
    "wasserstein",
    "wasserstein_se",
    "kl_y1_to_m",
    "kl_m_to_y1",
    "kl_se",
];

/// One method's row of a benchmark table.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub method: String,
    pub mean: f64,
    pub variance: f64,
    pub wasserstein: f64,
    pub wasserstein_se: f64,
    pub kl_y1_to_m: f64,
    pub kl_m_to_y1: f64,
    pub kl_se: f64,
}

impl Row {
    pub fn from_report(method: &str, report: &MetricReport) -> Self {
        Self {
            method: method.to_string(),
            mean: report.moments.mean()[0],
            variance: report.moments.cov()[(0, 0)],
            wasserstein: report.wasserstein.mean,
            wasserstein_se: report.wasserstein.se,
            kl_y1_to_m: report.kl_y1_to_m.mean,
            kl_m_to_y1: report.kl_m_to_y1.mean,
            kl_se: report.kl_y1_to_m.se,
        }
    }

    /// A method that failed numerically scores as infinitely far away.
    pub fn failed(method: &str) -> Self {
        let inf = f64::INFINITY;
        Self {
            method: method.to_string(),
            mean: f64::NAN,
            variance: f64::NAN,
            wasserstein: inf,
            wasserstein_se: inf,
            kl_y1_to_m: inf,
            kl_m_to_y1: inf,
            kl_se: inf,
        }
    }

    fn values(&self) -> [f64; 7] {
        [
            self.mean,
            self.variance,
            self.wasserstein,
            self.wasserstein_se,
            self.kl_y1_to_m,
            self.kl_m_to_y1,
            self.kl_se,
        ]
    }
}

impl Serialize for Row {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Row", COLUMNS.len())?;
        st.serialize_field("method", &self.method)?;
        for (name, v) in COLUMNS[1..].iter().zip(self.values()) {
            st.serialize_field(name, &number(v))?;
        }
        st.end()
    }
}

/// Shortest round-trip text; non-finite values as `inf`, `-inf` or `nan`.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}

/// JSON has no infinity, so non-finite values become strings.
pub fn number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::String(format_f64(v))
    }
}

pub fn parse_f64(text: &str) -> Result<f64> {
    match text.trim() {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        t => t.parse().map_err(|_| Error::InvalidArgument(format!("'{t}' is not a number"))),
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for r in rows {
        w.write_record(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_rows(path: &Path, rows: &[Row], json_meta: Value, csv: bool) -> Result<()> {
    if csv {
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                std::iter::once(r.method.clone())
                    .chain(r.values().into_iter().map(format_f64))
                    .collect()
            })
            .collect();
        write_csv(path, &COLUMNS, &table)
    } else {
        write_json(path, &json!({ "benchmark": json_meta, "rows": rows }))
    }
}

pub fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    let header = r.headers().map_err(csv_error)?.clone();
    if header.iter().collect::<Vec<_>>() != COLUMNS {
        return Err(Error::InvalidArgument(format!("{}: not a benchmark report", path.display())));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let v: Vec<f64> = (1..COLUMNS.len()).map(|i| parse_f64(&rec[i])).collect::<Result<_>>()?;
        rows.push(Row {
            method: rec[0].to_string(),
            mean: v[0],
            variance: v[1],
            wasserstein: v[2],
            wasserstein_se: v[3],
            kl_y1_to_m: v[4],
            kl_m_to_y1: v[5],
            kl_se: v[6],
        });
    }
    Ok(rows)
}

pub fn gaussian_json(layer: usize, g: &Gaussian) -> Value {
    let rows: Vec<Vec<Value>> = g.cov().row_iter().map(|r| r.iter().map(|&v| number(v)).collect()).collect();
    json!({
        "layer": layer,
        "mean": g.mean().iter().map(|&v| number(v)).collect::<Vec<_>>(),
        "variance": g.cov().diagonal().iter().map(|&v| number(v)).collect::<Vec<_>>(),
        "cov": rows,
    })
}

pub fn write_bounds(path: &Path, bounds: &[LayerBound]) -> Result<()> {
    let rows: Vec<Vec<String>> = bounds
        .iter()
        .enumerate()
        .map(|(i, b)| {
            vec![
                i.to_string(),
                format_f64(b.lipschitz),
                format_f64(b.nonnormality),
                format_f64(b.cumulative),
                b.singular.to_string(),
            ]
        })
        .collect();
    write_csv(path, &["layer", "lipschitz", "nonnormality", "cumulative", "singular"], &rows)
}

/// Sample quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi || frac == 0.0 || sorted[lo] == sorted[hi] {
        return sorted[lo];
    }
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}
