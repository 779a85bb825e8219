use std::io;

use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{CompactFormatter, Formatter};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct Scalar {
    pub name: String,
    pub value: f64,
    pub expression: String,
    pub normalization: String,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct Series {
    pub name: String,
    pub expression: String,
    pub normalization: String,
    pub indices: Vec<u64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct Label {
    pub name: String,
    pub value: String,
}

/// Everything an experiment produces. Field order is fixed and nothing in
/// it depends on the time or the machine.
#[derive(Debug, Clone, PartialEq, Default, SerializeDerive, Deserialize)]
pub struct Report {
    pub kind: String,
    /// The experiment parameters as given.
    pub inputs: serde_json::Value,
    pub labels: Vec<Label>,
    pub scalars: Vec<Scalar>,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(kind: &str, inputs: serde_json::Value) -> Self {
        Self {
            kind: kind.to_string(),
            inputs,
            ..Self::default()
        }
    }

    pub fn label(&mut self, name: &str, value: impl Into<String>) {
        self.labels.push(Label {
            name: name.into(),
            value: value.into(),
        });
    }

    pub fn scalar(&mut self, name: &str, value: f64, expression: &str, normalization: &str) {
        self.scalars.push(Scalar {
            name: name.into(),
            value,
            expression: expression.into(),
            normalization: normalization.into(),
        });
    }

    pub fn series(&mut self, name: &str, expression: &str, normalization: &str, indices: Vec<u64>, values: Vec<f64>) {
        debug_assert_eq!(indices.len(), values.len());
        self.series.push(Series {
            name: name.into(),
            expression: expression.into(),
            normalization: normalization.into(),
            indices,
            values,
        });
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

/// Compact JSON with every float written as `{:.16e}` (17 significant
/// digits, exact round trip).
struct SciFormatter(CompactFormatter);

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter(CompactFormatter));
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Compute(format!("serializing report: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

/// CSV with header `series,index,value,expression,normalization`: one row per
/// sequence index, scalars and labels with an empty index.
pub fn to_csv_bytes(report: &Report) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Compute(format!("writing csv: {e}"));
    w.write_record(["series", "index", "value", "expression", "normalization"]).map_err(err)?;
    for l in &report.labels {
        w.write_record([l.name.as_str(), "", &l.value, "label", "none"]).map_err(err)?;
    }
    for s in &report.scalars {
        w.write_record([s.name.as_str(), "", &format!("{:.16e}", s.value), &s.expression, &s.normalization])
            .map_err(err)?;
    }
    for s in &report.series {
        for (i, v) in s.indices.iter().zip(&s.values) {
            w.write_record([s.name.as_str(), &i.to_string(), &format!("{v:.16e}"), &s.expression, &s.normalization])
                .map_err(err)?;
        }
    }
    w.into_inner().map_err(|e| CliError::Compute(format!("writing csv: {e}")))
}

pub fn emit_report(report: &Report, format: crate::config::Format) -> Result<Vec<u8>, CliError> {
    match format {
        crate::config::Format::Json => to_json_bytes(report),
        crate::config::Format::Csv => to_csv_bytes(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_digits() {
        let s = String::from_utf8(to_json_bytes(&vec![0.1f64, -2.0, 1e300]).unwrap()).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,-2.0000000000000000e0,1.0000000000000001e300]\n");
    }
}
