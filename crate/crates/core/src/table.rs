//! Rectangular result tables and their CSV / JSON encodings.
//!
//! Numbers are written with 17 significant digits so that every value
//! round-trips exactly. Non-finite values are written as `inf`, `-inf` or
//! `nan`, both in CSV cells and as JSON strings.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::EmitError;
use crate::metrics::{RoutingReport, SpectrumRecord};

/// Version tag of the JSON layout.
pub const SCHEMA: &str = "omniport.table/1";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// A float that serializes non-finite values as strings.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&format_cell(self.0))
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            F(f64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::F(v) => Ok(Num(v)),
            Raw::S(s) => parse_cell(&s)
                .map(Num)
                .ok_or_else(|| serde::de::Error::custom(format!("bad number `{s}`"))),
        }
    }
}

/// Text form of one cell.
pub fn format_cell(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn parse_cell(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

/// One swept (or scanned) coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisInfo {
    pub knob: String,
    pub label: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub scenario_hash: String,
    pub axes: Vec<AxisInfo>,
    pub columns: Vec<String>,
    /// Row-major records, one value per column.
    pub records: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonTable {
    schema: String,
    scenario_hash: String,
    axes: Vec<AxisInfo>,
    columns: Vec<String>,
    records: Vec<Vec<Num>>,
}

impl Table {
    pub fn check(&self) -> Result<(), EmitError> {
        for (row, r) in self.records.iter().enumerate() {
            if r.len() != self.columns.len() {
                return Err(EmitError::Ragged {
                    row,
                    found: r.len(),
                    expected: self.columns.len(),
                });
            }
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.records.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> Result<String, EmitError> {
        self.check()?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.records {
            w.write_record(r.iter().map(|v| format_cell(*v)))?;
        }
        let bytes = w.into_inner().map_err(|e| EmitError::Io {
            path: "<buffer>".into(),
            source: e.into_error(),
        })?;
        Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
    }

    pub fn to_json(&self) -> Result<String, EmitError> {
        self.check()?;
        let doc = JsonTable {
            schema: SCHEMA.into(),
            scenario_hash: self.scenario_hash.clone(),
            axes: self.axes.clone(),
            columns: self.columns.clone(),
            records: self
                .records
                .iter()
                .map(|r| r.iter().copied().map(Num).collect())
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, EmitError> {
        let doc: JsonTable = serde_json::from_str(text)?;
        if doc.schema != SCHEMA {
            return Err(EmitError::Json(serde::de::Error::custom(format!(
                "unsupported schema `{}`",
                doc.schema
            ))));
        }
        let t = Table {
            scenario_hash: doc.scenario_hash,
            axes: doc.axes,
            columns: doc.columns,
            records: doc
                .records
                .into_iter()
                .map(|r| r.into_iter().map(|n| n.0).collect())
                .collect(),
        };
        t.check()?;
        Ok(t)
    }

    pub fn render(&self, format: Format) -> Result<String, EmitError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Write to `path`, or to standard output when `path` is `None`.
    pub fn write(&self, path: Option<&Path>, format: Format) -> Result<(), EmitError> {
        let text = self.render(format)?;
        match path {
            Some(p) => std::fs::write(p, text).map_err(|source| EmitError::Io {
                path: p.display().to_string(),
                source,
            }),
            None => std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|source| EmitError::Io {
                    path: "<stdout>".into(),
                    source,
                }),
        }
    }
}

fn xi_axis(values: Vec<f64>) -> AxisInfo {
    AxisInfo {
        knob: "xi".into(),
        label: "xi".into(),
        values,
    }
}

fn port_columns(n: usize) -> impl Iterator<Item = String> {
    (1..=n).map(|j| format!("S{j}"))
}

/// `xi, [T_fwd, T_bwd, I, log10_I,] S1..SN, b_abs2`.
pub fn spectrum_table(scenario_hash: &str, records: &[SpectrumRecord]) -> Table {
    let n = records.first().map_or(0, |r| r.s.len());
    let has_t = records.first().is_some_and(|r| r.transmission.is_some());
    let mut columns = vec!["xi".to_owned()];
    if has_t {
        columns.extend(["T_fwd", "T_bwd", "I", "log10_I"].map(String::from));
    }
    columns.extend(port_columns(n));
    columns.push("b_abs2".into());
    let rows = records
        .iter()
        .map(|r| {
            let mut row = vec![r.xi];
            if let Some(t) = r.transmission {
                let i = t.isolation.value();
                row.extend([t.forward, t.backward, i, i.log10()]);
            }
            row.extend(&r.s);
            row.push(r.b_abs2);
            row
        })
        .collect();
    Table {
        scenario_hash: scenario_hash.into(),
        axes: vec![xi_axis(records.iter().map(|r| r.xi).collect())],
        columns,
        records: rows,
    }
}

/// `xi, T_fwd, T_bwd, I, log10_I` for transmission records.
pub fn isolation_table(scenario_hash: &str, records: &[SpectrumRecord]) -> Table {
    let full = spectrum_table(scenario_hash, records);
    let keep = ["xi", "T_fwd", "T_bwd", "I", "log10_I"];
    let idx: Vec<usize> = keep
        .iter()
        .filter_map(|k| full.columns.iter().position(|c| c == k))
        .collect();
    Table {
        columns: idx.iter().map(|&i| full.columns[i].clone()).collect(),
        records: full
            .records
            .iter()
            .map(|r| idx.iter().map(|&i| r[i]).collect())
            .collect(),
        ..full
    }
}

/// `xi, S1..SN, b_abs2` from a routing report.
pub fn routing_table(scenario_hash: &str, report: &RoutingReport) -> Table {
    let n = report.at_zero.s.len();
    let mut columns = vec!["xi".to_owned()];
    columns.extend(port_columns(n));
    columns.push("b_abs2".into());
    let records = report
        .points
        .iter()
        .map(|p| {
            let mut row = vec![p.xi];
            row.extend(&p.s);
            row.push(p.b_abs2);
            row
        })
        .collect();
    Table {
        scenario_hash: scenario_hash.into(),
        axes: vec![xi_axis(report.points.iter().map(|p| p.xi).collect())],
        columns,
        records,
    }
}
