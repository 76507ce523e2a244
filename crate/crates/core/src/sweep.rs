//! One- and two-dimensional parameter sweeps over scenario documents.
//!
//! An axis names a knob, either `xi` (the evaluation detuning) or a dotted
//! path to a numeric field of the document such as `network.ports.3.G_mod`
//! or `signals.eta`. Every grid point is an independent evaluation of a
//! modified document, so the points run in parallel and the table is the
//! same for any thread count. Records are row-major: the last axis varies
//! fastest.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{MetricsError, ScenarioError, SweepError};
use crate::metrics::{spectrum, SpectrumRecord};
use crate::model::DetuningGrid;
use crate::scenario::ScenarioDocument;
use crate::table::{AxisInfo, Table};

/// Knob name for the signal detuning.
pub const XI_KNOB: &str = "xi";
pub const MAX_AXES: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub knob: String,
    /// Column name in the output table.
    pub label: String,
    pub values: Vec<f64>,
}

/// A scalar evaluated at every sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    TFwd,
    TBwd,
    Isolation,
    Log10Isolation,
    /// Normalized output energy of a port (0-based).
    S(usize),
    BAbs2,
    /// Maxima over the document's detuning grid.
    MaxTFwd,
    MaxTBwd,
    MaxBAbs2,
}

impl Metric {
    fn over_grid(self) -> bool {
        matches!(self, Metric::MaxTFwd | Metric::MaxTBwd | Metric::MaxBAbs2)
    }

    fn of(self, r: &SpectrumRecord) -> Result<f64, SweepError> {
        let t = || r.transmission.ok_or(MetricsError::NoTransmission);
        Ok(match self {
            Metric::TFwd | Metric::MaxTFwd => t()?.forward,
            Metric::TBwd | Metric::MaxTBwd => t()?.backward,
            Metric::Isolation => t()?.isolation.value(),
            Metric::Log10Isolation => t()?.isolation.value().log10(),
            Metric::S(j) => {
                *r.s.get(j)
                    .ok_or_else(|| SweepError::UnknownMetric(self.to_string()))?
            }
            Metric::BAbs2 | Metric::MaxBAbs2 => r.b_abs2,
        })
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::TFwd => f.write_str("T_fwd"),
            Metric::TBwd => f.write_str("T_bwd"),
            Metric::Isolation => f.write_str("I"),
            Metric::Log10Isolation => f.write_str("log10_I"),
            Metric::S(j) => write!(f, "S{}", j + 1),
            Metric::BAbs2 => f.write_str("b_abs2"),
            Metric::MaxTFwd => f.write_str("max_T_fwd"),
            Metric::MaxTBwd => f.write_str("max_T_bwd"),
            Metric::MaxBAbs2 => f.write_str("max_b_abs2"),
        }
    }
}

impl FromStr for Metric {
    type Err = SweepError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "T_fwd" => Metric::TFwd,
            "T_bwd" => Metric::TBwd,
            "I" => Metric::Isolation,
            "log10_I" => Metric::Log10Isolation,
            "b_abs2" => Metric::BAbs2,
            "max_T_fwd" => Metric::MaxTFwd,
            "max_T_bwd" => Metric::MaxTBwd,
            "max_b_abs2" => Metric::MaxBAbs2,
            _ => match s.strip_prefix('S').map(str::parse::<usize>) {
                Some(Ok(j)) if j >= 1 => Metric::S(j - 1),
                _ => return Err(SweepError::UnknownMetric(s.to_owned())),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    /// Detuning for point metrics when no axis sweeps `xi`.
    pub xi: f64,
    /// Grid for the `max_*` metrics.
    pub grid: Option<DetuningGrid>,
    pub parallel: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            xi: 0.0,
            grid: None,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axes: Vec<SweepAxis>,
    pub metrics: Vec<Metric>,
    /// Row-major; one value per metric.
    pub values: Vec<Vec<f64>>,
}

impl SweepTable {
    /// Axis coordinates of record `k`.
    pub fn coordinates(&self, k: usize) -> Vec<f64> {
        let mut rest = k;
        let mut out = vec![0.0; self.axes.len()];
        for (i, a) in self.axes.iter().enumerate().rev() {
            out[i] = a.values[rest % a.values.len()];
            rest /= a.values.len();
        }
        out
    }

    /// Flat table with the axis columns repeated on every row.
    pub fn to_table(&self, scenario_hash: &str) -> Table {
        let mut columns: Vec<String> = self.axes.iter().map(|a| a.label.clone()).collect();
        columns.extend(self.metrics.iter().map(|m| m.to_string()));
        let records = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let mut row = self.coordinates(k);
                row.extend(v);
                row
            })
            .collect();
        Table {
            scenario_hash: scenario_hash.into(),
            axes: self
                .axes
                .iter()
                .map(|a| AxisInfo {
                    knob: a.knob.clone(),
                    label: a.label.clone(),
                    values: a.values.clone(),
                })
                .collect(),
            columns,
            records,
        }
    }
}

fn strictly_monotone(v: &[f64]) -> bool {
    !v.is_empty()
        && v.iter().all(|x| x.is_finite())
        && (v.windows(2).all(|w| w[0] < w[1]) || v.windows(2).all(|w| w[0] > w[1]))
}

/// Check axes against the document before any evaluation.
pub fn check_axes(doc: &ScenarioDocument, axes: &[SweepAxis]) -> Result<(), SweepError> {
    if axes.is_empty() || axes.len() > MAX_AXES {
        return Err(SweepError::TooManyAxes(axes.len()));
    }
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].iter().any(|b| b.knob == a.knob) {
            return Err(SweepError::DuplicateKnob(a.knob.clone()));
        }
        if !strictly_monotone(&a.values) {
            return Err(SweepError::NonMonotone(a.knob.clone()));
        }
        if a.knob != XI_KNOB {
            doc.with_knob(&a.knob, a.values[0])?;
        }
    }
    Ok(())
}

/// Evaluate `metrics` at every point of the axes' Cartesian product.
pub fn run_sweep(
    doc: &ScenarioDocument,
    axes: &[SweepAxis],
    metrics: &[Metric],
    opts: &SweepOptions,
) -> Result<SweepTable, SweepError> {
    check_axes(doc, axes)?;
    if metrics.is_empty() {
        return Err(SweepError::UnknownMetric(String::new()));
    }
    if metrics.iter().any(|m| m.over_grid()) && opts.grid.is_none() {
        return Err(ScenarioError::Invalid("max_* metrics need a detuning grid".into()).into());
    }
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    let table = SweepTable {
        axes: axes.to_vec(),
        metrics: metrics.to_vec(),
        values: Vec::new(),
    };
    let eval = |k: usize| -> Result<Vec<f64>, SweepError> {
        let coords = table.coordinates(k);
        evaluate_point(doc, axes, &coords, metrics, opts).map_err(|e| SweepError::Point {
            at: axes
                .iter()
                .zip(&coords)
                .map(|(a, v)| format!("{} = {v}", a.label))
                .collect::<Vec<_>>()
                .join(", "),
            source: Box::new(e),
        })
    };
    let values = if opts.parallel {
        (0..total)
            .into_par_iter()
            .map(eval)
            .collect::<Result<_, _>>()?
    } else {
        (0..total).map(eval).collect::<Result<_, _>>()?
    };
    Ok(SweepTable { values, ..table })
}

fn evaluate_point(
    doc: &ScenarioDocument,
    axes: &[SweepAxis],
    coords: &[f64],
    metrics: &[Metric],
    opts: &SweepOptions,
) -> Result<Vec<f64>, SweepError> {
    let mut d = doc.clone();
    let mut xi = opts.xi;
    for (a, &v) in axes.iter().zip(coords) {
        if a.knob == XI_KNOB {
            xi = v;
        } else {
            d = d.with_knob(&a.knob, v)?;
        }
    }
    let (scenario, _) = d.scenario()?;
    let point = if metrics.iter().any(|m| !m.over_grid()) {
        Some(scenario.evaluate(xi)?)
    } else {
        None
    };
    let scan = match &opts.grid {
        Some(g) if metrics.iter().any(|m| m.over_grid()) => Some(spectrum(&scenario, g)?),
        _ => None,
    };
    metrics
        .iter()
        .map(|m| {
            if m.over_grid() {
                let recs = scan.as_ref().expect("grid checked above");
                recs.iter()
                    .map(|r| m.of(r))
                    .try_fold(f64::NEG_INFINITY, |acc, v| Ok(acc.max(v?)))
            } else {
                m.of(point.as_ref().expect("point evaluated"))
            }
        })
        .collect()
}
