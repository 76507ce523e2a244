use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid network: {}", describe(.0))]
    Invalid(Vec<Violation>),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("expected {expected} port entries, found {found}")]
    PortCountMismatch { expected: usize, found: usize },
    #[error("signal amplitude of port {port} is negative")]
    NegativeSignal { port: usize },
    #[error("no port carries a signal")]
    NoSignal,
    #[error("detuning grid is empty")]
    EmptyGrid,
    #[error("detuning grid is not strictly increasing")]
    NonMonotoneGrid,
}

fn describe(v: &[Violation]) -> String {
    v.iter()
        .map(|v| format!("{}: {}", v.field, v.message))
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum MeanFieldError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("could not bracket every root of the self-consistency equation on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("branch is unstable")]
    Unstable,
    #[error(
        "port {port} is off the red sideband: |delta_eff - omega_m| = {offset} exceeds {limit}"
    )]
    OffSideband {
        port: usize,
        offset: f64,
        limit: f64,
    },
    #[error("port {port} has zero effective coupling")]
    ZeroCoupling { port: usize },
    #[error("port {port}: {reason}")]
    Calibration { port: usize, reason: String },
}

#[derive(Debug, Error)]
pub enum ResponseError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("closed form needs exactly 3 ports, got {0}")]
    NotThreePort(usize),
    #[error("source and destination port are both {0}")]
    SamePort(usize),
    #[error("port index {port} out of range for {count} ports")]
    PortOutOfRange { port: usize, count: usize },
    #[error("control port {0} coincides with a target port")]
    ControlIsTarget(usize),
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Response(#[from] ResponseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("detuning grid [{min}, {max}] does not span [-5, 5]")]
    GridTooNarrow { min: f64, max: f64 },
    #[error("routing needs every port driven with equal amplitude and zero phase")]
    NotUniformDrive,
    #[error("scenario has no transmission direction")]
    NoTransmission,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    MeanField(#[from] MeanFieldError),
    #[error("linear dynamics are not damped (max Re lambda = {0})")]
    Undamped(f64),
    #[error("trajectory spec: {0}")]
    Spec(String),
    #[error("no convergence: trailing-window drift {drift:e} exceeds {tol:e}")]
    NotConverged { drift: f64, tol: f64 },
    #[error("trajectory diverged at t = {0}")]
    Diverged(f64),
    #[error("trajectory left branch {from} and settled on {}", .to.map(|i| format!("branch {i}")).unwrap_or_else(|| "no branch".into()))]
    Escaped { from: usize, to: Option<usize> },
    #[error("trajectory did not settle onto any mean-field branch (closest residual {0:e})")]
    Unsettled(f64),
    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Response(#[from] ResponseError),
    #[error(transparent)]
    MeanField(#[from] MeanFieldError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("cannot resolve knob `{0}`")]
    UnknownKnob(String),
    #[error("axis `{0}` is not strictly monotone or has non-finite values")]
    NonMonotone(String),
    #[error("at most two axes are supported, got {0}")]
    TooManyAxes(usize),
    #[error("knob `{0}` appears on more than one axis")]
    DuplicateKnob(String),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("at {at}: {source}")]
    Point {
        /// Coordinates of the failing point, e.g. `Gp = 0.5, eta = 2`.
        at: String,
        #[source]
        source: Box<SweepError>,
    },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("row {row} has {found} cells, table has {expected} columns")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },
}
