//! Steady-state simulator for multi-port optomechanical networks: several
//! cavities coupled to one shared mechanical mode.
//!
//! The crate covers the whole chain from bare device parameters to
//! figures of merit:
//!
//! * [`model`]: network descriptions and validation.
//! * [`meanfield`]: classical fixed points, their stability, and the
//!   effective couplings they imply.
//! * [`response`]: anti-Stokes response, input-output relations and
//!   transmission coefficients.
//! * [`metrics`]: transmission rates, isolation, output energies, blockade
//!   and routing detectors over detuning grids.
//! * [`sweep`]: one- and two-dimensional parameter sweeps.
//! * [`oracle`]: time-domain integration of the same dynamics, used to
//!   cross-check every frequency-domain result.
//! * [`scenario`] and [`table`]: scenario documents and tabular output.

pub mod dynamics;
pub mod error;
pub mod meanfield;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod response;
pub mod scenario;
pub mod sweep;
pub mod table;

pub use error::{
    EmitError, MeanFieldError, MetricsError, ModelError, OracleError, ResponseError, ScenarioError,
    SweepError,
};
pub use model::{
    validate, DetuningGrid, Drive, LinearNetwork, LinearPort, MechanicalMode, NetworkConfig,
    PhysicalNetwork, PhysicalPort, PortSignal, SignalSet, ValidationReport,
};
pub use response::{solve_response, ControlSignal, ResponseState};
