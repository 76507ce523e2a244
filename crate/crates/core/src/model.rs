//! Network descriptions and their validation.
//!
//! All rates and frequencies are dimensionless, measured in units of a
//! reference rate chosen by the user (conventionally the total decay rate of
//! port 1). A network is described at one of two levels:
//!
//! * [`PhysicalNetwork`]: bare optomechanical parameters plus strong control
//!   drives. The mean-field solver turns these into effective couplings.
//! * [`LinearNetwork`]: effective couplings `G_j` for ports already driven on
//!   the red mechanical sideband. All frequency-response code works here.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::ModelError;

/// Ratio `omega_m / max(kappa_j, gamma_m)` below which a physical network is
/// flagged as outside the resolved-sideband regime.
pub const RESOLVED_SIDEBAND_RATIO: f64 = 10.0;

/// The single mechanical mode shared by every port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanicalMode {
    pub omega_m: f64,
    pub gamma_m: f64,
}

/// A cavity port at the physical level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalPort {
    pub kappa_0: f64,
    pub kappa_ex: f64,
    /// Single-photon optomechanical coupling.
    pub g: f64,
    /// Control drive amplitude `eps_c` (real, non-negative).
    pub drive_amplitude: f64,
    /// Control drive phase in radians.
    pub drive_phase: f64,
    /// Cavity-control detuning.
    pub detuning: f64,
}

impl PhysicalPort {
    pub fn kappa(&self) -> f64 {
        self.kappa_0 + self.kappa_ex
    }
}

/// A cavity port at the linearized level, already on the red sideband.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearPort {
    pub kappa_0: f64,
    pub kappa_ex: f64,
    /// `|G_j|`.
    pub g_mod: f64,
    /// `arg G_j` in radians.
    pub g_phase: f64,
}

impl LinearPort {
    /// Overcoupled port (`kappa_0 = 0`) with coupling `g_mod * exp(i g_phase)`.
    pub fn overcoupled(kappa: f64, g_mod: f64, g_phase: f64) -> Self {
        Self {
            kappa_0: 0.0,
            kappa_ex: kappa,
            g_mod,
            g_phase,
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa_0 + self.kappa_ex
    }

    /// Complex effective coupling `G_j`.
    pub fn coupling(&self) -> Complex64 {
        Complex64::from_polar(self.g_mod, self.g_phase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalNetwork {
    pub mech: MechanicalMode,
    pub ports: Vec<PhysicalPort>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearNetwork {
    pub mech: MechanicalMode,
    pub ports: Vec<LinearPort>,
}

impl LinearNetwork {
    pub fn len(&self) -> usize {
        self.ports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ports.is_empty()
    }

    pub fn couplings(&self) -> Vec<Complex64> {
        self.ports.iter().map(LinearPort::coupling).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Physical,
    Linearized,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Physical => f.write_str("physical"),
            Level::Linearized => f.write_str("linearized"),
        }
    }
}

/// A network at either abstraction level. Port lists are homogeneous by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkConfig {
    Physical(PhysicalNetwork),
    Linearized(LinearNetwork),
}

impl NetworkConfig {
    pub fn level(&self) -> Level {
        match self {
            NetworkConfig::Physical(_) => Level::Physical,
            NetworkConfig::Linearized(_) => Level::Linearized,
        }
    }

    pub fn mech(&self) -> &MechanicalMode {
        match self {
            NetworkConfig::Physical(n) => &n.mech,
            NetworkConfig::Linearized(n) => &n.mech,
        }
    }

    pub fn port_count(&self) -> usize {
        match self {
            NetworkConfig::Physical(n) => n.ports.len(),
            NetworkConfig::Linearized(n) => n.ports.len(),
        }
    }
}

impl From<PhysicalNetwork> for NetworkConfig {
    fn from(n: PhysicalNetwork) -> Self {
        NetworkConfig::Physical(n)
    }
}

impl From<LinearNetwork> for NetworkConfig {
    fn from(n: LinearNetwork) -> Self {
        NetworkConfig::Linearized(n)
    }
}

/// Weak signal injected into one port.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PortSignal {
    pub amplitude: f64,
    pub phase: f64,
}

impl PortSignal {
    pub fn new(amplitude: f64, phase: f64) -> Self {
        Self { amplitude, phase }
    }

    /// Complex input field `eps_s * exp(i phi)`.
    pub fn field(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

/// Per-port weak-signal amplitudes and phases; all share the detuning `xi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    pub signals: Vec<PortSignal>,
}

impl Drive {
    pub fn new(signals: Vec<PortSignal>) -> Self {
        Self { signals }
    }

    /// Equal amplitude, zero phase on every port.
    pub fn uniform(n: usize, amplitude: f64) -> Self {
        Self::new(vec![PortSignal::new(amplitude, 0.0); n])
    }

    /// Unit signal on `port` only.
    pub fn single(n: usize, port: usize) -> Self {
        let mut signals = vec![PortSignal::default(); n];
        signals[port] = PortSignal::new(1.0, 0.0);
        Self::new(signals)
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn is_driven(&self, port: usize) -> bool {
        self.signals[port].amplitude > 0.0
    }

    /// Largest input amplitude; used to normalize outputs of undriven ports.
    pub fn reference_amplitude(&self) -> f64 {
        self.signals.iter().map(|s| s.amplitude).fold(0.0, f64::max)
    }

    /// Total input power `sum_j eps_s,j^2`.
    pub fn input_power(&self) -> f64 {
        self.signals.iter().map(|s| s.amplitude * s.amplitude).sum()
    }

    /// Like [`Drive::validate`] but accepts an all-zero drive.
    pub fn validate_shape(&self, ports: usize) -> Result<(), ModelError> {
        if self.signals.len() != ports {
            return Err(ModelError::PortCountMismatch {
                expected: ports,
                found: self.signals.len(),
            });
        }
        for (j, s) in self.signals.iter().enumerate() {
            if !s.amplitude.is_finite() || !s.phase.is_finite() {
                return Err(ModelError::NonFinite(format!("signal {}", j + 1)));
            }
            if s.amplitude < 0.0 {
                return Err(ModelError::NegativeSignal { port: j + 1 });
            }
        }
        Ok(())
    }

    pub fn validate(&self, ports: usize) -> Result<(), ModelError> {
        self.validate_shape(ports)?;
        if !self.signals.iter().any(|s| s.amplitude > 0.0) {
            return Err(ModelError::NoSignal);
        }
        Ok(())
    }
}

/// Strictly increasing list of signal detunings `xi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DetuningGrid(Vec<f64>);

impl DetuningGrid {
    pub fn new(values: Vec<f64>) -> Result<Self, ModelError> {
        if values.is_empty() {
            return Err(ModelError::EmptyGrid);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("detuning grid".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ModelError::NonMonotoneGrid);
        }
        Ok(Self(values))
    }

    /// `count` evenly spaced points from `min` to `max` inclusive.
    pub fn linspace(min: f64, max: f64, count: usize) -> Result<Self, ModelError> {
        Self::new(linspace(min, max, count))
    }

    pub fn single(xi: f64) -> Result<Self, ModelError> {
        Self::new(vec![xi])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0[0]
    }

    pub fn max(&self) -> f64 {
        self.0[self.0.len() - 1]
    }
}

impl TryFrom<Vec<f64>> for DetuningGrid {
    type Error = ModelError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<DetuningGrid> for Vec<f64> {
    fn from(g: DetuningGrid) -> Self {
        g.0
    }
}

/// Evenly spaced values. Point `i` is computed as `min + (max - min) * i / (count - 1)`
/// so that a grid with `2 * count - 1` points reproduces the coarse points exactly.
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let span = max - min;
            let last = (count - 1) as f64;
            (0..count)
                .map(|i| {
                    if i == count - 1 {
                        max
                    } else {
                        min + span * (i as f64) / last
                    }
                })
                .collect()
        }
    }
}

/// Weak signals together with the detuning grid they are swept over.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSet {
    pub drive: Drive,
    pub grid: DetuningGrid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub message: String,
}

/// Outcome of [`validate`]. Violations are hard errors; warnings flag
/// parameter regimes where downstream approximations are questionable.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<Vec<Warning>, ModelError> {
        if self.violations.is_empty() {
            Ok(self.warnings)
        } else {
            Err(ModelError::Invalid(self.violations))
        }
    }

    fn violation(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }

    fn finite(&mut self, field: String, value: f64) -> bool {
        if value.is_finite() {
            true
        } else {
            self.violation(field, format!("non-finite value {value}"));
            false
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "error: {}: {}", v.field, v.message)?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {}", w.message)?;
        }
        Ok(())
    }
}

/// Check a network description. Pure: identical input gives an identical report.
pub fn validate(config: &NetworkConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mech = config.mech();
    if report.finite("mech.omega_m".into(), mech.omega_m) && mech.omega_m <= 0.0 {
        report.violation("mech.omega_m", "must be positive");
    }
    if report.finite("mech.gamma_m".into(), mech.gamma_m) && mech.gamma_m <= 0.0 {
        report.violation("mech.gamma_m", "must be positive");
    }

    let n = config.port_count();
    if n == 0 {
        report.violation("ports", "port list is empty");
    } else if n < 2 {
        report.violation("ports", format!("need at least 2 ports, found {n}"));
    }

    match config {
        NetworkConfig::Physical(net) => {
            for (j, p) in net.ports.iter().enumerate() {
                let name = |f: &str| format!("ports.{}.{f}", j + 1);
                check_losses(&mut report, j, p.kappa_0, p.kappa_ex);
                report.finite(name("g"), p.g);
                if report.finite(name("drive_amplitude"), p.drive_amplitude)
                    && p.drive_amplitude < 0.0
                {
                    report.violation(name("drive_amplitude"), "must be non-negative");
                }
                report.finite(name("drive_phase"), p.drive_phase);
                report.finite(name("detuning"), p.detuning);
            }
            if report.is_valid() {
                let fastest = net
                    .ports
                    .iter()
                    .map(PhysicalPort::kappa)
                    .fold(mech.gamma_m, f64::max);
                let ratio = mech.omega_m / fastest;
                if ratio < RESOLVED_SIDEBAND_RATIO {
                    report.warnings.push(Warning {
                        message: format!(
                            "resolved-sideband ratio {} < {}",
                            trim_float(ratio),
                            RESOLVED_SIDEBAND_RATIO
                        ),
                    });
                }
            }
        }
        NetworkConfig::Linearized(net) => {
            for (j, p) in net.ports.iter().enumerate() {
                let name = |f: &str| format!("ports.{}.{f}", j + 1);
                check_losses(&mut report, j, p.kappa_0, p.kappa_ex);
                if report.finite(name("G_mod"), p.g_mod) && p.g_mod < 0.0 {
                    report.violation(name("G_mod"), "must be non-negative");
                }
                report.finite(name("G_phase"), p.g_phase);
            }
        }
    }
    report
}

fn check_losses(report: &mut ValidationReport, j: usize, kappa_0: f64, kappa_ex: f64) {
    let k0 = format!("ports.{}.kappa_0", j + 1);
    let kex = format!("ports.{}.kappa_ex", j + 1);
    if report.finite(k0.clone(), kappa_0) && kappa_0 < 0.0 {
        report.violation(k0, "must be non-negative");
    }
    if report.finite(kex.clone(), kappa_ex) && kappa_ex <= 0.0 {
        report.violation(kex, "external loss must be positive");
    }
}

fn trim_float(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(n: usize) -> LinearNetwork {
        LinearNetwork {
            mech: MechanicalMode {
                omega_m: 100.0,
                gamma_m: 1e-3,
            },
            ports: vec![LinearPort::overcoupled(1.0, 1.0, 0.0); n],
        }
    }

    fn physical(omega_m: f64) -> PhysicalNetwork {
        PhysicalNetwork {
            mech: MechanicalMode {
                omega_m,
                gamma_m: 1e-3,
            },
            ports: vec![
                PhysicalPort {
                    kappa_0: 0.0,
                    kappa_ex: 1.0,
                    g: 1e-3,
                    drive_amplitude: 10.0,
                    drive_phase: 0.0,
                    detuning: omega_m,
                };
                3
            ],
        }
    }

    #[test]
    fn three_port_resolved_sideband_is_clean() {
        let report = validate(&physical(100.0).into());
        assert!(report.is_valid());
        assert!(report.warnings.is_empty());
        let report = validate(&linear(3).into());
        assert_eq!(report, ValidationReport::default());
    }

    #[test]
    fn zero_external_loss_is_a_hard_error() {
        let mut net = linear(3);
        net.ports[1].kappa_ex = 0.0;
        let report = validate(&net.into());
        assert!(!report.is_valid());
        assert_eq!(report.violations[0].field, "ports.2.kappa_ex");
        assert!(report.into_result().is_err());
    }

    #[test]
    fn unresolved_sideband_warns() {
        let report = validate(&physical(2.0).into());
        assert!(report.is_valid());
        assert_eq!(report.warnings.len(), 1);
        assert_eq!(report.warnings[0].message, "resolved-sideband ratio 2 < 10");
    }

    #[test]
    fn linearized_never_warns_about_sidebands() {
        let mut net = linear(3);
        net.mech.omega_m = 0.5;
        let report = validate(&net.into());
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn non_finite_and_empty() {
        let mut net = linear(3);
        net.ports[0].g_mod = f64::NAN;
        assert!(!validate(&net.into()).is_valid());
        let empty = LinearNetwork {
            mech: linear(1).mech,
            ports: vec![],
        };
        let report = validate(&empty.into());
        assert_eq!(report.violations[0].message, "port list is empty");
    }

    #[test]
    fn validate_is_deterministic() {
        let cfg: NetworkConfig = physical(3.0).into();
        let a = serde_json::to_string(&validate(&cfg)).unwrap();
        let b = serde_json::to_string(&validate(&cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_rules() {
        assert!(DetuningGrid::new(vec![0.0, 0.0]).is_err());
        assert!(DetuningGrid::new(vec![1.0, 0.0]).is_err());
        assert!(DetuningGrid::new(vec![0.0, f64::INFINITY]).is_err());
        let g = DetuningGrid::linspace(-5.0, 5.0, 11).unwrap();
        assert_eq!(g.values()[5], 0.0);
        assert_eq!(g.max(), 5.0);
    }

    #[test]
    fn drive_needs_a_signal() {
        assert!(matches!(
            Drive::new(vec![PortSignal::default(); 3]).validate(3),
            Err(ModelError::NoSignal)
        ));
        assert!(Drive::single(3, 0).validate(3).is_ok());
        assert!(Drive::single(3, 0).validate(2).is_err());
    }

    #[test]
    fn refined_linspace_keeps_coarse_points() {
        let coarse = linspace(-0.3, 4.1, 41);
        let fine = linspace(-0.3, 4.1, 81);
        for (i, x) in coarse.iter().enumerate() {
            assert_eq!(*x, fine[2 * i]);
        }
    }
}
