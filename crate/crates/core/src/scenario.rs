//! Scenario documents.
//!
//! A scenario is a TOML file with a `network` section, a `signals` section
//! and optional `grid`, `sweep` and `output` sections. Ports are numbered
//! from 1 in documents. Unknown keys are rejected.
//!
//! ```toml
//! [network]
//! level = "linearized"
//! mech = { omega_m = 100.0, gamma_m = 1e-3 }
//! ports = [
//!   { kappa_ex = 1.0, G_mod = 1.0 },
//!   { kappa_ex = 1.0, G_mod = 1.0, G_phase = 3.141592653589793 },
//!   { kappa_ex = 1.0, G_mod = 1.0 },
//! ]
//!
//! [signals]          # or: amplitudes = [...], phases = [...]
//! from = 1
//! to = 2
//! control = 3
//! eta = 1.0
//! phi = 0.0
//!
//! [grid]
//! min = -5.0
//! max = 5.0
//! count = 1001
//! ```

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::path::Path;

use crate::error::{ScenarioError, SweepError};
use crate::meanfield::{self, LinearizeOptions, MeanFieldBranch};
use crate::metrics::{Excitation, Scenario};
use crate::model::{
    self, DetuningGrid, Drive, Level, LinearNetwork, LinearPort, MechanicalMode, NetworkConfig,
    PhysicalNetwork, PhysicalPort, PortSignal, Warning,
};
use crate::response::ControlSignal;
use crate::sweep::SweepAxis;
use crate::table::Format;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub network: NetworkSection,
    pub signals: SignalsSection,
    pub grid: Option<GridSection>,
    pub sweep: Option<SweepSection>,
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub level: Level,
    pub mech: MechanicalMode,
    pub ports: Vec<PortDoc>,
    /// Physical level only: how to pick and check the operating branch.
    pub linearize: Option<LinearizeDoc>,
}

/// One port; which keys are required depends on the network level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortDoc {
    #[serde(default)]
    pub kappa_0: f64,
    pub kappa_ex: f64,
    #[serde(rename = "G_mod")]
    pub g_mod: Option<f64>,
    #[serde(rename = "G_phase")]
    pub g_phase: Option<f64>,
    pub g: Option<f64>,
    pub drive_amplitude: Option<f64>,
    pub drive_phase: Option<f64>,
    pub detuning: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearizeDoc {
    pub sideband_tol: Option<f64>,
    /// 1-based index into the branches sorted by mechanical displacement.
    pub branch: Option<usize>,
}

/// Either per-port signals (`amplitudes`, `phases`) or the transmission
/// shorthand (`from`, `to`, optional `control` with `eta` and `phi`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalsSection {
    pub amplitudes: Option<Vec<f64>>,
    pub phases: Option<Vec<f64>>,
    pub from: Option<usize>,
    pub to: Option<usize>,
    pub control: Option<usize>,
    pub eta: Option<f64>,
    pub phi: Option<f64>,
}

/// `min`/`max`/`count` or an explicit `values` list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub count: Option<usize>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axes: Vec<AxisDoc>,
    #[serde(default)]
    pub metrics: Vec<String>,
    /// Detuning for point metrics when no axis sweeps `xi`.
    #[serde(default)]
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisDoc {
    pub knob: String,
    pub label: Option<String>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub count: Option<usize>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<Format>,
    pub path: Option<String>,
}

/// Keys whose values may be swept.
const NUMERIC_KEYS: &[&str] = &[
    "omega_m",
    "gamma_m",
    "kappa_0",
    "kappa_ex",
    "G_mod",
    "G_phase",
    "g",
    "drive_amplitude",
    "drive_phase",
    "detuning",
    "sideband_tol",
    "eta",
    "phi",
];
const NUMERIC_LISTS: &[&str] = &["amplitudes", "phases"];

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

fn range(
    what: &str,
    min: Option<f64>,
    max: Option<f64>,
    count: Option<usize>,
    values: &Option<Vec<f64>>,
) -> Result<Vec<f64>, ScenarioError> {
    match (min, max, count, values) {
        (None, None, None, Some(v)) => Ok(v.clone()),
        (Some(a), Some(b), Some(n), None) => {
            if n == 0 || (n == 1 && a != b) {
                return Err(invalid(format!("{what}: count {n} cannot span [{a}, {b}]")));
            }
            Ok(model::linspace(a, b, n))
        }
        _ => Err(invalid(format!(
            "{what}: give either min, max and count, or values"
        ))),
    }
}

impl ScenarioDocument {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string().trim_end().to_owned()))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            ScenarioError::Parse(m) => ScenarioError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// The network described by the document; structural problems (missing or
    /// misplaced keys) are errors, physical-rule violations are left to
    /// [`model::validate`].
    pub fn network_config(&self) -> Result<NetworkConfig, ScenarioError> {
        let net = &self.network;
        let mech = net.mech;
        match net.level {
            Level::Linearized => {
                if net.linearize.is_some() {
                    return Err(invalid(
                        "network.linearize applies to physical networks only",
                    ));
                }
                let ports = net
                    .ports
                    .iter()
                    .enumerate()
                    .map(|(j, p)| {
                        let at = format!("network.ports.{}", j + 1);
                        if p.g.is_some()
                            || p.drive_amplitude.is_some()
                            || p.drive_phase.is_some()
                            || p.detuning.is_some()
                        {
                            return Err(invalid(format!(
                                "{at}: g, drive_amplitude, drive_phase and detuning belong to physical ports"
                            )));
                        }
                        let g_mod = p
                            .g_mod
                            .ok_or_else(|| invalid(format!("{at}: G_mod is required")))?;
                        Ok(LinearPort {
                            kappa_0: p.kappa_0,
                            kappa_ex: p.kappa_ex,
                            g_mod,
                            g_phase: p.g_phase.unwrap_or(0.0),
                        })
                    })
                    .collect::<Result<_, _>>()?;
                Ok(NetworkConfig::Linearized(LinearNetwork { mech, ports }))
            }
            Level::Physical => {
                let ports = net
                    .ports
                    .iter()
                    .enumerate()
                    .map(|(j, p)| {
                        let at = format!("network.ports.{}", j + 1);
                        if p.g_mod.is_some() || p.g_phase.is_some() {
                            return Err(invalid(format!(
                                "{at}: G_mod and G_phase belong to linearized ports"
                            )));
                        }
                        let need = |v: Option<f64>, key: &str| {
                            v.ok_or_else(|| invalid(format!("{at}: {key} is required")))
                        };
                        Ok(PhysicalPort {
                            kappa_0: p.kappa_0,
                            kappa_ex: p.kappa_ex,
                            g: need(p.g, "g")?,
                            drive_amplitude: need(p.drive_amplitude, "drive_amplitude")?,
                            drive_phase: p.drive_phase.unwrap_or(0.0),
                            detuning: need(p.detuning, "detuning")?,
                        })
                    })
                    .collect::<Result<_, _>>()?;
                Ok(NetworkConfig::Physical(PhysicalNetwork { mech, ports }))
            }
        }
    }

    /// Desugar the signals section for an `n`-port network.
    pub fn excitation(&self, n: usize) -> Result<Excitation, ScenarioError> {
        let s = &self.signals;
        let port = |key: &str, p: usize| {
            if p == 0 || p > n {
                Err(invalid(format!(
                    "signals.{key} = {p} is not a port of this {n}-port network"
                )))
            } else {
                Ok(p - 1)
            }
        };
        let shorthand = s.from.is_some()
            || s.to.is_some()
            || s.control.is_some()
            || s.eta.is_some()
            || s.phi.is_some();
        match (&s.amplitudes, shorthand) {
            (Some(_), true) => Err(invalid(
                "signals: per-port amplitudes cannot be combined with from/to/control/eta/phi",
            )),
            (Some(a), false) => {
                if a.len() != n {
                    return Err(invalid(format!(
                        "signals.amplitudes has {} entries for {n} ports",
                        a.len()
                    )));
                }
                let phases = match &s.phases {
                    Some(p) if p.len() != n => {
                        return Err(invalid(format!(
                            "signals.phases has {} entries for {n} ports",
                            p.len()
                        )))
                    }
                    Some(p) => p.clone(),
                    None => vec![0.0; n],
                };
                let drive = Drive::new(
                    a.iter()
                        .zip(phases)
                        .map(|(&amp, ph)| PortSignal::new(amp, ph))
                        .collect(),
                );
                drive.validate(n)?;
                Ok(Excitation::Drive(drive))
            }
            (None, _) => {
                if s.phases.is_some() {
                    return Err(invalid("signals.phases needs signals.amplitudes"));
                }
                let (Some(from), Some(to)) = (s.from, s.to) else {
                    return Err(invalid("signals: give amplitudes, or both from and to"));
                };
                let from = port("from", from)?;
                let to = port("to", to)?;
                if from == to {
                    return Err(invalid("signals.from and signals.to are the same port"));
                }
                let control = match s.control {
                    Some(c) => {
                        let c = port("control", c)?;
                        if c == from || c == to {
                            return Err(invalid("signals.control must differ from from and to"));
                        }
                        let eta = s.eta.unwrap_or(1.0);
                        let phi = s.phi.unwrap_or(0.0);
                        if !(eta.is_finite() && eta >= 0.0 && phi.is_finite()) {
                            return Err(invalid("signals.eta must be finite and >= 0, phi finite"));
                        }
                        Some(ControlSignal { port: c, eta, phi })
                    }
                    None if s.eta.is_some() || s.phi.is_some() => {
                        return Err(invalid("signals.eta and signals.phi need signals.control"))
                    }
                    None => None,
                };
                Ok(Excitation::Transmission { from, to, control })
            }
        }
    }

    pub fn grid(&self) -> Result<Option<DetuningGrid>, ScenarioError> {
        self.grid
            .as_ref()
            .map(|g| {
                let v = range("grid", g.min, g.max, g.count, &g.values)?;
                DetuningGrid::new(v).map_err(ScenarioError::from)
            })
            .transpose()
    }

    /// Sweep axes as written; monotonicity is checked by the sweep engine.
    pub fn sweep_axes(&self) -> Result<Vec<SweepAxis>, ScenarioError> {
        let Some(s) = &self.sweep else {
            return Ok(Vec::new());
        };
        s.axes
            .iter()
            .map(|a| {
                let values = range(
                    &format!("sweep axis {}", a.knob),
                    a.min,
                    a.max,
                    a.count,
                    &a.values,
                )?;
                Ok(SweepAxis {
                    knob: a.knob.clone(),
                    label: a.label.clone().unwrap_or_else(|| a.knob.clone()),
                    values,
                })
            })
            .collect()
    }

    /// Full check: structure, physical rules, signals and grid. Returns the
    /// validation warnings on success.
    pub fn check(&self) -> Result<Vec<Warning>, ScenarioError> {
        let cfg = self.network_config()?;
        let warnings = model::validate(&cfg).into_result()?;
        self.excitation(cfg.port_count())?;
        self.grid()?;
        self.sweep_axes()?;
        Ok(warnings)
    }

    /// Linearized scenario. Physical documents go through the mean-field
    /// solver; the branch is the one named in `network.linearize.branch`, or
    /// the only stable branch. Returns the branches for reporting.
    pub fn scenario(&self) -> Result<(Scenario, Option<Vec<MeanFieldBranch>>), ScenarioError> {
        let cfg = self.network_config()?;
        model::validate(&cfg).into_result()?;
        let excitation = self.excitation(cfg.port_count())?;
        match cfg {
            NetworkConfig::Linearized(net) => Ok((Scenario::new(net, excitation)?, None)),
            NetworkConfig::Physical(net) => {
                let branches = meanfield::solve_mean_fields(&net)?;
                let lin = self.network.linearize.as_ref();
                let chosen = match lin.and_then(|l| l.branch) {
                    Some(b) if b >= 1 && b <= branches.len() => b - 1,
                    Some(b) => {
                        return Err(invalid(format!(
                            "network.linearize.branch = {b} but {} branches exist",
                            branches.len()
                        )))
                    }
                    None => {
                        let stable: Vec<usize> = (0..branches.len())
                            .filter(|&i| branches[i].stable)
                            .collect();
                        match stable.as_slice() {
                            [one] => *one,
                            [] => return Err(crate::error::MeanFieldError::Unstable.into()),
                            many => {
                                return Err(invalid(format!(
                                    "{} stable branches; choose one with network.linearize.branch",
                                    many.len()
                                )))
                            }
                        }
                    }
                };
                let mut opts = LinearizeOptions::default();
                if let Some(t) = lin.and_then(|l| l.sideband_tol) {
                    opts.sideband_tol = t;
                }
                let linear = meanfield::to_linearized(&branches[chosen], &net, opts)?;
                Ok((Scenario::new(linear, excitation)?, Some(branches)))
            }
        }
    }

    /// Copy of the document with the numeric field at `path` set to `value`.
    ///
    /// Paths are dotted keys with 1-based list indices, e.g.
    /// `network.ports.3.G_mod` or `signals.eta`.
    pub fn with_knob(&self, path: &str, value: f64) -> Result<Self, SweepError> {
        let unknown = || SweepError::UnknownKnob(path.to_owned());
        let mut doc = serde_json::to_value(self).map_err(|_| unknown())?;
        let keys: Vec<&str> = path.split('.').collect();
        let mut node = &mut doc;
        let mut parent_key = "";
        for (i, key) in keys.iter().enumerate() {
            let last = i + 1 == keys.len();
            node = match node {
                Value::Object(map) => {
                    let allowed = !last || NUMERIC_KEYS.contains(key);
                    if !allowed {
                        return Err(unknown());
                    }
                    map.get_mut(*key).ok_or_else(unknown)?
                }
                Value::Array(list) => {
                    let idx: usize = key.parse().map_err(|_| unknown())?;
                    if idx == 0 || (last && !NUMERIC_LISTS.contains(&parent_key)) {
                        return Err(unknown());
                    }
                    list.get_mut(idx - 1).ok_or_else(unknown)?
                }
                _ => return Err(unknown()),
            };
            parent_key = key;
        }
        if !matches!(node, Value::Number(_) | Value::Null) {
            return Err(unknown());
        }
        *node = serde_json::Number::from_f64(value)
            .map(Value::Number)
            .ok_or_else(|| SweepError::NonMonotone(path.to_owned()))?;
        serde_json::from_value(doc).map_err(|_| unknown())
    }

    /// Hex SHA-256 of the document's meaning: the resolved network, signals,
    /// grid and sweep. Formatting, key order, defaulted keys and the output
    /// section do not affect it.
    pub fn hash(&self) -> Result<String, ScenarioError> {
        let cfg = self.network_config()?;
        let network = match &cfg {
            NetworkConfig::Linearized(n) => serde_json::to_value(n),
            NetworkConfig::Physical(n) => serde_json::to_value(n),
        }
        .map_err(|e| invalid(e.to_string()))?;
        let sweep = self.sweep.as_ref().map(|s| {
            (
                s.metrics.clone(),
                s.xi,
                self.sweep_axes()
                    .map(|a| {
                        a.into_iter()
                            .map(|x| (x.knob, x.label, x.values))
                            .collect::<Vec<_>>()
                    })
                    .ok(),
            )
        });
        let canonical = serde_json::json!({
            "level": cfg.level(),
            "network": network,
            "linearize": self.network.linearize,
            "excitation": self.excitation(cfg.port_count())?,
            "grid": self.grid()?.map(Vec::from),
            "sweep": sweep,
        });
        let digest = Sha256::digest(canonical.to_string().as_bytes());
        Ok(hex::encode(digest))
    }
}
