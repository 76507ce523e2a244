//! Figures of merit over detuning grids.
//!
//! A [`Scenario`] pairs a linearized network with an excitation: either a
//! directed transmission measurement (one target port, optional control
//! signal) or an arbitrary multi-port drive. Every metric is a ratio of
//! output to input fields and is therefore unchanged by a global phase or a
//! common rescaling of the signals.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::MetricsError;
use crate::model::{validate, DetuningGrid, Drive, LinearNetwork, NetworkConfig};
use crate::response::{solve_response, transmission_drive, ControlSignal, ResponseState};

/// Backward rates below this are reported as infinite isolation.
pub const ISOLATION_FLOOR: f64 = 1e-30;
/// Largest directed rate that still counts as a frequency-independent blockade.
pub const BLOCKADE_THRESHOLD: f64 = 1e-20;
/// Minimum share of the total output for coherent perfect synthesis.
pub const SYNTHESIS_SHARE: f64 = 1.0 - 1e-3;
/// Total output energy below which routing shares are undefined.
pub const DEGENERATE_OUTPUT: f64 = 1e-30;
/// Half-width the grid must cover for a blockade check.
pub const BLOCKADE_SPAN: f64 = 5.0;

/// How the network is probed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Excitation {
    /// Unit signal into `from`, read at `to`; the backward rate swaps the two
    /// and keeps the control signal.
    Transmission {
        from: usize,
        to: usize,
        control: Option<ControlSignal>,
    },
    /// Arbitrary per-port signals.
    Drive(Drive),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub network: LinearNetwork,
    pub excitation: Excitation,
}

/// `T_fwd / T_bwd`, with an explicit marker for a vanishing denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Isolation {
    Finite(f64),
    Infinite,
}

impl Isolation {
    pub fn from_rates(forward: f64, backward: f64) -> Self {
        if backward < ISOLATION_FLOOR {
            Isolation::Infinite
        } else {
            Isolation::Finite(forward / backward)
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Isolation::Finite(v) => v,
            Isolation::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Isolation::Infinite)
    }
}

impl fmt::Display for Isolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Isolation::Finite(v) => write!(f, "{v}"),
            Isolation::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionRates {
    pub forward: f64,
    pub backward: f64,
    pub isolation: Isolation,
}

/// Everything the metrics report at one detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRecord {
    pub xi: f64,
    pub transmission: Option<TransmissionRates>,
    /// Normalized output energy per port.
    pub s: Vec<f64>,
    pub b_abs2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Scenario {
    pub fn new(network: LinearNetwork, excitation: Excitation) -> Result<Self, MetricsError> {
        let s = Self {
            network,
            excitation,
        };
        validate(&NetworkConfig::Linearized(s.network.clone())).into_result()?;
        s.drives()?;
        Ok(s)
    }

    /// Forward drive, plus the backward drive for transmission scenarios.
    pub fn drives(&self) -> Result<(Drive, Option<Drive>), MetricsError> {
        let n = self.network.len();
        match &self.excitation {
            Excitation::Transmission { from, to, control } => {
                if from == to {
                    return Err(crate::error::ResponseError::SamePort(*from).into());
                }
                if control.is_some_and(|c| c.port == *to) {
                    return Err(crate::error::ResponseError::ControlIsTarget(*to).into());
                }
                let fwd = transmission_drive(n, *from, *control)?;
                let bwd = transmission_drive(n, *to, *control)?;
                Ok((fwd, Some(bwd)))
            }
            Excitation::Drive(d) => {
                d.validate(n)?;
                Ok((d.clone(), None))
            }
        }
    }

    /// Build a record from already solved states. `backward` is required
    /// for transmission scenarios and ignored otherwise.
    pub fn record(
        &self,
        forward: &ResponseState,
        backward: Option<&ResponseState>,
    ) -> Result<SpectrumRecord, MetricsError> {
        let (fwd_drive, bwd_drive) = self.drives()?;
        let net = &self.network;
        let reference = fwd_drive.reference_amplitude();
        let s = (0..net.len())
            .map(|j| {
                let out = forward.output(net, &fwd_drive, j);
                let eps = fwd_drive.signals[j].amplitude;
                (out / if eps > 0.0 { eps } else { reference }).norm_sqr()
            })
            .collect();
        let transmission = match (&self.excitation, bwd_drive, backward) {
            (Excitation::Transmission { from, to, .. }, Some(bd), Some(b)) => {
                let forward_rate = forward.output(net, &fwd_drive, *to).norm_sqr();
                let backward_rate = b.output(net, &bd, *from).norm_sqr();
                Some(TransmissionRates {
                    forward: forward_rate,
                    backward: backward_rate,
                    isolation: Isolation::from_rates(forward_rate, backward_rate),
                })
            }
            (Excitation::Transmission { .. }, _, _) => return Err(MetricsError::NoTransmission),
            _ => None,
        };
        Ok(SpectrumRecord {
            xi: forward.xi,
            transmission,
            s,
            b_abs2: forward.b_minus.norm_sqr(),
        })
    }

    /// Record at a single detuning.
    pub fn evaluate(&self, xi: f64) -> Result<SpectrumRecord, MetricsError> {
        let (fwd, bwd) = self.drives()?;
        let f = solve_response(&self.network, &fwd, xi)?;
        let b = bwd
            .map(|d| solve_response(&self.network, &d, xi))
            .transpose()?;
        self.record(&f, b.as_ref())
    }

    /// Complex output fields of every port under the forward drive.
    pub fn outputs(&self, xi: f64) -> Result<Vec<Complex64>, MetricsError> {
        let (fwd, _) = self.drives()?;
        Ok(solve_response(&self.network, &fwd, xi)?.outputs(&self.network, &fwd))
    }
}

/// One record per grid point, in grid order. Points are evaluated in parallel.
pub fn spectrum(
    scenario: &Scenario,
    grid: &DetuningGrid,
) -> Result<Vec<SpectrumRecord>, MetricsError> {
    grid.values()
        .par_iter()
        .map(|&xi| scenario.evaluate(xi))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockadeReport {
    pub holds: bool,
    /// Largest directed rate on the grid and where it occurs.
    pub max_rate: f64,
    pub argmax: f64,
}

/// Frequency-independent blockade in one direction: the directed rate stays
/// below [`BLOCKADE_THRESHOLD`] over a grid covering `[-5, 5]`.
pub fn fipb_check(
    scenario: &Scenario,
    grid: &DetuningGrid,
    direction: Direction,
) -> Result<BlockadeReport, MetricsError> {
    if !matches!(scenario.excitation, Excitation::Transmission { .. }) {
        return Err(MetricsError::NoTransmission);
    }
    if grid.min() > -BLOCKADE_SPAN || grid.max() < BLOCKADE_SPAN {
        return Err(MetricsError::GridTooNarrow {
            min: grid.min(),
            max: grid.max(),
        });
    }
    let records = spectrum(scenario, grid)?;
    let (argmax, max_rate) = records
        .iter()
        .map(|r| {
            let t = r.transmission.expect("transmission scenario");
            let rate = match direction {
                Direction::Forward => t.forward,
                Direction::Backward => t.backward,
            };
            (r.xi, rate)
        })
        .fold((grid.min(), f64::NEG_INFINITY), |acc, p| {
            if p.1 > acc.1 {
                p
            } else {
                acc
            }
        });
    Ok(BlockadeReport {
        holds: max_rate <= BLOCKADE_THRESHOLD,
        max_rate,
        argmax,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingPoint {
    pub xi: f64,
    /// `|out_j|^2 / sum_k |out_k|^2`; empty when degenerate.
    pub shares: Vec<f64>,
    pub s: Vec<f64>,
    pub b_abs2: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingReport {
    pub points: Vec<RoutingPoint>,
    /// The point at `xi = 0`, evaluated whether or not the grid contains it.
    pub at_zero: RoutingPoint,
    /// Port receiving essentially all output at `xi = 0`, if any.
    pub synthesis_port: Option<usize>,
}

fn routing_point(scenario: &Scenario, xi: f64) -> Result<RoutingPoint, MetricsError> {
    let rec = scenario.evaluate(xi)?;
    let out = scenario.outputs(xi)?;
    let total: f64 = out.iter().map(|o| o.norm_sqr()).sum();
    let degenerate = total < DEGENERATE_OUTPUT;
    let shares = if degenerate {
        Vec::new()
    } else {
        out.iter().map(|o| o.norm_sqr() / total).collect()
    };
    Ok(RoutingPoint {
        xi,
        shares,
        s: rec.s,
        b_abs2: rec.b_abs2,
        degenerate,
    })
}

/// Output-energy shares under equal, in-phase signals on every port.
pub fn routing_report(
    scenario: &Scenario,
    grid: &DetuningGrid,
) -> Result<RoutingReport, MetricsError> {
    match &scenario.excitation {
        Excitation::Drive(d)
            if d.signals.iter().all(|s| {
                s.amplitude > 0.0 && s.amplitude == d.signals[0].amplitude && s.phase == 0.0
            }) => {}
        _ => return Err(MetricsError::NotUniformDrive),
    }
    let points = grid
        .values()
        .par_iter()
        .map(|&xi| routing_point(scenario, xi))
        .collect::<Result<Vec<_>, _>>()?;
    let at_zero = routing_point(scenario, 0.0)?;
    let synthesis_port = at_zero.shares.iter().position(|&s| s >= SYNTHESIS_SHARE);
    Ok(RoutingReport {
        points,
        at_zero,
        synthesis_port,
    })
}

/// `max_xi |b_-(xi)|^2` over the grid.
pub fn max_mech_excitation(scenario: &Scenario, grid: &DetuningGrid) -> Result<f64, MetricsError> {
    Ok(spectrum(scenario, grid)?
        .iter()
        .map(|r| r.b_abs2)
        .fold(0.0, f64::max))
}
