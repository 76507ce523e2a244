//! Steady-state anti-Stokes response of a linearized network.
//!
//! Every cavity is driven on the red sideband, so in the rotating frame the
//! fluctuation amplitudes obey
//!
//! ```text
//! f_j a_j = -i G_j b + sqrt(kappa_ex,j) eps_j e^{i phi_j}
//! h   b   = -i sum_j conj(G_j) a_j
//! ```
//!
//! with `f_j = kappa_j/2 - i xi` and `h = gamma_m/2 - i xi`. The mechanical
//! amplitude is eliminated exactly, leaving one scalar division per detuning.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::ResponseError;
use crate::model::{Drive, LinearNetwork, LinearPort, MechanicalMode, PortSignal};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Cavity and mechanical susceptibility denominators at one detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct Susceptibilities {
    pub f: Vec<Complex64>,
    pub h: Complex64,
}

impl Susceptibilities {
    pub fn new(net: &LinearNetwork, xi: f64) -> Self {
        let f = net
            .ports
            .iter()
            .map(|p| Complex64::new(p.kappa() / 2.0, -xi))
            .collect();
        let h = Complex64::new(net.mech.gamma_m / 2.0, -xi);
        Self { f, h }
    }
}

/// Anti-Stokes amplitudes `a_{j-}` and `b_-` at detuning `xi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseState {
    pub xi: f64,
    pub a_minus: Vec<Complex64>,
    pub b_minus: Complex64,
}

impl ResponseState {
    /// Output field `sqrt(kappa_ex,j) a_{j-} - eps_j e^{i phi_j}` of port `j`.
    /// For an undriven port this is the plain input-output relation.
    pub fn output(&self, net: &LinearNetwork, drive: &Drive, port: usize) -> Complex64 {
        net.ports[port].kappa_ex.sqrt() * self.a_minus[port] - drive.signals[port].field()
    }

    pub fn outputs(&self, net: &LinearNetwork, drive: &Drive) -> Vec<Complex64> {
        (0..net.len()).map(|j| self.output(net, drive, j)).collect()
    }

    /// Normalized output energy `S_j = |out_j / eps_j|^2`; `None` for an undriven port.
    pub fn output_energy(&self, net: &LinearNetwork, drive: &Drive, port: usize) -> Option<f64> {
        let eps = drive.signals[port].amplitude;
        (eps > 0.0).then(|| (self.output(net, drive, port) / eps).norm_sqr())
    }

    /// Relative residual of the linear system this state should satisfy.
    pub fn residual(&self, net: &LinearNetwork, drive: &Drive) -> f64 {
        let chi = Susceptibilities::new(net, self.xi);
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        let mut mech = chi.h * self.b_minus;
        for (j, p) in net.ports.iter().enumerate() {
            let g = p.coupling();
            let src = p.kappa_ex.sqrt() * drive.signals[j].field();
            let lhs = chi.f[j] * self.a_minus[j];
            let rhs = -I * g * self.b_minus + src;
            err = err.max((lhs - rhs).norm());
            scale = scale.max(lhs.norm()).max(src.norm());
            mech += I * g.conj() * self.a_minus[j];
            scale = scale.max((g * self.a_minus[j]).norm());
        }
        err = err.max(mech.norm());
        if scale == 0.0 {
            err
        } else {
            err / scale
        }
    }
}

/// Solve the anti-Stokes response by exact elimination of `b_-`.
pub fn solve_response(
    net: &LinearNetwork,
    drive: &Drive,
    xi: f64,
) -> Result<ResponseState, ResponseError> {
    drive_matches(net, drive)?;
    let chi = Susceptibilities::new(net, xi);
    let sources: Vec<Complex64> = net
        .ports
        .iter()
        .zip(&drive.signals)
        .map(|(p, s)| p.kappa_ex.sqrt() * s.field())
        .collect();

    let mut numerator = Complex64::new(0.0, 0.0);
    let mut denominator = chi.h;
    for ((p, f), src) in net.ports.iter().zip(&chi.f).zip(&sources) {
        let g = p.coupling();
        numerator += g.conj() * src / f;
        denominator += g.norm_sqr() / f;
    }
    let b_minus = -I * numerator / denominator;
    let a_minus = net
        .ports
        .iter()
        .zip(&chi.f)
        .zip(&sources)
        .map(|((p, f), src)| (-I * p.coupling() * b_minus + src) / f)
        .collect();
    Ok(ResponseState {
        xi,
        a_minus,
        b_minus,
    })
}

/// Explicit three-port rational expressions for `a_{j-}`, written over the
/// common denominator `D = f1 f2 f3 h + f2 f3 |G1|^2 + f1 f3 |G2|^2 + f1 f2 |G3|^2`.
///
/// Independent of [`solve_response`]; the two must agree to rounding.
pub fn closed_form_three_port(
    net: &LinearNetwork,
    drive: &Drive,
    xi: f64,
) -> Result<ResponseState, ResponseError> {
    if net.len() != 3 {
        return Err(ResponseError::NotThreePort(net.len()));
    }
    drive_matches(net, drive)?;
    let chi = Susceptibilities::new(net, xi);
    let (f, h) = (&chi.f, chi.h);
    let g: Vec<Complex64> = net.couplings();
    let g2: Vec<f64> = g.iter().map(|x| x.norm_sqr()).collect();
    // Source terms sqrt(kappa_ex,j) * eps_j * e^{i phi_j}.
    let s: Vec<Complex64> = net
        .ports
        .iter()
        .zip(&drive.signals)
        .map(|(p, sig)| p.kappa_ex.sqrt() * sig.field())
        .collect();

    let d =
        f[0] * f[1] * f[2] * h + f[1] * f[2] * g2[0] + f[0] * f[2] * g2[1] + f[0] * f[1] * g2[2];
    let m1 = f[1] * f[2] * h + f[2] * g2[1] + f[1] * g2[2];
    let m2 = f[0] * f[2] * h + f[2] * g2[0] + f[0] * g2[2];
    let m3 = f[0] * f[1] * h + f[1] * g2[0] + f[0] * g2[1];

    let a1 = (s[0] * m1 - s[1] * f[2] * g[0] * g[1].conj() - s[2] * f[1] * g[0] * g[2].conj()) / d;
    let a2 = (s[1] * m2 - s[0] * f[2] * g[1] * g[0].conj() - s[2] * f[0] * g[1] * g[2].conj()) / d;
    let a3 = (s[2] * m3 - s[0] * f[1] * g[2] * g[0].conj() - s[1] * f[0] * g[2] * g[1].conj()) / d;

    // b_- from the same denominator: D b = -i sum_k conj(G_k) s_k prod_{l != k} f_l.
    let b = -I
        * (g[0].conj() * s[0] * f[1] * f[2]
            + g[1].conj() * s[1] * f[0] * f[2]
            + g[2].conj() * s[2] * f[0] * f[1])
        / d;

    Ok(ResponseState {
        xi,
        a_minus: vec![a1, a2, a3],
        b_minus: b,
    })
}

/// Output field of `port` (see [`ResponseState::output`]).
pub fn output_amplitude(
    state: &ResponseState,
    net: &LinearNetwork,
    drive: &Drive,
    port: usize,
) -> Complex64 {
    state.output(net, drive, port)
}

/// A control signal on a third port, specified relative to the unit target signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlSignal {
    pub port: usize,
    /// Amplitude ratio `eps_control / eps_target`.
    pub eta: f64,
    /// Phase difference `phi_control - phi_target`.
    pub phi: f64,
}

/// Drive with a unit signal on `from` plus an optional control signal.
pub fn transmission_drive(
    n: usize,
    from: usize,
    control: Option<ControlSignal>,
) -> Result<Drive, ResponseError> {
    check_port(from, n)?;
    let mut drive = Drive::single(n, from);
    if let Some(c) = control {
        check_port(c.port, n)?;
        if c.port == from {
            return Err(ResponseError::ControlIsTarget(c.port));
        }
        drive.signals[c.port] = PortSignal::new(c.eta, c.phi);
    }
    Ok(drive)
}

/// Transmission coefficient `t_{from -> to} = out_to / eps_from`.
pub fn transmission_coefficient(
    net: &LinearNetwork,
    from: usize,
    to: usize,
    control: Option<ControlSignal>,
    xi: f64,
) -> Result<Complex64, ResponseError> {
    check_port(to, net.len())?;
    if from == to {
        return Err(ResponseError::SamePort(from));
    }
    if control.is_some_and(|c| c.port == to) {
        return Err(ResponseError::ControlIsTarget(to));
    }
    let drive = transmission_drive(net.len(), from, control)?;
    let state = solve_response(net, &drive, xi)?;
    Ok(state.output(net, &drive, to))
}

/// The symmetric overcoupled three-port: ports 1 and 2 are targets with
/// `G_1 = G`, `G_2 = G e^{i theta}`, port 3 is the control port with
/// `G_3 = G'` and a signal `eta * e^{i phi}` relative to the target signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricThreePort {
    pub kappa: f64,
    pub gamma_m: f64,
    pub g: f64,
    pub g_prime: f64,
    pub theta: f64,
    pub eta: f64,
    pub phi: f64,
}

impl SymmetricThreePort {
    /// `omega_m` plays no role in the linearized response; it is set to `100 kappa`.
    pub fn network(&self) -> LinearNetwork {
        LinearNetwork {
            mech: MechanicalMode {
                omega_m: 100.0 * self.kappa,
                gamma_m: self.gamma_m,
            },
            ports: vec![
                LinearPort::overcoupled(self.kappa, self.g, 0.0),
                LinearPort::overcoupled(self.kappa, self.g, self.theta),
                LinearPort::overcoupled(self.kappa, self.g_prime, 0.0),
            ],
        }
    }

    pub fn control(&self) -> ControlSignal {
        ControlSignal {
            port: 2,
            eta: self.eta,
            phi: self.phi,
        }
    }

    /// `t_{1->2}` through the general solver.
    pub fn forward(&self, xi: f64) -> Complex64 {
        transmission_coefficient(&self.network(), 0, 1, Some(self.control()), xi)
            .expect("symmetric three-port is well formed")
    }

    /// `t_{2->1}` through the general solver.
    pub fn backward(&self, xi: f64) -> Complex64 {
        transmission_coefficient(&self.network(), 1, 0, Some(self.control()), xi)
            .expect("symmetric three-port is well formed")
    }
}

fn check_port(port: usize, count: usize) -> Result<(), ResponseError> {
    if port >= count {
        Err(ResponseError::PortOutOfRange { port, count })
    } else {
        Ok(())
    }
}

fn drive_matches(net: &LinearNetwork, drive: &Drive) -> Result<(), ResponseError> {
    if drive.len() != net.len() {
        return Err(crate::error::ModelError::PortCountMismatch {
            expected: net.len(),
            found: drive.len(),
        }
        .into());
    }
    Ok(())
}
