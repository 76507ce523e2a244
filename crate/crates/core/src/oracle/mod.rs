//! Time-domain oracles.
//!
//! Each oracle integrates a noise-free equation of motion from rest to steady
//! state and demodulates the trailing part of the trajectory by a
//! least-squares tone fit. Three levels are covered:
//!
//! * [`integrate_rwa`]: the rotating-wave (beam-splitter) fluctuation
//!   equations, to be compared with [`crate::response::solve_response`].
//! * [`integrate_two_sideband`]: the linearized fluctuations with the
//!   counter-rotating terms kept, exposing the Stokes sidebands.
//! * [`integrate_nonlinear`]: the full classical equations of motion with
//!   control and signal drives together.
//!
//! Signal frequencies are measured from the control frame: the signal on
//! every port has detuning `Omega = omega_m + xi`, so `xi` is the offset from
//! the mechanical red sideband.

pub mod demod;
pub mod ode;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, CavityLine};
use crate::error::{MeanFieldError, OracleError};
use crate::meanfield::{self, MeanFieldBranch};
use crate::model::{Drive, LinearNetwork, NetworkConfig, PhysicalNetwork};
use crate::response::{self, ResponseState};
use demod::{FitResult, WindowFit};
use ode::StepControl;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Integration length, accuracy and demodulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySpec {
    /// Total integration time; `None` picks [`TrajectorySpec::DEFAULT_DECAY_TIMES`]
    /// over the slowest decay rate.
    pub duration: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    /// Trailing fraction of the trajectory used for demodulation.
    pub window: f64,
    /// Allowed drift of fitted amplitudes between the two halves of the
    /// window, relative to the largest amplitude.
    pub drift_tol: f64,
    pub max_steps: usize,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        Self {
            duration: None,
            rtol: 1e-10,
            atol: 1e-13,
            window: 0.25,
            drift_tol: 1e-8,
            max_steps: 200_000_000,
        }
    }
}

impl TrajectorySpec {
    pub const DEFAULT_DECAY_TIMES: f64 = 40.0;
    pub const MIN_DECAY_TIMES: f64 = 20.0;

    /// Integration time for dynamics whose slowest mode decays at `decay`.
    pub fn resolve_duration(&self, decay: f64) -> Result<f64, OracleError> {
        if !(self.window > 0.0 && self.window < 1.0) {
            return Err(OracleError::Spec(format!(
                "window {} outside (0, 1)",
                self.window
            )));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.drift_tol > 0.0) {
            return Err(OracleError::Spec("tolerances must be positive".into()));
        }
        if decay.is_nan() || decay <= 0.0 {
            return Err(OracleError::Undamped(-decay));
        }
        let min = Self::MIN_DECAY_TIMES / decay;
        let d = self.duration.unwrap_or(Self::DEFAULT_DECAY_TIMES / decay);
        if !(d.is_finite() && d >= min) {
            return Err(OracleError::Spec(format!(
                "duration {d} shorter than {} decay times ({min})",
                Self::MIN_DECAY_TIMES
            )));
        }
        Ok(d)
    }

    fn control(&self, duration: f64) -> StepControl {
        StepControl {
            rtol: self.rtol,
            atol: self.atol,
            h_max: self.window * duration / 64.0,
            max_steps: self.max_steps,
        }
    }
}

/// Integrate from `y0` over `duration` and fit `tones` on the trailing window.
/// Any component exceeding `bound` in modulus aborts with `Diverged`.
fn integrate_and_fit<F>(
    rhs: F,
    y0: Vec<Complex64>,
    duration: f64,
    spec: &TrajectorySpec,
    tones: &[Vec<f64>],
    bound: f64,
) -> Result<FitResult, OracleError>
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
{
    let mut fit = WindowFit::new(tones, duration * (1.0 - spec.window), duration);
    ode::integrate(rhs, 0.0, y0, duration, spec.control(duration), |t, y| {
        if y.iter().any(|v| v.norm().is_nan() || v.norm() > bound) {
            return Err(OracleError::Diverged(t));
        }
        fit.add(t, y);
        Ok(())
    })?;
    fit.finish()
        .ok_or_else(|| OracleError::Spec("demodulation window holds too few samples".into()))
}

fn max_norm<'a>(v: impl IntoIterator<Item = &'a Complex64>) -> f64 {
    v.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_drift(fit: &FitResult, spec: &TrajectorySpec) -> Result<f64, OracleError> {
    let scale = max_norm(fit.amplitudes.iter().flatten());
    let drift = if scale > 0.0 {
        fit.drift / scale
    } else {
        fit.drift
    };
    if drift > spec.drift_tol {
        return Err(OracleError::NotConverged {
            drift,
            tol: spec.drift_tol,
        });
    }
    Ok(drift)
}

fn sources(net: &LinearNetwork, drive: &Drive) -> Vec<Complex64> {
    net.ports
        .iter()
        .zip(&drive.signals)
        .map(|(p, s)| p.kappa_ex.sqrt() * s.field())
        .collect()
}

fn check_linear(net: &LinearNetwork, drive: &Drive) -> Result<(), OracleError> {
    crate::model::validate(&NetworkConfig::from(net.clone())).into_result()?;
    drive.validate(net.len())?;
    Ok(())
}

/// Steady state recovered from an RWA trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct RwaEstimate {
    pub state: ResponseState,
    /// Amplitudes at the mirror tone `e^{+i xi t}`; zero up to integration error.
    pub stokes_a: Vec<Complex64>,
    pub stokes_b: Complex64,
    /// Relative half-window drift of the fit.
    pub drift: f64,
    pub duration: f64,
}

/// Integrate the rotating-wave fluctuation equations
///
/// ```text
/// a_j' = -kappa_j/2 a_j - i G_j b + sqrt(kappa_ex,j) eps_j e^{i phi_j} e^{-i xi t}
/// b'   = -gamma_m/2 b - i sum_j conj(G_j) a_j
/// ```
///
/// from rest and demodulate the steady state.
pub fn integrate_rwa(
    net: &LinearNetwork,
    drive: &Drive,
    xi: f64,
    spec: &TrajectorySpec,
) -> Result<RwaEstimate, OracleError> {
    check_linear(net, drive)?;
    let lines = linear_lines(net, None);
    let decay = -dynamics::spectral_abscissa(&dynamics::rwa_drift(&lines, net.mech.gamma_m));
    let duration = spec.resolve_duration(decay)?;

    let n = net.len();
    let src = sources(net, drive);
    let kappa: Vec<f64> = net.ports.iter().map(|p| p.kappa()).collect();
    let g = net.couplings();
    let gamma = net.mech.gamma_m;
    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let phase = Complex64::from_polar(1.0, -xi * t);
        let b = y[n];
        let mut db = -0.5 * gamma * b;
        for j in 0..n {
            dy[j] = -0.5 * kappa[j] * y[j] - I * g[j] * b + src[j] * phase;
            db -= I * g[j].conj() * y[j];
        }
        dy[n] = db;
    };
    let tones = vec![vec![-xi, xi]; n + 1];
    let bound = 1e6 * (1.0 + max_norm(&src) / decay) * (1.0 + max_norm(&g) / decay);
    let fit = integrate_and_fit(rhs, vec![ZERO; n + 1], duration, spec, &tones, bound)?;
    let drift = check_drift(&fit, spec)?;
    let amp = &fit.amplitudes;
    Ok(RwaEstimate {
        state: ResponseState {
            xi,
            a_minus: amp[..n].iter().map(|c| c[0]).collect(),
            b_minus: amp[n][0],
        },
        stokes_a: amp[..n].iter().map(|c| c[1]).collect(),
        stokes_b: amp[n][1],
        drift,
        duration,
    })
}

fn linear_lines(net: &LinearNetwork, delta_eff: Option<&[f64]>) -> Vec<CavityLine> {
    net.ports
        .iter()
        .enumerate()
        .map(|(j, p)| CavityLine {
            kappa: p.kappa(),
            detuning: delta_eff.map_or(0.0, |d| d[j]),
            coupling: p.coupling(),
        })
        .collect()
}

/// Both sideband amplitudes of the fluctuations in the control frame:
/// `da_j = a_{j-} e^{-i Omega t} + a_{j+} e^{+i Omega t}`, same for `db`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidebandState {
    pub xi: f64,
    pub a_minus: Vec<Complex64>,
    pub a_plus: Vec<Complex64>,
    pub b_minus: Complex64,
    pub b_plus: Complex64,
}

impl SidebandState {
    /// Largest relative deviation of `a_{j-}` from a rotating-wave solution.
    /// Ports whose reference amplitude is negligible against the largest one
    /// are compared on the scale of the largest.
    pub fn rwa_error(&self, rwa: &ResponseState) -> f64 {
        let top = max_norm(&rwa.a_minus);
        if top == 0.0 {
            return max_norm(&self.a_minus);
        }
        self.a_minus
            .iter()
            .zip(&rwa.a_minus)
            .map(|(a, r)| (a - r).norm() / r.norm().max(1e-9 * top))
            .fold(0.0, f64::max)
    }

    /// `max_j |a_{j+}| / max_j |a_{j-}|`.
    pub fn stokes_ratio(&self) -> f64 {
        let top = max_norm(&self.a_minus);
        if top == 0.0 {
            0.0
        } else {
            max_norm(&self.a_plus) / top
        }
    }
}

fn check_delta(net: &LinearNetwork, delta_eff: Option<&[f64]>) -> Result<(), OracleError> {
    if let Some(d) = delta_eff {
        if d.len() != net.len() {
            return Err(crate::error::ModelError::PortCountMismatch {
                expected: net.len(),
                found: d.len(),
            }
            .into());
        }
        if d.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::Spec("non-finite effective detuning".into()));
        }
    }
    Ok(())
}

/// Exact steady state of the linearized fluctuations with counter-rotating
/// terms, from a dense `2(N+1)` complex linear solve. `delta_eff` defaults
/// to `omega_m` on every port.
pub fn two_sideband_steady_state(
    net: &LinearNetwork,
    delta_eff: Option<&[f64]>,
    drive: &Drive,
    xi: f64,
) -> Result<SidebandState, OracleError> {
    check_linear(net, drive)?;
    check_delta(net, delta_eff)?;
    let n = net.len();
    let w = net.mech.omega_m;
    let gamma = net.mech.gamma_m;
    let omega = w + xi;
    let src = sources(net, drive);
    // Unknowns: a_{j-} (0..n), b_- (n), conj(a_{j+}) (n+1..2n+1), conj(b_+) (2n+1).
    let m = 2 * (n + 1);
    let (bm, bp) = (n, 2 * n + 1);
    let mut a = DMatrix::<Complex64>::zeros(m, m);
    let mut rhs = DVector::<Complex64>::zeros(m);
    for (j, p) in net.ports.iter().enumerate() {
        let d = delta_eff.map_or(w, |v| v[j]);
        let k = p.kappa();
        let g = p.coupling();
        let ap = n + 1 + j;
        a[(j, j)] = Complex64::new(k / 2.0, d - omega);
        a[(j, bm)] = I * g;
        a[(j, bp)] = I * g;
        rhs[j] = src[j];
        a[(ap, ap)] = Complex64::new(k / 2.0, -d - omega);
        a[(ap, bp)] = -I * g.conj();
        a[(ap, bm)] = -I * g.conj();
        a[(bm, ap)] = I * g;
        a[(bm, j)] = I * g.conj();
        a[(bp, j)] = -I * g.conj();
        a[(bp, ap)] = -I * g;
    }
    a[(bm, bm)] = Complex64::new(gamma / 2.0, w - omega);
    a[(bp, bp)] = Complex64::new(gamma / 2.0, -w - omega);
    let u = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| OracleError::Spec("singular two-sideband system".into()))?;
    Ok(SidebandState {
        xi,
        a_minus: (0..n).map(|j| u[j]).collect(),
        a_plus: (0..n).map(|j| u[n + 1 + j].conj()).collect(),
        b_minus: u[bm],
        b_plus: u[bp].conj(),
    })
}

/// Sideband estimate from a two-sideband trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidebandEstimate {
    pub sidebands: SidebandState,
    /// Rotating-wave response at the same detuning.
    pub rwa: ResponseState,
    pub rwa_error: f64,
    pub stokes_ratio: f64,
    pub drift: f64,
    pub duration: f64,
}

/// Integrate the linearized fluctuations with counter-rotating terms, in the
/// frame `A_j = da_j e^{i delta'_j t}`, `B = db e^{i omega_m t}`:
///
/// ```text
/// A_j' = -kappa_j/2 A_j - i G_j (B e^{-i(omega_m - delta'_j)t} + conj(B) e^{i(omega_m + delta'_j)t})
///        + s_j e^{-i(Omega - delta'_j)t}
/// B'   = -gamma_m/2 B - i sum_j (conj(G_j) A_j e^{i(omega_m - delta'_j)t} + G_j conj(A_j) e^{i(omega_m + delta'_j)t})
/// ```
///
/// `delta_eff` defaults to `omega_m` on every port.
pub fn integrate_two_sideband(
    net: &LinearNetwork,
    delta_eff: Option<&[f64]>,
    drive: &Drive,
    xi: f64,
    spec: &TrajectorySpec,
) -> Result<TwoSidebandEstimate, OracleError> {
    check_linear(net, drive)?;
    check_delta(net, delta_eff)?;
    let n = net.len();
    let w = net.mech.omega_m;
    let gamma = net.mech.gamma_m;
    let delta: Vec<f64> = (0..n).map(|j| delta_eff.map_or(w, |d| d[j])).collect();
    let lines = linear_lines(net, Some(&delta));
    let decay = -dynamics::spectral_abscissa(&dynamics::full_drift(&lines, w, gamma));
    let duration = spec.resolve_duration(decay)?;

    let omega = w + xi;
    let src = sources(net, drive);
    let kappa: Vec<f64> = net.ports.iter().map(|p| p.kappa()).collect();
    let g = net.couplings();
    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let b = y[n];
        let mut db = -0.5 * gamma * b;
        for j in 0..n {
            let slow = Complex64::from_polar(1.0, (w - delta[j]) * t);
            let fast = Complex64::from_polar(1.0, (w + delta[j]) * t);
            let drive = Complex64::from_polar(1.0, -(omega - delta[j]) * t);
            dy[j] = -0.5 * kappa[j] * y[j] - I * g[j] * (b * slow.conj() + b.conj() * fast)
                + src[j] * drive;
            db -= I * (g[j].conj() * y[j] * slow + g[j] * y[j].conj() * fast);
        }
        dy[n] = db;
    };
    let mut tones: Vec<Vec<f64>> = delta
        .iter()
        .map(|d| vec![-(omega - d), omega + d])
        .collect();
    tones.push(vec![-xi, xi + 2.0 * w]);
    let bound = 1e6 * (1.0 + max_norm(&src) / decay) * (1.0 + max_norm(&g) / decay);
    let fit = integrate_and_fit(rhs, vec![ZERO; n + 1], duration, spec, &tones, bound)?;
    let drift = check_drift(&fit, spec)?;
    let amp = &fit.amplitudes;
    let sidebands = SidebandState {
        xi,
        a_minus: amp[..n].iter().map(|c| c[0]).collect(),
        a_plus: amp[..n].iter().map(|c| c[1]).collect(),
        b_minus: amp[n][0],
        b_plus: amp[n][1],
    };
    let rwa =
        response::solve_response(net, drive, xi).map_err(|e| OracleError::Spec(e.to_string()))?;
    Ok(TwoSidebandEstimate {
        rwa_error: sidebands.rwa_error(&rwa),
        stokes_ratio: sidebands.stokes_ratio(),
        sidebands,
        rwa,
        drift,
        duration,
    })
}

/// Initial condition of a nonlinear trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Start {
    /// All fields at rest.
    Vacuum,
    /// On mean-field branch `index` (ascending `x` order), with every
    /// amplitude scaled by `1 + kick`.
    Branch { index: usize, kick: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearOptions {
    pub start: Start,
    /// Largest relative distance between the demodulated mean and a branch
    /// for the trajectory to count as settled on it.
    pub settle_tol: f64,
}

impl Default for NonlinearOptions {
    fn default() -> Self {
        Self {
            start: Start::Vacuum,
            settle_tol: 1e-6,
        }
    }
}

/// Demodulated nonlinear trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearEstimate {
    pub branches: Vec<MeanFieldBranch>,
    /// Index of the branch the trajectory settled on.
    pub branch: usize,
    /// Relative distance between the demodulated mean and that branch.
    pub settle_residual: f64,
    pub alpha: Vec<Complex64>,
    pub beta: Complex64,
    /// Fluctuation sidebands around the mean, at `e^{-i Omega t}` and `e^{+i Omega t}`.
    pub sidebands: SidebandState,
    pub drift: f64,
    pub duration: f64,
}

/// Integrate the full classical equations of motion in the control frame,
///
/// ```text
/// a_j' = -(i delta_j + kappa_j/2) a_j - i g_j (b + conj(b)) a_j
///        + sqrt(kappa_ex,j) (eps_c,j e^{i vartheta_j} + eps_s,j e^{i phi_j} e^{-i Omega t})
/// b'   = -(i omega_m + gamma_m/2) b - i sum_j g_j |a_j|^2
/// ```
///
/// then identify the mean-field branch it settled on and extract the
/// fluctuation sidebands.
pub fn integrate_nonlinear(
    net: &PhysicalNetwork,
    drive: &Drive,
    xi: f64,
    spec: &TrajectorySpec,
    opts: &NonlinearOptions,
) -> Result<NonlinearEstimate, OracleError> {
    drive.validate_shape(net.ports.len())?;
    let branches = meanfield::solve_mean_fields(net)?;
    let decay = branches
        .iter()
        .filter(|b| b.stable)
        .map(|b| meanfield::slowest_decay(b, net))
        .fold(f64::INFINITY, f64::min);
    if !decay.is_finite() {
        return Err(MeanFieldError::Unstable.into());
    }
    let duration = spec.resolve_duration(decay)?;

    let n = net.ports.len();
    let y0 = match opts.start {
        Start::Vacuum => vec![ZERO; n + 1],
        Start::Branch { index, kick } => {
            let b = branches.get(index).ok_or_else(|| {
                OracleError::Spec(format!(
                    "branch {index} requested but only {} exist",
                    branches.len()
                ))
            })?;
            let s = 1.0 + kick;
            b.alpha.iter().map(|a| a * s).chain([b.beta * s]).collect()
        }
    };

    let omega = net.mech.omega_m + xi;
    let ports = &net.ports;
    let control: Vec<Complex64> = ports
        .iter()
        .map(|p| p.kappa_ex.sqrt() * Complex64::from_polar(p.drive_amplitude, p.drive_phase))
        .collect();
    let signal: Vec<Complex64> = ports
        .iter()
        .zip(&drive.signals)
        .map(|(p, s)| p.kappa_ex.sqrt() * s.field())
        .collect();
    let (w, gamma) = (net.mech.omega_m, net.mech.gamma_m);
    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let b = y[n];
        let x = 2.0 * b.re;
        let phase = Complex64::from_polar(1.0, -omega * t);
        let mut db = -Complex64::new(gamma / 2.0, w) * b;
        for (j, p) in ports.iter().enumerate() {
            let a = y[j];
            dy[j] = -Complex64::new(p.kappa() / 2.0, p.detuning + p.g * x) * a
                + control[j]
                + signal[j] * phase;
            db -= I * p.g * a.norm_sqr();
        }
        dy[n] = db;
    };

    let scale = branches
        .iter()
        .flat_map(|b| b.alpha.iter().chain([&b.beta]))
        .map(|z| z.norm())
        .chain(
            ports
                .iter()
                .zip(&signal)
                .zip(&control)
                .map(|((p, s), c)| 2.0 * (s.norm() + c.norm()) / p.kappa()),
        )
        .fold(1.0, f64::max);
    let tones = vec![vec![0.0, -omega, omega, -2.0 * omega, 2.0 * omega]; n + 1];
    let fit = integrate_and_fit(rhs, y0, duration, spec, &tones, 1e3 * scale);
    let fit = match (fit, opts.start) {
        (Ok(f), _) => f,
        (Err(OracleError::Diverged(_)), Start::Branch { index, .. }) => {
            return Err(OracleError::Escaped {
                from: index,
                to: None,
            })
        }
        (Err(e), _) => return Err(e),
    };
    let drift = match (check_drift(&fit, spec), opts.start) {
        (Ok(d), _) => d,
        (Err(_), Start::Branch { index, .. }) => {
            return Err(OracleError::Escaped {
                from: index,
                to: None,
            })
        }
        (Err(e), _) => return Err(e),
    };

    let amp = &fit.amplitudes;
    let alpha: Vec<Complex64> = amp[..n].iter().map(|c| c[0]).collect();
    let beta = amp[n][0];
    let (branch, settle_residual) = branches
        .iter()
        .map(|b| settle_distance(b, &alpha, beta))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one branch");
    let settled = settle_residual <= opts.settle_tol;
    if let Start::Branch { index, .. } = opts.start {
        if !settled || branch != index {
            return Err(OracleError::Escaped {
                from: index,
                to: settled.then_some(branch),
            });
        }
    }
    if !settled {
        return Err(OracleError::Unsettled(settle_residual));
    }
    Ok(NonlinearEstimate {
        sidebands: SidebandState {
            xi,
            a_minus: amp[..n].iter().map(|c| c[1]).collect(),
            a_plus: amp[..n].iter().map(|c| c[2]).collect(),
            b_minus: amp[n][1],
            b_plus: amp[n][2],
        },
        branches,
        branch,
        settle_residual,
        alpha,
        beta,
        drift,
        duration,
    })
}

fn settle_distance(b: &MeanFieldBranch, alpha: &[Complex64], beta: Complex64) -> f64 {
    let scale = max_norm(b.alpha.iter().chain([&b.beta]));
    let dist = b
        .alpha
        .iter()
        .zip(alpha)
        .map(|(x, y)| (x - y).norm())
        .fold((b.beta - beta).norm(), f64::max);
    if scale > 0.0 {
        dist / scale
    } else {
        dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinearPort, MechanicalMode, PortSignal};

    fn quick() -> TrajectorySpec {
        TrajectorySpec::default()
    }

    #[test]
    fn single_cavity_filter() {
        // Uncoupled port next to a well-damped mechanical mode.
        let net = LinearNetwork {
            mech: MechanicalMode {
                omega_m: 100.0,
                gamma_m: 0.5,
            },
            ports: vec![
                LinearPort::overcoupled(1.0, 0.0, 0.0),
                LinearPort::overcoupled(1.0, 0.0, 0.0),
            ],
        };
        let drive = Drive::single(2, 0);
        let xi = 0.7;
        let est = integrate_rwa(&net, &drive, xi, &quick()).unwrap();
        let exact = Complex64::new(1.0, 0.0) / Complex64::new(0.5, -xi);
        assert!((est.state.a_minus[0] - exact).norm() < 1e-8);
        assert!(est.state.b_minus.norm() < 1e-10);
    }

    #[test]
    fn duration_floor_enforced() {
        let spec = TrajectorySpec {
            duration: Some(10.0),
            ..quick()
        };
        assert!(matches!(
            spec.resolve_duration(1.0),
            Err(OracleError::Spec(_))
        ));
        assert_eq!(quick().resolve_duration(0.5).unwrap(), 80.0);
        let bad = TrajectorySpec {
            window: 1.0,
            ..quick()
        };
        assert!(bad.resolve_duration(1.0).is_err());
    }

    #[test]
    fn exact_two_sideband_without_coupling_has_no_stokes() {
        let net = LinearNetwork {
            mech: MechanicalMode {
                omega_m: 20.0,
                gamma_m: 0.1,
            },
            ports: vec![
                LinearPort::overcoupled(1.0, 0.0, 0.0),
                LinearPort::overcoupled(1.0, 0.0, 0.0),
            ],
        };
        let drive = Drive::new(vec![PortSignal::new(1.0, 0.3), PortSignal::new(0.5, -1.0)]);
        let s = two_sideband_steady_state(&net, None, &drive, 0.4).unwrap();
        assert_eq!(s.a_plus, vec![ZERO; 2]);
        assert_eq!(s.b_plus, ZERO);
        let rwa = response::solve_response(&net, &drive, 0.4).unwrap();
        assert!(s.rwa_error(&rwa) < 1e-14);
    }
}
