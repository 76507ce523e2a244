//! Classical mean-field fixed points of the driven network.
//!
//! Setting time derivatives to zero (signals and noise dropped) gives
//!
//! ```text
//! alpha_j = 2 sqrt(kappa_ex,j) eps_c,j e^{i vartheta_j} / (kappa_j + 2 i delta'_j)
//! beta    = -2 i sum_j g_j |alpha_j|^2 / (gamma_m + 2 i omega_m)
//! delta'_j = delta_j + g_j x,   x = beta + conj(beta)
//! ```
//!
//! Everything depends on the one real number `x`, which solves
//!
//! ```text
//! F(x) = x + 8 omega_m / (gamma_m^2 + 4 omega_m^2) * sum_j 4 g_j kappa_ex,j eps_c,j^2 / (kappa_j^2 + 4 (delta_j + g_j x)^2) = 0.
//! ```
//!
//! Roots are isolated exhaustively on `[-X, X]` by a dense scan followed by
//! interval subdivision, where each interval is either proven root-free
//! (Lipschitz exclusion), proven to hold exactly one root (monotone with a
//! sign change), or split further. Exact interval bounds of `F'` are cheap
//! because every term is a rational function of one variable.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, CavityLine};
use crate::error::MeanFieldError;
use crate::model::{
    validate, LinearNetwork, LinearPort, MechanicalMode, NetworkConfig, PhysicalNetwork,
    PhysicalPort,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One self-consistent classical steady state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldBranch {
    /// `beta + conj(beta)`.
    pub x: f64,
    pub alpha: Vec<Complex64>,
    pub beta: Complex64,
    pub delta_eff: Vec<f64>,
    /// Effective couplings `G_j = g_j alpha_j`.
    pub couplings: Vec<Complex64>,
    pub stable: bool,
}

impl MeanFieldBranch {
    /// Relative residuals of the cavity and mechanical fixed-point equations,
    /// with `delta'_j` recomputed from `beta`.
    pub fn residuals(&self, net: &PhysicalNetwork) -> (f64, f64) {
        let x = 2.0 * self.beta.re;
        let mut cavity: f64 = 0.0;
        let mut power = 0.0;
        let mut scale = 0.0;
        for (p, a) in net.ports.iter().zip(&self.alpha) {
            let delta = p.detuning + p.g * x;
            let src =
                2.0 * p.kappa_ex.sqrt() * Complex64::from_polar(p.drive_amplitude, p.drive_phase);
            let lhs = a * Complex64::new(p.kappa(), 2.0 * delta);
            let r = if src.norm() > 0.0 {
                (lhs - src).norm() / src.norm()
            } else {
                lhs.norm()
            };
            cavity = cavity.max(r);
            power += p.g * a.norm_sqr();
            scale += p.g.abs() * a.norm_sqr();
        }
        let mech =
            self.beta * Complex64::new(net.mech.gamma_m, 2.0 * net.mech.omega_m) + 2.0 * I * power;
        let mech = if scale > 0.0 {
            mech.norm() / (2.0 * scale)
        } else {
            mech.norm()
        };
        (cavity, mech)
    }

    fn lines(&self, net: &PhysicalNetwork) -> Vec<CavityLine> {
        net.ports
            .iter()
            .zip(&self.delta_eff)
            .zip(&self.couplings)
            .map(|((p, &d), &g)| CavityLine {
                kappa: p.kappa(),
                detuning: d,
                coupling: g,
            })
            .collect()
    }
}

/// Scan controls for [`solve_mean_fields_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootScan {
    /// Number of uniform scan intervals on `[-X, X]`.
    pub points: usize,
    /// Maximum number of bisections of a scan interval during isolation.
    pub max_depth: u32,
}

impl Default for RootScan {
    fn default() -> Self {
        Self {
            points: 10_000,
            max_depth: 60,
        }
    }
}

/// `F(x)` and the derivative enclosures used by the root isolation.
struct SelfConsistency<'a> {
    ports: &'a [PhysicalPort],
    weights: Vec<f64>,
}

impl<'a> SelfConsistency<'a> {
    fn new(net: &'a PhysicalNetwork) -> Self {
        let (w, g) = (net.mech.omega_m, net.mech.gamma_m);
        let c = 8.0 * w / (g * g + 4.0 * w * w);
        let weights = net
            .ports
            .iter()
            .map(|p| c * 4.0 * p.g * p.kappa_ex * p.drive_amplitude * p.drive_amplitude)
            .collect();
        Self {
            ports: &net.ports,
            weights,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        x + self
            .ports
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| {
                let u = p.detuning + p.g * x;
                let k = p.kappa();
                w / (k * k + 4.0 * u * u)
            })
            .sum::<f64>()
    }

    fn derivative(&self, x: f64) -> f64 {
        1.0 + self
            .ports
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| {
                let u = p.detuning + p.g * x;
                let k = p.kappa();
                let q = k * k + 4.0 * u * u;
                -w * 8.0 * u * p.g / (q * q)
            })
            .sum::<f64>()
    }

    /// Enclosure `[lo, hi]` of `F'` over `[a, b]`.
    fn derivative_bounds(&self, a: f64, b: f64) -> (f64, f64) {
        let (mut lo, mut hi) = (1.0, 1.0);
        for (p, w) in self.ports.iter().zip(&self.weights) {
            if *w == 0.0 || p.g == 0.0 {
                continue;
            }
            let k = p.kappa();
            let (u0, u1) = {
                let ua = p.detuning + p.g * a;
                let ub = p.detuning + p.g * b;
                (ua.min(ub), ua.max(ub))
            };
            // psi(u) = 8u / (k^2 + 4u^2)^2 is odd with extrema at +-k/(2 sqrt 3).
            let psi = |u: f64| {
                let q = k * k + 4.0 * u * u;
                8.0 * u / (q * q)
            };
            let peak = k / (2.0 * 3f64.sqrt());
            let mut pmin = psi(u0).min(psi(u1));
            let mut pmax = psi(u0).max(psi(u1));
            if u0 <= peak && peak <= u1 {
                pmax = psi(peak);
            }
            if u0 <= -peak && -peak <= u1 {
                pmin = psi(-peak);
            }
            // term derivative = -w g psi(u)
            let s = -w * p.g;
            let (t0, t1) = (s * pmin, s * pmax);
            lo += t0.min(t1);
            hi += t0.max(t1);
        }
        (lo, hi)
    }
}

/// Half-width `X` of the search interval:
/// `16 N max_j(|g_j| eps_c,j^2 kappa_ex,j / (omega_m kappa_j^2))`,
/// twice the a-priori bound on any root.
pub fn search_half_width(net: &PhysicalNetwork) -> f64 {
    let w = net.mech.omega_m;
    let worst = net
        .ports
        .iter()
        .map(|p| {
            let k = p.kappa();
            p.g.abs() * p.drive_amplitude * p.drive_amplitude * p.kappa_ex / (w * k * k)
        })
        .fold(0.0, f64::max);
    16.0 * net.ports.len() as f64 * worst
}

/// The scalar self-consistency function `F(x)`.
pub fn self_consistency(net: &PhysicalNetwork, x: f64) -> f64 {
    SelfConsistency::new(net).eval(x)
}

/// Every mean-field branch, sorted by `x` ascending, with default scan settings.
pub fn solve_mean_fields(net: &PhysicalNetwork) -> Result<Vec<MeanFieldBranch>, MeanFieldError> {
    solve_mean_fields_with(net, RootScan::default())
}

pub fn solve_mean_fields_with(
    net: &PhysicalNetwork,
    scan: RootScan,
) -> Result<Vec<MeanFieldBranch>, MeanFieldError> {
    validate(&NetworkConfig::Physical(net.clone())).into_result()?;
    let roots = find_roots(net, scan)?;
    Ok(roots.into_iter().map(|x| expand_branch(net, x)).collect())
}

fn find_roots(net: &PhysicalNetwork, scan: RootScan) -> Result<Vec<f64>, MeanFieldError> {
    let half = search_half_width(net);
    if half == 0.0 {
        return Ok(vec![0.0]);
    }
    let f = SelfConsistency::new(net);
    let grid = crate::model::linspace(-half, half, scan.points.max(2) + 1);
    let values: Vec<f64> = grid.iter().map(|&x| f.eval(x)).collect();
    let fail = || MeanFieldError::Bracket {
        lo: -half,
        hi: half,
    };
    if values[0] >= 0.0 || values[values.len() - 1] <= 0.0 {
        return Err(fail());
    }

    let mut roots = Vec::new();
    let mut stack: Vec<(f64, f64, f64, f64, u32)> = Vec::new();
    for i in 0..grid.len() - 1 {
        stack.push((grid[i], grid[i + 1], values[i], values[i + 1], 0));
        while let Some((mut a, mut b, mut fa, mut fb, depth)) = stack.pop() {
            // An exact zero on the left endpoint is a root; a zero on the right
            // endpoint is picked up by the neighbouring interval (F(X) > 0).
            if fa == 0.0 {
                roots.push(a);
                a += (b - a) * 1e-12;
                fa = f.eval(a);
            }
            if fb == 0.0 {
                b -= (b - a) * 1e-12;
                fb = f.eval(b);
            }
            let (dlo, dhi) = f.derivative_bounds(a, b);
            let monotone = dlo > 0.0 || dhi < 0.0;
            if (fa < 0.0) != (fb < 0.0) {
                if monotone {
                    roots.push(polish(&f, a, b, fa));
                    continue;
                }
            } else {
                let lipschitz = dlo.abs().max(dhi.abs());
                if monotone || fa.abs() + fb.abs() > lipschitz * (b - a) {
                    continue;
                }
            }
            if depth >= scan.max_depth {
                return Err(fail());
            }
            let m = 0.5 * (a + b);
            let fm = f.eval(m);
            stack.push((m, b, fm, fb, depth + 1));
            stack.push((a, m, fa, fm, depth + 1));
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).expect("roots are finite"));
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * half);
    Ok(roots)
}

/// Bisection to full precision on a bracket, then one Newton step if it helps.
fn polish(f: &SelfConsistency<'_>, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f.eval(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let x = 0.5 * (a + b);
    let fx = f.eval(x);
    let d = f.derivative(x);
    if d != 0.0 {
        let y = x - fx / d;
        if y >= a && y <= b && f.eval(y).abs() < fx.abs() {
            return y;
        }
    }
    x
}

/// Expand a root `x` into the full set of amplitudes and assess stability.
pub fn expand_branch(net: &PhysicalNetwork, x: f64) -> MeanFieldBranch {
    let delta_eff: Vec<f64> = net.ports.iter().map(|p| p.detuning + p.g * x).collect();
    let alpha: Vec<Complex64> = net
        .ports
        .iter()
        .zip(&delta_eff)
        .map(|(p, &d)| {
            2.0 * p.kappa_ex.sqrt() * Complex64::from_polar(p.drive_amplitude, p.drive_phase)
                / Complex64::new(p.kappa(), 2.0 * d)
        })
        .collect();
    let power: f64 = net
        .ports
        .iter()
        .zip(&alpha)
        .map(|(p, a)| p.g * a.norm_sqr())
        .sum();
    let beta = -2.0 * I * power / Complex64::new(net.mech.gamma_m, 2.0 * net.mech.omega_m);
    let couplings = net.ports.iter().zip(&alpha).map(|(p, a)| p.g * a).collect();
    let mut branch = MeanFieldBranch {
        x,
        alpha,
        beta,
        delta_eff,
        couplings,
        stable: false,
    };
    branch.stable = assess_stability(&branch, net);
    branch
}

/// Drift matrix of the linearized fluctuations around `branch`, in quadratures,
/// without the rotating-wave approximation. Size `2N + 2`.
pub fn drift_matrix(branch: &MeanFieldBranch, net: &PhysicalNetwork) -> DMatrix<f64> {
    dynamics::full_drift(&branch.lines(net), net.mech.omega_m, net.mech.gamma_m)
}

/// True iff every eigenvalue of the linearized drift has a negative real part.
pub fn assess_stability(branch: &MeanFieldBranch, net: &PhysicalNetwork) -> bool {
    dynamics::spectral_abscissa(&drift_matrix(branch, net)) < 0.0
}

/// Slowest decay rate `min |Re lambda|` of the linearized dynamics around `branch`.
pub fn slowest_decay(branch: &MeanFieldBranch, net: &PhysicalNetwork) -> f64 {
    -dynamics::spectral_abscissa(&drift_matrix(branch, net))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizeOptions {
    /// Allowed `|delta'_j - omega_m|` as a fraction of `omega_m`.
    pub sideband_tol: f64,
    /// Accept ports whose effective coupling vanishes.
    pub allow_zero_coupling: bool,
}

impl Default for LinearizeOptions {
    fn default() -> Self {
        Self {
            sideband_tol: 1e-6,
            allow_zero_coupling: false,
        }
    }
}

/// Linearized network implied by a stable branch whose effective detunings
/// sit on the red sideband.
pub fn to_linearized(
    branch: &MeanFieldBranch,
    net: &PhysicalNetwork,
    opts: LinearizeOptions,
) -> Result<LinearNetwork, MeanFieldError> {
    if !branch.stable {
        return Err(MeanFieldError::Unstable);
    }
    let w = net.mech.omega_m;
    let limit = opts.sideband_tol * w;
    let worst = branch
        .delta_eff
        .iter()
        .map(|d| (d - w).abs())
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1));
    if let Some((port, offset)) = worst {
        if offset > limit {
            return Err(MeanFieldError::OffSideband {
                port: port + 1,
                offset,
                limit,
            });
        }
    }
    let ports = net
        .ports
        .iter()
        .zip(&branch.couplings)
        .enumerate()
        .map(|(j, (p, g))| {
            if g.norm() == 0.0 && !opts.allow_zero_coupling {
                return Err(MeanFieldError::ZeroCoupling { port: j + 1 });
            }
            Ok(LinearPort {
                kappa_0: p.kappa_0,
                kappa_ex: p.kappa_ex,
                g_mod: g.norm(),
                g_phase: if g.norm() == 0.0 { 0.0 } else { g.arg() },
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(LinearNetwork {
        mech: net.mech,
        ports,
    })
}

/// Loss and coupling constants of a port before its drive is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortTemplate {
    pub kappa_0: f64,
    pub kappa_ex: f64,
    pub g: f64,
}

/// Physical network whose mean field lands exactly on the red sideband
/// (`delta'_j = omega_m`) with the requested effective couplings `G_j`.
///
/// Inverts the cavity fixed-point equation at `delta' = omega_m` for the
/// drive amplitude and phase, then backs out the bare detunings from the
/// resulting mechanical displacement.
pub fn red_sideband_network(
    mech: MechanicalMode,
    templates: &[PortTemplate],
    couplings: &[Complex64],
) -> Result<PhysicalNetwork, MeanFieldError> {
    if templates.len() != couplings.len() {
        return Err(crate::error::ModelError::PortCountMismatch {
            expected: templates.len(),
            found: couplings.len(),
        }
        .into());
    }
    let w = mech.omega_m;
    let mut alphas = Vec::with_capacity(templates.len());
    for (j, (t, g)) in templates.iter().zip(couplings).enumerate() {
        if t.g == 0.0 {
            if g.norm() != 0.0 {
                return Err(MeanFieldError::Calibration {
                    port: j + 1,
                    reason: "nonzero coupling requested with g = 0".into(),
                });
            }
            alphas.push(Complex64::new(0.0, 0.0));
        } else {
            alphas.push(g / t.g);
        }
    }
    let power: f64 = templates
        .iter()
        .zip(&alphas)
        .map(|(t, a)| t.g * a.norm_sqr())
        .sum();
    let x = -8.0 * w * power / (mech.gamma_m * mech.gamma_m + 4.0 * w * w);
    let ports = templates
        .iter()
        .zip(&alphas)
        .map(|(t, a)| {
            let kappa = t.kappa_0 + t.kappa_ex;
            let drive = a * Complex64::new(kappa, 2.0 * w) / (2.0 * t.kappa_ex.sqrt());
            PhysicalPort {
                kappa_0: t.kappa_0,
                kappa_ex: t.kappa_ex,
                g: t.g,
                drive_amplitude: drive.norm(),
                drive_phase: if drive.norm() == 0.0 {
                    0.0
                } else {
                    drive.arg()
                },
                detuning: w - t.g * x,
            }
        })
        .collect();
    Ok(PhysicalNetwork { mech, ports })
}
