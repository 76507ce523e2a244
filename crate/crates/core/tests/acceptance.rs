//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use num_complex::Complex64;
use omniport::meanfield::{red_sideband_network, solve_mean_fields, PortTemplate};
use omniport::metrics::Excitation;
use omniport::metrics::{
    fipb_check, max_mech_excitation, routing_report, spectrum, Direction, Scenario,
};
use omniport::model::{
    DetuningGrid, Drive, LinearNetwork, LinearPort, MechanicalMode, PhysicalNetwork, PhysicalPort,
    PortSignal,
};
use omniport::oracle::{
    integrate_nonlinear, integrate_rwa, integrate_two_sideband, NonlinearOptions, TrajectorySpec,
};
use omniport::response::{
    closed_form_three_port, solve_response, transmission_drive, SymmetricThreePort,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn random_linear(r: &mut ChaCha8Rng, n: usize, lossy: bool) -> (LinearNetwork, Drive) {
    let gamma = 10f64.powf(r.random_range(-3.0..0.0));
    let ports = (0..n)
        .map(|_| LinearPort {
            kappa_0: if lossy {
                r.random_range(0.01..1.0)
            } else {
                0.0
            },
            kappa_ex: r.random_range(0.2..3.0),
            g_mod: r.random_range(0.2..3.0),
            g_phase: r.random_range(-PI..PI),
        })
        .collect();
    let mut signals: Vec<PortSignal> = (0..n)
        .map(|_| PortSignal::new(r.random_range(0.0..2.0), r.random_range(-PI..PI)))
        .collect();
    signals[0].amplitude += 0.1;
    (
        LinearNetwork {
            mech: MechanicalMode {
                omega_m: 100.0,
                gamma_m: gamma,
            },
            ports,
        },
        Drive::new(signals),
    )
}

fn symmetric(g_prime: f64, theta: f64, eta: f64, phi: f64) -> SymmetricThreePort {
    SymmetricThreePort {
        kappa: 1.0,
        gamma_m: 1e-3,
        g: 1.0,
        g_prime,
        theta,
        eta,
        phi,
    }
}

fn transmission(s: &SymmetricThreePort) -> Scenario {
    Scenario::new(
        s.network(),
        Excitation::Transmission {
            from: 0,
            to: 1,
            control: Some(s.control()),
        },
    )
    .unwrap()
}

fn routing(couplings: &[(f64, f64)]) -> Scenario {
    let net = LinearNetwork {
        mech: MechanicalMode {
            omega_m: 100.0,
            gamma_m: 1e-3,
        },
        ports: couplings
            .iter()
            .map(|&(g, th)| LinearPort::overcoupled(1.0, g, th))
            .collect(),
    };
    Scenario::new(net, Excitation::Drive(Drive::uniform(couplings.len(), 1.0))).unwrap()
}

fn grid() -> DetuningGrid {
    DetuningGrid::linspace(-5.0, 5.0, 2001).unwrap()
}

fn rate_at_zero(s: &Scenario) -> (f64, f64) {
    let t = s.evaluate(0.0).unwrap().transmission.unwrap();
    (t.forward, t.backward)
}

fn cross_solver() -> Outcome {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let lossy = r.random_bool(0.5);
        let (net, drive) = random_linear(&mut r, 3, lossy);
        let xi = r.random_range(-5.0..5.0);
        let a = solve_response(&net, &drive, xi).map_err(|e| e.to_string())?;
        let b = closed_form_three_port(&net, &drive, xi).map_err(|e| e.to_string())?;
        let scale = max_norm(&a.a_minus).max(a.b_minus.norm());
        let err = max_diff(&a.a_minus, &b.a_minus).max((a.b_minus - b.b_minus).norm()) / scale;
        worst = worst.max(err);
    }
    ensure(worst <= 1e-12, || {
        format!("worst relative difference {worst:e}")
    })?;
    Ok(format!("1000 cases, worst relative difference {worst:.1e}"))
}

fn omit_baseline() -> Outcome {
    let s = transmission(&symmetric(0.0, 0.0, 1.0, 0.0));
    let (f, b) = rate_at_zero(&s);
    ensure(
        (f - 0.99975).abs() <= 1e-4 && (b - 0.99975).abs() <= 1e-4,
        || format!("T(0) = {f}, {b}"),
    )?;
    let worst = spectrum(&s, &grid())
        .unwrap()
        .iter()
        .map(|r| {
            let t = r.transmission.unwrap();
            (t.forward - t.backward).abs()
        })
        .fold(0.0, f64::max);
    ensure(worst <= 1e-12, || {
        format!("reciprocity violated by {worst:e}")
    })?;
    Ok(format!("T(0) = {f:.6}, max |T_fwd - T_bwd| = {worst:.1e}"))
}

fn constructive_peak() -> Outcome {
    let (f, _) = rate_at_zero(&transmission(&symmetric(1.0, 0.0, 1.0, 0.0)));
    ensure((f - 1.77748).abs() <= 1e-4, || format!("T(0) = {f}"))?;
    Ok(format!("T(0) = {f:.6}"))
}

fn blockade() -> Outcome {
    let s = transmission(&symmetric(1.0, PI, 1.0, 0.0));
    let back = fipb_check(&s, &grid(), Direction::Backward).map_err(|e| e.to_string())?;
    ensure(back.max_rate <= 1e-20, || {
        format!("max T_bwd = {:e}", back.max_rate)
    })?;
    let (f, _) = rate_at_zero(&s);
    ensure((f - 1.77748).abs() <= 1e-4, || format!("T_fwd(0) = {f}"))?;
    let both = transmission(&symmetric(1.0, 0.0, 1.0, PI));
    let mut worst: f64 = 0.0;
    for d in [Direction::Forward, Direction::Backward] {
        worst = worst.max(
            fipb_check(&both, &grid(), d)
                .map_err(|e| e.to_string())?
                .max_rate,
        );
    }
    ensure(worst <= 1e-20, || {
        format!("bidirectional max rate {worst:e}")
    })?;
    Ok(format!(
        "max T_bwd = {:.1e}, T_fwd(0) = {f:.6}, bidirectional max = {worst:.1e}",
        back.max_rate
    ))
}

fn isolation_law() -> Outcome {
    let mut worst: f64 = 0.0;
    for phi in [PI / 4.0, PI / 2.0, 3.0 * PI / 4.0] {
        let t = transmission(&symmetric(1.0, PI, 1.0, phi))
            .evaluate(0.0)
            .unwrap()
            .transmission
            .unwrap();
        let expect = 1.0 / (phi / 2.0).tan().powi(2);
        worst = worst.max((t.isolation.value() - expect).abs() / expect);
    }
    ensure(worst <= 1e-6, || {
        format!("worst relative deviation {worst:e}")
    })?;
    let at0 = transmission(&symmetric(1.0, PI, 1.0, 0.0))
        .evaluate(0.0)
        .unwrap()
        .transmission
        .unwrap();
    ensure(at0.isolation.is_infinite(), || {
        format!("I(0) = {}", at0.isolation)
    })?;
    Ok(format!(
        "worst relative deviation {worst:.1e}, I(phi = 0) = {}",
        at0.isolation
    ))
}

fn enhanced_nonreciprocity() -> Outcome {
    let s = transmission(&symmetric(0.1, PI, 10.0, 0.0));
    let back = fipb_check(&s, &grid(), Direction::Backward).map_err(|e| e.to_string())?;
    ensure(back.max_rate <= 1e-20, || {
        format!("max T_bwd = {:e}", back.max_rate)
    })?;
    let (f, _) = rate_at_zero(&s);
    ensure((f - 3.9593).abs() <= 1e-3, || format!("T_fwd(0) = {f}"))?;
    let (base, _) = rate_at_zero(&transmission(&symmetric(1.0, PI, 1.0, 0.0)));
    ensure(f > 2.0 * base, || {
        format!("{f} is not more than twice {base}")
    })?;
    Ok(format!(
        "T_fwd(0) = {f:.5}, max T_bwd = {:.1e}",
        back.max_rate
    ))
}

fn routing_criterion() -> Outcome {
    let g1 = 3f64.sqrt() - 1.0;
    let rep = routing_report(&routing(&[(g1, PI), (1.0, 0.0), (1.0, 0.0)]), &grid())
        .map_err(|e| e.to_string())?;
    let s = &rep.at_zero.s;
    ensure(
        s[1] <= 1e-4 && s[2] <= 1e-4 && (s[0] - 3.0).abs() <= 1e-3,
        || format!("S(0) = {s:?}"),
    )?;
    let balanced = routing(&[(2.0, PI), (1.0, 0.0), (1.0, 0.0)]);
    let rep2 = routing_report(&balanced, &grid()).map_err(|e| e.to_string())?;
    let worst = rep2
        .points
        .iter()
        .flat_map(|p| p.s.iter().map(|v| (v - 1.0).abs()))
        .fold(0.0, f64::max);
    let b = max_mech_excitation(&balanced, &grid()).map_err(|e| e.to_string())?;
    ensure(worst <= 1e-10 && b <= 1e-20, || {
        format!("max |S - 1| = {worst:e}, max |b|^2 = {b:e}")
    })?;
    Ok(format!(
        "S(0) = [{:.5}, {:.1e}, {:.1e}]; balanced max |S - 1| = {worst:.1e}, max |b|^2 = {b:.1e}",
        s[0], s[1], s[2]
    ))
}

fn four_port() -> Outcome {
    let rep = routing_report(
        &routing(&[(1.0, PI), (1.0, 0.0), (1.0, 0.0), (1.0, 0.0)]),
        &grid(),
    )
    .map_err(|e| e.to_string())?;
    let s = &rep.at_zero.s;
    ensure(
        (s[0] - 4.0).abs() <= 1e-3 && s[1..].iter().all(|&v| v <= 1e-4),
        || format!("S(0) = {s:?}"),
    )?;
    let split = routing(&[(1.0, PI / 2.0), (1.0, PI / 2.0), (1.0, 0.0), (1.0, 0.0)]);
    let fine = DetuningGrid::linspace(-5.0, 5.0, 10_001).unwrap();
    let recs = spectrum(&split, &fine).map_err(|e| e.to_string())?;
    let best = recs
        .iter()
        .max_by(|a, b| a.s[0].total_cmp(&b.s[0]))
        .unwrap();
    let band = |v: &[f64], hi: [usize; 2], lo: [usize; 2]| {
        hi.iter().all(|&j| (v[j] - 2.0).abs() <= 1e-2) && lo.iter().all(|&j| v[j] <= 1e-3)
    };
    ensure(band(&best.s, [0, 1], [2, 3]), || {
        format!("band at xi = {}: {:?}", best.xi, best.s)
    })?;
    let mirror = split.evaluate(-best.xi).map_err(|e| e.to_string())?;
    ensure(band(&mirror.s, [2, 3], [0, 1]), || {
        format!("mirror at xi = {}: {:?}", -best.xi, mirror.s)
    })?;
    Ok(format!(
        "S1(0) = {:.5}; split band at xi = {:+.3}: S1 = S2 = {:.4}, S3 = S4 = {:.1e}",
        s[0], best.xi, best.s[0], best.s[2]
    ))
}

fn energy_balance() -> Outcome {
    let mut r = rng(9);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = r.random_range(2..=4);
        let (net, drive) = random_linear(&mut r, n, true);
        let xi = r.random_range(-5.0..5.0);
        let s = solve_response(&net, &drive, xi).map_err(|e| e.to_string())?;
        let inflow = drive.input_power();
        let outflow: f64 = s.outputs(&net, &drive).iter().map(|o| o.norm_sqr()).sum();
        let absorbed = net
            .ports
            .iter()
            .zip(&s.a_minus)
            .map(|(p, a)| p.kappa_0 * a.norm_sqr())
            .sum::<f64>()
            + net.mech.gamma_m * s.b_minus.norm_sqr();
        worst = worst.max(((inflow - outflow) - absorbed).abs() / inflow);
    }
    ensure(worst <= 1e-10, || {
        format!("worst relative imbalance {worst:e}")
    })?;
    Ok(format!("1000 cases, worst relative imbalance {worst:.1e}"))
}

fn oracle_agreement() -> Outcome {
    let spec = TrajectorySpec::default();
    let mut r = rng(10);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = r.random_range(2..=4);
        let lossy = r.random_bool(0.5);
        let (net, drive) = random_linear(&mut r, n, lossy);
        let xi = r.random_range(-5.0..5.0);
        let est = integrate_rwa(&net, &drive, xi, &spec).map_err(|e| e.to_string())?;
        let exact = solve_response(&net, &drive, xi).map_err(|e| e.to_string())?;
        let scale = max_norm(&exact.a_minus).max(exact.b_minus.norm());
        worst = worst.max(
            max_diff(&est.state.a_minus, &exact.a_minus)
                .max((est.state.b_minus - exact.b_minus).norm())
                / scale,
        );
    }
    ensure(worst <= 1e-6, || format!("RWA trajectory off by {worst:e}"))?;

    let mut errors = Vec::new();
    for w in [1e2, 1e3, 1e4] {
        let mut net = symmetric(1.0, 0.0, 1.0, 0.0).network();
        net.mech.omega_m = w;
        let drive = transmission_drive(3, 0, None).unwrap();
        let est =
            integrate_two_sideband(&net, None, &drive, 0.0, &spec).map_err(|e| e.to_string())?;
        errors.push(est.rwa_error);
    }
    ensure(errors[0] <= 3e-2, || {
        format!("RWA error {:e} at omega_m = 100", errors[0])
    })?;
    ensure(errors.windows(2).all(|p| p[1] < p[0]), || {
        format!("RWA errors not decreasing: {errors:?}")
    })?;

    let mech = MechanicalMode {
        omega_m: 100.0,
        gamma_m: 1e-3,
    };
    let t = PortTemplate {
        kappa_0: 0.0,
        kappa_ex: 1.0,
        g: 1e-3,
    };
    let net = red_sideband_network(mech, &[t; 3], &[Complex64::new(1.0, 0.0); 3])
        .map_err(|e| e.to_string())?;
    let zero = Drive::new(vec![PortSignal::default(); 3]);
    let est = integrate_nonlinear(&net, &zero, 0.0, &spec, &NonlinearOptions::default())
        .map_err(|e| e.to_string())?;
    ensure(est.settle_residual <= 1e-8, || {
        format!("settle residual {:e}", est.settle_residual)
    })?;
    Ok(format!(
        "RWA worst {worst:.1e} over 50 cases; two-sideband RWA error {:.2e} / {:.2e} / {:.2e}; settle residual {:.1e}",
        errors[0], errors[1], errors[2], est.settle_residual
    ))
}

fn physical_port(g: f64, eps: f64, phase: f64, detuning: f64, kappa_0: f64) -> PhysicalPort {
    PhysicalPort {
        kappa_0,
        kappa_ex: 1.0,
        g,
        drive_amplitude: eps,
        drive_phase: phase,
        detuning,
    }
}

fn random_physical(r: &mut ChaCha8Rng, drive_scale: f64) -> PhysicalNetwork {
    let n = r.random_range(2..=4);
    PhysicalNetwork {
        mech: MechanicalMode {
            omega_m: 20.0,
            gamma_m: r.random_range(0.01..1.0),
        },
        ports: (0..n)
            .map(|_| {
                physical_port(
                    r.random_range(0.0..0.2),
                    drive_scale * r.random_range(0.0..60.0),
                    r.random_range(-PI..PI),
                    r.random_range(-5.0..5.0),
                    r.random_range(0.0..0.5),
                )
            })
            .collect(),
    }
}

fn fixed_point(net: &PhysicalNetwork) -> f64 {
    let (w, g) = (net.mech.omega_m, net.mech.gamma_m);
    let c = 8.0 * w / (g * g + 4.0 * w * w);
    let mut x: f64 = 0.0;
    for _ in 0..100_000 {
        let next = -c
            * net
                .ports
                .iter()
                .map(|p| {
                    let k = p.kappa();
                    let d = p.detuning + p.g * x;
                    4.0 * p.g * p.kappa_ex * p.drive_amplitude.powi(2) / (k * k + 4.0 * d * d)
                })
                .sum::<f64>();
        let done = (next - x).abs() <= 1e-15 * next.abs();
        x = next;
        if done {
            break;
        }
    }
    x
}

fn mean_field() -> Outcome {
    let mech = MechanicalMode {
        omega_m: 100.0,
        gamma_m: 1e-3,
    };
    let uncoupled = PhysicalNetwork {
        mech,
        ports: vec![
            physical_port(0.0, 3.0, 0.4, 1.5, 0.2),
            physical_port(0.0, 0.7, -1.0, -2.0, 0.0),
        ],
    };
    let b = solve_mean_fields(&uncoupled).map_err(|e| e.to_string())?;
    ensure(b.len() == 1 && b[0].beta.norm() == 0.0, || {
        format!("{} branches", b.len())
    })?;
    for (p, a) in uncoupled.ports.iter().zip(&b[0].alpha) {
        let expect =
            2.0 * p.kappa_ex.sqrt() * Complex64::from_polar(p.drive_amplitude, p.drive_phase)
                / Complex64::new(p.kappa(), 2.0 * p.detuning);
        ensure((a - expect).norm() <= 1e-12 * expect.norm(), || {
            format!("alpha {a} vs {expect}")
        })?;
    }
    let undriven = PhysicalNetwork {
        mech,
        ports: vec![
            physical_port(1e-3, 0.0, 0.0, 100.0, 0.0),
            physical_port(2e-3, 0.0, 0.0, 90.0, 0.0),
        ],
    };
    let b = solve_mean_fields(&undriven).map_err(|e| e.to_string())?;
    ensure(
        b.len() == 1 && b[0].x == 0.0 && b[0].alpha.iter().all(|a| a.norm() == 0.0),
        || "zero drive is not the vacuum".into(),
    )?;

    let mut r = rng(11);
    let (mut compared, mut worst) = (0, 0.0f64);
    while compared < 100 {
        let net = random_physical(&mut r, 0.05);
        let br = solve_mean_fields(&net).map_err(|e| e.to_string())?;
        if br.len() != 1 {
            continue;
        }
        let x = fixed_point(&net);
        worst = worst.max((br[0].x - x).abs() / x.abs().max(1e-12));
        compared += 1;
    }
    ensure(worst <= 1e-8, || {
        format!("fixed-point iteration off by {worst:e}")
    })?;

    let mut r = rng(12);
    let mut multi = 0;
    for _ in 0..100 {
        let net = random_physical(&mut r, 1.0);
        let n = solve_mean_fields(&net).map_err(|e| e.to_string())?.len();
        ensure(n % 2 == 1, || format!("{n} branches"))?;
        multi += usize::from(n > 1);
    }
    Ok(format!(
        "closed forms exact; fixed-point worst {worst:.1e}; 100 configs odd ({multi} multistable)"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("cross-solver identity", cross_solver),
        ("OMIT baseline", omit_baseline),
        ("constructive-interference peak", constructive_peak),
        ("frequency-independent blockade", blockade),
        ("isolation-ratio law", isolation_law),
        ("enhanced nonreciprocity", enhanced_nonreciprocity),
        ("three-port routing", routing_criterion),
        ("four-port routing", four_port),
        ("energy balance", energy_balance),
        ("oracle agreement", oracle_agreement),
        ("mean-field solver", mean_field),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
