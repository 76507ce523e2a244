#![allow(dead_code)]

use num_complex::Complex64;
use omniport::model::{Drive, LinearNetwork, LinearPort, MechanicalMode, PortSignal};
use proptest::prelude::*;
use std::f64::consts::PI;

pub fn mech(gamma_m: f64) -> MechanicalMode {
    MechanicalMode {
        omega_m: 100.0,
        gamma_m,
    }
}

pub fn port() -> impl Strategy<Value = LinearPort> {
    (0.2..3.0f64, 0.0..1.0f64, 0.0..3.0f64, -PI..PI).prop_map(|(kex, k0, g, ph)| LinearPort {
        kappa_0: k0,
        kappa_ex: kex,
        g_mod: g,
        g_phase: ph,
    })
}

pub fn network(ports: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = LinearNetwork> {
    (prop::collection::vec(port(), ports), 1e-4..1.0f64).prop_map(|(ports, gamma)| LinearNetwork {
        mech: mech(gamma),
        ports,
    })
}

/// Drive with at least one signal: port 0 always carries one.
pub fn drive(n: usize) -> impl Strategy<Value = Drive> {
    (
        0.1..2.0f64,
        prop::collection::vec((0.0..2.0f64, -PI..PI), n - 1),
        -PI..PI,
    )
        .prop_map(|(a0, rest, p0)| {
            let mut s = vec![PortSignal::new(a0, p0)];
            s.extend(rest.into_iter().map(|(a, p)| PortSignal::new(a, p)));
            Drive::new(s)
        })
}

pub fn network_and_drive(
    ports: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = (LinearNetwork, Drive)> {
    network(ports).prop_flat_map(|net| {
        let n = net.len();
        (Just(net), drive(n))
    })
}

pub fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
