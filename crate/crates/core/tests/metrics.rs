use omniport::metrics::{
    fipb_check, max_mech_excitation, routing_report, spectrum, Direction, Isolation, Scenario,
};
use omniport::model::DetuningGrid;
use omniport::scenario::ScenarioDocument;
use omniport::MetricsError;
use std::path::PathBuf;

fn doc(name: &str) -> ScenarioDocument {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.toml"));
    ScenarioDocument::load(&p).unwrap()
}

fn scenario(d: &ScenarioDocument) -> Scenario {
    d.scenario().unwrap().0
}

fn grid() -> DetuningGrid {
    DetuningGrid::linspace(-5.0, 5.0, 2001).unwrap()
}

#[test]
fn omit_baseline_is_reciprocal() {
    let recs = spectrum(&scenario(&doc("fig2a")), &grid()).unwrap();
    for r in &recs {
        let t = r.transmission.unwrap();
        assert!((t.forward - t.backward).abs() <= 1e-12);
    }
    let mid = &recs[1000];
    assert_eq!(mid.xi, 0.0);
    assert!((mid.transmission.unwrap().forward - 0.99975).abs() <= 1e-4);
}

#[test]
fn blockade_detector() {
    let s = scenario(&doc("fig2d_blockade"));
    let back = fipb_check(&s, &grid(), Direction::Backward).unwrap();
    assert!(back.holds && back.max_rate <= 1e-20);
    let fwd = fipb_check(&s, &grid(), Direction::Forward).unwrap();
    assert!(!fwd.holds);
    assert!((fwd.max_rate - 1.777_48).abs() < 1e-4);
    assert_eq!(fwd.argmax, 0.0);

    let both = scenario(&doc("fig3_bidirectional"));
    for d in [Direction::Forward, Direction::Backward] {
        assert!(fipb_check(&both, &grid(), d).unwrap().holds);
    }
}

#[test]
fn blockade_needs_the_full_span() {
    let s = scenario(&doc("fig2d_blockade"));
    let narrow = DetuningGrid::linspace(-1.0, 1.0, 11).unwrap();
    assert!(matches!(
        fipb_check(&s, &narrow, Direction::Backward),
        Err(MetricsError::GridTooNarrow { .. })
    ));
}

#[test]
fn blocked_direction_reports_infinite_isolation() {
    let r = scenario(&doc("fig4b")).evaluate(0.0).unwrap();
    let t = r.transmission.unwrap();
    assert!(t.isolation.is_infinite());
    assert!((t.forward - 3.9593).abs() <= 1e-3);
    assert!(Isolation::from_rates(0.0, 0.0).is_infinite());
    assert_eq!(Isolation::from_rates(1.0, 4.0).value(), 0.25);
}

#[test]
fn routing_synthesis_at_the_critical_coupling() {
    let g1 = 3f64.sqrt() - 1.0;
    let d = doc("fig5b").with_knob("network.ports.1.G_mod", g1).unwrap();
    let rep = routing_report(&scenario(&d), &grid()).unwrap();
    let s = &rep.at_zero.s;
    assert!(s[1] <= 1e-4 && s[2] <= 1e-4, "{s:?}");
    assert!((s[0] - 3.0).abs() <= 1e-3, "{s:?}");
    assert_eq!(rep.synthesis_port, Some(0));
}

#[test]
fn routing_into_port_two() {
    // theta_2 = pi moves the synthesis port; at |G_2| = sqrt 3 - 1 it is exact.
    let d = doc("fig5d")
        .with_knob("network.ports.2.G_mod", 3f64.sqrt() - 1.0)
        .unwrap();
    let rep = routing_report(&scenario(&d), &grid()).unwrap();
    assert_eq!(rep.synthesis_port, Some(1));
}

#[test]
fn balanced_couplings_reflect_everything() {
    let s = scenario(&doc("fig5c"));
    let rep = routing_report(&s, &grid()).unwrap();
    for p in &rep.points {
        for v in &p.s {
            assert!((v - 1.0).abs() <= 1e-10, "{} {v}", p.xi);
        }
    }
    assert!(max_mech_excitation(&s, &grid()).unwrap() <= 1e-20);
}

#[test]
fn routing_requires_uniform_drive() {
    assert!(matches!(
        routing_report(&scenario(&doc("fig2b")), &grid()),
        Err(MetricsError::NotUniformDrive)
    ));
}

#[test]
fn four_port_synthesis() {
    let rep = routing_report(&scenario(&doc("fig6a")), &grid()).unwrap();
    let s = &rep.at_zero.s;
    assert!((s[0] - 4.0).abs() <= 1e-3);
    assert!(s[1..].iter().all(|&v| v <= 1e-4), "{s:?}");
}

#[test]
fn four_port_equal_split_bands() {
    let s = scenario(&doc("fig6b"));
    let fine = DetuningGrid::linspace(-5.0, 5.0, 10_001).unwrap();
    let recs = spectrum(&s, &fine).unwrap();
    let best = recs
        .iter()
        .max_by(|a, b| a.s[0].total_cmp(&b.s[0]))
        .unwrap();
    assert!((best.s[0] - 2.0).abs() <= 1e-2 && (best.s[1] - 2.0).abs() <= 1e-2);
    assert!(best.s[2] <= 1e-3 && best.s[3] <= 1e-3);
    let mirror = s.evaluate(-best.xi).unwrap();
    assert!((mirror.s[2] - 2.0).abs() <= 1e-2 && (mirror.s[3] - 2.0).abs() <= 1e-2);
    assert!(mirror.s[0] <= 1e-3 && mirror.s[1] <= 1e-3);
}

#[test]
fn spectrum_is_in_grid_order() {
    let recs = spectrum(&scenario(&doc("fig2b")), &grid()).unwrap();
    let xs: Vec<f64> = recs.iter().map(|r| r.xi).collect();
    assert_eq!(xs, grid().values());
}
