use proptest::prelude::*;
use revint::dynamics::{IntegratorRegistry, State};
use revint::fixedpoint::Fixed;
use revint::forces::FieldConfig;
use revint::scene::{self, Scene};
use revint::simulate::audit_reversal;
use revint::{RecordingPolicy, Simulation};

fn fixed(values: &[f64]) -> Vec<Fixed> {
    values.iter().map(|&r| Fixed::from_real(r).unwrap()).collect()
}

fn gravity_scene(q: Vec<f64>, p: Vec<f64>, h: f64, integrator: &str) -> Scene {
    let n = q.len() / 2;
    Scene {
        name: "random-gravity".into(),
        n,
        d: 2,
        h,
        integrator: integrator.into(),
        field: FieldConfig::new("gravity"),
        q0: fixed(&q),
        p0: fixed(&p),
    }
}

fn integrator_name() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("position-verlet"), Just("velocity-verlet")]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_gravity_scenes_round_trip(
        q in prop::collection::vec(-1.0f64..1.0, 6..=12).prop_filter("even", |v| v.len() % 2 == 0),
        p_scale in 0.0f64..0.5,
        h in prop_oneof![1e-4f64..0.02, -0.02f64..-1e-4],
        steps in 1i64..300,
        integrator in integrator_name(),
    ) {
        let p: Vec<f64> = q.iter().rev().map(|x| p_scale * x).collect();
        let sim = Simulation::new(gravity_scene(q, p, h, integrator)).unwrap();
        let fwd = sim.run(steps, RecordingPolicy::hashes_only()).unwrap();
        let back = sim.run_from(fwd.final_state.clone(), -steps, RecordingPolicy::hashes_only()).unwrap();
        prop_assert_eq!(back.final_state, sim.initial_state());
    }

    #[test]
    fn random_chain_states_round_trip(
        jitter in prop::collection::vec(-0.05f64..0.05, 8),
        p in prop::collection::vec(-1.0f64..1.0, 8),
        steps in 1i64..400,
        integrator in integrator_name(),
    ) {
        let mut sc = scene::chain(4);
        sc.integrator = integrator.into();
        let q: Vec<f64> = sc.q0.iter().zip(&jitter).map(|(x, j)| x.to_real() + j).collect();
        sc.q0 = fixed(&q);
        sc.p0 = fixed(&p);
        let sim = Simulation::new(sc).unwrap();
        let fwd = sim.run(steps, RecordingPolicy::hashes_only()).unwrap();
        let back = sim.run_from(fwd.final_state.clone(), -steps, RecordingPolicy::hashes_only()).unwrap();
        prop_assert_eq!(back.final_state, sim.initial_state());
    }

    #[test]
    fn product_negation_is_exact(h: f64, x: f64) {
        prop_assume!(h.is_finite() && x.is_finite());
        prop_assert_eq!(((-h) * x).to_bits(), (-(h * x)).to_bits());
        prop_assert_eq!(((0.5 * -h) * x).to_bits(), (-((0.5 * h) * x)).to_bits());
    }
}

#[test]
fn backward_hashes_retrace_forward_hashes() {
    let sim = Simulation::new(scene::gravity_ring(16)).unwrap();
    let fwd = sim.run(1500, RecordingPolicy::hashes_only()).unwrap();
    let back = sim
        .run_from(fwd.final_state.clone(), -1500, RecordingPolicy::hashes_only())
        .unwrap();
    let f: Vec<_> = fwd.hashes().collect();
    let mut b: Vec<_> = back.hashes().collect();
    b.reverse();
    assert_eq!(f, b);
    assert!(f.windows(2).all(|w| w[0] != w[1]));
}

#[test]
fn every_registered_integrator_reverses() {
    let registry = IntegratorRegistry::default();
    for name in registry.names() {
        let mut sc = scene::chain(5);
        sc.integrator = name.into();
        let audit = audit_reversal(&Simulation::new(sc).unwrap(), 2000).unwrap();
        assert!(audit.passed(), "{name}: {audit:?}");
    }
}

#[test]
fn backward_first_then_forward() {
    // Time runs both ways from step 0.
    let sim = Simulation::new(scene::chain(3)).unwrap();
    let back = sim.run(-700, RecordingPolicy::hashes_only()).unwrap();
    assert_eq!(back.final_state.step, -700);
    let fwd = sim
        .run_from(back.final_state, 700, RecordingPolicy::hashes_only())
        .unwrap();
    assert_eq!(fwd.final_state, sim.initial_state());
}

#[test]
fn golden_spring_digest() {
    let sim = Simulation::new(scene::spring(0.1)).unwrap();
    let t = sim.run(100, RecordingPolicy::hashes_only()).unwrap();
    assert_eq!(
        t.final_state.hash().to_hex(),
        "32a0d03e6b7725ea604854206f7abb8002a119108ea800d338613e1e014af107"
    );
    assert_eq!(
        t.final_state,
        State {
            q: vec![Fixed::from_bits(-964758866411484740)],
            p: vec![Fixed::from_bits(632034012492770926)],
            step: 100,
        }
    );
}
