//! Accuracy and energy behaviour against the analytic spring solution
//! `q(t) = q0 cos t + p0 sin t`, `p(t) = p0 cos t - q0 sin t`.

use revint::dynamics::energy;
use revint::scene;
use revint::{RecordingPolicy, Simulation, State};

fn spring_error(h: f64, t_end: f64) -> f64 {
    let sim = Simulation::new(scene::spring(h)).unwrap();
    let steps = (t_end / h).round() as i64;
    let s = sim.run(steps, RecordingPolicy::hashes_only()).unwrap().final_state;
    let (q, p) = (s.q[0].to_real(), s.p[0].to_real());
    let t = steps as f64 * h;
    ((q - t.cos()).powi(2) + (p + t.sin()).powi(2)).sqrt()
}

#[test]
fn quarter_period_matches_rotation() {
    let sim = Simulation::new(scene::spring(0.01)).unwrap();
    let s = sim.run(628, RecordingPolicy::hashes_only()).unwrap().final_state;
    let t = 628.0 * 0.01f64;
    assert!((s.q[0].to_real() - t.cos()).abs() < 1e-3);
}

#[test]
fn second_order_convergence() {
    let errors: Vec<f64> = [0.2, 0.1, 0.05, 0.025].iter().map(|&h| spring_error(h, 1.0)).collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio} from {errors:?}");
    }
}

fn max_relative_energy_drift(h: f64, steps: u64, stop_above: f64) -> (f64, u64) {
    let sim = Simulation::new(scene::spring(h)).unwrap();
    let mut s: State = sim.initial_state();
    let h0 = energy(&s, sim.field()).unwrap().total;
    let mut worst = 0.0f64;
    for i in 1..=steps {
        sim.step(&mut s, 1).unwrap();
        let e = energy(&s, sim.field()).unwrap().total;
        worst = worst.max((e - h0).abs() / h0);
        if worst > stop_above {
            return (worst, i);
        }
    }
    (worst, steps)
}

#[test]
fn energy_bounded_below_stability_limit() {
    let (drift, _) = max_relative_energy_drift(0.1, 100_000, f64::INFINITY);
    assert!(drift < 0.05, "{drift}");
    let (drift, _) = max_relative_energy_drift(0.5, 100_000, f64::INFINITY);
    assert!(drift < 0.1, "{drift}");
}

#[test]
fn energy_diverges_past_stability_limit() {
    let (growth, at) = max_relative_energy_drift(2.1, 1000, 9.0);
    assert!(growth > 9.0 && at < 1000, "growth {growth} at {at}");
}
