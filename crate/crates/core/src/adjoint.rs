//! Checkpoint-free adjoint gradients for keyframe control.
//!
//! The forward pass keeps only the current state. The backward pass retraces
//! the primal trajectory with the reversible integrator and, step by step,
//! pulls the adjoint `(q̂, p̂)` back through the transpose of each step's
//! Jacobian. At step 0, `p̂` is `dJ/dp0` and `q̂` is `dJ/dq0`.
//!
//! Sign convention: each backward step applies the plain transpose of the
//! forward step's linearization, so for Position Verlet
//!
//! ```text
//! p̂ += (h/2) q̂
//! q̂ += h (df/dq)(q_half)^T p̂
//! p̂ += (h/2) q̂
//! ```
//!
//! which is the same update written with a time step of `-h`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DynamicsError, State, StateHash};
use crate::fixedpoint::{from_reals, to_reals, Fixed, FixedError};
use crate::simulate::Simulation;

#[derive(Debug, Error)]
pub enum AdjointError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("control out of fixed-point range: {0}")]
    Control(#[from] FixedError),
    #[error("keyframe: {0}")]
    Keyframe(String),
    #[error("primal retrace did not return to the initial state: expected {expected}, got {got}")]
    RetraceMismatch { expected: StateHash, got: StateHash },
    #[error("non-finite cost at iteration {iteration}")]
    NonFiniteCost { iteration: usize },
}

/// Adjoints of coordinates (`qh`) and momenta (`ph`), in binary64.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointState {
    pub qh: Vec<f64>,
    pub ph: Vec<f64>,
}

impl AdjointState {
    pub fn zeros(len: usize) -> Self {
        AdjointState {
            qh: vec![0.0; len],
            ph: vec![0.0; len],
        }
    }
}

/// Target configuration `target_q` to be hit at step `at_step`.
#[derive(Debug, Clone, PartialEq)]
pub struct Keyframe {
    pub target_q: Vec<f64>,
    pub at_step: u64,
}

/// A target coordinate in a keyframe file: fixed-point hex or a plain number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetValue {
    Hex(Fixed),
    Real(f64),
}

impl TargetValue {
    fn to_real(self) -> f64 {
        match self {
            TargetValue::Hex(x) => x.to_real(),
            TargetValue::Real(r) => r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyframeFile {
    pub at_step: u64,
    pub target_q: Vec<TargetValue>,
}

impl Keyframe {
    pub fn new(target_q: Vec<f64>, at_step: u64) -> Self {
        Keyframe { target_q, at_step }
    }

    pub fn from_json(text: &str) -> Result<Self, AdjointError> {
        let file: KeyframeFile = serde_json::from_str(text).map_err(|e| AdjointError::Keyframe(e.to_string()))?;
        let target_q: Vec<f64> = file.target_q.into_iter().map(TargetValue::to_real).collect();
        if target_q.iter().any(|x| !x.is_finite()) {
            return Err(AdjointError::Keyframe("target_q must be finite".into()));
        }
        Ok(Keyframe::new(target_q, file.at_step))
    }

    /// Bit-exact file form with hex targets.
    pub fn to_file(&self) -> Result<KeyframeFile, FixedError> {
        Ok(KeyframeFile {
            at_step: self.at_step,
            target_q: from_reals(&self.target_q)?.into_iter().map(TargetValue::Hex).collect(),
        })
    }

    fn check(&self, len: usize) -> Result<(), AdjointError> {
        if self.target_q.len() != len {
            return Err(AdjointError::Keyframe(format!(
                "target has {} coordinates, scene has {len}",
                self.target_q.len()
            )));
        }
        if self.at_step == 0 {
            return Err(AdjointError::Keyframe("at_step must be at least 1".into()));
        }
        Ok(())
    }
}

/// The controls: initial momenta.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlVector {
    pub p0: Vec<f64>,
}

impl ControlVector {
    pub fn from_state(state: &State) -> Self {
        ControlVector { p0: state.p_real() }
    }
}

/// `J = 1/2 |q_T - q*|^2` and its gradient `q_T - q*`.
pub fn terminal_cost(q_t: &[f64], kf: &Keyframe) -> (f64, Vec<f64>) {
    let residual: Vec<f64> = q_t.iter().zip(&kf.target_q).map(|(q, t)| q - t).collect();
    let cost = 0.5 * residual.iter().map(|r| r * r).sum::<f64>();
    (cost, residual)
}

fn controlled_state(sim: &Simulation, controls: &ControlVector) -> Result<State, AdjointError> {
    let mut state = sim.initial_state();
    if controls.p0.len() != state.len() {
        return Err(AdjointError::Keyframe(format!(
            "{} controls for {} momenta",
            controls.p0.len(),
            state.len()
        )));
    }
    state.p = from_reals(&controls.p0)?;
    Ok(state)
}

fn run_forward(sim: &Simulation, state: &mut State, steps: u64) -> Result<(), AdjointError> {
    for _ in 0..steps {
        sim.step(state, 1)?;
    }
    Ok(())
}

/// Cost of the full fixed-point forward simulation under `controls`.
pub fn keyframe_cost(sim: &Simulation, controls: &ControlVector, kf: &Keyframe) -> Result<f64, AdjointError> {
    let mut state = controlled_state(sim, controls)?;
    kf.check(state.len())?;
    run_forward(sim, &mut state, kf.at_step)?;
    Ok(terminal_cost(&state.q_real(), kf).0)
}

/// Retraces `steps` forward steps that ended in `state`, pulling `adjoint`
/// back to the start. Afterwards `state` is the trajectory's initial state.
pub fn pull_back(
    sim: &Simulation,
    state: &mut State,
    adjoint: &mut AdjointState,
    steps: u64,
) -> Result<(), AdjointError> {
    let h = sim.h();
    for _ in 0..steps {
        sim.integrator().reverse_with_adjoint(state, adjoint, sim.field(), h)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub cost: f64,
    /// `dJ/dp0`.
    pub p0: Vec<f64>,
    /// `dJ/dq0`.
    pub q0: Vec<f64>,
    pub final_q: Vec<f64>,
}

/// `dJ/dp0` by one forward pass and one reversible backward pass.
///
/// Fails with [`AdjointError::RetraceMismatch`] if the backward pass does
/// not land bit-exactly on the initial state.
pub fn gradient_via_adjoint(
    sim: &Simulation,
    controls: &ControlVector,
    kf: &Keyframe,
) -> Result<Gradient, AdjointError> {
    let initial = controlled_state(sim, controls)?;
    kf.check(initial.len())?;
    let mut state = initial.clone();
    run_forward(sim, &mut state, kf.at_step)?;

    let final_q = state.q_real();
    let (cost, residual) = terminal_cost(&final_q, kf);
    let mut adjoint = AdjointState {
        qh: residual,
        ph: vec![0.0; initial.len()],
    };
    pull_back(sim, &mut state, &mut adjoint, kf.at_step)?;
    if state != initial {
        return Err(AdjointError::RetraceMismatch {
            expected: initial.hash(),
            got: state.hash(),
        });
    }
    Ok(Gradient {
        cost,
        p0: adjoint.ph,
        q0: adjoint.qh,
        final_q,
    })
}

/// Central differences of [`keyframe_cost`] in each control component.
pub fn finite_difference_gradient(
    sim: &Simulation,
    controls: &ControlVector,
    kf: &Keyframe,
    delta: f64,
) -> Result<Vec<f64>, AdjointError> {
    assert!(delta > 0.0, "delta must be positive");
    (0..controls.p0.len())
        .map(|i| {
            let mut plus = controls.clone();
            let mut minus = controls.clone();
            plus.p0[i] += delta;
            minus.p0[i] -= delta;
            let jp = keyframe_cost(sim, &plus, kf)?;
            let jm = keyframe_cost(sim, &minus, kf)?;
            Ok((jp - jm) / (2.0 * delta))
        })
        .collect()
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradcheckReport {
    pub adjoint: Vec<f64>,
    pub fd: Vec<f64>,
    pub rel_err: Vec<f64>,
    pub max_rel_err: f64,
}

pub fn gradcheck(
    sim: &Simulation,
    controls: &ControlVector,
    kf: &Keyframe,
    delta: f64,
) -> Result<GradcheckReport, AdjointError> {
    let adjoint = gradient_via_adjoint(sim, controls, kf)?.p0;
    let fd = finite_difference_gradient(sim, controls, kf, delta)?;
    let rel_err: Vec<f64> = adjoint.iter().zip(&fd).map(|(a, f)| relative_error(*a, *f)).collect();
    let max_rel_err = rel_err.iter().fold(0.0f64, |m, e| m.max(*e));
    Ok(GradcheckReport {
        adjoint,
        fd,
        rel_err,
        max_rel_err,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    /// Best cost seen so far.
    pub cost: f64,
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimized {
    pub controls: ControlVector,
    pub history: Vec<HistoryEntry>,
}

impl Optimized {
    pub fn initial_cost(&self) -> f64 {
        self.history[0].cost
    }

    pub fn final_cost(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |e| e.cost)
    }

    pub fn write_history_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "iteration,cost,lr")?;
        for e in &self.history {
            writeln!(out, "{},{},{}", e.iteration, e.cost, e.lr)?;
        }
        Ok(())
    }
}

/// Gradient descent on the initial momenta. A step that does not lower the
/// cost is discarded and the learning rate halved.
pub fn optimize_keyframe(
    sim: &Simulation,
    kf: &Keyframe,
    initial: ControlVector,
    iterations: usize,
    learning_rate: f64,
) -> Result<Optimized, AdjointError> {
    assert!(iterations >= 1, "at least one iteration");
    let mut lr = learning_rate;
    let mut current = initial;
    let mut best = gradient_via_adjoint(sim, &current, kf)?;
    if !best.cost.is_finite() {
        return Err(AdjointError::NonFiniteCost { iteration: 0 });
    }
    let mut history = vec![HistoryEntry {
        iteration: 0,
        cost: best.cost,
        lr,
    }];

    for iteration in 1..=iterations {
        let candidate = ControlVector {
            p0: current.p0.iter().zip(&best.p0).map(|(p, g)| p - lr * g).collect(),
        };
        if candidate != current {
            match gradient_via_adjoint(sim, &candidate, kf) {
                Ok(g) if !g.cost.is_finite() => return Err(AdjointError::NonFiniteCost { iteration }),
                Ok(g) if g.cost < best.cost => {
                    current = candidate;
                    best = g;
                }
                Ok(_) | Err(AdjointError::Control(_)) => lr *= 0.5,
                Err(AdjointError::Dynamics(DynamicsError::NonFiniteForce { .. })) => {
                    return Err(AdjointError::NonFiniteCost { iteration });
                }
                Err(e) => return Err(e),
            }
        } else if lr != 0.0 {
            lr *= 0.5;
        }
        history.push(HistoryEntry {
            iteration,
            cost: best.cost,
            lr,
        });
    }
    Ok(Optimized {
        controls: current,
        history,
    })
}

pub fn controls_from_reals(p0: &[f64]) -> ControlVector {
    ControlVector { p0: p0.to_vec() }
}

/// Controls of the scene's own initial momenta.
pub fn scene_controls(sim: &Simulation) -> ControlVector {
    ControlVector {
        p0: to_reals(&sim.scene().p0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Integrator, PositionVerlet, VelocityVerlet};
    use crate::forces::{Free, Spring};
    use crate::scene;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn fx(r: f64) -> Fixed {
        Fixed::from_real(r).unwrap()
    }

    #[test]
    fn terminal_cost_examples() {
        let kf = Keyframe::new(vec![0.5, -0.25], 1);
        let (j, g) = terminal_cost(&[0.5, -0.25], &kf);
        assert_eq!((j, g), (0.0, vec![0.0, 0.0]));
        let (j, g) = terminal_cost(&[1.5, -0.25], &kf);
        assert_eq!(j, 0.5);
        assert_eq!(g, vec![1.0, 0.0]);
    }

    #[test]
    fn terminal_cost_gradient_matches_finite_differences() {
        let kf = Keyframe::new(vec![0.3, -0.7, 0.1], 1);
        let q = [0.9, 0.2, -0.4];
        let (_, g) = terminal_cost(&q, &kf);
        for i in 0..3 {
            let mut plus = q;
            let mut minus = q;
            plus[i] += 1e-6;
            minus[i] -= 1e-6;
            let fd = (terminal_cost(&plus, &kf).0 - terminal_cost(&minus, &kf).0) / 2e-6;
            assert!(relative_error(fd, g[i]) < 1e-8, "{fd} vs {}", g[i]);
        }
    }

    /// Real-arithmetic one-step Position Verlet map for the unit spring.
    fn spring_step_real(q: f64, p: f64, h: f64) -> (f64, f64) {
        let qh = q + 0.5 * h * p;
        let p1 = p - h * qh;
        (qh + 0.5 * h * p1, p1)
    }

    #[test]
    fn one_step_adjoint_is_jacobian_transpose() {
        let h = 0.1;
        let mut s = State::new(vec![Fixed::ONE], vec![Fixed::ZERO]);
        let start = s.clone();
        PositionVerlet::default().step(&mut s, &Spring::unit(), h).unwrap();
        let mut adj = AdjointState {
            qh: vec![1.0],
            ph: vec![0.0],
        };
        PositionVerlet::default()
            .reverse_with_adjoint(&mut s, &mut adj, &Spring::unit(), h)
            .unwrap();
        assert_eq!(s, start);
        // Row 0 of the Jacobian (dq1/dq0, dq1/dp0) by central differences.
        let e = 1e-6;
        let dq = (spring_step_real(1.0 + e, 0.0, h).0 - spring_step_real(1.0 - e, 0.0, h).0) / (2.0 * e);
        let dp = (spring_step_real(1.0, e, h).0 - spring_step_real(1.0, -e, h).0) / (2.0 * e);
        assert!(relative_error(adj.qh[0], dq) < 1e-9, "{} vs {dq}", adj.qh[0]);
        assert!(relative_error(adj.ph[0], dp) < 1e-9, "{} vs {dp}", adj.ph[0]);
    }

    #[test]
    fn zero_adjoint_stays_zero_and_primal_reverses() {
        let field = Spring::unit();
        for integrator in [
            &PositionVerlet::default() as &dyn Integrator,
            &VelocityVerlet::default(),
        ] {
            let start = State::new(vec![fx(0.4), fx(-0.2)], vec![fx(0.1), fx(0.3)]);
            let mut s = start.clone();
            integrator.step(&mut s, &field, 0.05).unwrap();
            let mut adj = AdjointState::zeros(2);
            integrator.reverse_with_adjoint(&mut s, &mut adj, &field, 0.05).unwrap();
            assert_eq!(s, start);
            assert_eq!(adj, AdjointState::zeros(2));
        }
    }

    #[test]
    fn reverse_primal_equals_negated_step() {
        let sim = Simulation::new(scene::chain(3)).unwrap();
        let mut s = sim.initial_state();
        for _ in 0..50 {
            sim.step(&mut s, 1).unwrap();
        }
        let mut a = s.clone();
        let mut b = s.clone();
        sim.step(&mut a, -1).unwrap();
        let mut adj = AdjointState::zeros(6);
        adj.qh[0] = 1.0;
        sim.integrator()
            .reverse_with_adjoint(&mut b, &mut adj, sim.field(), sim.h())
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_force_adjoint_is_drift_transpose() {
        // Drift map: q1 = q0 + h p0, p1 = p0. Transpose: qh0 = qh1, ph0 = ph1 + h qh1.
        for integrator in [
            &PositionVerlet::default() as &dyn Integrator,
            &VelocityVerlet::default(),
        ] {
            let mut s = State::new(vec![fx(0.1)], vec![fx(0.2)]);
            integrator.step(&mut s, &Free, 0.25).unwrap();
            let mut adj = AdjointState {
                qh: vec![2.0],
                ph: vec![3.0],
            };
            integrator.reverse_with_adjoint(&mut s, &mut adj, &Free, 0.25).unwrap();
            assert_eq!(adj.qh, vec![2.0]);
            assert_eq!(adj.ph, vec![3.0 + 0.25 * 2.0]);
        }
    }

    fn spring_sim(h: f64) -> Simulation {
        Simulation::new(scene::spring(h)).unwrap()
    }

    #[test]
    fn spring_gradient_matches_analytic() {
        let n = 1000;
        let t = PI / 3.0;
        let sim = spring_sim(t / n as f64);
        let kf = Keyframe::new(vec![0.0], n);
        let g = gradient_via_adjoint(&sim, &scene_controls(&sim), &kf).unwrap();
        // q(T) = cos T for (q0, p0) = (1, 0); dq(T)/dp0 = sin T.
        let analytic = (t.cos() - 0.0) * t.sin();
        assert!(relative_error(g.p0[0], analytic) < 1e-3, "{} vs {analytic}", g.p0[0]);
        let fd = finite_difference_gradient(&sim, &scene_controls(&sim), &kf, 1e-5).unwrap();
        assert!(relative_error(g.p0[0], fd[0]) < 1e-6);
    }

    #[test]
    fn reached_target_gives_zero_gradient() {
        let sim = spring_sim(0.01);
        let mut s = sim.initial_state();
        for _ in 0..100 {
            sim.step(&mut s, 1).unwrap();
        }
        let kf = Keyframe::new(s.q_real(), 100);
        let g = gradient_via_adjoint(&sim, &scene_controls(&sim), &kf).unwrap();
        assert_eq!(g.cost, 0.0);
        assert_eq!(g.p0, vec![0.0]);
    }

    #[test]
    fn velocity_verlet_gradient_matches_finite_differences() {
        let mut sc = scene::chain(3);
        sc.integrator = VelocityVerlet::NAME.into();
        let sim = Simulation::new(sc).unwrap();
        let kf = Keyframe::new(vec![0.2, -0.3, 0.5, -0.3, 0.7, -0.2], 200);
        let report = gradcheck(&sim, &scene_controls(&sim), &kf, 1e-5).unwrap();
        assert!(report.max_rel_err < 1e-4, "{report:?}");
    }

    #[test]
    fn adjoint_is_linear_in_the_seed() {
        let sim = Simulation::new(scene::chain(3)).unwrap();
        let start = sim.initial_state();
        let mut end = start.clone();
        for _ in 0..100 {
            sim.step(&mut end, 1).unwrap();
        }
        let seed = AdjointState {
            qh: vec![0.3, -0.1, 0.2, 0.5, -0.4, 0.1],
            ph: vec![0.0; 6],
        };
        let pull = |alpha: f64| {
            let mut s = end.clone();
            let mut a = AdjointState {
                qh: seed.qh.iter().map(|x| alpha * x).collect(),
                ph: seed.ph.clone(),
            };
            pull_back(&sim, &mut s, &mut a, 100).unwrap();
            assert_eq!(s, start);
            a.ph
        };
        let base = pull(1.0);
        let scaled = pull(2.0);
        for (b, s) in base.iter().zip(&scaled) {
            // Scaling by two is exact in binary64.
            assert_eq!(2.0 * b, *s);
        }
        let third = pull(1.0 / 3.0);
        for (b, t) in base.iter().zip(&third) {
            assert!(relative_error(b / 3.0, *t) < 1e-12);
        }
    }

    #[test]
    fn duality_spot_check() {
        let sim = Simulation::new(scene::chain(4)).unwrap();
        let kf = Keyframe::new(vec![0.2, -0.1, 0.45, -0.1, 0.7, -0.05, 0.95, 0.0], 300);
        let controls = controls_from_reals(&[0.1, 0.0, 0.0, 0.2, -0.1, 0.0, 0.05, 0.1]);
        let g = gradient_via_adjoint(&sim, &controls, &kf).unwrap();
        let direction = [0.3, -0.2, 0.5, 0.1, -0.4, 0.25, 0.05, -0.15];
        let predicted: f64 = g.p0.iter().zip(&direction).map(|(a, b)| a * b).sum();
        let eps = 1e-5;
        let shifted = |s: f64| {
            controls_from_reals(
                &controls
                    .p0
                    .iter()
                    .zip(&direction)
                    .map(|(p, d)| p + s * d)
                    .collect::<Vec<_>>(),
            )
        };
        let measured = (keyframe_cost(&sim, &shifted(eps), &kf).unwrap()
            - keyframe_cost(&sim, &shifted(-eps), &kf).unwrap())
            / (2.0 * eps);
        assert!(relative_error(predicted, measured) < 1e-3, "{predicted} vs {measured}");
    }

    #[test]
    fn retrace_mismatch_is_detected() {
        use crate::fixedpoint::Rounding;
        let sim = Simulation::new(scene::chain(3))
            .unwrap()
            .with_integrator(Arc::new(PositionVerlet::with_rounding(Rounding::Floor)));
        let kf = Keyframe::new(vec![0.0; 6], 20);
        let err = gradient_via_adjoint(&sim, &scene_controls(&sim), &kf).unwrap_err();
        assert!(matches!(err, AdjointError::RetraceMismatch { .. }));
    }

    #[test]
    fn keyframe_validation() {
        let sim = spring_sim(0.1);
        let c = scene_controls(&sim);
        assert!(matches!(
            gradient_via_adjoint(&sim, &c, &Keyframe::new(vec![0.0], 0)),
            Err(AdjointError::Keyframe(_))
        ));
        assert!(matches!(
            gradient_via_adjoint(&sim, &c, &Keyframe::new(vec![0.0, 1.0], 5)),
            Err(AdjointError::Keyframe(_))
        ));
        assert!(matches!(
            gradient_via_adjoint(&sim, &controls_from_reals(&[9.0]), &Keyframe::new(vec![0.0], 5)),
            Err(AdjointError::Control(_))
        ));
    }

    #[test]
    fn keyframe_json_accepts_hex_and_floats() {
        let kf = Keyframe::from_json(r#"{"at_step": 10, "target_q": ["1000000000000000", -0.5]}"#).unwrap();
        assert_eq!(kf, Keyframe::new(vec![1.0, -0.5], 10));
        let file = kf.to_file().unwrap();
        let text = serde_json::to_string(&file).unwrap();
        assert_eq!(
            text,
            r#"{"at_step":10,"target_q":["1000000000000000","F800000000000000"]}"#
        );
        assert!(Keyframe::from_json(r#"{"at_step": 1, "target_q": ["zz"]}"#).is_err());
    }

    #[test]
    fn spring_optimization_converges() {
        let sim = spring_sim(PI / 3000.0);
        // Reachable target: the trajectory launched with p0 = 0.4.
        let target = {
            let mut s = sim.initial_state();
            s.p = vec![fx(0.4)];
            for _ in 0..1000 {
                sim.step(&mut s, 1).unwrap();
            }
            s.q_real()
        };
        let kf = Keyframe::new(target, 1000);
        let out = optimize_keyframe(&sim, &kf, scene_controls(&sim), 200, 1.0).unwrap();
        assert!(out.final_cost() < 1e-10, "{}", out.final_cost());
        assert!(out.history.windows(2).all(|w| w[1].cost <= w[0].cost));
        assert!((out.controls.p0[0] - 0.4).abs() < 1e-4);
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let sim = spring_sim(0.01);
        let kf = Keyframe::new(vec![0.3], 50);
        let start = scene_controls(&sim);
        let out = optimize_keyframe(&sim, &kf, start.clone(), 5, 0.0).unwrap();
        assert_eq!(out.controls, start);
        assert_eq!(out.history.len(), 6);
        assert!(out.history.iter().all(|e| e.cost == out.history[0].cost && e.lr == 0.0));
        let mut csv = Vec::new();
        out.write_history_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("iteration,cost,lr\n0,"));
    }
}
