//! Simulation driver, trajectory recording and the reversibility audit.

use std::io::{self, Write};
use std::sync::Arc;

use log::warn;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{energy, DynamicsError, Integrator, IntegratorRegistry, State, StateHash};
use crate::fixedpoint::Fixed;
use crate::forces::{FieldRegistry, ForceField};
use crate::scene::{Scene, SceneError};

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Field(#[from] crate::forces::FieldError),
}

impl SimulateError {
    /// True for the numeric aborts (NaN/Inf forces).
    pub fn is_numeric_abort(&self) -> bool {
        matches!(self, SimulateError::Dynamics(DynamicsError::NonFiniteForce { .. }))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RecordingPolicy {
    /// Attach `q`, `p` and `H` to every record whose step is a multiple of this.
    pub snapshot_every: Option<u64>,
}

impl RecordingPolicy {
    pub fn hashes_only() -> Self {
        RecordingPolicy::default()
    }

    pub fn snapshots(every: u64) -> Self {
        RecordingPolicy {
            snapshot_every: Some(every.max(1)),
        }
    }

    fn wants_snapshot(&self, step: i64) -> bool {
        self.snapshot_every
            .is_some_and(|k| step.unsigned_abs().is_multiple_of(k))
    }
}

/// One trajectory line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub step: i64,
    pub hash: StateHash,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Fixed>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Fixed>>,
    #[serde(rename = "H", skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<Record>,
    pub final_state: State,
    pub wraps: u64,
    pub max_abs_q: f64,
}

impl Trajectory {
    pub fn hashes(&self) -> impl Iterator<Item = StateHash> + '_ {
        self.records.iter().map(|r| r.hash)
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for record in &self.records {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Real-side positions of the snapshot records: `step,q0,q1,...`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let width = self.final_state.len();
        write!(out, "step")?;
        for i in 0..width {
            write!(out, ",q{i}")?;
        }
        writeln!(out)?;
        for record in &self.records {
            if let Some(q) = &record.q {
                write!(out, "{}", record.step)?;
                for x in q {
                    write!(out, ",{}", x.to_real())?;
                }
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

/// A scene bound to its force field and integrator.
pub struct Simulation {
    scene: Scene,
    field: Box<dyn ForceField>,
    integrator: Arc<dyn Integrator>,
}

impl Simulation {
    pub fn new(scene: Scene) -> Result<Self, SceneError> {
        Simulation::with_registries(scene, &FieldRegistry::default(), &IntegratorRegistry::default())
    }

    pub fn with_registries(
        scene: Scene,
        fields: &FieldRegistry,
        integrators: &IntegratorRegistry,
    ) -> Result<Self, SceneError> {
        scene.validate()?;
        let field = scene.build_field(fields)?;
        let integrator = scene.build_integrator(integrators)?;
        let h_omega = scene.h.abs() * field.omega_max();
        if h_omega >= 1.0 {
            warn!(
                "scene '{}': h*omega_max = {h_omega:.3} >= 1, integration may be unstable",
                scene.name
            );
        }
        Ok(Simulation {
            scene,
            field,
            integrator,
        })
    }

    /// Swaps the integrator, e.g. for a non-default rounding.
    pub fn with_integrator(mut self, integrator: Arc<dyn Integrator>) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn field(&self) -> &dyn ForceField {
        self.field.as_ref()
    }

    pub fn integrator(&self) -> &dyn Integrator {
        self.integrator.as_ref()
    }

    pub fn h(&self) -> f64 {
        self.scene.h
    }

    pub fn initial_state(&self) -> State {
        self.scene.initial_state()
    }

    /// One step forward (`direction > 0`) or backward.
    pub fn step(&self, state: &mut State, direction: i64) -> Result<u32, DynamicsError> {
        let h = if direction >= 0 { self.scene.h } else { -self.scene.h };
        Ok(self.integrator.step(state, self.field.as_ref(), h)?.wraps)
    }

    fn record(&self, state: &State, policy: RecordingPolicy) -> Result<Record, SimulateError> {
        let mut record = Record {
            step: state.step,
            hash: state.hash(),
            q: None,
            p: None,
            energy: None,
        };
        if policy.wants_snapshot(state.step) {
            record.q = Some(state.q.clone());
            record.p = Some(state.p.clone());
            record.energy = Some(energy(state, self.field.as_ref())?.total);
        }
        Ok(record)
    }

    /// Runs `|n_steps|` steps from the scene's initial state.
    pub fn run(&self, n_steps: i64, policy: RecordingPolicy) -> Result<Trajectory, SimulateError> {
        self.run_from(self.initial_state(), n_steps, policy)
    }

    /// Runs `|n_steps|` steps with `h * sign(n_steps)`, recording every step.
    pub fn run_from(
        &self,
        mut state: State,
        n_steps: i64,
        policy: RecordingPolicy,
    ) -> Result<Trajectory, SimulateError> {
        let mut records = Vec::with_capacity(n_steps.unsigned_abs() as usize + 1);
        records.push(self.record(&state, policy)?);
        let mut wraps = 0u64;
        let mut max_abs_q = state.max_abs_q();
        let mut warned = false;
        for _ in 0..n_steps.unsigned_abs() {
            wraps += self.step(&mut state, n_steps.signum())? as u64;
            let m = state.max_abs_q();
            if m > 1.0 && !warned {
                warn!("step {}: |q| = {m:.3} left [-1, 1]", state.step);
                warned = true;
            }
            max_abs_q = max_abs_q.max(m);
            records.push(self.record(&state, policy)?);
        }
        if wraps > 0 {
            warn!("{wraps} fixed-point additions wrapped past +-8; the trajectory is reversible but not physical");
        }
        Ok(Trajectory {
            records,
            final_state: state,
            wraps,
            max_abs_q,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReversalAudit {
    pub steps: u64,
    pub initial: StateHash,
    pub returned: StateHash,
    /// First step, in backward order, whose hash differs from the forward pass.
    pub first_divergence: Option<i64>,
}

impl ReversalAudit {
    pub fn passed(&self) -> bool {
        self.first_divergence.is_none() && self.initial == self.returned
    }
}

/// Runs `n` steps forward and `n` back, comparing every backward hash with
/// the forward hash recorded at the same step.
pub fn audit_reversal(sim: &Simulation, n: u64) -> Result<ReversalAudit, SimulateError> {
    let n = i64::try_from(n).expect("step count fits in i64");
    let forward = sim.run(n, RecordingPolicy::hashes_only())?;
    let backward = sim.run_from(forward.final_state.clone(), -n, RecordingPolicy::hashes_only())?;
    let first_divergence = backward
        .records
        .iter()
        .zip(forward.records.iter().rev())
        .find(|(b, f)| b.hash != f.hash || b.step != f.step)
        .map(|(b, _)| b.step);
    Ok(ReversalAudit {
        steps: n as u64,
        initial: forward.records[0].hash,
        returned: backward.final_state.hash(),
        first_divergence,
    })
}
