//! Reversible integrators.
//!
//! Integrators keep coordinates and momenta in fixed point and evaluate forces
//! in binary64. Each substep adds a fixed-point increment converted from a
//! real product; because the conversion is odd symmetric and the addition is
//! a group operation, a step with `-h` undoes a step with `h` exactly.
//! Backward integration is the same step function with the time step negated.

mod state;
mod verlet;

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::adjoint::AdjointState;
use crate::forces::{FieldError, ForceField};

pub use state::{energy, state_hash, Energy, State, StateHash};
pub use verlet::{PositionVerlet, VelocityVerlet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("time step must be finite and nonzero, got {0}")]
    InvalidStep(f64),
    #[error("non-finite force at step {step}")]
    NonFiniteForce { step: i64 },
    #[error("force evaluation failed at step {step}: {error}")]
    Field { step: i64, error: FieldError },
    #[error("unknown integrator '{0}'")]
    UnknownIntegrator(String),
}

/// What a single step observed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepReport {
    /// Number of fixed-point additions that wrapped around.
    pub wraps: u32,
}

/// A reversible one-step map on [`State`].
pub trait Integrator: Send + Sync {
    fn name(&self) -> &'static str;

    /// Advances `state` by `h`; the step index moves by `sign(h)`.
    fn step(&self, state: &mut State, field: &dyn ForceField, h: f64) -> Result<StepReport, DynamicsError>;

    /// Undoes one forward step of size `h` while pulling the adjoint back
    /// through the transpose of that step's Jacobian.
    ///
    /// `state` must be the result of `step(.., h)`. On return it equals the
    /// state before that step, bit for bit.
    fn reverse_with_adjoint(
        &self,
        state: &mut State,
        adjoint: &mut AdjointState,
        field: &dyn ForceField,
        h: f64,
    ) -> Result<StepReport, DynamicsError>;
}

/// Integrators selectable by name.
#[derive(Clone)]
pub struct IntegratorRegistry {
    entries: BTreeMap<&'static str, Arc<dyn Integrator>>,
}

impl IntegratorRegistry {
    pub fn empty() -> Self {
        IntegratorRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, integrator: Arc<dyn Integrator>) {
        self.entries.insert(integrator.name(), integrator);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Integrator>, DynamicsError> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| DynamicsError::UnknownIntegrator(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

impl Default for IntegratorRegistry {
    fn default() -> Self {
        let mut registry = IntegratorRegistry::empty();
        registry.register(Arc::new(PositionVerlet::default()));
        registry.register(Arc::new(VelocityVerlet::default()));
        registry
    }
}

pub(crate) fn check_step(h: f64) -> Result<(), DynamicsError> {
    if h.is_finite() && h != 0.0 {
        Ok(())
    } else {
        Err(DynamicsError::InvalidStep(h))
    }
}
