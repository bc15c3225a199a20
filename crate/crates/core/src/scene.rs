//! Scene files and the built-in scenes.
//!
//! A scene is plain JSON. Fixed-point vectors are always 16-digit hex strings
//! so that a scene loads to the same bits on every platform.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DynamicsError, Integrator, IntegratorRegistry, PositionVerlet, State};
use crate::fixedpoint::{Fixed, FixedError};
use crate::forces::{ChainParams, FieldConfig, FieldError, FieldRegistry, ForceField, GravityParams, Layout};

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene JSON: {0}")]
    Json(serde_json::Error),
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Fixed(#[from] FixedError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

impl From<serde_json::Error> for SceneError {
    fn from(e: serde_json::Error) -> Self {
        SceneError::Json(e)
    }
}

fn default_integrator() -> String {
    PositionVerlet::NAME.to_string()
}

fn is_default_integrator(name: &String) -> bool {
    name == PositionVerlet::NAME
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub h: f64,
    #[serde(default = "default_integrator", skip_serializing_if = "is_default_integrator")]
    pub integrator: String,
    pub field: FieldConfig,
    pub q0: Vec<Fixed>,
    pub p0: Vec<Fixed>,
}

impl Scene {
    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let scene: Scene = serde_json::from_str(text)?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn layout(&self) -> Layout {
        Layout { n: self.n, d: self.d }
    }

    /// Structural checks that do not need the force field.
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.n == 0 {
            return Err(SceneError::Invalid("n must be at least 1".into()));
        }
        if !(1..=2).contains(&self.d) {
            return Err(SceneError::Invalid(format!("d must be 1 or 2, got {}", self.d)));
        }
        let len = self.n * self.d;
        if self.q0.len() != len || self.p0.len() != len {
            return Err(SceneError::Invalid(format!(
                "q0/p0 lengths {}/{} do not match n*d = {len}",
                self.q0.len(),
                self.p0.len()
            )));
        }
        if !self.h.is_finite() || self.h == 0.0 {
            return Err(SceneError::Invalid(format!(
                "h must be finite and nonzero, got {}",
                self.h
            )));
        }
        Ok(())
    }

    pub fn initial_state(&self) -> State {
        State::new(self.q0.clone(), self.p0.clone())
    }

    pub fn build_field(&self, registry: &FieldRegistry) -> Result<Box<dyn ForceField>, SceneError> {
        Ok(registry.build(&self.field, self.layout())?)
    }

    pub fn build_integrator(
        &self,
        registry: &IntegratorRegistry,
    ) -> Result<std::sync::Arc<dyn Integrator>, SceneError> {
        Ok(registry.get(&self.integrator)?)
    }
}

fn fixed_vec(values: impl IntoIterator<Item = f64>) -> Vec<Fixed> {
    values
        .into_iter()
        .map(|r| Fixed::from_real(r).expect("built-in scene values are in range"))
        .collect()
}

/// Unit spring in one dimension starting at `(q, p) = (1, 0)`.
pub fn spring(h: f64) -> Scene {
    Scene {
        name: "spring".into(),
        n: 1,
        d: 1,
        h,
        integrator: default_integrator(),
        field: FieldConfig::new("spring"),
        q0: vec![Fixed::ONE],
        p0: vec![Fixed::ZERO],
    }
}

/// `n` equal masses at rest on the unit circle, collapsing under softened
/// gravity.
pub fn gravity_ring(n: usize) -> Scene {
    let q0 = (0..n).flat_map(|i| {
        let angle = 2.0 * PI * i as f64 / n as f64;
        [angle.cos(), angle.sin()]
    });
    Scene {
        name: format!("ring{n}"),
        n,
        d: 2,
        h: 0.005,
        integrator: default_integrator(),
        field: FieldConfig::with_params("gravity", &GravityParams::default()),
        q0: fixed_vec(q0),
        p0: vec![Fixed::ZERO; 2 * n],
    }
}

/// A chain of `n` links laid out horizontally from the anchor, released at rest.
pub fn chain(n: usize) -> Scene {
    let params = ChainParams::default();
    let q0 = (0..n).flat_map(|i| [params.anchor[0] + params.rest_length * (i + 1) as f64, params.anchor[1]]);
    Scene {
        name: format!("chain{n}"),
        n,
        d: 2,
        h: 0.01,
        integrator: default_integrator(),
        q0: fixed_vec(q0),
        field: FieldConfig::with_params("chain", &params),
        p0: vec![Fixed::ZERO; 2 * n],
    }
}

/// Looks up a built-in scene: `spring`, `ring<N>`, `chain<N>`.
pub fn builtin(name: &str) -> Option<Scene> {
    if name == "spring" {
        return Some(spring(0.1));
    }
    let count = |prefix: &str| name.strip_prefix(prefix).and_then(|s| s.parse::<usize>().ok());
    if let Some(n) = count("ring").filter(|&n| n >= 2) {
        return Some(gravity_ring(n));
    }
    if let Some(n) = count("chain").filter(|&n| n >= 1) {
        return Some(chain(n));
    }
    None
}
