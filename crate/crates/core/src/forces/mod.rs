//! Conservative force fields and the registry that builds them by name.
//!
//! Every field is a pure function of positions: identical input bits give
//! identical output bits. Sums run sequentially in ascending index order so
//! that the reduction order is part of the contract.

mod chain;
mod free;
mod gravity;
mod spring;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

pub use chain::{Chain, ChainParams};
pub use free::Free;
pub use gravity::{Gravity, GravityParams};
pub use spring::{Spring, SpringParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("unknown force field type '{0}'")]
    UnknownType(String),
    #[error("invalid parameters for '{field}': {msg}")]
    BadParams { field: &'static str, msg: String },
    #[error("singular configuration: bond {bond} has zero length")]
    Singular { bond: usize },
}

/// Particle count and spatial dimension a field is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
    pub d: usize,
}

impl Layout {
    pub fn coords(&self) -> usize {
        self.n * self.d
    }
}

/// A force field `f = -dV/dq` over a flat coordinate vector.
pub trait ForceField: Send + Sync {
    fn name(&self) -> &'static str;

    /// Writes `f(q)` into `out`. Both slices have the layout's length.
    fn forces(&self, q: &[f64], out: &mut [f64]) -> Result<(), FieldError>;

    /// Writes `(df/dq)^T v` into `out`.
    fn jtp(&self, q: &[f64], v: &[f64], out: &mut [f64]) -> Result<(), FieldError>;

    fn potential(&self, q: &[f64]) -> Result<f64, FieldError>;

    /// Estimate of the highest linearized frequency, used for the `h*omega < 1` check.
    fn omega_max(&self) -> f64;

    fn evaluate(&self, q: &[f64]) -> Result<Vec<f64>, FieldError> {
        let mut out = vec![0.0; q.len()];
        self.forces(q, &mut out)?;
        Ok(out)
    }

    fn jtp_vec(&self, q: &[f64], v: &[f64]) -> Result<Vec<f64>, FieldError> {
        let mut out = vec![0.0; q.len()];
        self.jtp(q, v, &mut out)?;
        Ok(out)
    }
}

/// Serialized description of a field: `{"type": "...", ...params}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(flatten)]
    pub params: Map<String, Value>,
}

impl FieldConfig {
    pub fn new(kind: &str) -> Self {
        FieldConfig {
            kind: kind.to_string(),
            params: Map::new(),
        }
    }

    pub fn with_params<P: Serialize>(kind: &str, params: &P) -> Self {
        let params = match serde_json::to_value(params) {
            Ok(Value::Object(map)) => map,
            _ => Map::new(),
        };
        FieldConfig {
            kind: kind.to_string(),
            params,
        }
    }

    /// Deserializes the parameter map into a field's typed parameters.
    pub fn params<P: for<'de> Deserialize<'de>>(&self, field: &'static str) -> Result<P, FieldError> {
        serde_json::from_value(Value::Object(self.params.clone())).map_err(|e| FieldError::BadParams {
            field,
            msg: e.to_string(),
        })
    }
}

pub type FieldFactory = fn(&FieldConfig, Layout) -> Result<Box<dyn ForceField>, FieldError>;

/// Named constructors for force fields.
#[derive(Clone)]
pub struct FieldRegistry {
    factories: BTreeMap<&'static str, FieldFactory>,
}

impl FieldRegistry {
    pub fn empty() -> Self {
        FieldRegistry {
            factories: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, factory: FieldFactory) {
        self.factories.insert(name, factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }

    pub fn build(&self, config: &FieldConfig, layout: Layout) -> Result<Box<dyn ForceField>, FieldError> {
        let factory = self
            .factories
            .get(config.kind.as_str())
            .ok_or_else(|| FieldError::UnknownType(config.kind.clone()))?;
        factory(config, layout)
    }
}

impl Default for FieldRegistry {
    fn default() -> Self {
        let mut registry = FieldRegistry::empty();
        registry.register(Spring::NAME, Spring::from_config);
        registry.register(Gravity::NAME, Gravity::from_config);
        registry.register(Chain::NAME, Chain::from_config);
        registry.register(Free::NAME, Free::from_config);
        registry
    }
}

fn bad(field: &'static str, msg: impl Into<String>) -> FieldError {
    FieldError::BadParams { field, msg: msg.into() }
}
