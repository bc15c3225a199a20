use serde::{Deserialize, Serialize};

use super::{bad, FieldConfig, FieldError, ForceField, Layout};

/// Independent harmonic springs `f = -k q` on every coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spring {
    stiffness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpringParams {
    #[serde(default = "unit")]
    pub k: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for SpringParams {
    fn default() -> Self {
        SpringParams { k: 1.0 }
    }
}

impl Spring {
    pub const NAME: &'static str = "spring";

    pub fn new(stiffness: f64) -> Self {
        Spring { stiffness }
    }

    /// Unit mass, unit stiffness.
    pub fn unit() -> Self {
        Spring::new(1.0)
    }

    pub fn from_config(config: &FieldConfig, _layout: Layout) -> Result<Box<dyn ForceField>, FieldError> {
        let params: SpringParams = config.params(Self::NAME)?;
        if !(params.k.is_finite() && params.k > 0.0) {
            return Err(bad(Self::NAME, format!("k must be positive, got {}", params.k)));
        }
        Ok(Box::new(Spring::new(params.k)))
    }
}

impl ForceField for Spring {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn forces(&self, q: &[f64], out: &mut [f64]) -> Result<(), FieldError> {
        for (f, x) in out.iter_mut().zip(q) {
            *f = -self.stiffness * x;
        }
        Ok(())
    }

    fn jtp(&self, _q: &[f64], v: &[f64], out: &mut [f64]) -> Result<(), FieldError> {
        for (o, x) in out.iter_mut().zip(v) {
            *o = -self.stiffness * x;
        }
        Ok(())
    }

    fn potential(&self, q: &[f64]) -> Result<f64, FieldError> {
        Ok(0.5 * self.stiffness * q.iter().map(|x| x * x).sum::<f64>())
    }

    fn omega_max(&self) -> f64 {
        self.stiffness.sqrt()
    }
}
