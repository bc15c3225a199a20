use super::{FieldConfig, FieldError, ForceField, Layout};

/// Zero force everywhere. Free particles drift in straight lines.
#[derive(Debug, Clone, Copy, Default)]
pub struct Free;

impl Free {
    pub const NAME: &'static str = "free";

    pub fn from_config(config: &FieldConfig, _layout: Layout) -> Result<Box<dyn ForceField>, FieldError> {
        if !config.params.is_empty() {
            return Err(super::bad(Self::NAME, "takes no parameters"));
        }
        Ok(Box::new(Free))
    }
}

impl ForceField for Free {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn forces(&self, _q: &[f64], out: &mut [f64]) -> Result<(), FieldError> {
        out.fill(0.0);
        Ok(())
    }

    fn jtp(&self, _q: &[f64], _v: &[f64], out: &mut [f64]) -> Result<(), FieldError> {
        out.fill(0.0);
        Ok(())
    }

    fn potential(&self, _q: &[f64]) -> Result<f64, FieldError> {
        Ok(0.0)
    }

    fn omega_max(&self) -> f64 {
        0.0
    }
}
