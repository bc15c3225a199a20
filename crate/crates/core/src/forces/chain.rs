use serde::{Deserialize, Serialize};

use super::{bad, FieldConfig, FieldError, ForceField, Layout};

/// A planar chain of point masses joined by stiff springs, hanging from a
/// fixed anchor under uniform gravity.
///
/// Bond `b` joins particle `b - 1` to particle `b`, with bond 0 joining the
/// anchor to particle 0. Each bond contributes
/// `f = -k (|r| - rest) r / |r|` to its far end and the opposite to its near
/// end; every particle also feels `(0, -g m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    n: usize,
    k: f64,
    rest_length: f64,
    g: f64,
    mass: f64,
    anchor: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default = "default_rest")]
    pub rest_length: f64,
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default = "default_mass")]
    pub mass: f64,
    #[serde(default)]
    pub anchor: [f64; 2],
}

fn default_k() -> f64 {
    100.0
}
fn default_rest() -> f64 {
    0.25
}
fn default_g() -> f64 {
    1.0
}
fn default_mass() -> f64 {
    1.0
}

impl Default for ChainParams {
    fn default() -> Self {
        ChainParams {
            k: default_k(),
            rest_length: default_rest(),
            g: default_g(),
            mass: default_mass(),
            anchor: [0.0, 0.0],
        }
    }
}

impl Chain {
    pub const NAME: &'static str = "chain";

    pub fn new(n: usize, params: &ChainParams) -> Result<Self, FieldError> {
        if n == 0 {
            return Err(bad(Self::NAME, "needs at least one particle"));
        }
        if !(params.k.is_finite() && params.k > 0.0) {
            return Err(bad(Self::NAME, format!("k must be positive, got {}", params.k)));
        }
        if !(params.mass.is_finite() && params.mass > 0.0) {
            return Err(bad(Self::NAME, "mass must be positive"));
        }
        if !(params.rest_length.is_finite() && params.rest_length >= 0.0)
            || !params.g.is_finite()
            || !params.anchor.iter().all(|a| a.is_finite())
        {
            return Err(bad(Self::NAME, "rest_length, g and anchor must be finite"));
        }
        Ok(Chain {
            n,
            k: params.k,
            rest_length: params.rest_length,
            g: params.g,
            mass: params.mass,
            anchor: params.anchor,
        })
    }

    pub fn from_config(config: &FieldConfig, layout: Layout) -> Result<Box<dyn ForceField>, FieldError> {
        if layout.d != 2 {
            return Err(bad(Self::NAME, "chain scenes are two-dimensional"));
        }
        let params: ChainParams = config.params(Self::NAME)?;
        Ok(Box::new(Chain::new(layout.n, &params)?))
    }

    fn point(&self, q: &[f64], idx: Option<usize>) -> [f64; 2] {
        match idx {
            None => self.anchor,
            Some(i) => [q[2 * i], q[2 * i + 1]],
        }
    }

    /// Ends of bond `b`: `(near, far)`, where `None` is the anchor.
    fn bond(b: usize) -> (Option<usize>, usize) {
        (b.checked_sub(1), b)
    }

    /// Bond vector `far - near` and its length.
    fn bond_vector(&self, q: &[f64], b: usize) -> Result<([f64; 2], f64), FieldError> {
        let (near, far) = Self::bond(b);
        let a = self.point(q, near);
        let c = self.point(q, Some(far));
        let r = [c[0] - a[0], c[1] - a[1]];
        let len = (r[0] * r[0] + r[1] * r[1]).sqrt();
        if len == 0.0 {
            return Err(FieldError::Singular { bond: b });
        }
        Ok((r, len))
    }
}

impl ForceField for Chain {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn forces(&self, q: &[f64], out: &mut [f64]) -> Result<(), FieldError> {
        for i in 0..self.n {
            out[2 * i] = 0.0;
            out[2 * i + 1] = -self.g * self.mass;
        }
        for b in 0..self.n {
            let (r, len) = self.bond_vector(q, b)?;
            let c = -self.k * (len - self.rest_length) / len;
            let (near, far) = Self::bond(b);
            for k in 0..2 {
                let t = c * r[k];
                out[2 * far + k] += t;
                if let Some(i) = near {
                    out[2 * i + k] -= t;
                }
            }
        }
        Ok(())
    }

    fn jtp(&self, q: &[f64], v: &[f64], out: &mut [f64]) -> Result<(), FieldError> {
        out.fill(0.0);
        for b in 0..self.n {
            let (r, len) = self.bond_vector(q, b)?;
            let (near, far) = Self::bond(b);
            // d(bond force)/dr = -k [(1 - L0/L) I + (L0/L) u u^T], u = r/L.
            let ratio = self.rest_length / len;
            let u = [r[0] / len, r[1] / len];
            let dv = match near {
                None => [v[2 * far], v[2 * far + 1]],
                Some(i) => [v[2 * far] - v[2 * i], v[2 * far + 1] - v[2 * i + 1]],
            };
            let u_dot = u[0] * dv[0] + u[1] * dv[1];
            for k in 0..2 {
                let w = -self.k * ((1.0 - ratio) * dv[k] + ratio * u[k] * u_dot);
                out[2 * far + k] += w;
                if let Some(i) = near {
                    out[2 * i + k] -= w;
                }
            }
        }
        Ok(())
    }

    fn potential(&self, q: &[f64]) -> Result<f64, FieldError> {
        let mut v = 0.0;
        for b in 0..self.n {
            let (_, len) = self.bond_vector(q, b)?;
            let stretch = len - self.rest_length;
            v += 0.5 * self.k * stretch * stretch;
        }
        for i in 0..self.n {
            v += self.mass * self.g * q[2 * i + 1];
        }
        Ok(v)
    }

    fn omega_max(&self) -> f64 {
        (2.0 * self.k / self.mass).sqrt()
    }
}
