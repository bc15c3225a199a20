use serde::{Deserialize, Serialize};

use super::{bad, FieldConfig, FieldError, ForceField, Layout};

/// Pairwise Plummer-softened attraction.
///
/// `f_i = sum_{j != i} G m_i m_j (q_j - q_i) / (|q_j - q_i|^2 + eps^2)^{3/2}`.
/// Each pair term is computed once and applied with opposite signs, so
/// `f_1 == -f_2` holds exactly for two bodies.
#[derive(Debug, Clone, PartialEq)]
pub struct Gravity {
    dim: usize,
    g: f64,
    eps: f64,
    masses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GravityParams {
    #[serde(rename = "G", default = "default_g")]
    pub g: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Defaults to `1/n` per particle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
}

fn default_g() -> f64 {
    1.0
}

fn default_eps() -> f64 {
    0.05
}

impl Default for GravityParams {
    fn default() -> Self {
        GravityParams {
            g: default_g(),
            eps: default_eps(),
            masses: None,
        }
    }
}

impl Gravity {
    pub const NAME: &'static str = "gravity";

    pub fn new(dim: usize, g: f64, eps: f64, masses: Vec<f64>) -> Result<Self, FieldError> {
        if masses.len() < 2 {
            return Err(bad(Self::NAME, "needs at least two particles"));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(bad(Self::NAME, format!("eps must be positive, got {eps}")));
        }
        if !g.is_finite() || masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(bad(Self::NAME, "G and masses must be finite, masses non-negative"));
        }
        Ok(Gravity { dim, g, eps, masses })
    }

    pub fn from_config(config: &FieldConfig, layout: Layout) -> Result<Box<dyn ForceField>, FieldError> {
        let params: GravityParams = config.params(Self::NAME)?;
        let masses = match params.masses {
            Some(m) if m.len() != layout.n => {
                return Err(bad(
                    Self::NAME,
                    format!("{} masses for {} particles", m.len(), layout.n),
                ));
            }
            Some(m) => m,
            None => vec![1.0 / layout.n as f64; layout.n],
        };
        Ok(Box::new(Gravity::new(layout.d, params.g, params.eps, masses)?))
    }

    fn n(&self) -> usize {
        self.masses.len()
    }

    fn separation(&self, q: &[f64], i: usize, j: usize, r: &mut [f64]) -> f64 {
        let d = self.dim;
        let mut r2 = 0.0;
        for k in 0..d {
            r[k] = q[j * d + k] - q[i * d + k];
            r2 += r[k] * r[k];
        }
        r2 + self.eps * self.eps
    }
}

impl ForceField for Gravity {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn forces(&self, q: &[f64], out: &mut [f64]) -> Result<(), FieldError> {
        let d = self.dim;
        let mut r = [0.0; 3];
        out.fill(0.0);
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                let s = self.separation(q, i, j, &mut r);
                let c = self.g * self.masses[i] * self.masses[j] / (s * s.sqrt());
                for k in 0..d {
                    let t = c * r[k];
                    out[i * d + k] += t;
                    out[j * d + k] -= t;
                }
            }
        }
        Ok(())
    }

    fn jtp(&self, q: &[f64], v: &[f64], out: &mut [f64]) -> Result<(), FieldError> {
        let d = self.dim;
        let mut r = [0.0; 3];
        let mut dv = [0.0; 3];
        out.fill(0.0);
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                let s = self.separation(q, i, j, &mut r);
                let c = self.g * self.masses[i] * self.masses[j] / (s * s.sqrt());
                // K = c (I - 3 r r^T / s), applied to v_j - v_i.
                let mut r_dot = 0.0;
                for k in 0..d {
                    dv[k] = v[j * d + k] - v[i * d + k];
                    r_dot += r[k] * dv[k];
                }
                for k in 0..d {
                    let w = c * (dv[k] - 3.0 * r[k] * r_dot / s);
                    out[i * d + k] += w;
                    out[j * d + k] -= w;
                }
            }
        }
        Ok(())
    }

    fn potential(&self, q: &[f64]) -> Result<f64, FieldError> {
        let mut r = [0.0; 3];
        let mut v = 0.0;
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                let s = self.separation(q, i, j, &mut r);
                v -= self.g * self.masses[i] * self.masses[j] / s.sqrt();
            }
        }
        Ok(v)
    }

    fn omega_max(&self) -> f64 {
        let total: f64 = self.masses.iter().sum();
        (2.0 * self.g * total / self.eps.powi(3)).sqrt()
    }
}
