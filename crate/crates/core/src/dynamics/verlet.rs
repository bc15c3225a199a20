use crate::adjoint::AdjointState;
use crate::fixedpoint::{Fixed, Rounding};
use crate::forces::ForceField;

use super::{check_step, DynamicsError, Integrator, State, StepReport};

/// `x_i += fixed(coef * rate_i)` for every component.
fn advance(x: &mut [Fixed], rate: impl Iterator<Item = f64>, coef: f64, rounding: Rounding) -> u32 {
    let mut wraps = 0;
    for (xi, r) in x.iter_mut().zip(rate) {
        let (next, wrapped) = xi.overflowing_add(Fixed::from_real_wrapping(coef * r, rounding));
        *xi = next;
        wraps += wrapped as u32;
    }
    wraps
}

fn drift(s: &mut State, coef: f64, rounding: Rounding) -> u32 {
    let State { q, p, .. } = s;
    advance(q, p.iter().map(|x| x.to_real()), coef, rounding)
}

fn kick(s: &mut State, forces: &[f64], coef: f64, rounding: Rounding) -> u32 {
    advance(&mut s.p, forces.iter().copied(), coef, rounding)
}

/// Forces at the current positions; `step` labels errors.
fn forces_at(q: &[f64], field: &dyn ForceField, step: i64) -> Result<Vec<f64>, DynamicsError> {
    let f = field
        .evaluate(q)
        .map_err(|error| DynamicsError::Field { step, error })?;
    if f.iter().any(|x| !x.is_finite()) {
        return Err(DynamicsError::NonFiniteForce { step });
    }
    Ok(f)
}

fn direction(h: f64) -> i64 {
    if h > 0.0 {
        1
    } else {
        -1
    }
}

/// Drift-kick-drift splitting, one force evaluation per step at the
/// half-step positions.
#[derive(Debug, Clone, Copy, Default)]
pub struct PositionVerlet {
    rounding: Rounding,
}

impl PositionVerlet {
    pub const NAME: &'static str = "position-verlet";

    /// A variant with a non-default increment rounding. Anything other than
    /// [`Rounding::TowardZero`] breaks reversibility.
    pub fn with_rounding(rounding: Rounding) -> Self {
        PositionVerlet { rounding }
    }
}

impl Integrator for PositionVerlet {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn step(&self, s: &mut State, field: &dyn ForceField, h: f64) -> Result<StepReport, DynamicsError> {
        check_step(h)?;
        let half = 0.5 * h;
        let mut wraps = drift(s, half, self.rounding);
        let f = forces_at(&s.q_real(), field, s.step)?;
        wraps += kick(s, &f, h, self.rounding);
        wraps += drift(s, half, self.rounding);
        s.step += direction(h);
        Ok(StepReport { wraps })
    }

    fn reverse_with_adjoint(
        &self,
        s: &mut State,
        adj: &mut AdjointState,
        field: &dyn ForceField,
        h: f64,
    ) -> Result<StepReport, DynamicsError> {
        check_step(h)?;
        // The primal retrace is exactly `step(-h)`, split around the adjoint update.
        let back = -h;
        let half_back = 0.5 * back;
        let mut wraps = drift(s, half_back, self.rounding);
        let q_half = s.q_real();
        let label = s.step - direction(h);

        let half = 0.5 * h;
        for (ph, qh) in adj.ph.iter_mut().zip(&adj.qh) {
            *ph += half * qh;
        }
        let pulled = field
            .jtp_vec(&q_half, &adj.ph)
            .map_err(|error| DynamicsError::Field { step: label, error })?;
        for (qh, j) in adj.qh.iter_mut().zip(&pulled) {
            *qh += h * j;
        }
        for (ph, qh) in adj.ph.iter_mut().zip(&adj.qh) {
            *ph += half * qh;
        }

        let f = forces_at(&q_half, field, label)?;
        wraps += kick(s, &f, back, self.rounding);
        wraps += drift(s, half_back, self.rounding);
        s.step -= direction(h);
        Ok(StepReport { wraps })
    }
}

/// Kick-drift-kick splitting (leap frog).
#[derive(Debug, Clone, Copy, Default)]
pub struct VelocityVerlet {
    rounding: Rounding,
}

impl VelocityVerlet {
    pub const NAME: &'static str = "velocity-verlet";

    pub fn with_rounding(rounding: Rounding) -> Self {
        VelocityVerlet { rounding }
    }
}

impl Integrator for VelocityVerlet {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn step(&self, s: &mut State, field: &dyn ForceField, h: f64) -> Result<StepReport, DynamicsError> {
        check_step(h)?;
        let half = 0.5 * h;
        let f = forces_at(&s.q_real(), field, s.step)?;
        let mut wraps = kick(s, &f, half, self.rounding);
        wraps += drift(s, h, self.rounding);
        let f = forces_at(&s.q_real(), field, s.step)?;
        wraps += kick(s, &f, half, self.rounding);
        s.step += direction(h);
        Ok(StepReport { wraps })
    }

    fn reverse_with_adjoint(
        &self,
        s: &mut State,
        adj: &mut AdjointState,
        field: &dyn ForceField,
        h: f64,
    ) -> Result<StepReport, DynamicsError> {
        check_step(h)?;
        let back = -h;
        let half_back = 0.5 * back;
        let half = 0.5 * h;
        let label = s.step - direction(h);
        let field_err = |error| DynamicsError::Field { step: label, error };

        // Final half-kick, evaluated at the end positions.
        let q_end = s.q_real();
        let f = forces_at(&q_end, field, label)?;
        let mut wraps = kick(s, &f, half_back, self.rounding);
        let pulled = field.jtp_vec(&q_end, &adj.ph).map_err(field_err)?;
        for (qh, j) in adj.qh.iter_mut().zip(&pulled) {
            *qh += half * j;
        }

        wraps += drift(s, back, self.rounding);
        for (ph, qh) in adj.ph.iter_mut().zip(&adj.qh) {
            *ph += h * qh;
        }

        // First half-kick, evaluated at the start positions.
        let q_start = s.q_real();
        let f = forces_at(&q_start, field, label)?;
        wraps += kick(s, &f, half_back, self.rounding);
        let pulled = field.jtp_vec(&q_start, &adj.ph).map_err(field_err)?;
        for (qh, j) in adj.qh.iter_mut().zip(&pulled) {
            *qh += half * j;
        }

        s.step -= direction(h);
        Ok(StepReport { wraps })
    }
}
