//! Bitwise-reversible Hamiltonian integration.
//!
//! Coordinates and momenta live in Q3.60 fixed point ([`fixedpoint`]), forces
//! are evaluated in binary64 ([`forces`]), and the Verlet integrators in
//! [`dynamics`] combine the two so that running a trajectory backward with
//! `-h` lands on every earlier state bit for bit. [`adjoint`] uses that
//! property to compute keyframe-control gradients without storing the
//! forward trajectory.

pub mod adjoint;
pub mod dynamics;
pub mod fixedpoint;
pub mod forces;
pub mod scene;
pub mod simulate;

pub use adjoint::{AdjointState, ControlVector, Keyframe};
pub use dynamics::{Integrator, IntegratorRegistry, State, StateHash};
pub use fixedpoint::Fixed;
pub use forces::{FieldRegistry, ForceField};
pub use scene::Scene;
pub use simulate::{RecordingPolicy, Simulation, Trajectory};
