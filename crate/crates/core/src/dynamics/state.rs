use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::fixedpoint::{to_reals, Fixed};
use crate::forces::{FieldError, ForceField};

/// Phase-space state: fixed-point coordinates and momenta plus a step index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct State {
    pub q: Vec<Fixed>,
    pub p: Vec<Fixed>,
    pub step: i64,
}

impl State {
    pub fn new(q: Vec<Fixed>, p: Vec<Fixed>) -> Self {
        assert_eq!(q.len(), p.len(), "q and p must have equal length");
        State { q, p, step: 0 }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn q_real(&self) -> Vec<f64> {
        to_reals(&self.q)
    }

    pub fn p_real(&self) -> Vec<f64> {
        to_reals(&self.p)
    }

    pub fn hash(&self) -> StateHash {
        state_hash(self)
    }

    /// Largest `|q_i|` on the real side.
    pub fn max_abs_q(&self) -> f64 {
        self.q.iter().fold(0.0, |m, x| m.max(x.to_real().abs()))
    }
}

/// SHA-256 of a state.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateHash(pub [u8; 32]);

impl StateHash {
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for StateHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for StateHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateHash({})", self.to_hex())
    }
}

impl Serialize for StateHash {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

/// Digest over all `q` bits, then all `p` bits, then the step index, each
/// little-endian.
pub fn state_hash(s: &State) -> StateHash {
    let mut hasher = Sha256::new();
    for x in s.q.iter().chain(&s.p) {
        hasher.update(x.to_bits().to_le_bytes());
    }
    hasher.update(s.step.to_le_bytes());
    StateHash(hasher.finalize().into())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energy {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

/// `H = 1/2 |p|^2 + V(q)` evaluated on the real side.
pub fn energy(s: &State, field: &dyn ForceField) -> Result<Energy, FieldError> {
    let kinetic = 0.5 * s.p.iter().map(|x| x.to_real().powi(2)).sum::<f64>();
    let potential = field.potential(&s.q_real())?;
    Ok(Energy {
        kinetic,
        potential,
        total: kinetic + potential,
    })
}
