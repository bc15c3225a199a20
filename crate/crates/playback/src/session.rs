use std::collections::BTreeMap;

use serde::Serialize;

use revint::dynamics::{energy, State, StateHash};
use revint::scene::Scene;
use revint::simulate::Simulation;
use revint::Fixed;

use crate::ServiceError;

/// Default bound on the number of integrator steps a single seek may take.
pub const DEFAULT_SEEK_CAP: u64 = 1_000_000;

/// Render payload for the current state.
///
/// Fixed-point values only ever appear as hex strings; `q`, `p` and
/// `positions` are binary64 renderings for display.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frame {
    pub ok: bool,
    pub step: i64,
    pub digest: String,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub q_hex: Vec<Fixed>,
    pub p_hex: Vec<Fixed>,
    #[serde(rename = "H")]
    pub energy: f64,
}

/// One scene being scrubbed through time.
///
/// The only simulation memory is the current state; revisiting a step means
/// stepping there again. Every visited step's digest is logged, and a
/// revisit that produces a different digest poisons the session.
pub struct Session {
    sim: Simulation,
    state: State,
    hash_log: BTreeMap<i64, StateHash>,
    integrator_calls: u64,
    seek_cap: u64,
    poisoned: bool,
}

impl Session {
    pub fn new(scene: Scene, seek_cap: u64) -> Result<Self, ServiceError> {
        let sim = Simulation::new(scene).map_err(|e| ServiceError::BadScene(e.to_string()))?;
        let state = sim.initial_state();
        // Catch unusable force fields at creation rather than on first seek.
        sim.field()
            .evaluate(&state.q_real())
            .map_err(|e| ServiceError::BadScene(e.to_string()))?;
        let mut hash_log = BTreeMap::new();
        hash_log.insert(0, state.hash());
        Ok(Session {
            sim,
            state,
            hash_log,
            integrator_calls: 0,
            seek_cap,
            poisoned: false,
        })
    }

    pub fn step(&self) -> i64 {
        self.state.step
    }

    pub fn digest(&self) -> StateHash {
        self.state.hash()
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn integrator_calls(&self) -> u64 {
        self.integrator_calls
    }

    pub fn visited(&self) -> &BTreeMap<i64, StateHash> {
        &self.hash_log
    }

    /// Steps to `target` and returns the frame there.
    pub fn seek(&mut self, target: i64) -> Result<Frame, ServiceError> {
        if self.poisoned {
            return Err(ServiceError::DigestMismatch { step: self.state.step });
        }
        let distance = target.abs_diff(self.state.step);
        if distance > self.seek_cap {
            return Err(ServiceError::SeekCap {
                requested: distance,
                cap: self.seek_cap,
            });
        }
        let direction = (target - self.state.step).signum();
        let mut working = self.state.clone();
        while working.step != target {
            self.sim
                .step(&mut working, direction)
                .map_err(|e| ServiceError::Numeric(e.to_string()))?;
            self.integrator_calls += 1;
            let digest = working.hash();
            match self.hash_log.get(&working.step) {
                Some(logged) if *logged != digest => {
                    self.poisoned = true;
                    return Err(ServiceError::DigestMismatch { step: working.step });
                }
                Some(_) => {}
                None => {
                    self.hash_log.insert(working.step, digest);
                }
            }
        }
        self.state = working;
        self.frame()
    }

    pub fn frame(&self) -> Result<Frame, ServiceError> {
        if self.poisoned {
            return Err(ServiceError::DigestMismatch { step: self.state.step });
        }
        let q = self.state.q_real();
        let d = self.sim.scene().d;
        let e = energy(&self.state, self.sim.field()).map_err(|e| ServiceError::Numeric(e.to_string()))?;
        Ok(Frame {
            ok: true,
            step: self.state.step,
            digest: self.state.hash().to_hex(),
            positions: q.chunks(d).map(<[f64]>::to_vec).collect(),
            q,
            p: self.state.p_real(),
            q_hex: self.state.q.clone(),
            p_hex: self.state.p.clone(),
            energy: e.total,
        })
    }

    #[cfg(test)]
    pub(crate) fn corrupt_log(&mut self, step: i64) {
        self.hash_log.insert(step, StateHash([0; 32]));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use revint::scene;

    fn spring_session() -> Session {
        Session::new(scene::spring(0.1), DEFAULT_SEEK_CAP).unwrap()
    }

    #[test]
    fn seek_there_and_back_restores_creation_digest() {
        let mut s = spring_session();
        let created = s.digest();
        s.seek(400).unwrap();
        assert_ne!(s.digest(), created);
        let frame = s.seek(0).unwrap();
        assert_eq!(frame.digest, created.to_hex());
        assert_eq!(s.state(), &scene::spring(0.1).initial_state());
    }

    #[test]
    fn seek_to_current_step_does_no_work() {
        let mut s = spring_session();
        s.seek(10).unwrap();
        let calls = s.integrator_calls();
        let a = s.seek(10).unwrap();
        assert_eq!(s.integrator_calls(), calls);
        assert_eq!(a, s.frame().unwrap());
    }

    #[test]
    fn negative_steps_are_legal() {
        let mut s = spring_session();
        let f = s.seek(-250).unwrap();
        assert_eq!(f.step, -250);
        assert!((f.energy - 0.5).abs() < 0.01);
        assert_eq!(s.visited().len(), 251);
    }

    #[test]
    fn frame_payload_matches_state() {
        let mut s = Session::new(scene::gravity_ring(8), DEFAULT_SEEK_CAP).unwrap();
        let f = s.seek(37).unwrap();
        assert_eq!(f.digest, s.digest().to_hex());
        assert_eq!(f.positions.len(), 8);
        for (i, pos) in f.positions.iter().enumerate() {
            assert_eq!(
                pos,
                &vec![s.state().q[2 * i].to_real(), s.state().q[2 * i + 1].to_real()]
            );
        }
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.contains(&format!("\"q_hex\":[\"{}\"", s.state().q[0].to_hex())));
    }

    #[test]
    fn seek_cap_is_enforced() {
        let mut s = Session::new(scene::spring(0.1), 100).unwrap();
        assert!(matches!(
            s.seek(101),
            Err(ServiceError::SeekCap {
                requested: 101,
                cap: 100
            })
        ));
        assert_eq!(s.integrator_calls(), 0);
        s.seek(100).unwrap();
        s.seek(-0).unwrap();
    }

    #[test]
    fn digest_mismatch_poisons_the_session() {
        let mut s = spring_session();
        s.seek(5).unwrap();
        s.corrupt_log(3);
        assert!(matches!(s.seek(0), Err(ServiceError::DigestMismatch { step: 3 })));
        assert!(matches!(s.frame(), Err(ServiceError::DigestMismatch { .. })));
    }

    #[test]
    fn two_sessions_share_step_zero_digest() {
        assert_eq!(spring_session().digest(), spring_session().digest());
    }

    #[test]
    fn singular_scene_is_rejected() {
        let mut sc = scene::chain(2);
        sc.q0[2] = sc.q0[0];
        sc.q0[3] = sc.q0[1];
        assert!(matches!(Session::new(sc, 10), Err(ServiceError::BadScene(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn random_walk_revisits_reproduce_digests(targets in prop::collection::vec(-500i64..=500, 100)) {
            let mut s = Session::new(scene::chain(4), DEFAULT_SEEK_CAP).unwrap();
            let mut first_seen = BTreeMap::new();
            first_seen.insert(0, s.digest().to_hex());
            for t in targets {
                let f = s.seek(t).unwrap();
                let expected = first_seen.entry(t).or_insert_with(|| f.digest.clone());
                prop_assert_eq!(&f.digest, expected);
            }
        }
    }
}
