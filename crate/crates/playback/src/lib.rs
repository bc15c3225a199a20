//! Interactive playback of reversible simulations.
//!
//! Clients create a session from a scene and then seek to any step, forward
//! or backward. Every seek is carried out by stepping the reversible
//! integrator; no snapshots are stored. The wire protocol is one JSON object
//! per WebSocket text frame:
//!
//! ```text
//! -> {"op":"create","scene":{...}}          <- {"ok":true,"id":"...","step":0,"digest":"..."}
//! -> {"op":"seek","id":"...","step":-250}   <- {"ok":true,"step":-250,"digest":"...","q":[...],...}
//! -> {"op":"frame","id":"..."}              <- same payload as seek
//! -> {"op":"close","id":"..."}              <- {"ok":true}
//! errors: {"ok":false,"code":"unknown_session"|"bad_scene"|"digest_mismatch"|"seek_cap"|...,"msg":"..."}
//! ```

mod server;
mod session;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use revint::scene::Scene;

pub use server::{router, serve};
pub use session::{Frame, Session, DEFAULT_SEEK_CAP};

#[derive(Debug, Clone, PartialEq)]
pub enum ServiceError {
    UnknownSession(String),
    BadScene(String),
    BadRequest(String),
    DigestMismatch { step: i64 },
    SeekCap { requested: u64, cap: u64 },
    Numeric(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::BadScene(_) => "bad_scene",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::DigestMismatch { .. } => "digest_mismatch",
            ServiceError::SeekCap { .. } => "seek_cap",
            ServiceError::Numeric(_) => "numeric_abort",
        }
    }

    pub fn message(&self) -> String {
        match self {
            ServiceError::UnknownSession(id) => format!("no session '{id}'"),
            ServiceError::BadScene(msg) | ServiceError::BadRequest(msg) | ServiceError::Numeric(msg) => msg.clone(),
            ServiceError::DigestMismatch { step } => {
                format!("digest at step {step} differs from its first visit; reversibility is broken")
            }
            ServiceError::SeekCap { requested, cap } => format!("seek of {requested} steps exceeds the cap of {cap}"),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Request {
    Create { scene: Value },
    Seek { id: String, step: i64 },
    Frame { id: String },
    Close { id: String },
}

#[derive(Debug, Serialize)]
struct Created<'a> {
    ok: bool,
    id: &'a str,
    step: i64,
    digest: String,
}

#[derive(Debug, Serialize)]
struct ErrorReply {
    ok: bool,
    code: &'static str,
    msg: String,
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("reply serializes")
}

fn error_reply(e: &ServiceError) -> String {
    serde_json::to_string(&ErrorReply {
        ok: false,
        code: e.code(),
        msg: e.message(),
    })
    .expect("error reply serializes")
}

/// Shared session table.
///
/// Each session sits behind its own lock, so commands on one session run
/// strictly in order while different sessions proceed independently.
pub struct Hub {
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
    seek_cap: u64,
}

impl Hub {
    pub fn new(seek_cap: u64) -> Self {
        Hub {
            sessions: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            seek_cap,
        }
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn create(&self, scene: Value) -> Result<(String, Arc<Mutex<Session>>), ServiceError> {
        let scene: Scene = serde_json::from_value(scene).map_err(|e| ServiceError::BadScene(e.to_string()))?;
        let session = Session::new(scene, self.seek_cap)?;
        let id = format!("session-{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let session = Arc::new(Mutex::new(session));
        self.sessions.lock().unwrap().insert(id.clone(), session.clone());
        Ok((id, session))
    }

    pub fn remove(&self, id: &str) -> bool {
        self.sessions.lock().unwrap().remove(id).is_some()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Handles one request, returning the reply text and, for a successful
    /// `create`, the new session id.
    pub fn handle(&self, text: &str) -> (String, Option<String>) {
        let request: Request = match serde_json::from_str(text) {
            Ok(r) => r,
            Err(e) => return (error_reply(&ServiceError::BadRequest(e.to_string())), None),
        };
        match self.dispatch(request) {
            Ok(reply) => reply,
            Err(e) => (error_reply(&e), None),
        }
    }

    fn dispatch(&self, request: Request) -> Result<(String, Option<String>), ServiceError> {
        match request {
            Request::Create { scene } => {
                let (id, session) = self.create(scene)?;
                let session = session.lock().unwrap();
                let reply = Created {
                    ok: true,
                    id: &id,
                    step: session.step(),
                    digest: session.digest().to_hex(),
                };
                Ok((json(&reply), Some(id)))
            }
            Request::Seek { id, step } => {
                let session = self.session(&id)?;
                let mut session = session.lock().unwrap();
                match session.seek(step) {
                    Err(e @ ServiceError::DigestMismatch { .. }) => {
                        drop(session);
                        self.remove(&id);
                        Err(e)
                    }
                    other => Ok((json(&other?), None)),
                }
            }
            Request::Frame { id } => {
                let session = self.session(&id)?;
                let frame = session.lock().unwrap().frame()?;
                Ok((json(&frame), None))
            }
            Request::Close { id } => {
                if self.remove(&id) {
                    Ok((r#"{"ok":true}"#.to_string(), None))
                } else {
                    Err(ServiceError::UnknownSession(id))
                }
            }
        }
    }
}

impl Default for Hub {
    fn default() -> Self {
        Hub::new(DEFAULT_SEEK_CAP)
    }
}
