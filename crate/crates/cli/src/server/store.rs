//! Per-session snapshot storage.
//!
//! Readers clone the current `Arc<Snapshot>` under a short read lock and
//! never wait for a running mutation. Writers serialize on an async mutex,
//! compute the successor snapshot outside any lock, then swap it in.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};
use std::time::Instant;

use chrono::{DateTime, Utc};
use rpys_core::{Analysis, Session};
use serde::Serialize;
use uuid::Uuid;

/// Oldest snapshots are dropped beyond this depth.
pub const MAX_UNDO: usize = 64;

/// An immutable session state with everything reads need precomputed.
#[derive(Debug)]
pub struct Snapshot {
    pub session: Session,
    /// `None` when the dataset is empty.
    pub analysis: Option<Analysis>,
}

impl Snapshot {
    pub fn new(session: Session) -> Self {
        let analysis = session.dataset.as_ref().and_then(|d| Analysis::of(d).ok());
        Self { session, analysis }
    }

    pub fn op_log_len(&self) -> usize {
        self.session.op_log_len()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Progress {
    pub busy: bool,
    pub operation: Option<String>,
    pub elapsed_ms: Option<u64>,
}

#[derive(Debug)]
struct Versions {
    current: Arc<Snapshot>,
    undo: Vec<Arc<Snapshot>>,
}

#[derive(Debug)]
pub struct SessionSlot {
    pub id: Uuid,
    pub created_at: DateTime<Utc>,
    versions: RwLock<Versions>,
    writer: tokio::sync::Mutex<()>,
    running: Mutex<Option<(String, Instant)>>,
}

impl SessionSlot {
    fn new(id: Uuid, snapshot: Snapshot) -> Self {
        Self {
            id,
            created_at: Utc::now(),
            versions: RwLock::new(Versions { current: Arc::new(snapshot), undo: Vec::new() }),
            writer: tokio::sync::Mutex::new(()),
            running: Mutex::new(None),
        }
    }

    pub fn current(&self) -> Arc<Snapshot> {
        self.versions.read().expect("versions lock").current.clone()
    }

    pub fn undo_depth(&self) -> usize {
        self.versions.read().expect("versions lock").undo.len()
    }

    pub fn progress(&self) -> Progress {
        match &*self.running.lock().expect("progress lock") {
            Some((op, started)) => Progress {
                busy: true,
                operation: Some(op.clone()),
                elapsed_ms: Some(started.elapsed().as_millis() as u64),
            },
            None => Progress { busy: false, operation: None, elapsed_ms: None },
        }
    }

    /// Runs `f` on a copy of the current session on a blocking thread and
    /// publishes the result as the new current snapshot.
    pub async fn mutate<E, F>(self: &Arc<Self>, label: &str, f: F) -> Result<Arc<Snapshot>, E>
    where
        E: Send + 'static,
        F: FnOnce(&mut Session) -> Result<(), E> + Send + 'static,
    {
        let _guard = self.writer.lock().await;
        let base = self.current();
        *self.running.lock().expect("progress lock") = Some((label.to_string(), Instant::now()));
        let computed = tokio::task::spawn_blocking(move || {
            let mut session = base.session.clone();
            f(&mut session).map(|()| Snapshot::new(session))
        })
        .await
        .expect("mutation task panicked");
        *self.running.lock().expect("progress lock") = None;

        let next = Arc::new(computed?);
        let mut v = self.versions.write().expect("versions lock");
        let previous = std::mem::replace(&mut v.current, next.clone());
        v.undo.push(previous);
        if v.undo.len() > MAX_UNDO {
            v.undo.remove(0);
        }
        Ok(next)
    }

    /// Restores the previous snapshot, or `None` when there is nothing to undo.
    pub async fn undo(&self) -> Option<Arc<Snapshot>> {
        let _guard = self.writer.lock().await;
        let mut v = self.versions.write().expect("versions lock");
        let previous = v.undo.pop()?;
        v.current = previous.clone();
        Some(previous)
    }
}

#[derive(Debug, Default)]
pub struct Store {
    sessions: RwLock<HashMap<Uuid, Arc<SessionSlot>>>,
}

impl Store {
    pub fn insert(&self, session: Session) -> Arc<SessionSlot> {
        let id = Uuid::new_v4();
        let slot = Arc::new(SessionSlot::new(id, Snapshot::new(session)));
        self.sessions.write().expect("store lock").insert(id, slot.clone());
        slot
    }

    pub fn get(&self, id: &Uuid) -> Option<Arc<SessionSlot>> {
        self.sessions.read().expect("store lock").get(id).cloned()
    }

    pub fn remove(&self, id: &Uuid) -> Option<Arc<SessionSlot>> {
        self.sessions.write().expect("store lock").remove(id)
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
