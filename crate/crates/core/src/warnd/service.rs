//! Client registry and warning dispatch, independent of any transport.
//!
//! All mutations and every dispatch go through one mutex, so each dispatch
//! sees a consistent registry and a connection's WARN lines are written while
//! that snapshot is held.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex, MutexGuard};

use super::protocol::{decode, ErrReason, Message, WarningMessage};
use crate::class::SoundClass;
use crate::decision::{DetectionResult, Direction};
use crate::deployment::{should_warn, DangerArea, DeploymentPlan, PedestrianPosition};
use crate::error::Result;

/// Where a client's outbound lines go. `deliver` returns whether the line was accepted.
pub trait Sink: Clone + Send + 'static {
    fn deliver(&self, line: &str) -> bool;
}

/// Accepts and discards everything.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullSink;

impl Sink for NullSink {
    fn deliver(&self, _line: &str) -> bool {
        true
    }
}

/// Keeps every delivered line, shared between clones.
#[derive(Debug, Clone, Default)]
pub struct Recorder {
    lines: Arc<Mutex<Vec<String>>>,
}

impl Recorder {
    pub fn lines(&self) -> Vec<String> {
        self.lines.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn take(&self) -> Vec<String> {
        std::mem::take(&mut *self.lines.lock().unwrap_or_else(|e| e.into_inner()))
    }
}

impl Sink for Recorder {
    fn deliver(&self, line: &str) -> bool {
        self.lines.lock().unwrap_or_else(|e| e.into_inner()).push(line.to_string());
        true
    }
}

#[derive(Debug, Clone)]
struct Client<S> {
    position: PedestrianPosition,
    sink: S,
}

#[derive(Debug, Clone)]
pub struct Registry<S> {
    clients: BTreeMap<String, Client<S>>,
}

impl<S> Default for Registry<S> {
    fn default() -> Self {
        Self { clients: BTreeMap::new() }
    }
}

impl<S: Sink> Registry<S> {
    pub fn len(&self) -> usize {
        self.clients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clients.is_empty()
    }

    pub fn position(&self, client_id: &str) -> Option<&PedestrianPosition> {
        self.clients.get(client_id).map(|c| &c.position)
    }

    pub fn positions(&self) -> impl Iterator<Item = &PedestrianPosition> {
        self.clients.values().map(|c| &c.position)
    }

    /// Adds a client or refreshes an existing one (position and sink).
    pub fn register(&mut self, position: PedestrianPosition, sink: S) -> std::result::Result<(), ErrReason> {
        if let Some(existing) = self.clients.get(&position.client_id) {
            if position.timestamp < existing.position.timestamp {
                return Err(ErrReason::Stale);
            }
        }
        self.clients.insert(position.client_id.clone(), Client { position, sink });
        Ok(())
    }

    pub fn update(&mut self, position: PedestrianPosition) -> std::result::Result<(), ErrReason> {
        let client = self.clients.get_mut(&position.client_id).ok_or(ErrReason::UnknownClient)?;
        if position.timestamp < client.position.timestamp {
            return Err(ErrReason::Stale);
        }
        client.position = position;
        Ok(())
    }

    /// Fresh clients inside `area`, sorted by id.
    pub fn members(&self, area: &DangerArea, now: f64, window: f64) -> Vec<&str> {
        self.clients
            .iter()
            .filter(|(_, c)| c.position.is_fresh(now, window) && area.contains(c.position.x, c.position.y))
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum JournalEntry {
    Register(PedestrianPosition, std::result::Result<(), ErrReason>),
    Update(PedestrianPosition, std::result::Result<(), ErrReason>),
    Dispatch { message: WarningMessage, delivered: BTreeSet<String> },
}

struct State<S> {
    registry: Registry<S>,
    journal: Option<Vec<JournalEntry>>,
}

impl<S> State<S> {
    fn log(&mut self, entry: JournalEntry) {
        if let Some(j) = &mut self.journal {
            j.push(entry);
        }
    }
}

pub struct Service<S> {
    plan: DeploymentPlan,
    state: Mutex<State<S>>,
}

impl<S: Sink> Service<S> {
    pub fn new(plan: DeploymentPlan) -> Self {
        Self { plan, state: Mutex::new(State { registry: Registry::default(), journal: None }) }
    }

    /// Like `new`, but records every applied operation in order.
    pub fn with_journal(plan: DeploymentPlan) -> Self {
        Self { plan, state: Mutex::new(State { registry: Registry::default(), journal: Some(Vec::new()) }) }
    }

    pub fn plan(&self) -> &DeploymentPlan {
        &self.plan
    }

    fn lock(&self) -> MutexGuard<'_, State<S>> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn register(&self, position: PedestrianPosition, sink: S) -> std::result::Result<(), ErrReason> {
        let mut state = self.lock();
        let outcome = state.registry.register(position.clone(), sink);
        state.log(JournalEntry::Register(position, outcome));
        outcome
    }

    pub fn update(&self, position: PedestrianPosition) -> std::result::Result<(), ErrReason> {
        let mut state = self.lock();
        let outcome = state.registry.update(position.clone());
        state.log(JournalEntry::Update(position, outcome));
        outcome
    }

    /// Sends a WARN to every fresh member of the processor's area when the
    /// policy allows; returns the clients actually written to.
    pub fn dispatch(&self, processor_id: usize, class: SoundClass, direction: Direction, t: f64) -> Result<BTreeSet<String>> {
        let area = *self.plan.area(processor_id)?;
        let message = WarningMessage { processor_id, sound_class: class, direction, event_time: t };
        let mut state = self.lock();
        let mut delivered = BTreeSet::new();
        if should_warn(class, direction) {
            let line = Message::Warn(message).to_string();
            let window = self.plan.config.freshness_window;
            for id in state.registry.members(&area, t, window) {
                if state.registry.clients[id].sink.deliver(&line) {
                    delivered.insert(id.to_string());
                }
            }
        }
        state.log(JournalEntry::Dispatch { message, delivered: delivered.clone() });
        Ok(delivered)
    }

    pub fn dispatch_result(&self, processor_id: usize, result: &DetectionResult, t: f64) -> Result<BTreeSet<String>> {
        self.dispatch(processor_id, result.sound_type, result.direction, t)
    }

    /// Applies one request line on behalf of a connection and returns the reply.
    pub fn handle_line(&self, line: &str, sink: &S) -> Message {
        let outcome = match decode(line) {
            Ok(Message::Reg { client_id, x, y, t }) => {
                self.register(PedestrianPosition::new(client_id.clone(), x, y, t), sink.clone()).map(|_| client_id)
            }
            Ok(Message::Pos { client_id, x, y, t }) => self.update(PedestrianPosition::new(client_id.clone(), x, y, t)).map(|_| client_id),
            Ok(Message::Evt { processor_id, sound_class, direction, t }) => self
                .dispatch(processor_id, sound_class, direction, t)
                .map(|_| processor_id.to_string())
                .map_err(|_| ErrReason::UnknownProcessor),
            Ok(_) => Err(ErrReason::UnknownVerb),
            Err(e) => Err(e.into()),
        };
        match outcome {
            Ok(id) => Message::Ok(id),
            Err(reason) => Message::Err(reason),
        }
    }

    pub fn client_count(&self) -> usize {
        self.lock().registry.len()
    }

    /// Current positions, sorted by client id.
    pub fn snapshot(&self) -> Vec<PedestrianPosition> {
        self.lock().registry.positions().cloned().collect()
    }

    pub fn journal(&self) -> Vec<JournalEntry> {
        self.lock().journal.clone().unwrap_or_default()
    }
}
