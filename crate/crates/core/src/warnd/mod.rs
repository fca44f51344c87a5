//! Warning dispatch service: pedestrians register and report positions,
//! processors report detections, and risky detections are forwarded as WARN
//! lines to every pedestrian inside the processor's danger area.

pub mod protocol;
pub mod server;
pub mod service;

pub use protocol::{decode, ErrReason, Message, WarningMessage};
pub use server::{spawn, ChannelSink, ServerHandle};
pub use service::{JournalEntry, NullSink, Recorder, Registry, Service, Sink};
